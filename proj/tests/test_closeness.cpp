#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "hyreach/closeness.hpp"

using namespace hyreach;
using hyreach::testing::oracle_arc;
using hyreach::testing::random_arc;

TEST_CASE("an arc is close to itself at any budget") {
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        auto arc = random_arc(rng, 2);
        CHECK(tau_eps_close(arc, arc, 3.0, 1e-9));
        CHECK(closeness_margin(arc, arc, 3.0).eps <= 1e-4 + 1e-12);
        CHECK(graph_distance(arc, arc, 3.0) == 0.0);
    }
}

TEST_CASE("nearby bouncing-ball drops are (3, 0.05)-close") {
    auto fx = bouncing_ball(1.0, 0.5);
    auto a = oracle_arc(fx, {1.0, 0.0}, 3.2);
    auto b = oracle_arc(fx, {1.0 + 1e-3, 0.0}, 3.2);
    CHECK(tau_eps_close(a, b, 3.0, 0.05));
    CHECK_FALSE(tau_eps_close(a, b, 3.0, 1e-6));
}

TEST_CASE("thermostat arcs with distant starts are not (tau, 0.01)-close") {
    auto fx = thermostat(0.7, 0.8, 0.0, 1.0);
    auto a = oracle_arc(fx, {0.7, 0.0}, 1.5);
    auto b = oracle_arc(fx, {1.2, 0.0}, 1.5);
    // jump times differ by ln(1.2/0.7) >> 0.01
    CHECK_FALSE(tau_eps_close(a, b, 1.0, 0.01));
    CHECK(tau_eps_close(a, b, 1.0, 1.0));
}

TEST_CASE("closeness is monotone in eps and symmetric") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_arc(rng, 2);
        auto b = random_arc(rng, 2);
        const double tau = rng.uniform(0.5, 3.0);
        const double e1 = rng.uniform(0.01, 2.0);
        const double e2 = e1 + rng.uniform(0.01, 2.0);
        const bool c1 = tau_eps_close(a, b, tau, e1);
        if (c1) CHECK(tau_eps_close(a, b, tau, e2));
        CHECK(tau_eps_close(a, b, tau, e1) == tau_eps_close(b, a, tau, e1));
    }
}

TEST_CASE("margin is symmetric and monotone for thermostat starts") {
    auto fx = thermostat(0.7, 0.8, 0.0, 1.0);
    auto target = oracle_arc(fx, {0.7, 0.0}, 2.0);
    double prev = kInf;
    for (int i = 1; i <= 10; ++i) {
        auto a = oracle_arc(fx, {0.7 + 1.0 / (10.0 * i), 0.0}, 2.0);
        auto m = closeness_margin(target, a, 1.5);
        auto m2 = closeness_margin(a, target, 1.5);
        CHECK(m.eps == Catch::Approx(m2.eps).margin(1e-12));
        CHECK(m.eps <= prev + m.grid);
        prev = m.eps;
    }
    // margins actually shrink toward the grid floor
    auto tight = closeness_margin(target, oracle_arc(fx, {0.7 + 0.001, 0.0}, 2.0), 1.5);
    CHECK(tight.eps < 0.02);
}

TEST_CASE("graph distance sees constant offsets exactly") {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        auto a = random_arc(rng, 2);
        const double c = rng.uniform(0.1, 2.0);
        HybridArc b(2);
        for (auto p : a.pieces()) {
            for (auto& s : p.states) s[0] += c;
            b.append_piece(std::move(p));
        }
        CHECK(graph_distance(a, b, 5.0) == Catch::Approx(c).margin(1e-12));
    }
}

TEST_CASE("graph distance is a pseudometric on sampled graphs") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_arc(rng, 1);
        auto b = random_arc(rng, 1);
        auto c = random_arc(rng, 1);
        const double tau = 3.0;
        const double dab = graph_distance(a, b, tau);
        const double dba = graph_distance(b, a, tau);
        CHECK(dab == dba);
        const double dac = graph_distance(a, c, tau);
        const double dcb = graph_distance(c, b, tau);
        CHECK(dab <= dac + dcb + 1e-12);
    }
}

TEST_CASE("thermostat sequence converges graphically to the nominal arc") {
    auto fx = thermostat(0.7, 0.8, 0.0, 1.0);
    auto target = oracle_arc(fx, {0.7, 0.0}, 2.0);
    std::vector<HybridArc> arcs;
    std::vector<double> gds;
    for (int i = 1; i <= 8; ++i) {
        arcs.push_back(oracle_arc(fx, {0.7 + 0.2 / std::pow(2.0, i), 0.0}, 2.0));
        gds.push_back(graph_distance(arcs.back(), target, 1.5));
    }
    for (std::size_t i = 1; i < gds.size(); ++i) CHECK(gds[i] <= gds[i - 1] + 1e-9);
    CHECK(gds.back() < 0.01);

    auto rep = sequence_diagnostics(arcs, target, 1.5, 1e-2);
    CHECK(rep.consistent);
    REQUIRE(rep.per_jump.size() >= 2);
    // entry points of interval 1 converge to (0, (z_min, 1))
    CHECK(rep.per_jump[1].time_gaps.back() < 1e-2);
    CHECK(rep.per_jump[1].state_gaps.back() < 1e-2);
}

TEST_CASE("constant sequence has zero gaps") {
    auto fx = bouncing_ball(1.0, 0.5);
    auto target = oracle_arc(fx, {1.0, 0.0}, 3.0);
    std::vector<HybridArc> arcs(4, target);
    auto rep = sequence_diagnostics(arcs, target, 3.0);
    CHECK(rep.consistent);
    for (const auto& pj : rep.per_jump) {
        for (double g : pj.time_gaps) CHECK(g == 0.0);
        for (double g : pj.state_gaps) CHECK(g == 0.0);
    }
}

TEST_CASE("bouncing-ball first-jump entry times converge to sqrt(2)") {
    auto fx = bouncing_ball(1.0, 0.5);
    auto target = oracle_arc(fx, {1.0, 0.0}, 3.0);
    std::vector<HybridArc> arcs;
    for (int i = 1; i <= 6; ++i) {
        const double d = 0.5 / std::pow(2.0, i);
        arcs.push_back(oracle_arc(fx, {1.0 + (i % 2 ? d : -d), 0.0}, 3.0));
    }
    auto rep = sequence_diagnostics(arcs, target, 2.5, 5e-2);
    REQUIRE(rep.per_jump.size() >= 2);
    const auto& pj1 = rep.per_jump[1];
    CHECK(std::fabs(pj1.entry_times.back() - std::sqrt(2.0)) < 1e-2);
    CHECK(rep.consistent);
}
