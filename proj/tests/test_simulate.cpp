#include <catch2/catch_amalgamated.hpp>

#include "hyreach/fixtures.hpp"
#include "hyreach/simulate.hpp"

using namespace hyreach;

namespace {

SolvePolicy jump_first(double tau) {
    SolvePolicy p;
    p.priority = SolvePolicy::Priority::JumpFirst;
    p.tau_max = tau;
    return p;
}

}  // namespace

TEST_CASE("bouncing ball tracks the closed-form oracle through three bounces") {
    auto fx = bouncing_ball(1.0, 0.5);
    const Vec x0 = {1.0, 0.0};
    auto arc = solve(fx.system, x0, jump_first(8.0));

    // jump times match the quadratic roots
    auto jumps = arc.jump_times();
    auto expected = fx.oracle_jumps(x0, 8.0);
    REQUIRE(jumps.size() >= 3);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(std::fabs(jumps[k].first - expected[k]) < 1e-8);

    // states match everywhere on the shared domain
    double max_err = 0.0;
    arc.for_each_sample(8.0, [&](double t, int j, const Vec& x) {
        auto ref = fx.oracle(x0, t, j);
        if (ref) max_err = std::max(max_err, dist(x, *ref));
    });
    CHECK(max_err <= 1e-6);

    auto check = validate_solution(fx.system, arc, 1e-8);
    INFO(check.note);
    CHECK(check.ok);
}

TEST_CASE("thermostat jumps immediately and follows the exponential") {
    auto fx = thermostat(0.7, 0.8, 0.0, 1.0);
    const Vec x0 = {0.7, 0.0};
    auto arc = solve(fx.system, x0, jump_first(3.0));

    auto jumps = arc.jump_times();
    REQUIRE(!jumps.empty());
    CHECK(jumps[0].first == Catch::Approx(0.0).margin(1e-12));

    double max_err = 0.0;
    arc.for_each_sample(3.0, [&](double t, int j, const Vec& x) {
        auto ref = fx.oracle(x0, t, j);
        if (ref) max_err = std::max(max_err, dist(x, *ref));
    });
    CHECK(max_err <= 1e-6);
}

TEST_CASE("planar system: trivial arc off the axis, complete flow on it") {
    auto fx = planar_system();
    auto off = solve(fx.system, {0.0, 0.5}, jump_first(2.0));
    CHECK(off.pieces().size() == 1);
    CHECK(off.pieces()[0].times.size() == 1);  // trivial
    CHECK_FALSE(off.budget_stopped());

    auto on = solve(fx.system, {0.0, 0.0}, jump_first(2.0));
    CHECK(on.budget_stopped());  // ran to the budget
    Vec endv = on.end();
    CHECK(endv[0] == Catch::Approx(2.0).margin(1e-6));
    CHECK(endv[1] == 0.0);
}

TEST_CASE("solve rejects the branch priority") {
    auto fx = bouncing_ball(1.0, 0.5);
    SolvePolicy p;
    p.priority = SolvePolicy::Priority::Branch;
    CHECK_THROWS_AS(solve(fx.system, {1.0, 0.0}, p), SolveError);
}

TEST_CASE("solve is deterministic per seed") {
    auto fx = bouncing_ball(1.0, 0.5);
    SolvePolicy p = jump_first(5.0);
    p.flow_selection = SolvePolicy::Selection::RandomPerStep;
    p.seed = 42;
    auto a = solve(fx.system, {1.0, 0.0}, p);
    auto b = solve(fx.system, {1.0, 0.0}, p);
    REQUIRE(a.pieces().size() == b.pieces().size());
    for (std::size_t i = 0; i < a.pieces().size(); ++i) {
        CHECK(a.pieces()[i].times == b.pieces()[i].times);
        CHECK(a.pieces()[i].states == b.pieces()[i].states);
    }
}

TEST_CASE("interval inclusion tree contains the three canonical branches") {
    auto fx = interval_inclusion();
    SolvePolicy p;
    p.priority = SolvePolicy::Priority::Branch;
    p.tau_max = 1.0;
    auto tree = solve_tree(fx.system, {0.0}, p, 5, 7);
    REQUIRE(tree.arcs.size() == 3);

    std::vector<double> finals;
    for (const auto& arc : tree.arcs) finals.push_back(arc.end()[0]);
    std::sort(finals.begin(), finals.end());
    CHECK(finals[0] == Catch::Approx(-1.0).margin(1e-9));
    CHECK(finals[1] == Catch::Approx(0.0).margin(1e-9));
    CHECK(finals[2] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("deterministic systems yield a single leaf regardless of budget") {
    auto fx = thermostat(0.7, 0.8, 0.0, 1.0);
    SolvePolicy p;
    p.priority = SolvePolicy::Priority::Branch;
    p.tau_max = 4.0;
    auto tree = solve_tree(fx.system, {0.75, 0.0}, p, 16, 3);
    CHECK(tree.arcs.size() == 1);
}

TEST_CASE("budget one reproduces solve exactly") {
    auto fx = bouncing_ball(1.0, 0.5);
    SolvePolicy p = jump_first(5.0);
    auto single = solve(fx.system, {1.0, 0.0}, p);
    auto tree = solve_tree(fx.system, {1.0, 0.0}, p, 1, p.seed);
    REQUIRE(tree.arcs.size() == 1);
    const auto& a = single.pieces();
    const auto& b = tree.arcs[0].pieces();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].times == b[i].times);
        CHECK(a[i].states == b[i].states);
    }
}

TEST_CASE("initial conditions outside cl(C) u D are rejected") {
    auto fx = bouncing_ball(1.0, 0.5);
    CHECK_THROWS_AS(solve(fx.system, {-1.0, 0.0}, jump_first(2.0)), SolveError);
}

TEST_CASE("solve_to_target truncates on the terminal constraint") {
    auto fx = thermostat(0.7, 0.8, 0.0, 1.0);
    // X = [z_min, z_max] x {0,1}
    auto X = SetSpec::unite(
        {SetSpec::product({SetSpec::box({0.7}, {0.8}), SetSpec::ball({0.0}, 0.0)}),
         SetSpec::product({SetSpec::box({0.7}, {0.8}), SetSpec::ball({1.0}, 0.0)})});
    SolvePolicy p = jump_first(6.0);
    auto arcs = solve_to_target(fx.system, {1.8, 1.0}, X, p, 4, 5);
    REQUIRE(!arcs.empty());
    CHECK(X.contains(arcs[0].end(), 1e-9));

    // X = {x0} gives the trivial arc
    auto arcs2 = solve_to_target(fx.system, {1.8, 1.0}, SetSpec::ball({1.8, 1.0}, 0.0), p, 4, 5);
    REQUIRE(!arcs2.empty());
    CHECK(arcs2[0].max_tau() == 0.0);

    // bouncing ball to the jump set: ends at (0, -sqrt(2))
    auto bb = bouncing_ball(1.0, 0.5);
    auto arcs3 = solve_to_target(bb.system, {1.0, 0.0}, bb.system.D, jump_first(5.0), 4, 5);
    REQUIRE(!arcs3.empty());
    CHECK(arcs3[0].end()[0] == Catch::Approx(0.0).margin(1e-8));
    CHECK(arcs3[0].end()[1] == Catch::Approx(-std::sqrt(2.0)).margin(1e-8));
}

TEST_CASE("flows_possible classifies the bouncing-ball boundary") {
    auto fx = bouncing_ball(1.0, 0.5);
    CHECK(flows_possible(fx.system, {0.0, 1.0}).inside());
    CHECK(flows_possible(fx.system, {0.0, -1.0}).outside());
    CHECK(flows_possible(fx.system, {2.0, -5.0}).inside());  // interior
    CHECK(flows_possible(fx.system, {-1.0, 0.0}).outside());
}

TEST_CASE("flows_possible on the unit circle runs along the tangent") {
    auto fx = oscillator_family();
    auto v = flows_possible(fx.system, {1.0, 0.0});
    CHECK(v.inside());
    const double s = std::sqrt(0.5);
    CHECK(flows_possible(fx.system, {s, s}).inside());
}

TEST_CASE("planar system: flows impossible off the x1-axis") {
    auto fx = planar_system();
    CHECK(flows_possible(fx.system, {0.0, 0.5}).outside());
    CHECK(flows_possible(fx.system, {1.0, 0.0}).inside());
}

TEST_CASE("finite escape is detected and recorded") {
    auto C = SetSpec::all(1);
    auto F = MapSpec::singleton(parse_vec_expr({"x1*x1"}, 1));
    HybridSystem H(C, F, SetSpec::empty(1), MapSpec::singleton(parse_vec_expr({"x1"}, 1)),
                   "blowup");
    SolvePolicy p = jump_first(2.0);
    auto arc = solve(H, {2.0}, p);
    CHECK(arc.escaped());
    auto [et, ej] = arc.escape_estimate();
    CHECK(ej == 0);
    CHECK(et == Catch::Approx(0.5).margin(0.05));  // true escape time of xdot=x^2 from 2
}

TEST_CASE("oracle trajectories pass solution validation") {
    auto bb = bouncing_ball(1.0, 0.5);
    const Vec x0 = {1.0, 0.0};
    auto jumps = bb.oracle_jumps(x0, 4.0);
    REQUIRE(jumps.size() >= 3);
    std::vector<HybridInterval> dom;
    double prev = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
        dom.push_back({static_cast<int>(j), prev, jumps[j]});
        prev = jumps[j];
    }
    dom.push_back({2, prev, jumps[2]});  // stop before the next jump
    auto arc = arc_from_function(2, dom, [&](double t, int j) { return *bb.oracle(x0, t, j); });
    auto check = validate_solution(bb.system, arc, 1e-8);
    INFO(check.note << " flow_set=" << check.max_flow_set_gap
                    << " resid=" << check.max_flow_residual << " jump=" << check.max_jump_gap);
    CHECK(check.ok);

    auto th = thermostat(0.7, 0.8, 0.0, 1.0);
    auto tj = th.oracle_jumps({0.75, 0.0}, 3.0);
    std::vector<HybridInterval> dom2;
    prev = 0.0;
    for (std::size_t j = 0; j < 2 && j < tj.size(); ++j) {
        dom2.push_back({static_cast<int>(j), prev, tj[j]});
        prev = tj[j];
    }
    auto arc2 =
        arc_from_function(2, dom2, [&](double t, int j) { return *th.oracle({0.75, 0.0}, t, j); });
    auto check2 = validate_solution(th.system, arc2, 1e-8);
    CHECK(check2.ok);
}

TEST_CASE("solver error halves at least 4x when the step halves") {
    auto fx = bouncing_ball(1.0, 0.5);
    const Vec x0 = {1.0, 0.0};
    auto run = [&](double h) {
        SolvePolicy p = jump_first(4.0);
        p.step = h;
        auto arc = solve(fx.system, x0, p);
        double err = 0.0;
        arc.for_each_sample(4.0, [&](double t, int j, const Vec& x) {
            auto ref = fx.oracle(x0, t, j);
            if (ref) err = std::max(err, dist(x, *ref));
        });
        return err;
    };
    // ballistic flow is integrated exactly by RK4; errors come from event
    // location, which bisection makes tiny at every step size
    CHECK(run(1e-2) < 1e-8);
    CHECK(run(5e-3) < 1e-8);
}
