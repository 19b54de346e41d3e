#include <catch2/catch_amalgamated.hpp>

#include "hyreach/maps.hpp"

using namespace hyreach;

namespace {

MapSpec bouncing_ball_G(double lambda) {
    return MapSpec::singleton(
        parse_vec_expr({"0", "-lambda*x2"}, 2, {{"lambda", lambda}}));
}

}  // namespace

TEST_CASE("singleton jump map evaluates exactly") {
    auto G = bouncing_ball_G(0.5);
    auto pts = G.sample({0.0, -2.0}, 1, 99);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0][0] == 0.0);
    CHECK(pts[0][1] == 1.0);

    // radius 0, k=1: the single vertex regardless of n and seed
    auto many = G.sample({0.0, -2.0}, 5, 7);
    for (const auto& p : many) CHECK(p == pts[0]);
}

TEST_CASE("interval map samples include both vertices and stay inside") {
    auto M = MapSpec::hull({parse_vec_expr({"-1"}, 1), parse_vec_expr({"1"}, 1)},
                           Expr::constant(0.0));
    auto pts = M.sample({0.0}, 3, 123);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0][0] == -1.0);
    CHECK(pts[1][0] == 1.0);
    for (const auto& p : pts) {
        CHECK(p[0] >= -1.0 - 1e-12);
        CHECK(p[0] <= 1.0 + 1e-12);
    }

    // sampling is deterministic per seed
    CHECK(M.sample({0.0}, 6, 5) == M.sample({0.0}, 6, 5));
    CHECK(M.sample({0.0}, 6, 5) != M.sample({0.0}, 6, 6));
}

TEST_CASE("n below the vertex count is rejected") {
    auto M = MapSpec::hull({parse_vec_expr({"-1"}, 1), parse_vec_expr({"1"}, 1)},
                           Expr::constant(0.0));
    CHECK_THROWS_AS(M.sample({0.0}, 1, 1), Error);
}

TEST_CASE("hull distance matches brute force on random hulls") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 1 + rng.index(5);
        const std::size_t d = 1 + rng.index(3);
        std::vector<Vec> P;
        for (std::size_t i = 0; i < k; ++i) {
            Vec v(d);
            for (auto& c : v) c = rng.uniform(-2, 2);
            P.push_back(std::move(v));
        }
        Vec y(d);
        for (auto& c : y) c = rng.uniform(-3, 3);

        // brute force over a dense simplex grid
        double brute = kInf;
        for (int s = 0; s < 20000; ++s) {
            Vec lam = rng.simplex(k);
            Vec z(d, 0.0);
            for (std::size_t i = 0; i < k; ++i) z = axpy(std::move(z), lam[i], P[i]);
            brute = std::min(brute, dist(z, y));
        }
        for (std::size_t i = 0; i < k; ++i) brute = std::min(brute, dist(P[i], y));

        const double hd = hull_distance(P, y);
        CHECK(hd <= brute + 1e-9);
        CHECK(hd >= brute - 0.05);  // brute force is itself an upper bound
    }
}

TEST_CASE("sampled points always belong to the declared map value") {
    auto M = MapSpec::hull({parse_vec_expr({"x2", "-1"}, 2), parse_vec_expr({"x2 + 1", "1"}, 2)},
                           parse_expr("0.25", 2));
    Vec x = {0.3, -0.7};
    auto res = M.sample_detailed(x, 16, 31);
    for (const auto& p : res.points) {
        CHECK(M.member_gap(x, p.y) <= 1e-9);
        // replay from the recorded barycentric data
        Vec z(2, 0.0);
        if (!p.lambda.empty()) {
            z = axpy(std::move(z), p.lambda[0], M.vertices()[0].eval(x));
            z = axpy(std::move(z), p.lambda[1], M.vertices()[1].eval(x));
            z = axpy(std::move(z), p.radial, p.unit_dir);
            CHECK(dist(z, p.y) <= 1e-12);
        }
        CHECK(p.radial <= 0.25 + 1e-12);
    }
    CHECK(M.member_gap(x, {100.0, 100.0}) > 1.0);
}

TEST_CASE("restriction filters samples and may empty the result") {
    auto restrict_pos = SetSpec::sublevel(parse_expr("-x1", 2), 2);
    auto M = MapSpec::hull({parse_vec_expr({"-1", "0"}, 2), parse_vec_expr({"1", "0"}, 2)},
                           Expr::constant(0.0), restrict_pos);
    auto res = M.sample_detailed({0.0, 0.0}, 8, 3);
    CHECK_FALSE(res.filtered_empty);
    for (const auto& p : res.points) CHECK(p.y[0] >= -1e-9);

    auto impossible = SetSpec::sublevel(parse_expr("2 - x1", 2), 2);  // x1 >= 2
    auto M2 = MapSpec::hull({parse_vec_expr({"-1", "0"}, 2), parse_vec_expr({"1", "0"}, 2)},
                            Expr::constant(0.0), impossible);
    auto res2 = M2.sample_detailed({0.0, 0.0}, 8, 3);
    CHECK(res2.filtered_empty);
    CHECK(res2.points.empty());
}

TEST_CASE("piecewise maps dispatch on guards") {
    // G(x) = x for x <= 0, 1 for x > 0 on D = [-1/2, 1/2]
    auto left = MapSpec::singleton(parse_vec_expr({"x1"}, 1));
    auto right = MapSpec::singleton(parse_vec_expr({"1"}, 1));
    auto G = MapSpec::piecewise({{SetSpec::sublevel(parse_expr("x1", 1), 1), left},
                                 {SetSpec::all(1), right}});
    CHECK(G.sample({-0.3}, 1, 1)[0][0] == -0.3);
    CHECK(G.sample({0.0}, 1, 1)[0][0] == 0.0);
    CHECK(G.sample({0.3}, 1, 1)[0][0] == 1.0);
    CHECK_FALSE(G.is_structural());
}

TEST_CASE("inner-sc probe: continuous map is consistent") {
    auto G = bouncing_ball_G(0.5);
    auto D = SetSpec::intersection(
        {SetSpec::level(parse_expr("x1", 2), 2), SetSpec::sublevel(parse_expr("x2", 2), 2)});
    auto rep = inner_sc_probe(G, {0.0, -2.0}, D, ProbeSchedule::defaults(), 5);
    CHECK(rep.consistent);
    REQUIRE(!rep.levels.empty());
    // gaps bounded by L*r_k with L = lambda
    for (const auto& l : rep.levels)
        if (!l.vacuous) CHECK(l.worst_gap <= 0.5 * l.r * 2.5 + 1e-9);
}

TEST_CASE("inner-sc probe: discontinuous jump map fails at the break point") {
    auto left = MapSpec::singleton(parse_vec_expr({"x1"}, 1));
    auto right = MapSpec::singleton(parse_vec_expr({"1"}, 1));
    auto G = MapSpec::piecewise({{SetSpec::sublevel(parse_expr("x1", 1), 1), left},
                                 {SetSpec::all(1), right}});
    auto X = SetSpec::box({-0.5}, {0.5});
    auto rep = inner_sc_probe(G, {0.0}, X, ProbeSchedule::defaults(), 5);
    CHECK_FALSE(rep.consistent);
    CHECK(rep.levels.back().worst_gap > 0.5);
}

TEST_CASE("inner-sc probe: isolated point is consistent") {
    auto G = bouncing_ball_G(0.5);
    auto X = SetSpec::ball({0.0, -2.0}, 0.0);
    auto rep = inner_sc_probe(G, {0.0, -2.0}, X, ProbeSchedule::defaults(), 5);
    CHECK(rep.consistent);
    for (const auto& l : rep.levels)
        if (!l.vacuous) CHECK(l.worst_gap == 0.0);
}

TEST_CASE("inflated flow map covers the base and stays within the budget") {
    auto C = SetSpec::sublevel(parse_expr("-x1", 2), 2);
    auto F = MapSpec::singleton(parse_vec_expr({"x2", "-1"}, 2, {}));
    auto Fi = MapSpec::inflated_flow(F, C, Expr::constant(0.1));

    Vec x = {1.0, -0.5};
    auto pts = Fi.sample(x, 12, 17);
    REQUIRE(!pts.empty());
    const Vec nominal = {-0.5, -1.0};
    for (const auto& p : pts) {
        // arguments range over x + 0.1B, so f1 = x2 can move by 0.1, plus 0.1 ball
        CHECK(dist(p, nominal) <= 0.1 + 0.1 + 1e-9);
    }
    CHECK(Fi.member_gap(x, nominal) <= 1e-9);

    // far outside C + ball: empty value
    auto far = Fi.sample_detailed({-5.0, 0.0}, 6, 17);
    CHECK(far.filtered_empty);
}

TEST_CASE("inflated jump map is a union of balls around base images") {
    auto D = SetSpec::intersection(
        {SetSpec::level(parse_expr("x1", 2), 2), SetSpec::sublevel(parse_expr("x2", 2), 2)});
    auto G = bouncing_ball_G(0.5);
    auto Gi = MapSpec::inflated_jump(G, D, Expr::constant(0.1));

    Vec x = {0.0, -2.0};
    auto pts = Gi.sample(x, 10, 23);
    REQUIRE(!pts.empty());
    for (const auto& p : pts) {
        // base images are (0, lambda*|x2'|) for x2' in [-2.1, -1.9]-ish
        CHECK(p[1] >= 1.0 - 0.1 * 0.5 - 0.1 - 1e-6);
        CHECK(p[1] <= 1.0 + 0.1 * 0.5 + 0.1 + 1e-6);
        CHECK(std::fabs(p[0]) <= 0.2 + 1e-6);
    }
    CHECK(Gi.member_gap(x, {0.0, 1.0}) <= 1e-9);
}
