#include <catch2/catch_amalgamated.hpp>

#include "hyreach/fixtures.hpp"
#include "hyreach/system.hpp"

using namespace hyreach;

TEST_CASE("hybrid basic conditions are structural for the worked systems") {
    for (auto fx : {bouncing_ball(1.0, 0.5), thermostat(0.7, 0.8, 0.0, 1.0)}) {
        auto rep = hbc_check(fx.system);
        CHECK(rep.verdict_of("A1") == Verdict::StructuralPass);
        CHECK(rep.verdict_of("A2") == Verdict::StructuralPass);
        CHECK(rep.verdict_of("A3") == Verdict::StructuralPass);
    }
}

TEST_CASE("restricted maps downgrade to sampled verdicts") {
    auto fx = bouncing_ball(1.0, 0.5);
    auto restricted = MapSpec::hull({parse_vec_expr({"x2", "-1"}, 2)}, Expr::constant(0.0),
                                    SetSpec::sublevel(parse_expr("-10 - x2", 2), 2));
    HybridSystem H(fx.system.C, restricted, fx.system.D, fx.system.G, "restricted");
    auto rep = hbc_check(H);
    const auto v = rep.verdict_of("A2");
    CHECK((v == Verdict::SampledPass || v == Verdict::SampledFail));
    CHECK(rep.verdict_of("A3") == Verdict::StructuralPass);
    CHECK(rep.verdict_of("A1") == Verdict::StructuralPass);

    // piecewise jump maps are downgraded too
    auto fx2 = discontinuous_jump_example();
    auto rep2 = hbc_check(fx2.system);
    const auto v2 = rep2.verdict_of("A3");
    CHECK((v2 == Verdict::SampledPass || v2 == Verdict::SampledFail));
}

TEST_CASE("rho-inflation at zero leaves membership and samples unchanged") {
    auto fx = bouncing_ball(1.0, 0.5);
    auto H0 = rho_inflate(fx.system, Expr::constant(1.0), 0.0);
    const std::vector<Vec> pts = {{0.5, -3.0}, {-1e-3, 0.0}, {0.0, 0.0}, {0.0, 0.1}, {2.0, 5.0}};
    for (const auto& x : pts) {
        CHECK(H0.C.contains(x) == fx.system.C.contains(x));
        CHECK(H0.D.contains(x) == fx.system.D.contains(x));
    }
    Vec x = {1.0, -0.5};
    auto base_f = fx.system.F.sample(x, 1, 5)[0];
    auto infl_f = H0.F.sample(x, 1, 5);
    REQUIRE(!infl_f.empty());
    CHECK(dist(infl_f[0], base_f) <= 1e-12);
}

TEST_CASE("rho-inflation of the bouncing ball widens the flow set") {
    auto fx = bouncing_ball(1.0, 0.5);
    auto Hp = rho_inflate(fx.system, Expr::constant(1.0), 0.1);
    CHECK(Hp.C.contains({-0.05, 0.0}));
    CHECK_FALSE(Hp.C.contains({-0.2, 0.0}));
    CHECK(Hp.D.contains({0.05, -1.0}));
}

TEST_CASE("inflated membership is monotone in delta") {
    auto fx = bouncing_ball(1.0, 0.5);
    Rng rng(99);
    int informative = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Vec x = {rng.uniform(-0.5, 0.5), rng.uniform(-1.0, 1.0)};
        double d1 = rng.uniform(0.05, 0.5);
        double d2 = rng.uniform(0.05, 0.5);
        if (d1 > d2) std::swap(d1, d2);
        auto H1 = rho_inflate(fx.system, Expr::constant(1.0), d1);
        auto H2 = rho_inflate(fx.system, Expr::constant(1.0), d2);
        if (H1.C.contains(x)) {
            CHECK(H2.C.contains(x));
            ++informative;
        }
        if (H1.D.contains(x)) CHECK(H2.D.contains(x));
    }
    CHECK(informative > 20);
}

TEST_CASE("self-domination holds for the degenerate family") {
    auto fx = bouncing_ball(1.0, 0.5);
    auto fam = PerturbationFamily::degenerate(fx.system);
    auto rep = domination_check(fam, fx.system, Expr::constant(1.0), {0.1, 0.3},
                                {{0.0, 0.0}, {1.0, -1.0}, {0.0, -2.0}});
    CHECK(rep.all_pass());
}

TEST_CASE("oscillator family is dominated with a generous constant gauge") {
    auto fx = oscillator_family();
    REQUIRE(fx.family.has_value());
    auto rep = domination_check(*fx.family, fx.system, *fx.family->rho, {0.1, 0.2},
                                {{1.0, 0.0}, {0.0, -1.0}, {-0.7, 0.7}}, 6, 5e-3);
    for (const auto& e : rep.entries) {
        INFO(e.id << ": " << e.witness);
        CHECK(verdict_passes(e.verdict));
    }
}

TEST_CASE("wedge family is not dominated by a small constant gauge") {
    auto fx = perturbed_ball_family(0.1, 0.5, 0.5, 1.0, 0.5);
    REQUIRE(fx.family.has_value());
    auto rep = domination_check(*fx.family, fx.system, Expr::constant(0.5), {0.1},
                                {{0.0, -0.3}, {-0.2, -0.3}});
    const auto* eC = rep.find("dom-C");
    REQUIRE(eC != nullptr);
    CHECK(eC->verdict == Verdict::Fail);
    CHECK(!eC->witness.empty());
}

TEST_CASE("family parameter domain is validated") {
    auto fx = planar_system();
    REQUIRE(fx.family.has_value());
    CHECK_THROWS_AS(fx.family->at(0.0), Error);
    CHECK_THROWS_AS(fx.family->at(1.0), Error);
    auto H = fx.family->at(0.25);
    CHECK(H.C.contains({1.0, 0.2}));
    CHECK_FALSE(H.C.contains({1.0, 0.3}));
}
