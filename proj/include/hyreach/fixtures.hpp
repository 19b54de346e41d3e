#ifndef HYREACH_FIXTURES_HPP
#define HYREACH_FIXTURES_HPP

#include "system.hpp"

namespace hyreach {

// Worked-example builder with its closed-form oracle where one exists. The
// oracle returns the state at hybrid time (t,j) from x0, or nullopt when
// (t,j) is outside the solution's domain.
struct ExampleFixture {
    ExampleFixture(std::string n, HybridSystem sys)
        : name(std::move(n)), system(std::move(sys)) {}

    std::string name;
    HybridSystem system;
    std::optional<PerturbationFamily> family;
    std::map<std::string, double> params;
    bool unique_solutions = false;

    std::function<std::optional<Vec>(const Vec&, double, int)> oracle;
    // jump times of the (oracle) solution from x0 up to ordinary time cap
    std::function<std::vector<double>(const Vec&, double)> oracle_jumps;
    // oracle for the perturbed family flow, when closed form exists
    std::function<Vec(const Vec&, double)> family_flow_oracle;

    Vec default_x0;
    double roi_radius = 2.0;  // region of interest around default_x0 for samplers
    std::map<std::string, std::string> expected;  // documented expected checker verdicts
};

// Ball bouncing on a flat surface: height/velocity state, ballistic flight,
// restitution lambda at impact.
inline ExampleFixture bouncing_ball(double gamma, double lambda) {
    if (!(gamma > 0.0)) throw Error("bouncing_ball: gamma must be positive");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("bouncing_ball: lambda must lie in [0,1]");
    const std::map<std::string, double> sym = {{"gamma", gamma}, {"lambda", lambda}};

    auto C = SetSpec::sublevel(parse_expr("-x1", 2), 2);
    auto D = SetSpec::intersection(
        {SetSpec::level(parse_expr("x1", 2), 2), SetSpec::sublevel(parse_expr("x2", 2), 2)});
    auto F = MapSpec::singleton(parse_vec_expr({"x2", "-gamma"}, 2, sym));
    auto G = MapSpec::singleton(parse_vec_expr({"0", "-lambda*x2"}, 2, sym));

    ExampleFixture fx("bouncing-ball", HybridSystem(C, F, D, G, "bouncing-ball"));
    fx.params = {{"gamma", gamma}, {"lambda", lambda}};
    fx.unique_solutions = true;
    fx.default_x0 = {1.0, 0.0};

    // flight segments: jump time from (h,v) is the nonnegative quadratic root
    auto next_jump = [gamma](double h, double v) {
        const double disc = v * v + 2.0 * gamma * std::max(h, 0.0);
        return (v + std::sqrt(std::max(disc, 0.0))) / gamma;
    };
    fx.oracle = [gamma, lambda, next_jump](const Vec& x0, double t, int j) -> std::optional<Vec> {
        double h = x0[0], v = x0[1], t_seg = 0.0;
        for (int k = 0; k < j; ++k) {
            const double tau = next_jump(h, v);
            t_seg += tau;
            const double v_impact = v - gamma * tau;
            h = 0.0;
            v = -lambda * v_impact;
        }
        const double tau = next_jump(h, v);
        const double s = t - t_seg;
        if (s < -1e-12 || s > tau + 1e-12) return std::nullopt;
        const double sc = std::min(std::max(s, 0.0), tau);
        return Vec{h + v * sc - 0.5 * gamma * sc * sc, v - gamma * sc};
    };
    fx.oracle_jumps = [gamma, lambda, next_jump](const Vec& x0, double t_cap) {
        std::vector<double> out;
        double h = x0[0], v = x0[1], t = 0.0;
        for (int k = 0; k < 64; ++k) {
            const double tau = next_jump(h, v);
            t += tau;
            if (t > t_cap) break;
            out.push_back(t);
            const double v_impact = v - gamma * tau;
            h = 0.0;
            v = -lambda * v_impact;
            if (std::fabs(v) < 1e-15 && k > 0) break;
        }
        return out;
    };
    fx.expected = {{"A1", "pass"}, {"A2", "pass"}, {"A3", "pass"},
                   {"B1", "pass"}, {"B2", "pass"}, {"B5", "pass"}, {"B6", "pass"},
                   {"V2@origin", "fail"}, {"V2@(0,1)", "pass"}};
    return fx;
}

// Thermostat: room temperature z with heater state q; exponential flow toward
// z_o + q*z_delta, switch at z_min/z_max. Requires
// z_o < z_min < z_max < z_o + z_delta.
inline ExampleFixture thermostat(double z_min, double z_max, double z_o, double z_delta) {
    if (!(z_o < z_min && z_min < z_max && z_max < z_o + z_delta))
        throw Error("thermostat: parameters must satisfy z_o < z_min < z_max < z_o + z_delta");
    const std::map<std::string, double> sym = {
        {"zmin", z_min}, {"zmax", z_max}, {"zo", z_o}, {"zdelta", z_delta}};

    auto off = [&](const char* g) {
        return SetSpec::intersection({SetSpec::sublevel(parse_expr(g, 2, sym), 2),
                                      SetSpec::level(parse_expr("x2", 2), 2)});
    };
    auto on = [&](const char* g) {
        return SetSpec::intersection({SetSpec::sublevel(parse_expr(g, 2, sym), 2),
                                      SetSpec::level(parse_expr("x2 - 1", 2), 2)});
    };
    auto C = SetSpec::unite({off("zmin - x1"), on("x1 - zmax")});
    auto D = SetSpec::unite({off("x1 - zmin"), on("zmax - x1")});
    auto F = MapSpec::singleton(parse_vec_expr({"-x1 + zo + x2*zdelta", "0"}, 2, sym));
    auto G = MapSpec::singleton(parse_vec_expr({"x1", "1 - x2"}, 2, sym));

    ExampleFixture fx("thermostat", HybridSystem(C, F, D, G, "thermostat"));
    fx.params = {{"z_min", z_min}, {"z_max", z_max}, {"z_o", z_o}, {"z_delta", z_delta}};
    fx.unique_solutions = true;
    fx.default_x0 = {z_min, 0.0};

    // time in mode q from temperature z until the switching threshold
    auto dwell = [=](double z, int q) {
        const double target = z_o + q * z_delta;
        const double threshold = q == 0 ? z_min : z_max;
        if (q == 0 && z <= z_min) return 0.0;
        if (q == 1 && z >= z_max) return 0.0;
        return std::log((z - target) / (threshold - target));
    };
    fx.oracle = [=](const Vec& x0, double t, int j) -> std::optional<Vec> {
        double z = x0[0];
        int q = static_cast<int>(std::lround(x0[1]));
        double t_seg = 0.0;
        for (int k = 0; k < j; ++k) {
            const double tau = dwell(z, q);
            t_seg += tau;
            // temperature is continuous across the jump; it sits on the
            // threshold unless the jump was immediate
            if (tau > 0.0) z = q == 0 ? z_min : z_max;
            q = 1 - q;
        }
        const double tau = dwell(z, q);
        const double s = t - t_seg;
        if (s < -1e-12 || s > tau + 1e-12) return std::nullopt;
        const double sc = std::min(std::max(s, 0.0), tau);
        const double target = z_o + q * z_delta;
        return Vec{target + (z - target) * std::exp(-sc), static_cast<double>(q)};
    };
    fx.oracle_jumps = [=](const Vec& x0, double t_cap) {
        std::vector<double> out;
        double z = x0[0];
        int q = static_cast<int>(std::lround(x0[1]));
        double t = 0.0;
        for (int k = 0; k < 64; ++k) {
            const double tau = dwell(z, q);
            t += tau;
            if (t > t_cap) break;
            out.push_back(t);
            const double target = z_o + q * z_delta;
            z = target + (z - target) * std::exp(-tau);
            q = 1 - q;
        }
        return out;
    };
    fx.expected = {{"A1", "pass"}, {"A2", "pass"}, {"A3", "pass"},
                   {"nominal-iwp", "consistent"}};
    return fx;
}

// Planar constrained flow on the cross {x1 x2 = 0, x1 >= 0} with constant
// field (1,0); not inner well-posed at the origin. Carries the straightening
// family C_delta = {x1 >= 0, |x2| <= delta}, F_delta = (1, -delta x2).
inline ExampleFixture planar_system() {
    auto C = SetSpec::intersection(
        {SetSpec::level(parse_expr("x1*x2", 2), 2), SetSpec::sublevel(parse_expr("-x1", 2), 2)});
    auto F = MapSpec::singleton(parse_vec_expr({"1", "0"}, 2));
    auto D = SetSpec::empty(2);
    auto G = MapSpec::singleton(parse_vec_expr({"x1", "x2"}, 2));

    ExampleFixture fx("planar-cross", HybridSystem(C, F, D, G, "planar-cross"));
    fx.default_x0 = {0.0, 0.0};
    fx.oracle = [](const Vec& x0, double t, int j) -> std::optional<Vec> {
        if (j != 0) return std::nullopt;
        const bool on_axis = x0[1] == 0.0 && x0[0] >= 0.0;
        if (!on_axis) return t == 0.0 ? std::optional<Vec>(x0) : std::nullopt;
        return Vec{x0[0] + t, 0.0};
    };
    fx.oracle_jumps = [](const Vec&, double) { return std::vector<double>{}; };

    PerturbationFamily fam;
    fam.dim = 2;
    fam.name = "planar-cross-straightening";
    fam.builder = [](double delta) {
        const std::set<std::string> dd = {"delta"};
        auto Cd = SetSpec::intersection({SetSpec::sublevel(parse_expr("-x1", 2), 2),
                                         SetSpec::sublevel(parse_expr("x2 - delta", 2, {}, dd), 2),
                                         SetSpec::sublevel(parse_expr("-delta - x2", 2, {}, dd), 2)})
                      .bind("delta", delta);
        auto Fd = MapSpec::singleton(parse_vec_expr({"1", "-delta*x2"}, 2, {}, dd)).bind("delta", delta);
        return HybridSystem(Cd, Fd, SetSpec::empty(2),
                            MapSpec::singleton(parse_vec_expr({"x1", "x2"}, 2)),
                            "planar-cross-straightened");
    };
    fx.family = std::move(fam);
    fx.expected = {{"nominal-iwp@origin", "inconsistent"}, {"pert-iwp@origin", "consistent"}};
    return fx;
}

// Harmonic oscillator constrained to the unit circle, with the radially
// contracting extension family on the annulus 1-delta <= |x|^2 <= 1+delta.
inline ExampleFixture oscillator_family() {
    auto C = SetSpec::level(parse_expr("x1*x1 + x2*x2 - 1", 2), 2);
    auto F = MapSpec::singleton(parse_vec_expr({"x2", "-x1"}, 2));
    auto D = SetSpec::empty(2);
    auto G = MapSpec::singleton(parse_vec_expr({"x1", "x2"}, 2));

    ExampleFixture fx("oscillator", HybridSystem(C, F, D, G, "oscillator"));
    fx.default_x0 = {1.0, 0.0};
    fx.roi_radius = 1.2;
    fx.oracle = [](const Vec& x0, double t, int j) -> std::optional<Vec> {
        if (j != 0) return std::nullopt;
        const double c = std::cos(t), s = std::sin(t);
        return Vec{x0[0] * c + x0[1] * s, -x0[0] * s + x0[1] * c};
    };
    fx.oracle_jumps = [](const Vec&, double) { return std::vector<double>{}; };

    PerturbationFamily fam;
    fam.dim = 2;
    fam.name = "oscillator-annulus";
    fam.rho = Expr::constant(3.0);
    fam.builder = [](double delta) {
        const std::set<std::string> dd = {"delta"};
        auto Cd = SetSpec::intersection(
                      {SetSpec::sublevel(parse_expr("x1*x1 + x2*x2 - 1 - delta", 2, {}, dd), 2),
                       SetSpec::sublevel(parse_expr("1 - delta - (x1*x1 + x2*x2)", 2, {}, dd), 2)})
                      .bind("delta", delta);
        auto Fd = MapSpec::singleton(
            parse_vec_expr({"x2 + (1 - (x1*x1 + x2*x2))*x1", "-x1 + (1 - (x1*x1 + x2*x2))*x2"}, 2));
        return HybridSystem(Cd, Fd, SetSpec::empty(2),
                            MapSpec::singleton(parse_vec_expr({"x1", "x2"}, 2)),
                            "oscillator-annulus");
    };
    fx.family = std::move(fam);

    // perturbed flow in polar form: theta' = -1, r' = r(1 - r^2), logistic in r^2
    fx.family_flow_oracle = [](const Vec& x0, double t) {
        const double u0 = x0[0] * x0[0] + x0[1] * x0[1];
        const double theta0 = std::atan2(x0[1], x0[0]);
        const double e = std::exp(2.0 * t);
        const double u = u0 * e / (1.0 - u0 + u0 * e);
        const double r = std::sqrt(u);
        return Vec{r * std::cos(theta0 - t), r * std::sin(theta0 - t)};
    };
    fx.expected = {{"V2", "fail"}, {"P1", "pass"}, {"P2", "pass"}, {"P3", "pass"},
                   {"W1", "pass"}, {"W2", "pass"}};
    return fx;
}

// Bouncing ball with the wedge-extended flow set family; an inner well-posed
// perturbation exactly when lambda*r < c2.
inline ExampleFixture perturbed_ball_family(double r, double c1, double c2, double gamma,
                                            double lambda) {
    if (!(r > 0.0 && c1 > 0.0 && c2 > 0.0))
        throw Error("perturbed_ball_family: r, c1, c2 must be positive");
    ExampleFixture base = bouncing_ball(gamma, lambda);
    ExampleFixture fx("perturbed-ball", base.system);
    fx.params = {{"r", r}, {"c1", c1}, {"c2", c2}, {"gamma", gamma}, {"lambda", lambda}};
    fx.oracle = base.oracle;
    fx.oracle_jumps = base.oracle_jumps;
    fx.default_x0 = base.default_x0;

    const std::map<std::string, double> sym = {
        {"r", r}, {"c1", c1}, {"c2", c2}, {"gamma", gamma}, {"lambda", lambda}};
    PerturbationFamily fam;
    fam.dim = 2;
    fam.name = "perturbed-ball-wedge";
    fam.builder = [sym, base](double) {
        auto wedge = SetSpec::intersection(
            {SetSpec::sublevel(parse_expr("-c2 - x2", 2, sym), 2),
             SetSpec::sublevel(parse_expr("c1*x2 - c2*x1", 2, sym), 2)});
        auto Cd = SetSpec::unite({base.system.C, wedge});
        auto Dd = SetSpec::intersection(
            {SetSpec::inflated(base.system.D, parse_expr("r", 2, sym)), Cd});
        // piecewise flow written with min/max gates:
        //   (0,-gamma) above the wedge edge for x2<=0, sheared inside the
        //   wedge for x1<=0, ballistic otherwise
        auto Fd = MapSpec::singleton(parse_vec_expr(
            {"min(x2 - min(c2*x1/c1, 0), 0) + max(x2, 0)", "-gamma"}, 2, sym));
        return HybridSystem(Cd, Fd, Dd, base.system.G, "perturbed-ball-wedge");
    };
    fx.family = std::move(fam);
    fx.expected = {{"C5", "pass"},
                   {"C6-flow", lambda * r < c2 ? "pass" : "fail"},
                   {"W4-first-clause", "pass"}};
    return fx;
}

// Chain of segment-following modes: traverse p0 -> p1 -> ... -> p_{N+1} with
// unit-speed fields, jumping to the next mode at each waypoint. State (z, q).
inline ExampleFixture waypoint(const std::vector<Vec>& points) {
    if (points.size() < 3) throw Error("waypoint: need at least p0, p1, p2");
    const int m = static_cast<int>(points.front().size());
    if (m != 2) throw Error("waypoint: planar segments only");
    const int N = static_cast<int>(points.size()) - 2;
    const int dim = m + 1;

    std::vector<SetSpec> cparts, dparts;
    std::vector<Vec> dirs;
    for (int q = 0; q <= N; ++q) {
        const Vec& a = points[static_cast<std::size_t>(q)];
        const Vec& b = points[static_cast<std::size_t>(q) + 1];
        Vec d = sub(b, a);
        const double len = norm(d);
        if (len <= 0.0) throw Error("waypoint: consecutive points must differ");
        d = scaled(d, 1.0 / len);
        dirs.push_back(d);

        // segment via cross-product level set and projection bounds
        Expr z1 = Expr::var(0, dim) - Expr::constant(a[0], dim);
        Expr z2 = Expr::var(1, dim) - Expr::constant(a[1], dim);
        Expr cross = z1 * Expr::constant(d[1], dim) - z2 * Expr::constant(d[0], dim);
        Expr s = z1 * Expr::constant(d[0], dim) + z2 * Expr::constant(d[1], dim);
        auto seg = SetSpec::intersection({SetSpec::level(cross, dim),
                                          SetSpec::sublevel(Expr::constant(0.0, dim) - s, dim),
                                          SetSpec::sublevel(s - Expr::constant(len, dim), dim)});
        auto mode = SetSpec::level(Expr::var(2, dim) - Expr::constant(q, dim), dim);
        cparts.push_back(SetSpec::intersection({seg, mode}));
        dparts.push_back(SetSpec::ball({b[0], b[1], static_cast<double>(q)}, 0.0));
    }
    auto C = SetSpec::unite(cparts);
    auto D = SetSpec::unite(dparts);

    // Lagrange gates in the mode coordinate select the segment's field
    auto gate = [&](int q) {
        Expr g = Expr::constant(1.0, dim);
        for (int j = 0; j <= N; ++j) {
            if (j == q) continue;
            g = g * (Expr::var(2, dim) - Expr::constant(j, dim)) *
                Expr::constant(1.0 / (q - j), dim);
        }
        return g;
    };
    Expr f1 = Expr::constant(0.0, dim), f2 = Expr::constant(0.0, dim);
    for (int q = 0; q <= N; ++q) {
        f1 = f1 + gate(q) * Expr::constant(dirs[static_cast<std::size_t>(q)][0], dim);
        f2 = f2 + gate(q) * Expr::constant(dirs[static_cast<std::size_t>(q)][1], dim);
    }
    auto F = MapSpec::singleton({{f1, f2, Expr::constant(0.0, dim)}, dim});
    auto G = MapSpec::singleton(parse_vec_expr({"x1", "x2", "x3 + 1"}, dim));

    ExampleFixture fx("waypoint", HybridSystem(C, F, D, G, "waypoint"));
    fx.default_x0 = {points[0][0], points[0][1], 0.0};
    fx.unique_solutions = true;

    std::vector<double> seg_len;
    for (int q = 0; q <= N; ++q)
        seg_len.push_back(dist(points[static_cast<std::size_t>(q)],
                               points[static_cast<std::size_t>(q) + 1]));
    fx.oracle = [points, dirs, seg_len](const Vec& x0, double t, int j) -> std::optional<Vec> {
        if (j >= static_cast<int>(seg_len.size())) return std::nullopt;
        // oracle only for the canonical run from p0
        double t_seg = 0.0;
        for (int k = 0; k < j; ++k) t_seg += seg_len[static_cast<std::size_t>(k)];
        const double s = t - t_seg;
        if (s < -1e-12 || s > seg_len[static_cast<std::size_t>(j)] + 1e-12) return std::nullopt;
        (void)x0;
        const Vec& a = points[static_cast<std::size_t>(j)];
        const double sc = std::min(std::max(s, 0.0), seg_len[static_cast<std::size_t>(j)]);
        return Vec{a[0] + dirs[static_cast<std::size_t>(j)][0] * sc,
                   a[1] + dirs[static_cast<std::size_t>(j)][1] * sc, static_cast<double>(j)};
    };
    fx.oracle_jumps = [seg_len](const Vec&, double t_cap) {
        std::vector<double> out;
        double t = 0.0;
        for (double L : seg_len) {
            t += L;
            if (t > t_cap) break;
            out.push_back(t);
        }
        return out;
    };
    return fx;
}

// scalar inclusion xdot in conv{-1, 1}: the classical non-unique flow
inline ExampleFixture interval_inclusion() {
    auto C = SetSpec::all(1);
    auto F = MapSpec::hull({parse_vec_expr({"-1"}, 1), parse_vec_expr({"1"}, 1)},
                           Expr::constant(0.0));
    auto D = SetSpec::empty(1);
    auto G = MapSpec::singleton(parse_vec_expr({"x1"}, 1));
    ExampleFixture fx("interval-inclusion", HybridSystem(C, F, D, G, "interval-inclusion"));
    fx.default_x0 = {0.0};
    return fx;
}

// C=[0,1/2], D=[-1/2,1/2], F=-1, G(x)=x for x<=0 and 1 otherwise: the jump
// map discontinuity breaks inner semicontinuity at 0.
inline ExampleFixture discontinuous_jump_example() {
    auto C = SetSpec::box({0.0}, {0.5});
    auto D = SetSpec::box({-0.5}, {0.5});
    auto F = MapSpec::singleton(parse_vec_expr({"-1"}, 1));
    auto G = MapSpec::piecewise(
        {{SetSpec::sublevel(parse_expr("x1", 1), 1), MapSpec::singleton(parse_vec_expr({"x1"}, 1))},
         {SetSpec::all(1), MapSpec::singleton(parse_vec_expr({"1"}, 1))}});
    ExampleFixture fx("discontinuous-jump", HybridSystem(C, F, D, G, "discontinuous-jump"));
    fx.default_x0 = {0.0};
    fx.roi_radius = 0.4;
    fx.expected = {{"B5", "fail"}};
    return fx;
}

}  // namespace hyreach

#endif
