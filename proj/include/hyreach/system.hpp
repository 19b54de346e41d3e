#ifndef HYREACH_SYSTEM_HPP
#define HYREACH_SYSTEM_HPP

#include <functional>
#include <sstream>

#include "maps.hpp"
#include "report.hpp"
#include "schedule.hpp"
#include "sets.hpp"

namespace hyreach {

// H = (C, F, D, G): flow on C, jumps on D.
struct HybridSystem {
    SetSpec C;
    MapSpec F;
    SetSpec D;
    MapSpec G;
    int dim = 0;
    std::string name;

    HybridSystem(SetSpec c, MapSpec f, SetSpec d, MapSpec g, std::string n = "")
        : C(std::move(c)), F(std::move(f)), D(std::move(d)), G(std::move(g)), name(std::move(n)) {
        dim = C.dim();
        require_dim(static_cast<std::size_t>(F.dim()), static_cast<std::size_t>(dim), "HybridSystem F");
        require_dim(static_cast<std::size_t>(D.dim()), static_cast<std::size_t>(dim), "HybridSystem D");
        require_dim(static_cast<std::size_t>(G.dim()), static_cast<std::size_t>(dim), "HybridSystem G");
    }

    // x0 must start in cl(C) u D
    bool admissible_start(const Vec& x, double tol = 1e-9) const {
        return C.contains(x, tol) || D.contains(x, tol);
    }
};

// delta in (0,1) -> perturbed system; delta enters the stored expressions as
// a symbolic constant, so one definition yields the whole family.
struct PerturbationFamily {
    std::function<HybridSystem(double)> builder;
    std::optional<Expr> rho;  // optional domination gauge
    int dim = 0;
    std::string name;

    HybridSystem at(double delta) const {
        if (!(delta > 0.0 && delta < 1.0)) throw Error("family parameter must lie in (0,1)");
        return builder(delta);
    }

    static PerturbationFamily degenerate(HybridSystem H) {
        PerturbationFamily fam;
        fam.dim = H.dim;
        fam.name = H.name + " (degenerate family)";
        fam.builder = [H = std::move(H)](double) { return H; };
        return fam;
    }
};

// rho-perturbation of H at level delta: sets inflated by delta*rho(x) balls,
// flow map convexified over the inflated argument ball, jump images inflated
// at the image point.
inline HybridSystem rho_inflate(const HybridSystem& H, const Expr& rho, double delta,
                                int arg_samples = 6) {
    if (!(delta >= 0.0 && delta < 1.0)) throw Error("inflation level must lie in [0,1)");
    Expr amount = Expr::constant(delta) * rho;
    HybridSystem out(SetSpec::inflated(H.C, amount),
                     MapSpec::inflated_flow(H.F, H.C, amount, arg_samples),
                     SetSpec::inflated(H.D, amount),
                     MapSpec::inflated_jump(H.G, H.D, amount, arg_samples),
                     H.name.empty() ? "" : H.name + " (inflated)");
    return out;
}

namespace detail {

inline std::string fmt_point(const Vec& x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) os << ", ";
        os << x[i];
    }
    os << ")";
    return os.str();
}

// sampled outer-semicontinuity/local-boundedness probe used when a map is
// not structurally regular: values near x must approach the value at x
inline bool sampled_map_regular(const MapSpec& M, const SetSpec& X, const Vec& x,
                                const ProbeSchedule& sched, std::uint64_t seed,
                                std::string* note) {
    Rng rng(mix_seed(seed, 0x05cu));
    double prev_gap = kInf;
    double bound = 0.0;
    bool shrinking = true;
    for (std::size_t k = 0; k < sched.size(); ++k) {
        auto args = sample_in_ball(X, x, sched.radii[k], sched.samples, rng);
        double worst = 0.0;
        for (const auto& xp : args) {
            for (const auto& y : M.sample(xp, 8, mix_seed(seed, k + 7))) {
                bound = std::max(bound, norm(y));
                worst = std::max(worst, M.member_gap(x, y));
            }
        }
        if (k + 2 >= sched.size() && worst > std::max(sched.tol, 0.6 * prev_gap) &&
            worst > sched.tol)
            shrinking = false;
        prev_gap = std::max(worst, 1e-300);
    }
    if (note) {
        std::ostringstream os;
        os << "sampled: image bound " << bound << ", final outer gap " << prev_gap;
        *note = os.str();
    }
    return shrinking && std::isfinite(bound);
}

}  // namespace detail

// Hybrid basic conditions (A1)-(A3). Closedness and convexity hold by
// construction of the data classes; restrictions, piecewise maps, and
// inflations downgrade the verdict to a sampled probe.
inline ConditionReport hbc_check(const HybridSystem& H, std::vector<Vec> pts = {},
                                 const ProbeSchedule& sched = ProbeSchedule::defaults(),
                                 std::uint64_t seed = 1) {
    ConditionReport rep;
    rep.subject = H.name.empty() ? "hybrid system" : H.name;

    ConditionEntry a1{"A1", Verdict::StructuralPass, {}, "",
                      "C and D are closed: primitives are closed sets and the combinators preserve closedness"};
    rep.entries.push_back(a1);

    if (pts.empty()) {
        Rng rng(mix_seed(seed, 3));
        Vec origin(static_cast<std::size_t>(H.dim), 0.0);
        for (auto& p : sample_in_ball(H.C, origin, 2.0, 6, rng)) pts.push_back(std::move(p));
        for (auto& p : sample_in_ball(H.D, origin, 2.0, 4, rng)) pts.push_back(std::move(p));
    }

    auto check_map = [&](const char* id, const MapSpec& M, const SetSpec& X, const char* what) {
        ConditionEntry e;
        e.id = id;
        if (M.is_structural()) {
            e.verdict = Verdict::StructuralPass;
            e.notes = std::string(what) +
                      ": hull of continuous expression vertices with expression radius is "
                      "nonempty, compact, convex valued, continuous, and locally bounded";
        } else {
            bool ok = true;
            std::string note;
            for (const auto& x : pts) {
                if (!X.contains(x, 1e-7)) continue;
                if (!detail::sampled_map_regular(M, X, x, sched, seed, &note)) {
                    ok = false;
                    e.point = x;
                    e.witness = "outer gap did not shrink near " + detail::fmt_point(x);
                    break;
                }
            }
            e.verdict = ok ? Verdict::SampledPass : Verdict::SampledFail;
            e.notes = std::string(what) + ": non-structural map (restriction/pieces/inflation), " +
                      (note.empty() ? std::string("no probe points") : note);
        }
        rep.entries.push_back(std::move(e));
    };

    check_map("A2", H.F, H.C, "flow map");
    check_map("A3", H.G, H.D, "jump map");
    return rep;
}

// Is {H_delta} dominated by the rho-perturbation of H? Sampled inclusion
// checks of C_delta in C^{delta rho}, F_delta in F^{delta rho}, etc.
inline ConditionReport domination_check(const PerturbationFamily& fam, const HybridSystem& H,
                                        const Expr& rho, const std::vector<double>& deltas,
                                        const std::vector<Vec>& pts, int samples = 6,
                                        double incl_tol = 1e-6, std::uint64_t seed = 1,
                                        double spread = 0.5) {
    ConditionReport rep;
    rep.subject = fam.name.empty() ? "perturbation family" : fam.name;

    ConditionEntry eC{"dom-C", Verdict::Pass, {}, "", ""};
    ConditionEntry eF{"dom-F", Verdict::Pass, {}, "", ""};
    ConditionEntry eD{"dom-D", Verdict::Pass, {}, "", ""};
    ConditionEntry eG{"dom-G", Verdict::Pass, {}, "", ""};

    for (double delta : deltas) {
        HybridSystem Hd = fam.at(delta);
        HybridSystem Hp = rho_inflate(H, rho, delta, samples);
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(delta * 1e9)));

        std::vector<Vec> probe_pts = pts;
        for (const auto& p : pts) {
            for (auto& q : sample_in_ball(Hd.C, p, spread, samples, rng)) probe_pts.push_back(std::move(q));
            for (auto& q : sample_in_ball(Hd.D, p, spread, samples, rng)) probe_pts.push_back(std::move(q));
        }

        for (const auto& x : probe_pts) {
            if (Hd.C.contains(x, 1e-9) && !Hp.C.contains(x, incl_tol)) {
                eC.verdict = Verdict::Fail;
                eC.point = x;
                eC.witness = "x in C_delta but dist(x, C) > delta*rho(x) at delta=" +
                             std::to_string(delta) + ", x=" + detail::fmt_point(x);
            }
            if (Hd.D.contains(x, 1e-9) && !Hp.D.contains(x, incl_tol)) {
                eD.verdict = Verdict::Fail;
                eD.point = x;
                eD.witness = "x in D_delta but outside D^{delta rho} at delta=" +
                             std::to_string(delta) + ", x=" + detail::fmt_point(x);
            }
            if (Hd.C.contains(x, 1e-9)) {
                for (const auto& y : Hd.F.sample(x, std::max(samples, 4), mix_seed(seed, 11))) {
                    if (Hp.F.member_gap(x, y, 32, mix_seed(seed, 13)) > incl_tol) {
                        eF.verdict = Verdict::Fail;
                        eF.point = x;
                        eF.witness = "F_delta(x) sample escapes F^{delta rho}(x) at delta=" +
                                     std::to_string(delta) + ", x=" + detail::fmt_point(x) +
                                     ", y=" + detail::fmt_point(y);
                    }
                }
            }
            if (Hd.D.contains(x, 1e-9)) {
                for (const auto& y : Hd.G.sample(x, std::max(samples, 4), mix_seed(seed, 17))) {
                    if (Hp.G.member_gap(x, y, 32, mix_seed(seed, 19)) > incl_tol) {
                        eG.verdict = Verdict::Fail;
                        eG.point = x;
                        eG.witness = "G_delta(x) sample escapes G^{delta rho}(x) at delta=" +
                                     std::to_string(delta) + ", x=" + detail::fmt_point(x) +
                                     ", y=" + detail::fmt_point(y);
                    }
                }
            }
        }
    }

    rep.entries = {std::move(eC), std::move(eF), std::move(eD), std::move(eG)};
    return rep;
}

}  // namespace hyreach

#endif
