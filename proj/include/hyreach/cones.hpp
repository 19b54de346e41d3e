#ifndef HYREACH_CONES_HPP
#define HYREACH_CONES_HPP

#include <optional>

#include "common.hpp"
#include "expr.hpp"
#include "sets.hpp"

namespace hyreach {

enum class ConeSide { Inside, Outside, Inconclusive };

struct ConeWitness {
    double delta = 0.0;
    Vec w;
};

struct ConeVerdict {
    ConeSide side = ConeSide::Inconclusive;
    std::optional<ConeWitness> witness;
    bool numeric_only = false;
    std::string note;

    bool inside() const { return side == ConeSide::Inside; }
    bool outside() const { return side == ConeSide::Outside; }
};

inline const char* to_string(ConeSide s) {
    switch (s) {
        case ConeSide::Inside: return "inside";
        case ConeSide::Outside: return "outside";
        case ConeSide::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct ConeCfg {
    double tol = 1e-7;     // normalized inside threshold
    double margin = 1e-4;  // normalized strictness margin; ties inside the band are inconclusive
    double act_tol = 1e-7;
    std::vector<double> delta_grid = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    double ball_frac = 0.05;
    int n_dirs = 12;
    std::uint64_t seed = 1;
    bool force_numeric = false;
    SampleCfg dist_cfg;
};

namespace detail {

struct SmoothConstraint {
    Expr g;
    bool equality = false;
};

// Flatten S into smooth {g<=0}/{g=0} constraints when the tree is an
// intersection of sublevel/level/ball/box primitives.
inline std::optional<std::vector<SmoothConstraint>> smooth_constraints(const SetSpec& S) {
    using Kind = SetSpec::Kind;
    const int dim = S.dim();
    switch (S.kind()) {
        case Kind::All: return std::vector<SmoothConstraint>{};
        case Kind::Sublevel: return std::vector<SmoothConstraint>{{S.expr(), false}};
        case Kind::Level: return std::vector<SmoothConstraint>{{S.expr(), true}};
        case Kind::Ball: {
            Expr e = Expr::constant(-S.ball_radius() * S.ball_radius(), dim);
            for (int i = 0; i < dim; ++i) {
                Expr d = Expr::var(i, dim) -
                         Expr::constant(S.ball_center()[static_cast<std::size_t>(i)], dim);
                e = e + d * d;
            }
            return std::vector<SmoothConstraint>{{std::move(e), false}};
        }
        case Kind::Box: {
            std::vector<SmoothConstraint> cs;
            for (int i = 0; i < dim; ++i) {
                const double lo = S.box_lo()[static_cast<std::size_t>(i)];
                const double hi = S.box_hi()[static_cast<std::size_t>(i)];
                if (std::isfinite(lo))
                    cs.push_back({Expr::constant(lo, dim) - Expr::var(i, dim), false});
                if (std::isfinite(hi))
                    cs.push_back({Expr::var(i, dim) - Expr::constant(hi, dim), false});
            }
            return cs;
        }
        case Kind::Intersection: {
            std::vector<SmoothConstraint> cs;
            for (const auto& p : S.parts()) {
                auto sub = smooth_constraints(*p);
                if (!sub) return std::nullopt;
                cs.insert(cs.end(), sub->begin(), sub->end());
            }
            return cs;
        }
        default: return std::nullopt;
    }
}

// rank of the rows via Gram-Schmidt with a relative pivot threshold
inline bool linearly_independent(const std::vector<Vec>& rows, double thresh = 1e-8) {
    std::vector<Vec> basis;
    for (Vec r : rows) {
        const double n0 = norm(r);
        if (n0 == 0.0) return false;
        for (const auto& b : basis) r = axpy(std::move(r), -dot(r, b), b);
        const double n1 = norm(r);
        if (n1 < thresh * n0) return false;
        basis.push_back(scaled(std::move(r), 1.0 / n1));
    }
    return true;
}

struct ActiveSet {
    std::vector<Vec> grads;       // unit gradients of active constraints
    std::vector<bool> equality;
    bool interior = false;        // no active constraints at x
    bool usable = false;          // analytic rule applicable
};

inline ActiveSet analyze_active(const std::vector<SmoothConstraint>& cs, const Vec& x,
                                const ConeCfg& cfg) {
    ActiveSet as;
    const double scale = std::max(1.0, norm(x));
    for (const auto& c : cs) {
        double g;
        try {
            g = c.g.eval(x);
        } catch (const EvalDomainError&) {
            return as;  // not usable
        }
        const bool active = c.equality || std::fabs(g) <= cfg.act_tol * scale;
        if (!active) continue;
        Vec grad;
        try {
            grad = c.g.grad(x);
        } catch (const EvalDomainError&) {
            return as;
        }
        const double gn = norm(grad);
        if (gn < 1e-9) return as;  // degenerate gradient, fall back to numeric
        as.grads.push_back(scaled(std::move(grad), 1.0 / gn));
        as.equality.push_back(c.equality);
    }
    if (as.grads.empty()) {
        as.interior = true;
        as.usable = true;
        return as;
    }
    as.usable = linearly_independent(as.grads);
    return as;
}

}  // namespace detail

ConeVerdict bouligand_contains(const SetSpec& S, const Vec& x, const Vec& v, const ConeCfg& cfg);
ConeVerdict dm_contains(const SetSpec& S, const Vec& x, const Vec& v, const ConeCfg& cfg);

namespace detail {

inline ConeVerdict bouligand_numeric(const SetSpec& S, const Vec& x, const Vec& v,
                                     const ConeCfg& cfg) {
    ConeVerdict out;
    out.numeric_only = true;
    const double vn = norm(v);
    if (vn == 0.0) {
        out.side = ConeSide::Inside;
        out.note = "zero direction";
        return out;
    }
    Rng rng(mix_seed(cfg.seed, 0xb0u));
    std::vector<Vec> dirs = {v};
    for (int i = 0; i < cfg.n_dirs; ++i)
        dirs.push_back(axpy(Vec(v), cfg.ball_frac * vn, rng.in_ball(v.size())));

    double best_ratio = kInf;
    ConeWitness best_w;
    for (double delta : cfg.delta_grid) {
        for (const auto& w : dirs) {
            double d;
            try {
                d = S.distance(axpy(Vec(x), delta, w), cfg.dist_cfg).value;
            } catch (const EmptySetError&) {
                continue;
            }
            const double ratio = d / (delta * std::max(1.0, vn));
            if (ratio < best_ratio) {
                best_ratio = ratio;
                best_w = {delta, w};
            }
        }
    }
    out.witness = best_w;
    if (best_ratio <= cfg.tol)
        out.side = ConeSide::Inside;
    else if (best_ratio >= cfg.margin)
        out.side = ConeSide::Outside;
    else
        out.side = ConeSide::Inconclusive;
    return out;
}

inline ConeVerdict dm_numeric(const SetSpec& S, const Vec& x, const Vec& v, const ConeCfg& cfg) {
    ConeVerdict out;
    out.numeric_only = true;
    const double vn = norm(v);
    if (vn == 0.0) {
        out.side = S.interior_contains(x, 1e-9) ? ConeSide::Inside : ConeSide::Outside;
        out.note = "zero direction";
        return out;
    }
    Rng rng(mix_seed(cfg.seed, 0xd0u));
    const std::vector<double> r_grid = {0.1 * vn, 0.05 * vn, 0.01 * vn};
    const double strict = 1e-12 * std::max(1.0, norm(x));

    auto dirs_for = [&](double r) {
        std::vector<Vec> dirs = {v};
        for (std::size_t i = 0; i < v.size(); ++i) {
            Vec e(v.size(), 0.0);
            e[i] = r;
            dirs.push_back(add(Vec(v), e));
            e[i] = -r;
            dirs.push_back(add(Vec(v), e));
        }
        for (int i = 0; i < cfg.n_dirs; ++i)
            dirs.push_back(axpy(Vec(v), r, rng.in_ball(v.size())));
        return dirs;
    };

    bool any_pair_ok = false;
    ConeWitness fail_w;
    bool smallest_r_fails_everywhere = true;
    for (double r : r_grid) {
        auto dirs = dirs_for(r);
        for (double dbar : cfg.delta_grid) {
            bool ok = true;
            for (const auto& w : dirs) {
                for (double delta : cfg.delta_grid) {
                    if (delta > dbar) continue;
                    if (!S.interior_contains(axpy(Vec(x), delta, w), strict)) {
                        ok = false;
                        fail_w = {delta, w};
                        break;
                    }
                }
                if (!ok) break;
            }
            if (ok) {
                any_pair_ok = true;
                if (r == r_grid.back()) smallest_r_fails_everywhere = false;
                break;
            }
        }
        if (any_pair_ok) break;
    }

    if (any_pair_ok) {
        out.side = ConeSide::Inside;
    } else if (smallest_r_fails_everywhere) {
        out.side = ConeSide::Outside;
        out.witness = fail_w;
    } else {
        out.side = ConeSide::Inconclusive;
        out.witness = fail_w;
    }
    return out;
}

// union recursion shared by both cones
template <typename Fn>
ConeVerdict union_verdict(const SetSpec& S, const Vec& x, const Vec& v, const ConeCfg& cfg,
                          Fn&& recurse, ConeVerdict (*numeric)(const SetSpec&, const Vec&,
                                                               const Vec&, const ConeCfg&)) {
    const double reach = 2.0 * cfg.delta_grid.front() * std::max(1.0, norm(v));
    bool all_outside = true;
    bool any_considered = false;
    bool nearby_foreign = false;
    ConeVerdict last;
    for (const auto& p : S.parts()) {
        if (p->contains(x, cfg.act_tol)) {
            any_considered = true;
            ConeVerdict cv = recurse(*p, x, v, cfg);
            if (cv.side == ConeSide::Inside) {
                cv.note = "via union member";
                return cv;
            }
            if (cv.side != ConeSide::Outside) all_outside = false;
            last = cv;
        } else {
            try {
                if (p->distance(x, cfg.dist_cfg).value <= reach) nearby_foreign = true;
            } catch (const EmptySetError&) {
            }
        }
    }
    if (any_considered && all_outside && !nearby_foreign) {
        last.note = "outside every union member containing x";
        return last;
    }
    return numeric(S, x, v, cfg);
}

}  // namespace detail

// Is v in the Bouligand (contingent) cone T_S(x)? Analytic rule for smooth
// intersections with linearly independent active gradients, numeric distance
// probe otherwise.
inline ConeVerdict bouligand_contains(const SetSpec& S, const Vec& x, const Vec& v,
                                      const ConeCfg& cfg = {}) {
    require_dim(x.size(), static_cast<std::size_t>(S.dim()), "bouligand_contains");
    require_dim(v.size(), x.size(), "bouligand_contains");

    if (!cfg.force_numeric && S.kind() == SetSpec::Kind::Union)
        return detail::union_verdict(
            S, x, v, cfg,
            [](const SetSpec& p, const Vec& xx, const Vec& vv, const ConeCfg& c) {
                return bouligand_contains(p, xx, vv, c);
            },
            &detail::bouligand_numeric);

    if (!cfg.force_numeric) {
        if (auto cs = detail::smooth_constraints(S)) {
            auto as = detail::analyze_active(*cs, x, cfg);
            if (as.usable) {
                ConeVerdict out;
                if (as.interior) {
                    out.side = ConeSide::Inside;
                    out.note = "interior point";
                    return out;
                }
                const double vn = norm(v);
                if (vn == 0.0) {
                    out.side = ConeSide::Inside;
                    out.note = "zero direction";
                    return out;
                }
                double worst = -kInf;
                for (std::size_t i = 0; i < as.grads.size(); ++i) {
                    const double s = dot(as.grads[i], v) / vn;
                    worst = std::max(worst, as.equality[i] ? std::fabs(s) : s);
                }
                if (worst <= cfg.tol)
                    out.side = ConeSide::Inside;
                else if (worst > cfg.margin)
                    out.side = ConeSide::Outside;
                else
                    out.side = ConeSide::Inconclusive;
                return out;
            }
        }
    }
    return detail::bouligand_numeric(S, x, v, cfg);
}

// Is v in the Dubovitsky-Miliutin cone M_{int S}(x)? S is the closed
// descriptor; the cone refers to its interior.
inline ConeVerdict dm_contains(const SetSpec& S, const Vec& x, const Vec& v,
                               const ConeCfg& cfg = {}) {
    require_dim(x.size(), static_cast<std::size_t>(S.dim()), "dm_contains");
    require_dim(v.size(), x.size(), "dm_contains");

    if (!cfg.force_numeric && S.kind() == SetSpec::Kind::Union)
        return detail::union_verdict(
            S, x, v, cfg,
            [](const SetSpec& p, const Vec& xx, const Vec& vv, const ConeCfg& c) {
                return dm_contains(p, xx, vv, c);
            },
            &detail::dm_numeric);

    if (!cfg.force_numeric) {
        if (auto cs = detail::smooth_constraints(S)) {
            auto as = detail::analyze_active(*cs, x, cfg);
            if (as.usable) {
                ConeVerdict out;
                if (as.interior) {
                    out.side = ConeSide::Inside;
                    out.note = "interior point";
                    return out;
                }
                for (bool eq : as.equality)
                    if (eq) {
                        out.side = ConeSide::Outside;
                        out.note = "active equality constraint: interior is empty";
                        return out;
                    }
                const double vn = norm(v);
                if (vn == 0.0) {
                    out.side = ConeSide::Outside;
                    out.note = "zero direction at boundary point";
                    return out;
                }
                double worst = -kInf;
                for (const auto& g : as.grads) worst = std::max(worst, dot(g, v) / vn);
                if (worst < -cfg.margin)
                    out.side = ConeSide::Inside;
                else if (worst >= -cfg.tol)
                    out.side = ConeSide::Outside;
                else
                    out.side = ConeSide::Inconclusive;
                return out;
            }
        }
    }
    return detail::dm_numeric(S, x, v, cfg);
}

}  // namespace hyreach

#endif
