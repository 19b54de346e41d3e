#ifndef HYREACH_SETS_HPP
#define HYREACH_SETS_HPP

#include <algorithm>
#include <memory>
#include <optional>

#include "common.hpp"
#include "expr.hpp"

namespace hyreach {

// Sampling knobs shared by the approximate set queries. Everything is
// deterministic given the seed.
struct SampleCfg {
    std::uint64_t seed = 1;
    double tol = 1e-9;
    int levels = 12;
    int per_level = 24;
    double r_lo = 1e-4;
    double r_hi = 4.0;
    int bisect_iters = 48;
    int polish = 3;
};

struct DistanceEst {
    double value = 0.0;
    bool exact = true;
    Vec nearest;  // witness member point realizing (or bounding) the value
};

// Closed subsets of R^n, built from closed primitives and closure-preserving
// combinators. Membership is deterministic; distances are exact on the
// projectable fragment and sampled upper bounds elsewhere.
class SetSpec {
  public:
    enum class Kind { All, Empty, Sublevel, Level, Ball, Box, Intersection, Union, Product, Inflated };

    static SetSpec all(int dim) { return SetSpec(Kind::All, dim); }
    static SetSpec empty(int dim) { return SetSpec(Kind::Empty, dim); }

    // {x : g(x) <= 0}
    static SetSpec sublevel(Expr g, int dim) {
        SetSpec s(Kind::Sublevel, dim);
        s.g_ = std::move(g);
        return s;
    }

    // {x : g(x) = 0}
    static SetSpec level(Expr g, int dim) {
        SetSpec s(Kind::Level, dim);
        s.g_ = std::move(g);
        return s;
    }

    static SetSpec ball(Vec center, double radius) {
        if (radius < 0.0) throw Error("ball radius must be nonnegative");
        SetSpec s(Kind::Ball, static_cast<int>(center.size()));
        s.center_ = std::move(center);
        s.radius_ = radius;
        return s;
    }

    // entries of lo/hi may be -inf/+inf
    static SetSpec box(Vec lo, Vec hi) {
        require_dim(lo.size(), hi.size(), "SetSpec::box");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i])) throw Error("box bounds must satisfy lo <= hi");
        SetSpec s(Kind::Box, static_cast<int>(lo.size()));
        s.lo_ = std::move(lo);
        s.hi_ = std::move(hi);
        return s;
    }

    static SetSpec intersection(std::vector<SetSpec> parts) {
        return combo(Kind::Intersection, std::move(parts));
    }

    static SetSpec unite(std::vector<SetSpec> parts) {
        return combo(Kind::Union, std::move(parts));
    }

    static SetSpec product(std::vector<SetSpec> parts) {
        SetSpec s(Kind::Product, 0);
        int d = 0;
        for (const auto& p : parts) d += p.dim();
        s.dim_ = d;
        for (auto& p : parts) s.parts_.push_back(std::make_shared<SetSpec>(std::move(p)));
        return s;
    }

    // {x : dist(x, base) <= amount(x)}; amount must be nonnegative wherever used
    static SetSpec inflated(SetSpec base, Expr amount) {
        SetSpec s(Kind::Inflated, base.dim());
        s.parts_.push_back(std::make_shared<SetSpec>(std::move(base)));
        s.g_ = std::move(amount);
        return s;
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::vector<std::shared_ptr<SetSpec>>& parts() const { return parts_; }
    const Expr& expr() const { return g_; }
    const Vec& ball_center() const { return center_; }
    double ball_radius() const { return radius_; }
    const Vec& box_lo() const { return lo_; }
    const Vec& box_hi() const { return hi_; }

    SetSpec bind(const std::string& name, double value) const {
        SetSpec s = *this;
        s.g_ = s.g_.bind(name, value);
        s.parts_.clear();
        for (const auto& p : parts_) s.parts_.push_back(std::make_shared<SetSpec>(p->bind(name, value)));
        return s;
    }

    bool contains(const Vec& x, double tol = 1e-9) const {
        require_dim(x.size(), static_cast<std::size_t>(dim_), "SetSpec::contains");
        switch (kind_) {
            case Kind::All: return true;
            case Kind::Empty: return false;
            case Kind::Sublevel: return g_.eval(x) <= tol;
            case Kind::Level: return std::fabs(g_.eval(x)) <= tol;
            case Kind::Ball: return dist(x, center_) <= radius_ + tol;
            case Kind::Box: {
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (x[i] < lo_[i] - tol || x[i] > hi_[i] + tol) return false;
                return true;
            }
            case Kind::Intersection: {
                for (const auto& p : parts_)
                    if (!p->contains(x, tol)) return false;
                return true;
            }
            case Kind::Union: {
                for (const auto& p : parts_)
                    if (p->contains(x, tol)) return true;
                return false;
            }
            case Kind::Product: {
                std::size_t off = 0;
                for (const auto& p : parts_) {
                    Vec sub(x.begin() + off, x.begin() + off + p->dim());
                    if (!p->contains(sub, tol)) return false;
                    off += p->dim();
                }
                return true;
            }
            case Kind::Inflated: {
                const double a = inflation_amount(x);
                return parts_[0]->distance(x).value <= a + tol;
            }
        }
        return false;
    }

    // conservative strict-membership test for the interior
    bool interior_contains(const Vec& x, double margin = 1e-9) const {
        require_dim(x.size(), static_cast<std::size_t>(dim_), "SetSpec::interior_contains");
        switch (kind_) {
            case Kind::All: return true;
            case Kind::Empty: return false;
            case Kind::Sublevel: return g_.eval(x) <= -margin;
            case Kind::Level: return false;
            case Kind::Ball: return dist(x, center_) <= radius_ - margin;
            case Kind::Box: {
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (x[i] < lo_[i] + margin || x[i] > hi_[i] - margin) return false;
                return true;
            }
            case Kind::Intersection: {
                for (const auto& p : parts_)
                    if (!p->interior_contains(x, margin)) return false;
                return true;
            }
            case Kind::Union: {
                for (const auto& p : parts_)
                    if (p->interior_contains(x, margin)) return true;
                return false;
            }
            case Kind::Product: {
                std::size_t off = 0;
                for (const auto& p : parts_) {
                    Vec sub(x.begin() + off, x.begin() + off + p->dim());
                    if (!p->interior_contains(sub, margin)) return false;
                    off += p->dim();
                }
                return true;
            }
            case Kind::Inflated: {
                const double a = inflation_amount(x);
                return parts_[0]->distance(x).value <= a - margin;
            }
        }
        return false;
    }

    // Exact Euclidean projection where the structure admits one.
    std::optional<Vec> try_project(const Vec& x) const {
        switch (kind_) {
            case Kind::All: return x;
            case Kind::Empty: return std::nullopt;
            case Kind::Sublevel: {
                auto aff = g_.as_affine();
                if (!aff) return contains(x) ? std::optional<Vec>(x) : std::nullopt;
                const double an = norm(aff->first);
                if (an == 0.0) return aff->second <= 0.0 ? std::optional<Vec>(x) : std::nullopt;
                const double v = dot(aff->first, x) + aff->second;
                if (v <= 0.0) return x;
                return axpy(x, -v / (an * an), aff->first);
            }
            case Kind::Level: {
                auto aff = g_.as_affine();
                if (!aff) return contains(x) ? std::optional<Vec>(x) : std::nullopt;
                const double an = norm(aff->first);
                if (an == 0.0) return std::fabs(aff->second) == 0.0 ? std::optional<Vec>(x) : std::nullopt;
                const double v = dot(aff->first, x) + aff->second;
                return axpy(x, -v / (an * an), aff->first);
            }
            case Kind::Ball: {
                const double d = dist(x, center_);
                if (d <= radius_) return x;
                return axpy(center_, radius_ / d, sub(x, center_));
            }
            case Kind::Box: {
                Vec y = x;
                for (std::size_t i = 0; i < y.size(); ++i)
                    y[i] = std::min(std::max(y[i], lo_[i]), hi_[i]);
                return y;
            }
            case Kind::Intersection: {
                if (!convex_projectable()) return std::nullopt;
                return dykstra(x);
            }
            case Kind::Union: {
                double best = kInf;
                std::optional<Vec> best_p;
                for (const auto& p : parts_) {
                    auto q = p->try_project(x);
                    if (!q) return std::nullopt;
                    const double d = dist(x, *q);
                    if (d < best) {
                        best = d;
                        best_p = std::move(q);
                    }
                }
                return best_p;
            }
            case Kind::Product: {
                Vec y;
                std::size_t off = 0;
                for (const auto& p : parts_) {
                    Vec sub(x.begin() + off, x.begin() + off + p->dim());
                    auto q = p->try_project(sub);
                    if (!q) return std::nullopt;
                    y.insert(y.end(), q->begin(), q->end());
                    off += p->dim();
                }
                return y;
            }
            case Kind::Inflated: {
                auto c = g_.as_constant();
                if (!c) return std::nullopt;
                auto pb = parts_[0]->try_project(x);
                if (!pb) return std::nullopt;
                const double d = dist(x, *pb);
                if (d <= *c) return x;
                // walk toward the base until the inflation boundary
                return axpy(x, (d - *c) / d, sub(*pb, x));
            }
        }
        return std::nullopt;
    }

    // Best-effort member point near y (exact projection when available).
    std::optional<Vec> nearby_member(const Vec& y, double tol = 1e-9) const {
        if (auto p = try_project(y)) return p;
        return approach_member(y, tol);
    }

    DistanceEst distance(const Vec& x, const SampleCfg& cfg = {}) const {
        require_dim(x.size(), static_cast<std::size_t>(dim_), "SetSpec::distance");
        switch (kind_) {
            case Kind::All: return {0.0, true, x};
            case Kind::Empty: throw EmptySetError("distance to empty set");
            case Kind::Union: {
                DistanceEst best;
                best.value = kInf;
                bool all_exact = true;
                bool any = false;
                for (const auto& p : parts_) {
                    try {
                        DistanceEst d = p->distance(x, cfg);
                        any = true;
                        all_exact = all_exact && d.exact;
                        if (d.value < best.value) best = std::move(d);
                    } catch (const EmptySetError&) {
                    }
                }
                if (!any) throw EmptySetError("distance to union of empty sets");
                best.exact = best.exact && (best.value == 0.0 || all_exact);
                return best;
            }
            case Kind::Product: {
                double sq = 0.0;
                bool exact = true;
                Vec nearest;
                std::size_t off = 0;
                for (const auto& p : parts_) {
                    Vec sub(x.begin() + off, x.begin() + off + p->dim());
                    DistanceEst d = p->distance(sub, cfg);
                    sq += d.value * d.value;
                    exact = exact && d.exact;
                    nearest.insert(nearest.end(), d.nearest.begin(), d.nearest.end());
                    off += p->dim();
                }
                return {std::sqrt(sq), exact, std::move(nearest)};
            }
            case Kind::Inflated: {
                if (auto c = g_.as_constant()) {
                    DistanceEst d = parts_[0]->distance(x, cfg);
                    // dist(x, S + cB) = max(0, dist(x,S) - c) for any closed S
                    const double v = std::max(0.0, d.value - *c);
                    Vec nearest = v == 0.0 ? x : axpy(x, (d.value - *c) / d.value, sub(d.nearest, x));
                    return {v, d.exact, std::move(nearest)};
                }
                return sampled_distance(x, cfg, inflated_candidates(x, cfg));
            }
            default: {
                if (auto p = try_project(x)) {
                    if (kind_ == Kind::Intersection && !contains(*p, 1e-7))
                        break;  // Dykstra did not settle (possibly empty) - sample
                    return {dist(x, *p), true, std::move(*p)};
                }
                break;
            }
        }
        return sampled_distance(x, cfg, {});
    }

  private:
    SetSpec(Kind k, int dim) : kind_(k), dim_(dim) {}

    static SetSpec combo(Kind k, std::vector<SetSpec> parts) {
        if (parts.empty()) throw Error("set combinator needs at least one part");
        SetSpec s(k, parts.front().dim());
        for (auto& p : parts) {
            require_dim(p.dim(), s.dim_, "SetSpec combinator");
            s.parts_.push_back(std::make_shared<SetSpec>(std::move(p)));
        }
        return s;
    }

    double inflation_amount(const Vec& x) const {
        const double a = g_.eval(x);
        if (a < 0.0) throw Error("negative inflation amount sampled");
        return a;
    }

    bool convex_projectable() const {
        switch (kind_) {
            case Kind::All: return true;
            case Kind::Ball: return true;
            case Kind::Box: return true;
            case Kind::Sublevel:
            case Kind::Level: return g_.as_affine().has_value();
            case Kind::Intersection:
            case Kind::Product: {
                for (const auto& p : parts_)
                    if (!p->convex_projectable()) return false;
                return true;
            }
            default: return false;
        }
    }

    // Dykstra's alternating projections over the children. Converges to the
    // exact projection when every child is convex with an exact projector.
    std::optional<Vec> dykstra(const Vec& x) const {
        const std::size_t m = parts_.size();
        Vec p = x;
        std::vector<Vec> corr(m, Vec(x.size(), 0.0));
        const double scale = std::max(1.0, norm(x));
        for (int sweep = 0; sweep < 4000; ++sweep) {
            double shift = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                Vec y = add(p, corr[i]);
                auto q = parts_[i]->try_project(y);
                if (!q) return std::nullopt;
                corr[i] = sub(y, *q);
                shift += dist(p, *q);
                p = std::move(*q);
            }
            if (shift < 1e-14 * scale) break;
        }
        return p;
    }

    std::vector<Vec> inflated_candidates(const Vec& x, const SampleCfg& cfg) const {
        std::vector<Vec> cands;
        try {
            DistanceEst base = parts_[0]->distance(x, cfg);
            if (!base.nearest.empty()) cands.push_back(base.nearest);
        } catch (const EmptySetError&) {
        }
        return cands;
    }

    // Heuristic move from y toward a member point. Newton steps handle the
    // non-affine sublevel/level primitives that rejection sampling cannot hit.
    std::optional<Vec> approach_member(Vec y, double tol) const {
        if (contains(y, tol)) return y;
        switch (kind_) {
            case Kind::Empty: return std::nullopt;
            case Kind::Sublevel:
            case Kind::Level: {
                if (auto p = try_project(y)) return p;
                for (int it = 0; it < 30; ++it) {
                    double g;
                    try {
                        g = g_.eval(y);
                    } catch (const EvalDomainError&) {
                        return std::nullopt;
                    }
                    if (kind_ == Kind::Sublevel && g <= 0.0) return y;
                    if (std::fabs(g) <= tol) return y;
                    Vec grad = g_.grad(y);
                    const double gn2 = dot(grad, grad);
                    if (gn2 < 1e-18) return std::nullopt;
                    y = axpy(std::move(y), -g / gn2, grad);
                }
                return contains(y, std::max(tol, 1e-7)) ? std::optional<Vec>(y) : std::nullopt;
            }
            case Kind::Intersection: {
                for (int sweep = 0; sweep < 50; ++sweep) {
                    bool all_in = true;
                    for (const auto& p : parts_) {
                        if (p->contains(y, tol)) continue;
                        all_in = false;
                        auto q = p->approach_member(y, tol);
                        if (!q) return std::nullopt;
                        y = std::move(*q);
                    }
                    if (all_in) return y;
                }
                return contains(y, std::max(tol, 1e-7)) ? std::optional<Vec>(y) : std::nullopt;
            }
            case Kind::Union: {
                double best = kInf;
                std::optional<Vec> best_q;
                for (const auto& p : parts_) {
                    auto q = p->approach_member(y, tol);
                    if (q && dist(y, *q) < best) {
                        best = dist(y, *q);
                        best_q = std::move(q);
                    }
                }
                return best_q;
            }
            case Kind::Product: {
                Vec out;
                std::size_t off = 0;
                for (const auto& p : parts_) {
                    Vec sub(y.begin() + off, y.begin() + off + p->dim());
                    auto q = p->approach_member(std::move(sub), tol);
                    if (!q) return std::nullopt;
                    out.insert(out.end(), q->begin(), q->end());
                    off += p->dim();
                }
                return out;
            }
            case Kind::Inflated: {
                auto q = parts_[0]->approach_member(y, tol);
                if (!q) return std::nullopt;
                // first point on the segment y -> base member inside the inflation
                Vec lo = y, hi = *q;
                for (int it = 0; it < 40; ++it) {
                    Vec mid = scaled(add(lo, hi), 0.5);
                    if (contains(mid, tol))
                        hi = std::move(mid);
                    else
                        lo = std::move(mid);
                }
                return contains(hi, std::max(tol, 1e-7)) ? std::optional<Vec>(hi) : std::nullopt;
            }
            default: return try_project(y);
        }
    }

    // Upper-bound distance by locating member points: approach operators on
    // radially sampled starts, bisection toward x, then local polish.
    DistanceEst sampled_distance(const Vec& x, const SampleCfg& cfg,
                                 std::vector<Vec> candidates) const {
        if (contains(x, cfg.tol)) return {0.0, true, x};
        Rng rng(mix_seed(cfg.seed, 0x5e75));
        const double scale = std::max(1.0, norm(x));

        auto tighten = [&](const Vec& member) {
            // first member point on the segment x -> member
            Vec lo = x, hi = member;
            for (int it = 0; it < cfg.bisect_iters; ++it) {
                Vec mid = scaled(add(lo, hi), 0.5);
                if (contains(mid, cfg.tol))
                    hi = std::move(mid);
                else
                    lo = std::move(mid);
            }
            return hi;
        };

        double best = kInf;
        Vec best_pt;
        auto consider = [&](const Vec& member) {
            Vec z = tighten(member);
            const double d = dist(x, z);
            if (d < best) {
                best = d;
                best_pt = std::move(z);
            }
        };

        for (const auto& c : candidates)
            if (contains(c, std::max(cfg.tol, 1e-7))) consider(c);
        if (auto q = approach_member(x, cfg.tol)) consider(*q);

        for (int level = 0; level < cfg.levels; ++level) {
            const double t = cfg.levels == 1 ? 0.0 : static_cast<double>(level) / (cfg.levels - 1);
            const double r = scale * cfg.r_lo * std::pow(cfg.r_hi / cfg.r_lo, t);
            if (best < r * 0.5) break;  // already tighter than this shell
            for (int i = 0; i < cfg.per_level; ++i) {
                Vec y = axpy(x, r, rng.in_ball(x.size()));
                if (contains(y, cfg.tol)) {
                    consider(y);
                } else if (auto q = approach_member(y, cfg.tol)) {
                    consider(*q);
                }
            }
        }

        // local polish around the best witness
        for (int round = 0; round < cfg.polish && best < kInf; ++round) {
            const double r = best * 0.5;
            for (int i = 0; i < cfg.per_level; ++i) {
                Vec y = axpy(best_pt, r, rng.in_ball(x.size()));
                if (auto q = approach_member(y, cfg.tol)) {
                    if (dist(x, *q) < best) consider(*q);
                }
            }
        }

        if (!(best < kInf))
            throw EmptySetError("no member point found by sampling (set may be empty)");
        return {best, false, std::move(best_pt)};
    }

    Kind kind_;
    int dim_;
    Expr g_;
    Vec center_, lo_, hi_;
    double radius_ = 0.0;
    std::vector<std::shared_ptr<SetSpec>> parts_;
};

// Convenience: {x : a.x + b <= 0}
inline SetSpec halfspace(Vec a, double b) {
    const int dim = static_cast<int>(a.size());
    Expr e = Expr::constant(b, dim);
    for (int i = 0; i < dim; ++i)
        e = e + Expr::constant(a[static_cast<std::size_t>(i)], dim) * Expr::var(i, dim);
    return SetSpec::sublevel(e, dim);
}

// Points of S in (center + radius*B). Rejection sampling with a projection
// fallback for thin sets. The returned list may be shorter than n.
inline std::vector<Vec> sample_in_ball(const SetSpec& S, const Vec& center, double radius,
                                       int n, Rng& rng, double tol = 1e-9) {
    std::vector<Vec> out;
    if (S.contains(center, tol)) out.push_back(center);
    int misses = 0;
    const int max_attempts = std::max(60, 12 * n);
    for (int a = 0; a < max_attempts && static_cast<int>(out.size()) < n; ++a) {
        Vec y = axpy(center, radius, rng.in_ball(center.size()));
        if (S.contains(y, tol))
            out.push_back(std::move(y));
        else
            ++misses;
    }
    if (static_cast<int>(out.size()) < n) {
        // thin set: pull ball samples onto S
        for (int a = 0; a < max_attempts && static_cast<int>(out.size()) < n; ++a) {
            Vec y = axpy(center, radius * rng.uniform(), rng.in_ball(center.size()));
            std::optional<Vec> p = S.nearby_member(y, tol);
            if (p && !p->empty() && dist(*p, center) <= radius * (1.0 + 1e-9) + 1e-12 &&
                S.contains(*p, std::max(tol, 1e-7)))
                out.push_back(std::move(*p));
        }
    }
    return out;
}

// Boundary points of S near center: bisect member/non-member pairs.
inline std::vector<Vec> sample_boundary(const SetSpec& S, const Vec& center, double radius,
                                        int n, Rng& rng, double tol = 1e-9) {
    std::vector<Vec> members = sample_in_ball(S, center, radius, 2 * n, rng, tol);
    std::vector<Vec> out;
    for (const Vec& m : members) {
        if (static_cast<int>(out.size()) >= n) break;
        // find a nearby non-member
        Vec outside;
        bool found = false;
        for (int a = 0; a < 24 && !found; ++a) {
            Vec y = axpy(m, radius, rng.in_ball(center.size()));
            if (!S.contains(y, tol)) {
                outside = std::move(y);
                found = true;
            }
        }
        if (!found) continue;  // locally interior everywhere
        Vec lo = outside, hi = m;
        for (int it = 0; it < 48; ++it) {
            Vec mid = scaled(add(lo, hi), 0.5);
            if (S.contains(mid, tol))
                hi = std::move(mid);
            else
                lo = std::move(mid);
        }
        out.push_back(std::move(hi));
    }
    return out;
}

}  // namespace hyreach

#endif
