#ifndef HYREACH_MAPS_HPP
#define HYREACH_MAPS_HPP

#include <functional>
#include <memory>
#include <optional>

#include "common.hpp"
#include "expr.hpp"
#include "schedule.hpp"
#include "sets.hpp"

namespace hyreach {

struct VecExpr {
    std::vector<Expr> comps;
    int dim = 0;  // input (state) dimension

    Vec eval(const Vec& x) const {
        Vec y(comps.size());
        for (std::size_t i = 0; i < comps.size(); ++i) y[i] = comps[i].eval(x);
        return y;
    }

    VecExpr bind(const std::string& name, double value) const {
        VecExpr v = *this;
        for (auto& c : v.comps) c = c.bind(name, value);
        return v;
    }
};

inline VecExpr parse_vec_expr(const std::vector<std::string>& texts, int dim,
                              const std::map<std::string, double>& symbols = {},
                              const std::set<std::string>& deferred = {}) {
    VecExpr v;
    v.dim = dim;
    for (const auto& t : texts) v.comps.push_back(parse_expr(t, dim, symbols, deferred));
    return v;
}

// Distance from y to conv{P}: Frank-Wolfe with away steps and exact line
// search; exact up to the iteration floor for the small hulls used here.
inline double hull_distance(const std::vector<Vec>& P, const Vec& y) {
    if (P.empty()) return kInf;
    if (P.size() == 1) return dist(P[0], y);
    const std::size_t k = P.size();
    Vec lambda(k, 0.0);
    lambda[0] = 1.0;
    Vec z = P[0];
    const double scale = std::max(1.0, norm(y));
    for (int it = 0; it < 2000; ++it) {
        Vec r = sub(z, y);  // gradient direction: grad_i = P_i . r
        std::size_t s = 0, a = 0;
        double gmin = kInf, gmax = -kInf;
        for (std::size_t i = 0; i < k; ++i) {
            const double gi = dot(P[i], r);
            if (gi < gmin) {
                gmin = gi;
                s = i;
            }
            if (lambda[i] > 0.0 && gi > gmax) {
                gmax = gi;
                a = i;
            }
        }
        const double fw_gap = dot(r, sub(z, P[s]));
        if (fw_gap <= 1e-18 * scale * scale) break;

        const double away_gain = dot(r, sub(P[a], z));
        Vec d;
        double t_max;
        bool away;
        if (away_gain > fw_gap && lambda[a] < 1.0) {
            d = sub(z, P[a]);  // away step
            t_max = lambda[a] / (1.0 - lambda[a]);
            away = true;
        } else {
            d = sub(P[s], z);  // toward step
            t_max = 1.0;
            away = false;
        }
        const double dn2 = dot(d, d);
        if (dn2 <= 0.0) break;
        double t = -dot(r, d) / dn2;
        t = std::min(std::max(t, 0.0), t_max);
        if (t <= 0.0) break;
        if (away) {
            for (std::size_t i = 0; i < k; ++i) lambda[i] *= (1.0 + t);
            lambda[a] -= t;
            if (lambda[a] < 1e-16) lambda[a] = 0.0;
        } else {
            for (std::size_t i = 0; i < k; ++i) lambda[i] *= (1.0 - t);
            lambda[s] += t;
        }
        z = axpy(std::move(z), t, d);
    }
    return dist(z, y);
}

// Sample provenance: barycentric weights plus the radial perturbation that
// generated the point, so membership can be re-checked without any solve.
struct MapSamplePoint {
    Vec y;
    Vec lambda;
    Vec unit_dir;
    double radial = 0.0;  // distance actually added along unit_dir
};

struct MapSampleResult {
    std::vector<MapSamplePoint> points;
    bool filtered_empty = false;  // restrict_to removed everything

    std::vector<Vec> values() const {
        std::vector<Vec> out;
        out.reserve(points.size());
        for (const auto& p : points) out.push_back(p.y);
        return out;
    }
};

// Set-valued maps x => conv{v_1(x),...,v_k(x)} + radius(x)*B, optionally
// restricted, plus the piecewise and rho-inflated variants built on top.
class MapSpec {
  public:
    enum class Kind { Hull, Piecewise, InflatedFlow, InflatedJump };

    static MapSpec hull(std::vector<VecExpr> vertices, Expr radius,
                        std::optional<SetSpec> restrict_to = std::nullopt) {
        if (vertices.empty()) throw Error("map needs at least one vertex expression");
        MapSpec m;
        m.kind_ = Kind::Hull;
        m.dim_ = vertices.front().dim;
        m.vertices_ = std::move(vertices);
        m.radius_ = std::move(radius);
        if (restrict_to) m.restrict_ = std::make_shared<SetSpec>(std::move(*restrict_to));
        return m;
    }

    static MapSpec singleton(VecExpr v) { return hull({std::move(v)}, Expr::constant(0.0)); }

    // first guard containing x selects the piece
    static MapSpec piecewise(std::vector<std::pair<SetSpec, MapSpec>> pieces) {
        if (pieces.empty()) throw Error("piecewise map needs at least one piece");
        MapSpec m;
        m.kind_ = Kind::Piecewise;
        m.dim_ = pieces.front().second.dim();
        for (auto& [guard, piece] : pieces) {
            m.guards_.push_back(std::make_shared<SetSpec>(std::move(guard)));
            m.pieces_.push_back(std::make_shared<MapSpec>(std::move(piece)));
        }
        return m;
    }

    // F^{a}(x) = conv F((x + a(x)B) n domain) + a(x)B, sampled
    static MapSpec inflated_flow(MapSpec base, SetSpec domain, Expr amount, int arg_samples = 6) {
        return inflated(Kind::InflatedFlow, std::move(base), std::move(domain), std::move(amount),
                        arg_samples);
    }

    // G^{a}(x) = { z : z in y + a(y)B, y in G((x + a(x)B) n domain) }, sampled
    static MapSpec inflated_jump(MapSpec base, SetSpec domain, Expr amount, int arg_samples = 6) {
        return inflated(Kind::InflatedJump, std::move(base), std::move(domain), std::move(amount),
                        arg_samples);
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool is_hull() const { return kind_ == Kind::Hull; }
    // structurally continuous/convex-valued: plain hull, no restriction
    bool is_structural() const { return kind_ == Kind::Hull && !restrict_; }
    const std::vector<VecExpr>& vertices() const { return vertices_; }
    const Expr& radius_expr() const { return radius_; }
    const SetSpec* restrict_to() const { return restrict_.get(); }
    std::size_t piece_count() const { return pieces_.size(); }
    const MapSpec& piece(std::size_t i) const { return *pieces_[i]; }
    const SetSpec& guard(std::size_t i) const { return *guards_[i]; }
    const MapSpec& base() const { return *pieces_[0]; }
    const SetSpec& inflation_domain() const { return *guards_[0]; }
    const Expr& inflation_amount() const { return radius_; }

    MapSpec bind(const std::string& name, double value) const {
        MapSpec m = *this;
        for (auto& v : m.vertices_) v = v.bind(name, value);
        m.radius_ = m.radius_.bind(name, value);
        if (m.restrict_) m.restrict_ = std::make_shared<SetSpec>(m.restrict_->bind(name, value));
        m.pieces_.clear();
        for (const auto& p : pieces_) m.pieces_.push_back(std::make_shared<MapSpec>(p->bind(name, value)));
        m.guards_.clear();
        for (const auto& g : guards_) m.guards_.push_back(std::make_shared<SetSpec>(g->bind(name, value)));
        return m;
    }

    // All vertices first, then seeded convex combinations perturbed inside the
    // radius ball. Deterministic per seed; every point lies in the map value.
    MapSampleResult sample_detailed(const Vec& x, int n, std::uint64_t seed) const {
        require_dim(x.size(), static_cast<std::size_t>(dim_), "MapSpec::sample");
        switch (kind_) {
            case Kind::Hull: return sample_hull(x, n, seed);
            case Kind::Piecewise: {
                for (std::size_t i = 0; i < pieces_.size(); ++i)
                    if (guards_[i]->contains(x, 1e-9)) return pieces_[i]->sample_detailed(x, n, seed);
                return {};
            }
            case Kind::InflatedFlow: return sample_inflated_flow(x, n, seed);
            case Kind::InflatedJump: return sample_inflated_jump(x, n, seed);
        }
        return {};
    }

    std::vector<Vec> sample(const Vec& x, int n, std::uint64_t seed) const {
        return sample_detailed(x, n, seed).values();
    }

    // Gap between y and the map value at x: 0 means member (within sampling
    // fidelity for the inflated variants).
    double member_gap(const Vec& x, const Vec& y, int pool_n = 24,
                      std::uint64_t seed = 0x9a77) const {
        switch (kind_) {
            case Kind::Hull: {
                std::vector<Vec> verts;
                verts.reserve(vertices_.size());
                for (const auto& v : vertices_) verts.push_back(v.eval(x));
                const double r = eval_radius(x);
                double gap = std::max(0.0, hull_distance(verts, y) - r);
                if (restrict_) {
                    try {
                        gap = std::max(gap, restrict_->distance(y).value);
                    } catch (const EmptySetError&) {
                        gap = kInf;
                    }
                }
                return gap;
            }
            case Kind::Piecewise: {
                for (std::size_t i = 0; i < pieces_.size(); ++i)
                    if (guards_[i]->contains(x, 1e-9)) return pieces_[i]->member_gap(x, y, pool_n, seed);
                return kInf;
            }
            case Kind::InflatedFlow: {
                const double a = eval_amount(x);
                auto pool = pool_points(x, pool_n, seed);
                if (pool.empty()) return kInf;
                return std::max(0.0, hull_distance(pool, y) - a);
            }
            case Kind::InflatedJump: {
                auto pool = pool_points(x, pool_n, seed);
                if (pool.empty()) return kInf;
                double best = kInf;
                for (const auto& p : pool) best = std::min(best, std::max(0.0, dist(p, y) - eval_amount(p)));
                return best;
            }
        }
        return kInf;
    }

    // Raw image points before hull/ball closure (inflated kinds only).
    std::vector<Vec> pool_points(const Vec& x, int n, std::uint64_t seed) const {
        const double a = eval_amount(x);
        Rng rng(mix_seed(seed, 0xbeef));
        const int want_args = std::max(2, guards_.empty() ? 4 : arg_samples_);
        auto args = sample_in_ball(inflation_domain(), x, a, want_args, rng, 1e-9);
        std::vector<Vec> pool;
        std::uint64_t salt = 0;
        const int per_arg = std::max(1, n / std::max(1, static_cast<int>(args.size())));
        for (const auto& xi : args) {
            auto ys = base().sample(xi, std::max<int>(per_arg, base_vertex_count()),
                                    mix_seed(seed, ++salt));
            pool.insert(pool.end(), ys.begin(), ys.end());
        }
        return pool;
    }

  private:
    MapSpec() = default;

    static MapSpec inflated(Kind kind, MapSpec base, SetSpec domain, Expr amount, int arg_samples) {
        MapSpec m;
        m.kind_ = kind;
        m.dim_ = base.dim();
        m.radius_ = std::move(amount);
        m.pieces_.push_back(std::make_shared<MapSpec>(std::move(base)));
        m.guards_.push_back(std::make_shared<SetSpec>(std::move(domain)));
        m.arg_samples_ = arg_samples;
        return m;
    }

    int base_vertex_count() const {
        const MapSpec& b = base();
        return b.is_hull() ? static_cast<int>(b.vertices_.size()) : 3;
    }

    double eval_radius(const Vec& x) const {
        const double r = radius_.eval(x);
        if (r < 0.0) throw Error("negative map radius sampled");
        return r;
    }

    double eval_amount(const Vec& x) const {
        const double a = radius_.eval(x);
        if (a < 0.0) throw Error("negative inflation amount sampled");
        return a;
    }

    MapSampleResult sample_hull(const Vec& x, int n, std::uint64_t seed) const {
        const int k = static_cast<int>(vertices_.size());
        if (n < k) throw Error("sample count must be at least the vertex count");
        std::vector<Vec> verts;
        verts.reserve(vertices_.size());
        for (const auto& v : vertices_) verts.push_back(v.eval(x));
        const double r = eval_radius(x);
        const std::size_t out_dim = verts.front().size();

        MapSampleResult res;
        Rng rng(mix_seed(seed, 0x4a11));
        for (int i = 0; i < k; ++i) {
            MapSamplePoint p;
            p.y = verts[static_cast<std::size_t>(i)];
            p.lambda = Vec(static_cast<std::size_t>(k), 0.0);
            p.lambda[static_cast<std::size_t>(i)] = 1.0;
            p.unit_dir = Vec(out_dim, 0.0);
            res.points.push_back(std::move(p));
        }
        for (int i = k; i < n; ++i) {
            MapSamplePoint p;
            p.lambda = rng.simplex(static_cast<std::size_t>(k));
            p.y = Vec(out_dim, 0.0);
            for (int j = 0; j < k; ++j)
                p.y = axpy(std::move(p.y), p.lambda[static_cast<std::size_t>(j)],
                           verts[static_cast<std::size_t>(j)]);
            p.unit_dir = rng.unit_vector(out_dim);
            p.radial = r * rng.uniform();
            p.y = axpy(std::move(p.y), p.radial, p.unit_dir);
            res.points.push_back(std::move(p));
        }
        if (restrict_) {
            std::vector<MapSamplePoint> kept;
            for (auto& p : res.points)
                if (restrict_->contains(p.y, 1e-9)) kept.push_back(std::move(p));
            res.filtered_empty = kept.empty();
            res.points = std::move(kept);
        }
        return res;
    }

    MapSampleResult sample_inflated_flow(const Vec& x, int n, std::uint64_t seed) const {
        const double a = eval_amount(x);
        auto pool = pool_points(x, std::max(n, 8), seed);
        MapSampleResult res;
        if (pool.empty()) {
            res.filtered_empty = true;
            return res;
        }
        Rng rng(mix_seed(seed, 0xf10));
        const std::size_t out_dim = pool.front().size();
        for (int i = 0; i < n; ++i) {
            MapSamplePoint p;
            if (static_cast<std::size_t>(i) < pool.size()) {
                p.y = pool[static_cast<std::size_t>(i)];
            } else {
                p.lambda = rng.simplex(pool.size());
                p.y = Vec(out_dim, 0.0);
                for (std::size_t j = 0; j < pool.size(); ++j)
                    p.y = axpy(std::move(p.y), p.lambda[j], pool[j]);
            }
            p.unit_dir = rng.unit_vector(out_dim);
            p.radial = a * rng.uniform();
            p.y = axpy(std::move(p.y), p.radial, p.unit_dir);
            res.points.push_back(std::move(p));
        }
        return res;
    }

    MapSampleResult sample_inflated_jump(const Vec& x, int n, std::uint64_t seed) const {
        auto pool = pool_points(x, std::max(n, 8), seed);
        MapSampleResult res;
        if (pool.empty()) {
            res.filtered_empty = true;
            return res;
        }
        Rng rng(mix_seed(seed, 0x10e));
        const std::size_t out_dim = pool.front().size();
        for (int i = 0; i < n; ++i) {
            const Vec& y = pool[static_cast<std::size_t>(i) % pool.size()];
            MapSamplePoint p;
            p.unit_dir = rng.unit_vector(out_dim);
            p.radial = eval_amount(y) * (static_cast<std::size_t>(i) < pool.size() ? 0.0 : rng.uniform());
            p.y = axpy(Vec(y), p.radial, p.unit_dir);
            res.points.push_back(std::move(p));
        }
        return res;
    }

    Kind kind_ = Kind::Hull;
    int dim_ = 0;
    std::vector<VecExpr> vertices_;
    Expr radius_ = Expr::constant(0.0);
    std::shared_ptr<SetSpec> restrict_;
    std::vector<std::shared_ptr<MapSpec>> pieces_;   // Piecewise pieces / inflated base
    std::vector<std::shared_ptr<SetSpec>> guards_;   // Piecewise guards / inflated domain
    int arg_samples_ = 6;
};

struct InnerScLevel {
    double r = 0.0;
    double worst_gap = 0.0;
    bool vacuous = false;
    int n_args = 0;
};

struct InnerScReport {
    std::vector<InnerScLevel> levels;
    double tol = 0.0;
    bool consistent = false;
    bool vacuous = false;
    std::string verdict;
    Vec worst_x;  // argument realizing the final worst gap
};

// Finite inner-semicontinuity probe for M restricted to X at x: for each
// value y of M(x), the gap to nearby values M(x') must shrink along the
// radius schedule.
inline InnerScReport inner_sc_probe(
    const MapSpec& M, const Vec& x, const SetSpec& X, const ProbeSchedule& sched,
    std::uint64_t seed,
    const std::function<bool(const Vec&)>& value_filter = nullptr) {
    InnerScReport rep;
    rep.tol = sched.tol;

    const int ny = std::max<int>(8, M.is_hull() ? static_cast<int>(M.vertices().size()) + 4 : 8);
    auto ys_all = M.sample(x, ny, mix_seed(seed, 1));
    std::vector<Vec> ys;
    for (auto& y : ys_all)
        if (!value_filter || value_filter(y)) ys.push_back(std::move(y));

    Rng rng(mix_seed(seed, 2));
    for (std::size_t k = 0; k < sched.size(); ++k) {
        InnerScLevel lvl;
        lvl.r = sched.radii[k];
        auto args = sample_in_ball(X, x, lvl.r, sched.samples, rng);
        lvl.n_args = static_cast<int>(args.size());
        if (args.empty()) {
            lvl.vacuous = true;
            rep.levels.push_back(lvl);
            continue;
        }
        double worst = 0.0;
        Vec worst_arg = x;
        for (const auto& xp : args) {
            auto vals = M.sample(xp, ny, mix_seed(seed, 100 + k));
            std::vector<Vec> kept;
            for (auto& v : vals)
                if (!value_filter || value_filter(v)) kept.push_back(std::move(v));
            for (const auto& y : ys) {
                double gap = kInf;
                for (const auto& v : kept) gap = std::min(gap, dist(y, v));
                if (kept.empty()) gap = kInf;
                if (gap > worst) {
                    worst = gap;
                    worst_arg = xp;
                }
            }
        }
        lvl.worst_gap = ys.empty() ? 0.0 : worst;
        rep.levels.push_back(lvl);
        rep.worst_x = worst_arg;
    }

    const auto last_real = std::find_if(rep.levels.rbegin(), rep.levels.rend(),
                                        [](const InnerScLevel& l) { return !l.vacuous; });
    if (last_real == rep.levels.rend()) {
        rep.vacuous = true;
        rep.consistent = true;
        rep.verdict = "vacuous (no nearby arguments found in X)";
    } else if (last_real->worst_gap <= sched.tol) {
        rep.consistent = true;
        rep.verdict = "consistent with inner semicontinuity";
    } else {
        rep.consistent = false;
        rep.verdict = "not consistent with inner semicontinuity";
    }
    return rep;
}

}  // namespace hyreach

#endif
