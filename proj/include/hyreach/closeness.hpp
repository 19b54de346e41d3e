#ifndef HYREACH_CLOSENESS_HPP
#define HYREACH_CLOSENESS_HPP

#include "arc.hpp"
#include "schedule.hpp"

namespace hyreach {

namespace detail {

// least distance from v to the interpolated y(., j) over the strict window
// (t-eps, t+eps), or +inf when the window misses the interval
inline double best_match(const HybridArc& y, int j, double t, double eps, const Vec& v,
                         double* t_at = nullptr) {
    const HybridArc::Piece* q = nullptr;
    for (const auto& p : y.pieces())
        if (p.j == j) q = &p;
    if (!q) return kInf;
    const double shrink = eps * (1.0 - 1e-12);
    const double lo = std::max(q->times.front(), t - shrink);
    const double hi = std::min(q->times.back(), t + shrink);
    if (lo > hi) return kInf;

    double best = kInf;
    auto consider = [&](double tp, const Vec& val) {
        const double d = dist(val, v);
        if (d < best) {
            best = d;
            if (t_at) *t_at = tp;
        }
    };
    // endpoints of the window
    consider(lo, y.eval(lo, j));
    consider(hi, y.eval(hi, j));
    // interior minima per linear segment
    const auto& ts = q->times;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double a = std::max(ts[i], lo), b = std::min(ts[i + 1], hi);
        if (a >= b) continue;
        const Vec& va = q->states[i];
        const Vec& vb = q->states[i + 1];
        Vec dir = sub(vb, va);
        const double den = dot(dir, dir);
        if (den <= 0.0) continue;
        // y(t') = va + (t'-ts[i])/(ts[i+1]-ts[i]) * dir; minimize |v - y(t')|
        const double seg = ts[i + 1] - ts[i];
        double tstar = ts[i] + seg * dot(sub(v, va), dir) / den;
        tstar = std::min(std::max(tstar, a), b);
        const double alpha = (tstar - ts[i]) / seg;
        Vec val = va;
        for (std::size_t c = 0; c < val.size(); ++c) val[c] += alpha * dir[c];
        consider(tstar, val);
    }
    return best;
}

inline bool close_one_way(const HybridArc& x, const HybridArc& y, double tau, double eps) {
    const double strict = eps * (1.0 - 1e-12);
    bool ok = true;
    x.for_each_sample(tau, [&](double t, int j, const Vec& v) {
        if (!ok) return;
        if (best_match(y, j, t, eps, v) >= strict) ok = false;
    });
    return ok;
}

}  // namespace detail

// (tau,eps)-closeness of two hybrid arcs: every sample of each arc within the
// t+j <= tau budget has a partner at the same jump index within eps in time
// and state. Comparisons are strict; ties at exactly eps fail.
inline bool tau_eps_close(const HybridArc& x, const HybridArc& y, double tau, double eps) {
    require_dim(static_cast<std::size_t>(x.dim()), static_cast<std::size_t>(y.dim()),
                "tau_eps_close");
    if (eps <= 0.0) return false;
    return detail::close_one_way(x, y, tau, eps) && detail::close_one_way(y, x, tau, eps);
}

struct MarginResult {
    double eps = 0.0;  // least grid eps making the arcs (tau,eps)-close (upper bound)
    double grid = 0.0;
};

// bisection for the least eps on a grid; returns an upper bound at the grid
// resolution
inline MarginResult closeness_margin(const HybridArc& x, const HybridArc& y, double tau,
                                     double grid = 1e-4) {
    double hi = std::max(grid, 1e-3);
    double cap = 4.0 * (1.0 + tau);
    for (const auto& a : {&x, &y})
        (*a).for_each_sample(tau, [&](double, int, const Vec& v) {
            cap = std::max(cap, 4.0 * norm(v));
        });
    while (!tau_eps_close(x, y, tau, hi)) {
        hi *= 2.0;
        if (hi > cap) return {kInf, grid};
    }
    double lo = 0.0;
    while (hi - lo > grid) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0.0) break;
        if (tau_eps_close(x, y, tau, mid))
            hi = mid;
        else
            lo = mid;
    }
    return {hi, grid};
}

// symmetric Hausdorff distance between the sampled graphs
// {(t, j*j_weight, x(t,j)) : t+j <= tau}; arcs are subsampled to max_points
inline double graph_distance(const HybridArc& x, const HybridArc& y, double tau,
                             double j_weight = 1.0, std::size_t max_points = 1500) {
    auto collect = [&](const HybridArc& a) {
        std::vector<Vec> pts;
        a.for_each_sample(tau, [&](double t, int j, const Vec& v) {
            Vec p;
            p.reserve(v.size() + 2);
            p.push_back(t);
            p.push_back(j * j_weight);
            p.insert(p.end(), v.begin(), v.end());
            pts.push_back(std::move(p));
        });
        if (pts.size() > max_points) {
            std::vector<Vec> thin;
            const double stride = static_cast<double>(pts.size() - 1) /
                                  static_cast<double>(max_points - 1);
            for (std::size_t i = 0; i < max_points; ++i)
                thin.push_back(pts[static_cast<std::size_t>(i * stride)]);
            thin.back() = pts.back();
            pts = std::move(thin);
        }
        return pts;
    };
    auto A = collect(x);
    auto B = collect(y);
    if (A.empty() || B.empty()) return A.empty() && B.empty() ? 0.0 : kInf;
    auto directed = [](const std::vector<Vec>& P, const std::vector<Vec>& Q) {
        double worst = 0.0;
        for (const auto& p : P) {
            double best = kInf;
            for (const auto& q : Q) best = std::min(best, dist(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(A, B), directed(B, A));
}

// Convergence bookkeeping for a sequence of arcs against a target: per jump
// index, the interval entry points and their gaps; plus a uniform-boundedness
// check of the tails.
struct SequenceReport {
    struct PerJump {
        int j = 0;
        std::vector<double> entry_times;   // t_j^i per arc i (NaN when absent)
        std::vector<double> time_gaps;     // |t_j^i - t_j|
        std::vector<double> state_gaps;    // |x_i(t_j^i, j) - x(t_j, j)|
    };
    std::vector<PerJump> per_jump;
    std::vector<double> sup_norms;  // per arc over t+j <= tau
    bool bounded = true;
    double bound = 0.0;
    bool consistent = false;
    double tol = 0.0;
    std::string verdict;
};

inline SequenceReport sequence_diagnostics(const std::vector<HybridArc>& arcs,
                                           const HybridArc& target, double tau,
                                           double tol = 1e-2, double bound_cap = 1e6) {
    if (arcs.size() < 2) throw Error("sequence_diagnostics needs at least 2 arcs");
    SequenceReport rep;
    rep.tol = tol;

    for (const auto& a : arcs) {
        double s = 0.0;
        a.for_each_sample(tau, [&](double, int, const Vec& v) { s = std::max(s, norm(v)); });
        rep.sup_norms.push_back(s);
    }
    const std::size_t tail_start = arcs.size() / 2;
    for (std::size_t i = tail_start; i < arcs.size(); ++i)
        rep.bound = std::max(rep.bound, rep.sup_norms[i]);
    rep.bounded = rep.bound <= bound_cap;

    bool gaps_ok = true;
    for (const auto& tp : target.pieces()) {
        if (tp.times.front() + tp.j > tau + 1e-12) break;
        SequenceReport::PerJump pj;
        pj.j = tp.j;
        const double t_j = tp.times.front();
        const Vec& x_j = tp.states.front();
        for (const auto& a : arcs) {
            const HybridArc::Piece* q = nullptr;
            for (const auto& p : a.pieces())
                if (p.j == tp.j) q = &p;
            if (!q) {
                pj.entry_times.push_back(std::numeric_limits<double>::quiet_NaN());
                pj.time_gaps.push_back(kInf);
                pj.state_gaps.push_back(kInf);
                continue;
            }
            pj.entry_times.push_back(q->times.front());
            pj.time_gaps.push_back(std::fabs(q->times.front() - t_j));
            pj.state_gaps.push_back(dist(q->states.front(), x_j));
        }
        // tail of the sequence must be within tol
        for (std::size_t i = tail_start; i < arcs.size(); ++i) {
            if (i + 1 == arcs.size() &&
                (pj.time_gaps[i] > tol || pj.state_gaps[i] > tol))
                gaps_ok = false;
        }
        rep.per_jump.push_back(std::move(pj));
    }

    rep.consistent = gaps_ok && rep.bounded;
    rep.verdict = rep.consistent
                      ? "consistent with graphical convergence and local eventual boundedness"
                      : "not consistent with graphical convergence and local eventual boundedness";
    return rep;
}

}  // namespace hyreach

#endif
