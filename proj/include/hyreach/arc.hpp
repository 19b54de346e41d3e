#ifndef HYREACH_ARC_HPP
#define HYREACH_ARC_HPP

#include <optional>
#include <ostream>

#include "common.hpp"

namespace hyreach {

struct HybridInterval {
    int j = 0;
    double t_lo = 0.0;
    double t_hi = 0.0;
};

// Union of intervals [t_j, t_{j+1}] x {j}, contiguous, starting at t=0.
struct HybridTimeDomain {
    std::vector<HybridInterval> intervals;
    // set when a solver budget (not the dynamics) stopped integration; the
    // arc is then a truncation of a longer or complete solution
    bool budget_stopped = false;
};

inline bool validate_domain(const HybridTimeDomain& E, double tol = 0.0) {
    const auto& iv = E.intervals;
    if (iv.empty()) return false;
    if (iv.front().j != 0) return false;
    if (std::fabs(iv.front().t_lo) > tol) return false;
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (!(iv[i].t_lo <= iv[i].t_hi)) return false;
        if (i > 0) {
            if (iv[i].j != iv[i - 1].j + 1) return false;
            if (std::fabs(iv[i].t_lo - iv[i - 1].t_hi) > tol) return false;
        }
    }
    return true;
}

// Hybrid arc stored as dense per-interval samples with piecewise-linear
// interpolation in between.
class HybridArc {
  public:
    struct Piece {
        int j = 0;
        std::vector<double> times;   // strictly increasing, spans the interval
        std::vector<Vec> states;
    };

    explicit HybridArc(int dim) : dim_(dim) {}

    int dim() const { return dim_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    bool budget_stopped() const { return budget_stopped_; }
    void set_budget_stopped(bool b) { budget_stopped_ = b; }

    bool escaped() const { return escaped_; }
    std::pair<double, int> escape_estimate() const { return {escape_t_, escape_j_}; }
    void mark_escaped(double t, int j) {
        escaped_ = true;
        escape_t_ = t;
        escape_j_ = j;
    }

    void append_piece(Piece p) {
        if (p.times.empty() || p.times.size() != p.states.size())
            throw Error("arc piece needs matching nonempty grids");
        for (std::size_t i = 1; i < p.times.size(); ++i)
            if (!(p.times[i] > p.times[i - 1])) {
                if (p.times.size() == 1) break;
                throw Error("arc piece time grid must be strictly increasing");
            }
        for (const auto& s : p.states)
            require_dim(s.size(), static_cast<std::size_t>(dim_), "HybridArc piece");
        if (!pieces_.empty()) {
            const Piece& prev = pieces_.back();
            if (p.j != prev.j + 1) throw Error("arc pieces must have consecutive jump indices");
            if (std::fabs(p.times.front() - prev.times.back()) > 1e-12)
                throw Error("arc pieces must be contiguous in time");
        } else if (p.j != 0) {
            throw Error("first arc piece must have jump index 0");
        }
        pieces_.push_back(std::move(p));
    }

    static HybridArc single_point(Vec x) {
        HybridArc a(static_cast<int>(x.size()));
        Piece p;
        p.j = 0;
        p.times = {0.0};
        p.states = {std::move(x)};
        a.append_piece(std::move(p));
        return a;
    }

    HybridTimeDomain domain() const {
        HybridTimeDomain E;
        for (const auto& p : pieces_) E.intervals.push_back({p.j, p.times.front(), p.times.back()});
        E.budget_stopped = budget_stopped_;
        return E;
    }

    bool in_domain(double t, int j, double tol = 1e-9) const {
        const Piece* p = piece_for(j);
        return p && t >= p->times.front() - tol && t <= p->times.back() + tol;
    }

    Vec eval(double t, int j, double tol = 1e-9) const {
        const Piece* p = piece_for(j);
        if (!p) throw Error("hybrid time (t,j) outside the arc domain: no such jump index");
        if (t < p->times.front() - tol || t > p->times.back() + tol)
            throw Error("hybrid time (t,j) outside the arc domain");
        const double tc = std::min(std::max(t, p->times.front()), p->times.back());
        const auto& ts = p->times;
        std::size_t hi = std::lower_bound(ts.begin(), ts.end(), tc) - ts.begin();
        if (hi == 0) return p->states.front();
        if (hi >= ts.size()) return p->states.back();
        if (ts[hi] == tc) return p->states[hi];
        const std::size_t lo = hi - 1;
        const double alpha = (tc - ts[lo]) / (ts[hi] - ts[lo]);
        Vec out = p->states[lo];
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += alpha * (p->states[hi][i] - out[i]);
        return out;
    }

    // all t with (t,j) and (t,j+1) in the domain
    std::vector<std::pair<double, int>> jump_times() const {
        std::vector<std::pair<double, int>> out;
        for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
            out.emplace_back(pieces_[i].times.back(), pieces_[i].j);
        return out;
    }

    // dominating (T,J); absent when the arc is flagged as a truncation of a
    // complete solution
    std::optional<std::pair<double, int>> terminal_time() const {
        if (budget_stopped_ || pieces_.empty()) return std::nullopt;
        return std::make_pair(pieces_.back().times.back(), pieces_.back().j);
    }

    Vec start() const { return pieces_.front().states.front(); }
    Vec end() const { return pieces_.back().states.back(); }

    double max_tau() const {
        if (pieces_.empty()) return 0.0;
        return pieces_.back().times.back() + pieces_.back().j;
    }

    // samples (t, j, x) with t + j <= tau
    template <typename Fn>
    void for_each_sample(double tau, Fn&& fn) const {
        for (const auto& p : pieces_) {
            for (std::size_t i = 0; i < p.times.size(); ++i) {
                if (p.times[i] + p.j > tau + 1e-12) break;
                fn(p.times[i], p.j, p.states[i]);
            }
        }
    }

    // truncate at sample index (piece, sample); keeps the prefix
    HybridArc truncated(std::size_t piece_idx, std::size_t sample_idx) const {
        HybridArc out(dim_);
        for (std::size_t pi = 0; pi <= piece_idx && pi < pieces_.size(); ++pi) {
            Piece p = pieces_[pi];
            if (pi == piece_idx) {
                p.times.resize(sample_idx + 1);
                p.states.resize(sample_idx + 1);
            }
            out.append_piece(std::move(p));
        }
        out.budget_stopped_ = false;
        return out;
    }

    void write_csv(std::ostream& os) const {
        os << "j,t";
        for (int i = 1; i <= dim_; ++i) os << ",x" << i;
        os << "\n";
        char buf[40];
        for (const auto& p : pieces_) {
            for (std::size_t i = 0; i < p.times.size(); ++i) {
                os << p.j;
                std::snprintf(buf, sizeof buf, ",%.17g", p.times[i]);
                os << buf;
                for (double v : p.states[i]) {
                    std::snprintf(buf, sizeof buf, ",%.17g", v);
                    os << buf;
                }
                os << "\n";
            }
        }
    }

  private:
    const Piece* piece_for(int j) const {
        for (const auto& p : pieces_)
            if (p.j == j) return &p;
        return nullptr;
    }

    int dim_;
    std::vector<Piece> pieces_;
    bool budget_stopped_ = false;
    bool escaped_ = false;
    double escape_t_ = 0.0;
    int escape_j_ = 0;
};

// Dense sampling of (t,j) -> x over an explicit domain; used by the
// closed-form oracles.
template <typename Fn>
HybridArc arc_from_function(int dim, const std::vector<HybridInterval>& domain, Fn&& fn,
                            double step = 1e-3) {
    HybridArc arc(dim);
    for (const auto& iv : domain) {
        HybridArc::Piece p;
        p.j = iv.j;
        const double len = iv.t_hi - iv.t_lo;
        const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int i = 0; i <= n; ++i) {
            const double t = i == n ? iv.t_hi : iv.t_lo + len * i / n;
            p.times.push_back(t);
            p.states.push_back(fn(t, iv.j));
            if (len == 0.0) break;
        }
        arc.append_piece(std::move(p));
    }
    return arc;
}

}  // namespace hyreach

#endif
