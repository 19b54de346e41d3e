#ifndef HYREACH_TEST_HELPERS_HPP
#define HYREACH_TEST_HELPERS_HPP

#include "hyreach/arc.hpp"
#include "hyreach/common.hpp"
#include "hyreach/fixtures.hpp"

namespace hyreach::testing {

// small random arc for property tests: few pieces, few samples
inline HybridArc random_arc(Rng& rng, int dim, int max_pieces = 3, int max_samples = 6,
                            double max_len = 2.0) {
    HybridArc arc(dim);
    const int n_pieces = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_pieces)));
    double t = 0.0;
    for (int j = 0; j < n_pieces; ++j) {
        HybridArc::Piece p;
        p.j = j;
        const int n =
            1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_samples)));
        const double len = (j + 1 == n_pieces && rng.uniform() < 0.3)
                               ? 0.0
                               : rng.uniform(0.0, max_len / n_pieces);
        p.times.push_back(t);
        Vec v(static_cast<std::size_t>(dim));
        for (auto& c : v) c = rng.uniform(-2.0, 2.0);
        p.states.push_back(v);
        if (len > 0.0) {
            for (int i = 1; i <= n; ++i) {
                p.times.push_back(t + len * i / n);
                Vec w = p.states.back();
                for (auto& c : w) c += rng.uniform(-0.3, 0.3);
                p.states.push_back(std::move(w));
            }
        }
        t = p.times.back();
        arc.append_piece(std::move(p));
    }
    return arc;
}

// oracle arc builders for the worked examples
inline HybridArc oracle_arc(const ExampleFixture& fx, const Vec& x0, double t_cap,
                            int max_jumps = 8, double step = 1e-3) {
    auto jumps = fx.oracle_jumps(x0, t_cap);
    std::vector<HybridInterval> dom;
    double prev = 0.0;
    int j = 0;
    for (double tj : jumps) {
        if (j >= max_jumps) break;
        dom.push_back({j, prev, tj});
        prev = tj;
        ++j;
    }
    dom.push_back({j, prev, t_cap});
    // drop a trailing empty interval when the cap coincides with a jump
    if (dom.back().t_hi < dom.back().t_lo) dom.pop_back();
    return arc_from_function(fx.system.dim, dom,
                             [&](double t, int jj) {
                                 auto v = fx.oracle(x0, t, jj);
                                 if (!v) throw Error("oracle domain mismatch");
                                 return *v;
                             },
                             step);
}

}  // namespace hyreach::testing

#endif
