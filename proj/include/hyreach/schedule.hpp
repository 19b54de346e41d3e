#ifndef HYREACH_SCHEDULE_HPP
#define HYREACH_SCHEDULE_HPP

#include <vector>

#include "common.hpp"

namespace hyreach {

// Finite stand-in for the "for every eps there exists delta" quantifiers:
// shrinking radii r_k with paired perturbation sizes delta_k.
struct ProbeSchedule {
    std::vector<double> radii;
    std::vector<double> deltas;
    int samples = 16;  // per level
    double tol = 1e-2;

    static ProbeSchedule defaults(int levels = 7, double r0 = 0.2) {
        ProbeSchedule s;
        for (int k = 0; k < levels; ++k) {
            const double r = r0 * std::pow(0.5, k);
            s.radii.push_back(r);
            s.deltas.push_back(r * r);
        }
        return s;
    }

    std::size_t size() const { return radii.size(); }

    double delta_at(std::size_t k) const {
        return deltas.empty() ? radii[k] * radii[k] : deltas[std::min(k, deltas.size() - 1)];
    }
};

}  // namespace hyreach

#endif
