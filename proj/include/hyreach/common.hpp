#ifndef HYREACH_COMMON_HPP
#define HYREACH_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyreach {

using Vec = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Raised by expression evaluation when the result is not finite
// (sqrt of a negative, division by zero, overflow).
struct EvalDomainError : Error {
    using Error::Error;
};

struct ParseError : Error {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t off)
        : Error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

struct EmptySetError : Error {
    using Error::Error;
};

struct SolveError : Error {
    using Error::Error;
};

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw DimensionError(std::string(what) + ": dimension mismatch, got " +
                             std::to_string(got) + ", expected " + std::to_string(want));
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec add(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec sub(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec scaled(Vec a, double c) {
    for (double& v : a) v *= c;
    return a;
}

// a + c*b
inline Vec axpy(Vec a, double c, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
    return a;
}

inline bool all_finite(const Vec& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

// splitmix64: tiny, seedable, portable. Everything stochastic in the library
// derives from explicit seeds through this.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    double normal() {
        // Marsaglia polar
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    Vec unit_vector(std::size_t dim) {
        for (;;) {
            Vec v(dim);
            for (auto& x : v) x = normal();
            const double n = norm(v);
            if (n > 1e-12) return scaled(std::move(v), 1.0 / n);
        }
    }

    // uniform in the closed unit ball
    Vec in_ball(std::size_t dim) {
        Vec v = unit_vector(dim);
        const double r = std::pow(uniform(), 1.0 / static_cast<double>(dim));
        return scaled(std::move(v), r);
    }

    // uniform barycentric weights on the k-simplex
    Vec simplex(std::size_t k) {
        Vec w(k);
        double s = 0.0;
        for (auto& x : w) {
            x = -std::log(1.0 - uniform());
            s += x;
        }
        for (auto& x : w) x /= s;
        return w;
    }

  private:
    std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace hyreach

#endif
