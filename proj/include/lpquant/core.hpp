#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpquant {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown on invalid inputs and broken preconditions.
class error : public std::runtime_error {
  public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void check(bool ok, const std::string& msg) {
    if (!ok) throw error(msg);
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

// y += t * x
inline void axpy(Vec& y, double t, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * x[i];
}

inline bool all_finite(const Vec& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

inline bool is_zero(const Vec& a) {
    for (double v : a)
        if (v != 0.0) return false;
    return true;
}

// Uniform double in [0, 1) from the standardized mt19937_64 stream.
// Distributions from <random> are implementation-defined; this is not.
inline double unit_double(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Index into `cumulative` (nonempty, nondecreasing, last > 0) picked
// proportionally to the increments.
inline std::size_t pick_by_cumulative(const std::vector<double>& cumulative,
                                      std::mt19937_64& g) {
    const double u = unit_double(g) * cumulative.back();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cumulative[mid] > u)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

}  // namespace detail
}  // namespace lpquant
