#pragma once

// Shared fixtures for the test binaries: deterministic instance generators
// and small numerical oracles (finite differences, golden section, grid
// search) that are independent of the library's own solvers.

#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "lpquant/lpquant.hpp"

namespace testutil {

using lpquant::Atom;
using lpquant::MeasureSpace;
using lpquant::Vec;

inline MeasureSpace make_space(
    const std::vector<std::pair<double, Vec>>& rows, bool infinite = false) {
    std::vector<Atom> atoms;
    for (const auto& [w, f] : rows) {
        Atom a;
        a.weight = w;
        a.value = f;
        atoms.push_back(std::move(a));
    }
    return MeasureSpace::load(std::move(atoms),
                              static_cast<int>(rows.at(0).second.size()),
                              infinite);
}

inline MeasureSpace space1d(const std::vector<double>& vals,
                            std::vector<double> weights = {},
                            bool infinite = false) {
    if (weights.empty()) weights.assign(vals.size(), 1.0);
    std::vector<std::pair<double, Vec>> rows;
    for (std::size_t i = 0; i < vals.size(); ++i)
        rows.emplace_back(weights.at(i), Vec{vals[i]});
    return make_space(rows, infinite);
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * lpquant::detail::unit_double(g);
}

inline Vec random_vec(std::mt19937_64& g, int d, double lo, double hi) {
    Vec v(d);
    for (double& x : v) x = uniform(g, lo, hi);
    return v;
}

inline Vec random_unit(std::mt19937_64& g, int d) {
    for (;;) {
        Vec v = random_vec(g, d, -1.0, 1.0);
        const double n = lpquant::detail::norm2(v);
        if (n < 1e-3) continue;
        for (double& x : v) x /= n;
        return v;
    }
}

inline MeasureSpace random_space(std::mt19937_64& g, int n, int d,
                                 double lo = 0.0, double hi = 1.0,
                                 double wlo = 0.1, double whi = 1.0,
                                 bool infinite = false) {
    std::vector<std::pair<double, Vec>> rows;
    for (int i = 0; i < n; ++i)
        rows.emplace_back(uniform(g, wlo, whi), random_vec(g, d, lo, hi));
    return make_space(rows, infinite);
}

// argmin of a unimodal function on [lo, hi] by golden-section search
inline double golden_min(const std::function<double(double)>& f, double lo,
                         double hi, int iters = 200) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && b - a > 1e-14 * (1.0 + std::fabs(a)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline double central_diff(const std::function<double(double)>& f, double t0,
                           double h = 1e-6) {
    return (f(t0 + h) - f(t0 - h)) / (2.0 * h);
}

// exhaustive grid argmin over a box, for minimax cross-checks
inline std::pair<Vec, double> grid_argmin(
    const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi,
    int res) {
    const int d = static_cast<int>(lo.size());
    std::vector<int> idx(d, 0);
    Vec x(d), best_x(d);
    double best = lpquant::kInf;
    for (;;) {
        for (int j = 0; j < d; ++j)
            x[j] = lo[j] + idx[j] * (hi[j] - lo[j]) / (res - 1);
        const double v = f(x);
        if (v < best) {
            best = v;
            best_x = x;
        }
        int pos = 0;
        while (pos < d) {
            if (++idx[pos] < res) break;
            idx[pos] = 0;
            ++pos;
        }
        if (pos == d) break;
    }
    return {best_x, best};
}

inline lpquant::Cell all_atoms(const MeasureSpace& sp) {
    lpquant::Cell cell(sp.size());
    for (std::size_t a = 0; a < sp.size(); ++a)
        cell[a] = static_cast<int>(a);
    return cell;
}

}  // namespace testutil
