#pragma once

#include <optional>

#include "core.hpp"
#include "norms.hpp"
#include "space.hpp"

namespace lpquant {

/// A simple function h = sum_i x_i 1_{A_i}: `centers` are the x_i and
/// `assignment` maps each atom to its cell. On an infinite-mass space the
/// background forms one more cell, and background_center must point at a
/// center that is exactly the zero vector (h has to vanish where f does, or
/// the L^p distance is infinite).
struct SimpleFunction {
    std::vector<Vec> centers;
    std::vector<int> assignment;
    std::optional<int> background_center;
};

inline void validate(const MeasureSpace& sp, const SimpleFunction& h) {
    detail::check(!h.centers.empty(), "simple function: needs >= 1 center");
    for (const Vec& c : h.centers) {
        detail::check(static_cast<int>(c.size()) == sp.dim(),
                      "simple function: center dimension mismatch");
        detail::check(detail::all_finite(c),
                      "simple function: centers must be finite");
    }
    detail::check(h.assignment.size() == sp.size(),
                  "simple function: every atom needs an assigned center");
    for (int idx : h.assignment)
        detail::check(idx >= 0 && idx < static_cast<int>(h.centers.size()),
                      "simple function: assignment index out of range");
    if (h.background_center) {
        const int b = *h.background_center;
        detail::check(b >= 0 && b < static_cast<int>(h.centers.size()),
                      "simple function: background index out of range");
        detail::check(detail::is_zero(h.centers[b]),
                      "simple function: background center must be the zero "
                      "vector");
    }
    if (sp.infinite_mass())
        detail::check(h.background_center.has_value(),
                      "simple function: infinite-mass space requires a zero "
                      "background center");
}

/// ||f - h||_p over the space; the background cell contributes 0.
inline double cost(const MeasureSpace& sp, const NormDescriptor& n, double p,
                   const SimpleFunction& h) {
    detail::check(p >= 1.0, "cost: p must be in [1, inf]");
    detail::check(n.dim == sp.dim(), "cost: norm/space dimension mismatch");
    validate(sp, h);
    if (p == kInf) {
        double m = 0.0;
        for (std::size_t a = 0; a < sp.size(); ++a)
            m = std::max(
                m, eval(n, detail::sub(sp.atom(a).value,
                                       h.centers[h.assignment[a]])));
        return m;
    }
    double s = 0.0;
    for (std::size_t a = 0; a < sp.size(); ++a)
        s += sp.atom(a).weight *
             std::pow(eval(n, detail::sub(sp.atom(a).value,
                                          h.centers[h.assignment[a]])),
                      p);
    return std::pow(s, 1.0 / p);
}

/// Reduced form: duplicate centers are merged into the lowest index holding
/// that value, and cells of zero mass are dropped (the background cell
/// counts as positive mass). Cost is unchanged; the result is idempotent.
inline SimpleFunction reduce(const MeasureSpace& sp, const SimpleFunction& h) {
    validate(sp, h);
    const int k = static_cast<int>(h.centers.size());

    // merge exact duplicates downwards
    std::vector<int> merged(k);
    for (int i = 0; i < k; ++i) {
        merged[i] = i;
        for (int j = 0; j < i; ++j)
            if (h.centers[j] == h.centers[i]) {
                merged[i] = j;
                break;
            }
    }

    std::vector<char> used(k, 0);
    for (int idx : h.assignment) used[merged[idx]] = 1;
    if (h.background_center) used[merged[*h.background_center]] = 1;

    std::vector<int> remap(k, -1);
    SimpleFunction out;
    for (int i = 0; i < k; ++i)
        if (merged[i] == i && used[i]) {
            remap[i] = static_cast<int>(out.centers.size());
            out.centers.push_back(h.centers[i]);
        }
    out.assignment.resize(h.assignment.size());
    for (std::size_t a = 0; a < h.assignment.size(); ++a)
        out.assignment[a] = remap[merged[h.assignment[a]]];
    if (h.background_center)
        out.background_center = remap[merged[*h.background_center]];
    return out;
}

/// Number of distinct values h takes on cells of positive mass (including
/// the background cell on infinite-mass spaces).
inline int degree(const MeasureSpace& sp, const SimpleFunction& h) {
    return static_cast<int>(reduce(sp, h).centers.size());
}

/// Replaces every center with ||x_i|| > threshold by 0 and merges the
/// affected cells into the zero cell. Requires p < inf; the result g obeys
/// cost(g)^p <= cost(h)^p + sum_{a in B} w_a ||f_a||^p with B the union of
/// the zeroed cells.
inline SimpleFunction bounded_reduction(const MeasureSpace& sp,
                                        const NormDescriptor& n, double p,
                                        const SimpleFunction& h,
                                        double threshold) {
    detail::check(std::isfinite(p) && p >= 1.0,
                  "bounded_reduction: p must be finite (p = inf has no "
                  "mass/threshold tradeoff)");
    detail::check(std::isfinite(threshold) && threshold > 0.0,
                  "bounded_reduction: threshold must be positive and finite");
    detail::check(n.dim == sp.dim(),
                  "bounded_reduction: norm/space dimension mismatch");
    validate(sp, h);
    SimpleFunction g = h;
    bool any = false;
    for (Vec& c : g.centers)
        if (eval(n, c) > threshold) {
            c.assign(c.size(), 0.0);
            any = true;
        }
    if (!any) return g;
    return reduce(sp, g);
}

}  // namespace lpquant
