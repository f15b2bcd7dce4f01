#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>

#include "core.hpp"
#include "norms.hpp"
#include "pmean.hpp"
#include "space.hpp"

namespace lpquant {

struct OracleOptions {
    double max_assignments = 17'000'000.0;  // guard on the k^n enumeration
    double mean_tol = 1e-11;  // per-group solves, tighter than any consumer
    int max_atoms = 12;
    int max_groups = 4;
    bool pinned_zero = false;  // force the pinned-zero regime on finite spaces
};

struct OracleResult {
    double cost = 0.0;            // ||f - g||_p at the optimum
    std::vector<Cell> partition;  // nonempty groups; the forced zero group,
                                  // when the regime pins one, is index 0
    std::vector<Vec> centers;     // per group, same order
    std::uint64_t enumerated = 0;
};

/// Global optimum by exhaustion: every assignment of atoms to at most k
/// groups, each group scored at its p-th mean. No pruning beyond fixing
/// atom 0 in group 0 (plain symmetry); its only virtue is being obviously
/// correct. Guards keep it at desk scale.
inline OracleResult brute_force(const MeasureSpace& sp,
                                const NormDescriptor& n, double p, int k,
                                const OracleOptions& opts = {}) {
    detail::check(std::isfinite(p) && p >= 1.0,
                  "brute_force: p must be in [1, inf)");
    detail::check(n.dim == sp.dim(), "brute_force: dimension mismatch");
    detail::check(k >= 1, "brute_force: k must be >= 1");
    const int nn = static_cast<int>(sp.size());
    detail::check(nn <= opts.max_atoms && nn <= 20,
                  "brute_force: instance too large (atoms)");
    detail::check(k <= opts.max_groups,
                  "brute_force: instance too large (groups)");
    detail::check(std::pow(double(k), double(nn)) <= opts.max_assignments,
                  "brute_force: instance too large (assignments)");
    const bool pinned = sp.infinite_mass() || opts.pinned_zero;
    const int free_atoms = pinned ? nn : nn - 1;

    // group p-costs and centers, solved once per atom subset
    std::unordered_map<std::uint32_t, std::pair<double, Vec>> memo;
    const auto group = [&](std::uint32_t mask) -> const std::pair<double, Vec>& {
        auto it = memo.find(mask);
        if (it == memo.end()) {
            Cell cell;
            for (int a = 0; a < nn; ++a)
                if (mask >> a & 1u) cell.push_back(a);
            PMeanOptions o;
            o.tol = opts.mean_tol;
            o.certify = true;
            PMeanResult r = solve_pmean(sp, cell, n, p, o);
            it = memo.emplace(mask, std::pair<double, Vec>{
                                        r.value, std::move(r.point)})
                     .first;
        }
        return it->second;
    };

    std::vector<double> zero_cost(nn, 0.0);  // per-atom cost at the 0 center
    if (pinned)
        for (int a = 0; a < nn; ++a)
            zero_cost[a] =
                sp.atom(a).weight * std::pow(eval(n, sp.atom(a).value), p);

    std::vector<int> label(free_atoms, 0);
    std::vector<std::uint32_t> masks(k);
    double best_sum = kInf;
    std::vector<std::uint32_t> best_masks(k, 0u);
    std::uint64_t count = 0;
    for (;;) {
        ++count;
        std::fill(masks.begin(), masks.end(), 0u);
        if (!pinned) masks[0] |= 1u;
        for (int a = 0; a < free_atoms; ++a)
            masks[label[a]] |= 1u << (pinned ? a : a + 1);
        double sum = 0.0;
        for (int g = 0; g < k; ++g) {
            if (masks[g] == 0u) continue;
            if (pinned && g == 0) {
                for (int a = 0; a < nn; ++a)
                    if (masks[g] >> a & 1u) sum += zero_cost[a];
            } else {
                sum += group(masks[g]).first;
            }
        }
        if (sum < best_sum) {
            best_sum = sum;
            best_masks = masks;
        }
        int pos = 0;
        while (pos < free_atoms) {
            if (++label[pos] < k) break;
            label[pos] = 0;
            ++pos;
        }
        if (pos == free_atoms) break;
    }

    OracleResult res;
    res.enumerated = count;
    res.cost = std::pow(best_sum, 1.0 / p);
    for (int g = 0; g < k; ++g) {
        const std::uint32_t mask = best_masks[g];
        const bool zero_group = pinned && g == 0;
        if (mask == 0u && !zero_group) continue;
        Cell cell;
        for (int a = 0; a < nn; ++a)
            if (mask >> a & 1u) cell.push_back(a);
        res.partition.push_back(std::move(cell));
        res.centers.push_back(zero_group ? Vec(sp.dim(), 0.0)
                                         : group(mask).second);
    }
    return res;
}

/// Certified lower bound for inf_x M_p(f, A)(x) over R^d: the grid minimum
/// over the box minus the Lipschitz slack covering the half-diagonal of one
/// grid cell. The box must contain the coercivity ball around the origin
/// (every sublevel point of the weighted-mean value), so the box minimum is
/// the global one.
inline double grid_lower_bound(const MeasureSpace& sp, const Cell& cell,
                               const NormDescriptor& n, double p,
                               const Vec& lo, const Vec& hi, int resolution) {
    detail::check(p >= 1.0, "grid_lower_bound: p must be in [1, inf]");
    detail::check(n.dim == sp.dim(), "grid_lower_bound: dimension mismatch");
    detail::check_cell(sp, cell);
    const int d = sp.dim();
    detail::check(static_cast<int>(lo.size()) == d &&
                      static_cast<int>(hi.size()) == d,
                  "grid_lower_bound: box dimension mismatch");
    detail::check(detail::all_finite(lo) && detail::all_finite(hi),
                  "grid_lower_bound: box must be finite");
    for (int j = 0; j < d; ++j)
        detail::check(hi[j] > lo[j], "grid_lower_bound: box must have volume");
    detail::check(resolution >= 2, "grid_lower_bound: resolution must be >= 2");
    detail::check(std::pow(double(resolution), double(d)) <= 1e7,
                  "grid_lower_bound: grid too large");

    const double ub =
        m_p_value(sp, cell, n, p, detail::weighted_mean(sp, cell));
    const double r2 = detail::coercive_radius2(sp, cell, n, p, ub);
    for (int j = 0; j < d; ++j)
        detail::check(lo[j] <= -r2 && hi[j] >= r2,
                      "grid_lower_bound: box too small to contain all "
                      "minimizers");

    Vec h(d);
    double diag_sq = 0.0, rbox_sq = 0.0;
    for (int j = 0; j < d; ++j) {
        h[j] = (hi[j] - lo[j]) / (resolution - 1);
        diag_sq += h[j] * h[j];
        rbox_sq += std::max(lo[j] * lo[j], hi[j] * hi[j]);
    }
    const double lip = detail::lipschitz2(sp, cell, n, p, std::sqrt(rbox_sq));

    std::vector<int> idx(d, 0);
    Vec x(d);
    double minv = kInf;
    for (;;) {
        for (int j = 0; j < d; ++j) x[j] = lo[j] + idx[j] * h[j];
        minv = std::min(minv, m_p_value(sp, cell, n, p, x));
        int pos = 0;
        while (pos < d) {
            if (++idx[pos] < resolution) break;
            idx[pos] = 0;
            ++pos;
        }
        if (pos == d) break;
    }
    return std::max(0.0, minv - lip * 0.5 * std::sqrt(diag_sq));
}

}  // namespace lpquant
