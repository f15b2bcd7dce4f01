#pragma once

#include <thread>
#include <utility>

#include "core.hpp"
#include "norms.hpp"
#include "pmean.hpp"
#include "simple_function.hpp"
#include "space.hpp"
#include "voronoi.hpp"

namespace lpquant {

struct QuantizerConfig {
    double p = 2.0;  // in [1, inf]
    int k = 1;
    int restarts = 1;
    std::uint64_t seed = 0;
    double tol = 1e-9;
    int max_iter = 10000;
    double tie_tol = 1e-9;
    int jobs = 1;             // concurrent restarts
    bool pinned_zero = false;  // force the pinned-zero regime on finite spaces
};

/// Evidence that a run reached the structure of a minimizer: residual 0
/// means the assignment is the f-Voronoi refinement of the centers, the
/// per-cell eps certify each center as an eps-p-th mean of its cell, and
/// for smooth norms with 1 < p < inf the boundary mass is expected to be 0
/// (simple special form). No simple-form claim is attached for p = inf.
struct Certificate {
    double voronoi_residual = 0.0;
    std::vector<double> pmean_eps;  // per center of the reduced function
    double boundary_mass = 0.0;
    int degree = 0;
};

struct QuantizeReport {
    SimpleFunction best;  // reduced
    double cost = 0.0;
    Certificate certificate;
    // per restart: (iteration, cost), nonincreasing in every restart
    std::vector<std::vector<std::pair<int, double>>> trace;
    std::uint64_t seed_used = 0;
};

/// The value of the atom contributing the largest assigned-cost term
/// w_a ||f_a - x_{c(a)}||^p (the distance itself for p = inf): the natural
/// point to split off when a cell empties. Fails when every atom sits
/// exactly on its center, since no split can improve anything then.
inline Vec reseed_split(const MeasureSpace& sp, const NormDescriptor& n,
                        double p, const SimpleFunction& current) {
    detail::check(p >= 1.0, "reseed_split: p must be in [1, inf]");
    validate(sp, current);
    double best = 0.0;
    int arg = -1;
    for (std::size_t a = 0; a < sp.size(); ++a) {
        const double d = eval(
            n, detail::sub(sp.atom(a).value,
                           current.centers[current.assignment[a]]));
        const double m =
            p == kInf ? d : sp.atom(a).weight * std::pow(d, p);
        if (m > best) {
            best = m;
            arg = static_cast<int>(a);
        }
    }
    detail::check(arg >= 0,
                  "reseed_split: no split available (every atom sits on its "
                  "center)");
    return sp.atom(arg).value;
}

namespace detail {

inline double assignment_cost(const MeasureSpace& sp, const NormDescriptor& n,
                              double p, const std::vector<Vec>& centers,
                              const std::vector<int>& assignment) {
    if (p == kInf) {
        double m = 0.0;
        for (std::size_t a = 0; a < sp.size(); ++a)
            m = std::max(m, eval(n, sub(sp.atom(a).value,
                                        centers[assignment[a]])));
        return m;
    }
    double s = 0.0;
    for (std::size_t a = 0; a < sp.size(); ++a)
        s += sp.atom(a).weight *
             std::pow(eval(n, sub(sp.atom(a).value, centers[assignment[a]])),
                      p);
    return std::pow(s, 1.0 / p);
}

inline std::vector<int> project_assign(const MeasureSpace& sp,
                                       const NormDescriptor& n,
                                       const std::vector<Vec>& centers,
                                       double tie_tol) {
    const VoronoiDiagram vd = VoronoiDiagram::create(centers, tie_tol, n);
    std::vector<int> out(sp.size());
    for (std::size_t a = 0; a < sp.size(); ++a)
        out[a] = assign(vd, sp.atom(a).value, n);
    return out;
}

inline std::vector<Cell> cells_of(const std::vector<int>& assignment,
                                  std::size_t k) {
    std::vector<Cell> cells(k);
    for (std::size_t a = 0; a < assignment.size(); ++a)
        cells[assignment[a]].push_back(static_cast<int>(a));
    return cells;
}

// min pairwise separation and diameter of a center set
inline std::pair<double, double> sep_diam(const std::vector<Vec>& centers,
                                          const NormDescriptor& n) {
    double sep = kInf, diam = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            const double d = eval(n, sub(centers[i], centers[j]));
            sep = std::min(sep, d);
            diam = std::max(diam, d);
        }
    return {sep, diam};
}

inline std::vector<Vec> init_centers(const MeasureSpace& sp,
                                     const NormDescriptor& n, double p, int k,
                                     std::mt19937_64& rng, bool pinned) {
    std::vector<Vec> centers;
    if (pinned) centers.push_back(Vec(sp.dim(), 0.0));
    std::vector<double> cum(sp.size());
    if (centers.empty()) {
        double s = 0.0;
        for (std::size_t a = 0; a < sp.size(); ++a)
            cum[a] = (s += sp.atom(a).weight);
        centers.push_back(sp.atom(pick_by_cumulative(cum, rng)).value);
    }
    std::vector<double> dmin(sp.size(), kInf);
    std::size_t fresh = 0;  // centers already folded into dmin
    while (static_cast<int>(centers.size()) < k) {
        for (std::size_t a = 0; a < sp.size(); ++a)
            for (std::size_t i = fresh; i < centers.size(); ++i)
                dmin[a] = std::min(
                    dmin[a], eval(n, sub(sp.atom(a).value, centers[i])));
        fresh = centers.size();
        double s = 0.0;
        for (std::size_t a = 0; a < sp.size(); ++a) {
            const double w = p == kInf
                                 ? dmin[a]
                                 : sp.atom(a).weight * std::pow(dmin[a], p);
            cum[a] = (s += w);
        }
        if (!(s > 0.0)) break;  // every value already is a center
        centers.push_back(sp.atom(pick_by_cumulative(cum, rng)).value);
    }
    return centers;
}

struct LloydState {
    std::vector<Vec> centers;
    std::vector<int> assignment;
    double cost = kInf;
    std::vector<std::pair<int, double>> trace;
    std::vector<std::vector<Vec>> history;  // center snapshots when recording
    int last_iter = 0;
};

// Safeguarded mean step: a new center is adopted only if it strictly lowers
// its cell objective and stays separated from the other centers, so the
// iterate cost is nonincreasing and the diagram remains valid under inexact
// inner solves.
inline bool mean_step(const MeasureSpace& sp, const NormDescriptor& n,
                      const QuantizerConfig& cfg, bool pinned,
                      std::vector<Vec>& centers,
                      const std::vector<int>& assignment, bool certified) {
    const std::vector<Cell> cells = cells_of(assignment, centers.size());
    bool moved = false;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (pinned && i == 0) continue;
        if (cells[i].empty()) continue;
        const double cur = m_p_value(sp, cells[i], n, cfg.p, centers[i]);
        PMeanResult r;
        if (cfg.p == kInf) {
            r = chebyshev_center(sp, cells[i], n, cfg.tol);
        } else {
            PMeanOptions o;
            o.tol = cfg.tol;
            o.max_iter = certified ? cfg.max_iter
                                   : std::min(cfg.max_iter, 300);
            o.start = centers[i];
            o.certify = certified;
            r = solve_pmean(sp, cells[i], n, cfg.p, o);
        }
        if (!(r.value < cur)) continue;
        const Vec old = centers[i];
        centers[i] = r.point;
        const auto [sep, diam] = sep_diam(centers, n);
        if (centers.size() >= 2 && sep <= cfg.tie_tol * diam)
            centers[i] = old;  // would collide: keep the previous center
        else
            moved = true;
    }
    return moved;
}

// Replaces empty cells' centers through reseed_split (dropping them only
// when no split exists); returns whether anything changed. The assignment
// is freshly projected after every repair.
inline bool repair_empty(const MeasureSpace& sp, const NormDescriptor& n,
                         const QuantizerConfig& cfg, bool pinned,
                         std::vector<Vec>& centers,
                         std::vector<int>& assignment) {
    bool changed = false;
    const int max_attempts = 2 * static_cast<int>(centers.size()) + 2;
    for (int attempt = 0; attempt <= max_attempts; ++attempt) {
        std::vector<int> count(centers.size(), 0);
        for (int c : assignment) ++count[c];
        int empty = -1;
        for (std::size_t i = pinned ? 1 : 0; i < centers.size(); ++i)
            if (count[i] == 0) {
                empty = static_cast<int>(i);
                break;
            }
        if (empty < 0) return changed;

        SimpleFunction cur;
        cur.centers = centers;
        cur.assignment = assignment;
        if (pinned) cur.background_center = 0;
        bool dropped = false;
        if (attempt < max_attempts) {
            try {
                centers[empty] = reseed_split(sp, n, cfg.p, cur);
            } catch (const error&) {
                dropped = true;
            }
        } else {
            dropped = true;  // attempts exhausted: stop reseeding
        }
        if (dropped) {
            // remove every empty non-pinned center; indices shift down
            std::vector<int> remap(centers.size(), -1);
            std::vector<Vec> kept;
            for (std::size_t i = 0; i < centers.size(); ++i)
                if (count[i] > 0 || (pinned && i == 0)) {
                    remap[i] = static_cast<int>(kept.size());
                    kept.push_back(std::move(centers[i]));
                }
            centers = std::move(kept);
            for (int& c : assignment) c = remap[c];
            return true;
        }
        assignment = project_assign(sp, n, centers, cfg.tie_tol);
        changed = true;
    }
    return changed;
}

inline LloydState run_restart(const MeasureSpace& sp, const NormDescriptor& n,
                              const QuantizerConfig& cfg, bool pinned,
                              int restart, bool record) {
    std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(restart));
    LloydState st;
    st.centers = init_centers(sp, n, cfg.p, cfg.k, rng, pinned);
    st.assignment = project_assign(sp, n, st.centers, cfg.tie_tol);
    repair_empty(sp, n, cfg, pinned, st.centers, st.assignment);
    st.cost = assignment_cost(sp, n, cfg.p, st.centers, st.assignment);
    st.trace.emplace_back(0, st.cost);
    if (record) st.history.push_back(st.centers);

    for (int it = 1; it <= cfg.max_iter; ++it) {
        st.last_iter = it;
        mean_step(sp, n, cfg, pinned, st.centers, st.assignment, false);
        std::vector<int> na = project_assign(sp, n, st.centers, cfg.tie_tol);
        bool same = na == st.assignment;
        st.assignment = std::move(na);
        if (repair_empty(sp, n, cfg, pinned, st.centers, st.assignment))
            same = false;
        const double c =
            assignment_cost(sp, n, cfg.p, st.centers, st.assignment);
        st.trace.emplace_back(it, c);
        if (record) st.history.push_back(st.centers);
        const double prev = st.cost;
        st.cost = c;
        if (same) break;                                       // primary stop
        if (prev - c <= cfg.tol * std::max(prev, 1e-30)) break;
        if (c == 0.0) break;
    }
    return st;
}

// Certified alternation on the winning restart: solve each cell to its
// certificate, reproject, repeat to a fixed point (bounded rounds).
inline void polish(const MeasureSpace& sp, const NormDescriptor& n,
                   const QuantizerConfig& cfg, bool pinned, LloydState& st,
                   bool record) {
    for (int round = 0; round < 20; ++round) {
        const bool moved =
            mean_step(sp, n, cfg, pinned, st.centers, st.assignment, true);
        std::vector<int> na = project_assign(sp, n, st.centers, cfg.tie_tol);
        bool same = na == st.assignment;
        st.assignment = std::move(na);
        if (repair_empty(sp, n, cfg, pinned, st.centers, st.assignment))
            same = false;
        if (moved || !same) {
            st.cost = assignment_cost(sp, n, cfg.p, st.centers, st.assignment);
            ++st.last_iter;
            st.trace.emplace_back(st.last_iter, st.cost);
            if (record) st.history.push_back(st.centers);
        }
        if (same && !moved) break;
    }
}

inline void check_config(const MeasureSpace& sp, const NormDescriptor& n,
                         const QuantizerConfig& cfg) {
    check(n.dim == sp.dim(), "quantizer: norm/space dimension mismatch");
    check(cfg.p >= 1.0, "quantizer: p must be in [1, inf]");
    check(cfg.k >= 1, "quantizer: k must be >= 1");
    check(cfg.restarts >= 1, "quantizer: restarts must be >= 1");
    check(cfg.tol > 0.0 && std::isfinite(cfg.tol), "quantizer: tol must be > 0");
    check(cfg.max_iter >= 1, "quantizer: max_iter must be >= 1");
    check(std::isfinite(cfg.tie_tol) && cfg.tie_tol >= 0.0,
          "quantizer: tie_tol must be >= 0");
    check(cfg.jobs >= 1, "quantizer: jobs must be >= 1");
}

// Distinct atom values in first-occurrence order (exact equality).
inline std::vector<Vec> distinct_values(const MeasureSpace& sp) {
    std::vector<Vec> vals;
    for (const Atom& a : sp.atoms()) {
        bool seen = false;
        for (const Vec& v : vals)
            if (v == a.value) {
                seen = true;
                break;
            }
        if (!seen) vals.push_back(a.value);
    }
    return vals;
}

inline SimpleFunction exact_fit(const MeasureSpace& sp,
                                const std::vector<Vec>& vals, bool pinned) {
    SimpleFunction h;
    if (pinned) {
        h.centers.push_back(Vec(sp.dim(), 0.0));
        h.background_center = 0;
    }
    for (const Vec& v : vals)
        if (!(pinned && is_zero(v))) h.centers.push_back(v);
    h.assignment.resize(sp.size());
    for (std::size_t a = 0; a < sp.size(); ++a)
        for (std::size_t i = 0; i < h.centers.size(); ++i)
            if (h.centers[i] == sp.atom(a).value) {
                h.assignment[a] = static_cast<int>(i);
                break;
            }
    return h;
}

}  // namespace detail

/// Structure certificate for a reduced simple function g against the
/// config's p and tolerances.
inline Certificate certify(const MeasureSpace& sp, const NormDescriptor& n,
                           const QuantizerConfig& cfg,
                           const SimpleFunction& g) {
    detail::check_config(sp, n, cfg);
    validate(sp, g);
    const VoronoiDiagram vd =
        VoronoiDiagram::create(g.centers, cfg.tie_tol, n);
    const double tie = vd.effective_tie;
    const bool pinned_bg = g.background_center &&
                           (sp.infinite_mass() || cfg.pinned_zero);

    Certificate cert;
    double residual = 0.0;
    for (std::size_t a = 0; a < sp.size(); ++a) {
        double dmin = kInf;
        for (const Vec& c : vd.centers)
            dmin = std::min(dmin, eval(n, detail::sub(sp.atom(a).value, c)));
        const double da =
            eval(n, detail::sub(sp.atom(a).value,
                                g.centers[g.assignment[a]]));
        residual += sp.atom(a).weight * std::max(0.0, da - dmin - tie);
    }
    cert.voronoi_residual = residual;

    const std::vector<Cell> cells =
        detail::cells_of(g.assignment, g.centers.size());
    cert.pmean_eps.resize(g.centers.size(), 0.0);
    for (std::size_t i = 0; i < g.centers.size(); ++i) {
        if (pinned_bg && static_cast<int>(i) == *g.background_center)
            continue;  // the infinite background forces this center to 0
        if (cells[i].empty()) continue;
        cert.pmean_eps[i] =
            certify_pmean_eps(sp, cells[i], n, cfg.p, g.centers[i], cfg.tol);
    }
    cert.boundary_mass = boundary_mass(sp, vd, n, tie);
    cert.degree = degree(sp, g);
    return cert;
}

/// Alternating quantization: project onto the Voronoi refinement of the
/// centers, re-solve each cell's p-th mean, repeat to a fixed point;
/// restarts from distance-weighted samples, the best one polished with
/// certified solves. Deterministic for fixed (space, config): restarts use
/// derived seeds seed + r and the merge prefers the lowest restart index.
inline QuantizeReport lloyd(const MeasureSpace& sp, const NormDescriptor& n,
                            const QuantizerConfig& cfg) {
    detail::check_config(sp, n, cfg);
    const bool pinned = sp.infinite_mass() || cfg.pinned_zero;

    QuantizeReport rep;
    rep.seed_used = cfg.seed;

    // when f takes at most k values (counting the pinned zero), the fit is
    // exact and needs no iteration
    const std::vector<Vec> vals = detail::distinct_values(sp);
    bool zero_present = false;
    for (const Vec& v : vals)
        if (detail::is_zero(v)) zero_present = true;
    const std::size_t needed = vals.size() + (pinned && !zero_present ? 1 : 0);
    if (needed <= static_cast<std::size_t>(cfg.k)) {
        rep.best = reduce(sp, detail::exact_fit(sp, vals, pinned));
        rep.cost = 0.0;
        rep.trace.push_back({{0, 0.0}});
        rep.certificate = certify(sp, n, cfg, rep.best);
        return rep;
    }

    std::vector<detail::LloydState> results(cfg.restarts);
    const int jobs = std::min(cfg.jobs, cfg.restarts);
    if (jobs <= 1) {
        for (int r = 0; r < cfg.restarts; ++r)
            results[r] = detail::run_restart(sp, n, cfg, pinned, r, false);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(jobs);
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (int r = t; r < cfg.restarts; r += jobs)
                        results[r] =
                            detail::run_restart(sp, n, cfg, pinned, r, false);
                } catch (...) {
                    errs[t] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }

    int best_r = 0;
    for (int r = 1; r < cfg.restarts; ++r)
        if (results[r].cost < results[best_r].cost) best_r = r;

    detail::polish(sp, n, cfg, pinned, results[best_r], false);

    SimpleFunction h;
    h.centers = results[best_r].centers;
    h.assignment = results[best_r].assignment;
    if (pinned) h.background_center = 0;
    rep.best = reduce(sp, h);
    rep.cost = cost(sp, n, cfg.p, rep.best);
    rep.certificate = certify(sp, n, cfg, rep.best);
    rep.trace.reserve(results.size());
    for (auto& st : results) rep.trace.push_back(std::move(st.trace));
    return rep;
}

/// Center trajectory of the winning restart, padded past the fixed point so
/// the tail displacement is meaningful. Requires the smooth regime
/// 1 < p < inf. A tail that keeps moving is flagged, not hidden.
struct MinimizingTrace {
    std::vector<std::vector<Vec>> centers;  // snapshot per iteration
    std::vector<double> costs;
    std::vector<double> displacements;  // max center move between snapshots
    bool flagged = false;
    int best_restart = 0;
};

inline MinimizingTrace minimizing_trace(const MeasureSpace& sp,
                                        const NormDescriptor& n,
                                        const QuantizerConfig& cfg) {
    detail::check_config(sp, n, cfg);
    detail::check(std::isfinite(cfg.p) && cfg.p > 1.0,
                  "minimizing_trace: requires 1 < p < inf");
    detail::check(n.gateaux_smooth(),
                  "minimizing_trace: requires a smooth norm");
    const bool pinned = sp.infinite_mass() || cfg.pinned_zero;

    MinimizingTrace out;

    const std::vector<Vec> vals = detail::distinct_values(sp);
    bool zero_present = false;
    for (const Vec& v : vals)
        if (detail::is_zero(v)) zero_present = true;
    const std::size_t needed = vals.size() + (pinned && !zero_present ? 1 : 0);
    if (needed <= static_cast<std::size_t>(cfg.k)) {
        const SimpleFunction h = detail::exact_fit(sp, vals, pinned);
        out.centers.push_back(h.centers);
        out.costs.push_back(0.0);
        return out;
    }

    std::vector<double> costs(cfg.restarts);
    for (int r = 0; r < cfg.restarts; ++r)
        costs[r] = detail::run_restart(sp, n, cfg, pinned, r, false).cost;
    int best_r = 0;
    for (int r = 1; r < cfg.restarts; ++r)
        if (costs[r] < costs[best_r]) best_r = r;
    out.best_restart = best_r;

    detail::LloydState st =
        detail::run_restart(sp, n, cfg, pinned, best_r, true);
    detail::polish(sp, n, cfg, pinned, st, true);

    // pad with certified rounds: at the fixed point these leave the centers
    // bit-identical, and any residual oscillation shows up as movement
    for (int pad = 0; pad < 12; ++pad) {
        detail::mean_step(sp, n, cfg, pinned, st.centers, st.assignment, true);
        st.assignment =
            detail::project_assign(sp, n, st.centers, cfg.tie_tol);
        detail::repair_empty(sp, n, cfg, pinned, st.centers, st.assignment);
        st.cost = detail::assignment_cost(sp, n, cfg.p, st.centers,
                                          st.assignment);
        st.history.push_back(st.centers);
        st.trace.emplace_back(++st.last_iter, st.cost);
    }

    out.centers = std::move(st.history);
    for (const auto& [it, c] : st.trace) out.costs.push_back(c);

    for (std::size_t t = 1; t < out.centers.size(); ++t) {
        double d = 0.0;
        const auto& prev = out.centers[t - 1];
        const auto& curr = out.centers[t];
        const std::size_t common = std::min(prev.size(), curr.size());
        for (std::size_t i = 0; i < common; ++i)
            d = std::max(d, eval(n, detail::sub(curr[i], prev[i])));
        out.displacements.push_back(d);
    }

    double scale = 0.0;
    for (const Atom& a : sp.atoms()) scale = std::max(scale, eval(n, a.value));
    const double threshold = 100.0 * cfg.tol * (1.0 + scale);
    const std::size_t tail =
        std::min<std::size_t>(10, out.displacements.size());
    for (std::size_t t = out.displacements.size() - tail;
         t < out.displacements.size(); ++t)
        if (out.displacements[t] > threshold) out.flagged = true;
    return out;
}

}  // namespace lpquant
