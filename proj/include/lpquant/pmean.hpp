#pragma once

#include <algorithm>
#include <functional>
#include <optional>

#include "core.hpp"
#include "norms.hpp"
#include "space.hpp"

namespace lpquant {

/// A cell: atom indices of the region the mean is taken over.
using Cell = std::vector<int>;

struct PMeanResult {
    Vec point;
    double value = 0.0;            // M_p at point
    double grad_norm = 0.0;        // euclidean length of the subgradient
    double eps_certificate = 0.0;  // certified: point is an eps-p-th mean
    int iterations = 0;
    bool converged = true;
};

struct PMeanOptions {
    double tol = 1e-9;
    int max_iter = 10000;
    std::optional<Vec> start;  // defaults to the weighted mean
    bool certify = true;       // refine a lower bound when linearization is loose
    int refine_passes = 60;
};

namespace detail {

inline void check_cell(const MeasureSpace& sp, const Cell& cell) {
    check(!cell.empty(), "pmean: cell must be nonempty");
    for (int a : cell)
        check(a >= 0 && a < static_cast<int>(sp.size()),
              "pmean: cell atom index out of range");
}

inline double cell_mass(const MeasureSpace& sp, const Cell& cell) {
    double m = 0.0;
    for (int a : cell) m += sp.atom(a).weight;
    return m;
}

// ||f 1_cell||_p under the descriptor norm
inline double cell_lp(const MeasureSpace& sp, const Cell& cell,
                      const NormDescriptor& n, double p) {
    if (p == kInf) {
        double m = 0.0;
        for (int a : cell) m = std::max(m, eval(n, sp.atom(a).value));
        return m;
    }
    double s = 0.0;
    for (int a : cell) s += sp.atom(a).weight * std::pow(eval(n, sp.atom(a).value), p);
    return std::pow(s, 1.0 / p);
}

inline Vec weighted_mean(const MeasureSpace& sp, const Cell& cell) {
    Vec x(sp.dim(), 0.0);
    double m = 0.0;
    for (int a : cell) {
        const Atom& at = sp.atom(a);
        axpy(x, at.weight, at.value);
        m += at.weight;
    }
    for (double& v : x) v /= m;
    return x;
}

inline bool cell_is_constant(const MeasureSpace& sp, const Cell& cell) {
    for (std::size_t i = 1; i < cell.size(); ++i)
        if (sp.atom(cell[i]).value != sp.atom(cell[0]).value) return false;
    return true;
}

}  // namespace detail

/// M_p(f, A)(x): sum_{a in A} w_a ||f_a - x||^p, max_{a in A} ||f_a - x||
/// for p = inf.
inline double m_p_value(const MeasureSpace& sp, const Cell& cell,
                        const NormDescriptor& n, double p, const Vec& x) {
    detail::check(p >= 1.0, "m_p_value: p must be in [1, inf]");
    detail::check(n.dim == sp.dim(), "m_p_value: dimension mismatch");
    detail::check_cell(sp, cell);
    if (p == kInf) {
        double m = 0.0;
        for (int a : cell)
            m = std::max(m, eval(n, detail::sub(sp.atom(a).value, x)));
        return m;
    }
    double s = 0.0;
    for (int a : cell)
        s += sp.atom(a).weight *
             std::pow(eval(n, detail::sub(sp.atom(a).value, x)), p);
    return s;
}

namespace detail {

// Subgradient of x -> M_p(f, A)(x). For 1 < p < inf this is the gradient
// (atoms at x contribute their limit, 0); for p = 1 an atom sitting at x
// contributes 0, which is a genuine subgradient choice there; for p = inf
// the gradient of the (first) maximizing atom's distance is used.
inline Vec pmean_subgrad(const MeasureSpace& sp, const Cell& cell,
                         const NormDescriptor& n, double p, const Vec& x) {
    Vec g(sp.dim(), 0.0);
    if (p == kInf) {
        double m = -1.0;
        int arg = -1;
        for (int a : cell) {
            const double d = eval(n, detail::sub(sp.atom(a).value, x));
            if (d > m) {
                m = d;
                arg = a;
            }
        }
        if (m > 0.0) {
            const Vec z = detail::sub(sp.atom(arg).value, x);
            Vec ng = norm_gradient(n, z);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = -ng[i];
        }
        return g;
    }
    for (int a : cell) {
        const Vec z = detail::sub(sp.atom(a).value, x);
        if (detail::is_zero(z)) continue;
        const double nz = eval(n, z);
        if (nz == 0.0) continue;
        const double scale =
            -sp.atom(a).weight * (p == 1.0 ? 1.0 : p * std::pow(nz, p - 1.0));
        Vec ng = norm_gradient(n, z);
        detail::axpy(g, scale, ng);
    }
    return g;
}

// Euclidean radius of a ball around the origin certain to contain every
// minimizer, from coercivity: mass^{1/p} ||y|| <= M_p(y)^{1/p} + ||f 1_A||_p
// (for p = inf, ||y|| <= M_inf(y) + ||f 1_A||_inf), evaluated at the known
// upper bound `ub` on the minimum.
struct Coercivity {
    double p = 2.0;
    double clp = 0.0;       // ||f 1_A||_p
    double mass_rt = 1.0;   // mass^{1/p}
    double c1 = 1.0;        // lower norm-equivalence ratio

    double radius2(double ub) const {
        const double r_desc = p == kInf
                                  ? ub + clp
                                  : (std::pow(ub, 1.0 / p) + clp) / mass_rt;
        return r_desc / c1 * (1.0 + 1e-12);
    }
};

inline Coercivity make_coercivity(const MeasureSpace& sp, const Cell& cell,
                                  const NormDescriptor& n, double p) {
    Coercivity co;
    co.p = p;
    co.clp = cell_lp(sp, cell, n, p);
    co.mass_rt = p == kInf ? 1.0 : std::pow(cell_mass(sp, cell), 1.0 / p);
    co.c1 = lower_ratio(n);
    return co;
}

inline double coercive_radius2(const MeasureSpace& sp, const Cell& cell,
                               const NormDescriptor& n, double p, double ub) {
    return make_coercivity(sp, cell, n, p).radius2(ub);
}

// Lipschitz constant of M_p w.r.t. the euclidean metric, valid on the
// centered box of euclidean radius rbox2.
inline double lipschitz2(const MeasureSpace& sp, const Cell& cell,
                         const NormDescriptor& n, double p, double rbox2) {
    const double c2 = upper_ratio(n);
    if (p == kInf) return c2;
    const double mass = cell_mass(sp, cell);
    const double nmax =
        cell_lp(sp, cell, n, p) + c2 * rbox2 * std::pow(mass, 1.0 / p);
    if (p == 1.0) return mass * c2;
    return p * std::pow(nmax, p - 1.0) * std::pow(mass, 1.0 / p) * c2;
}

struct BoundResult {
    double lb = 0.0;
    Vec best_point;
    double best_value = kInf;
    int passes = 0;
};

// Certified lower bound on a convex objective over [lo, hi] by a shrinking
// grid: every grid cell gets max(linearization, Lipschitz) bounds, cells
// that cannot contain the minimum are frozen, the box shrinks onto the
// survivors. Returns a global lower bound valid over the initial box plus
// the best evaluation point seen.
inline BoundResult shrink_box_lower_bound(
    int dim, Vec lo, Vec hi,
    const std::function<double(const Vec&)>& value_at,
    const std::function<Vec(const Vec&)>& subgrad_at, double lip2,
    double target_gap, int max_passes, const Vec& seed_point,
    double seed_value) {
    const int m = dim == 1 ? 65 : dim == 2 ? 17 : dim == 3 ? 9 : 5;
    const std::size_t cells = [&] {
        std::size_t c = 1;
        for (int j = 0; j < dim; ++j) c *= static_cast<std::size_t>(m);
        return c;
    }();

    BoundResult out;
    out.best_point = seed_point;
    out.best_value = seed_value;
    double frozen_lb = kInf;  // over regions excluded from later refinement
    double surv_lb = -kInf;
    std::vector<int> idx(dim);
    std::vector<double> width(dim);
    Vec node(dim), cell_lo(dim), cell_hi(dim);
    std::vector<double> lbs(cells);
    std::vector<char> survive(cells);

    int stall = 0;
    for (int pass = 0; pass < max_passes; ++pass) {
        out.passes = pass + 1;
        double r2sq = 0.0;
        for (int j = 0; j < dim; ++j) {
            width[j] = (hi[j] - lo[j]) / m;
            r2sq += 0.25 * width[j] * width[j];
        }
        const double r2 = std::sqrt(r2sq);

        std::fill(idx.begin(), idx.end(), 0);
        double pass_min_lb = kInf;
        for (std::size_t c = 0; c < cells; ++c) {
            for (int j = 0; j < dim; ++j)
                node[j] = lo[j] + (idx[j] + 0.5) * width[j];
            const double v = value_at(node);
            if (v < out.best_value) {
                out.best_value = v;
                out.best_point = node;
            }
            const Vec g = subgrad_at(node);
            const double lb_cell = std::max(
                {v - norm2(g) * r2, v - lip2 * r2, 0.0});
            lbs[c] = lb_cell;
            pass_min_lb = std::min(pass_min_lb, lb_cell);
            for (int j = 0; j < dim; ++j) {
                if (++idx[j] < m) break;
                idx[j] = 0;
            }
        }

        const double prune_slack = 1e-12 * (1.0 + std::fabs(out.best_value));
        Vec nlo(dim, kInf), nhi(dim, -kInf);
        double new_surv_lb = kInf;
        std::fill(idx.begin(), idx.end(), 0);
        std::size_t nsurv = 0;
        for (std::size_t c = 0; c < cells; ++c) {
            survive[c] = lbs[c] <= out.best_value + prune_slack;
            if (survive[c]) {
                ++nsurv;
                new_surv_lb = std::min(new_surv_lb, lbs[c]);
                for (int j = 0; j < dim; ++j) {
                    nlo[j] = std::min(nlo[j], lo[j] + idx[j] * width[j]);
                    nhi[j] = std::max(nhi[j], lo[j] + (idx[j] + 1) * width[j]);
                }
            }
            for (int j = 0; j < dim; ++j) {
                if (++idx[j] < m) break;
                idx[j] = 0;
            }
        }
        if (nsurv == 0) {  // numeric corner: keep the whole box bound
            surv_lb = pass_min_lb;
            break;
        }
        // freeze pruned cells that stick out of the refined region
        std::fill(idx.begin(), idx.end(), 0);
        for (std::size_t c = 0; c < cells; ++c) {
            if (!survive[c]) {
                bool inside = true;
                for (int j = 0; j < dim && inside; ++j) {
                    const double a = lo[j] + idx[j] * width[j];
                    const double b = lo[j] + (idx[j] + 1) * width[j];
                    inside = a >= nlo[j] - 1e-300 && b <= nhi[j] + 1e-300;
                }
                if (!inside) frozen_lb = std::min(frozen_lb, lbs[c]);
            }
            for (int j = 0; j < dim; ++j) {
                if (++idx[j] < m) break;
                idx[j] = 0;
            }
        }

        const double prev = surv_lb;
        surv_lb = new_surv_lb;
        const double global = std::min(frozen_lb, surv_lb);
        if (out.best_value - global <= target_gap) break;
        const bool improved =
            !std::isfinite(prev) ||
            surv_lb > prev + 1e-18 * (1.0 + std::fabs(prev));
        if (!improved) {
            if (++stall >= 4) break;
        } else {
            stall = 0;
        }
        lo = nlo;
        hi = nhi;
    }
    out.lb = std::max(0.0, std::min(frozen_lb, surv_lb));
    return out;
}

// Runs the shrinking-box bound on a cell objective with its coercivity box.
inline BoundResult cell_lower_bound(const MeasureSpace& sp, const Cell& cell,
                                    const NormDescriptor& n, double p,
                                    double ub, const Vec& ub_point,
                                    double target_gap, int max_passes) {
    const double r2 = coercive_radius2(sp, cell, n, p, ub);
    Vec lo(sp.dim(), -r2), hi(sp.dim(), r2);
    const double lip =
        lipschitz2(sp, cell, n, p, r2 * std::sqrt(double(sp.dim())));
    const auto value_at = [&](const Vec& x) {
        return m_p_value(sp, cell, n, p, x);
    };
    const auto subgrad_at = [&](const Vec& x) {
        return pmean_subgrad(sp, cell, n, p, x);
    };
    return shrink_box_lower_bound(sp.dim(), std::move(lo), std::move(hi),
                                  value_at, subgrad_at, lip, target_gap,
                                  max_passes, ub_point, ub);
}

// One linearization step: M(y) >= M(x) + <g, y - x> over the coercivity
// ball gives inf >= M(x) - |g| (R + |x|).
inline double linearization_eps(const MeasureSpace& sp, const Cell& cell,
                                const NormDescriptor& n, double p,
                                const Vec& x, double fx, const Vec& g) {
    const double r2 = coercive_radius2(sp, cell, n, p, fx);
    return norm2(g) * (r2 + norm2(x));
}

}  // namespace detail

/// R'(0) for R(a) = M_p(f, A)(x + a v), 1 < p < inf. At a p-th mean this
/// vanishes for +-v (the norms here are Gateaux smooth).
inline double gradient_condition(const MeasureSpace& sp, const Cell& cell,
                                 const NormDescriptor& n, double p,
                                 const Vec& x, const Vec& v) {
    detail::check(std::isfinite(p) && p > 1.0,
                  "gradient_condition: p must be in (1, inf)");
    detail::check(n.dim == sp.dim(), "gradient_condition: dimension mismatch");
    detail::check_cell(sp, cell);
    Vec minus_v(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) minus_v[i] = -v[i];
    double s = 0.0;
    for (int a : cell)
        s += sp.atom(a).weight *
             grad_pth_power(n, detail::sub(sp.atom(a).value, x), minus_v, p);
    return s;
}

/// Minimizes M_p(f, A) over R^d for p in [1, inf). Closed form for the
/// euclidean p = 2 mean, the weighted median for d = 1, p = 1, descent with
/// backtracking elsewhere; the eps certificate comes from a linearization
/// bound, refined through the shrinking box when it is loose.
inline PMeanResult solve_pmean(const MeasureSpace& sp, const Cell& cell,
                               const NormDescriptor& n, double p,
                               const PMeanOptions& opt) {
    detail::check(std::isfinite(p) && p >= 1.0,
                  "solve_pmean: p must be in [1, inf); use chebyshev_center "
                  "for p = inf");
    detail::check(n.dim == sp.dim(), "solve_pmean: dimension mismatch");
    detail::check(opt.tol > 0.0 && opt.max_iter >= 1,
                  "solve_pmean: tol must be > 0 and max_iter >= 1");
    detail::check_cell(sp, cell);

    PMeanResult res;

    // constant cells have an exact, certificate-free answer
    if (detail::cell_is_constant(sp, cell)) {
        res.point = sp.atom(cell[0]).value;
        res.value = 0.0;
        return res;
    }

    // euclidean p = 2: the weighted average, exactly
    if (p == 2.0 && n.kind == NormKind::euclidean) {
        res.point = detail::weighted_mean(sp, cell);
        res.value = m_p_value(sp, cell, n, p, res.point);
        const Vec g = detail::pmean_subgrad(sp, cell, n, p, res.point);
        res.grad_norm = detail::norm2(g);
        res.eps_certificate =
            detail::linearization_eps(sp, cell, n, p, res.point, res.value, g);
        res.converged = res.eps_certificate <= opt.tol * (1.0 + res.value);
        return res;
    }

    Vec x;
    // d = 1, p = 1: lower weighted median (exact, so any start is moot)
    if (p == 1.0 && sp.dim() == 1) {
        std::vector<std::pair<double, double>> pts;  // (value, weight)
        double total = 0.0;
        for (int a : cell) {
            pts.emplace_back(sp.atom(a).value[0], sp.atom(a).weight);
            total += sp.atom(a).weight;
        }
        std::sort(pts.begin(), pts.end());
        double cum = 0.0;
        double med = pts.back().first;
        for (const auto& [v, w] : pts) {
            cum += w;
            if (cum >= 0.5 * total) {
                med = v;
                break;
            }
        }
        x = Vec{med};
    } else {
        x = opt.start.value_or(detail::weighted_mean(sp, cell));
        detail::check(static_cast<int>(x.size()) == sp.dim(),
                      "solve_pmean: start dimension mismatch");
    }

    const detail::Coercivity co = detail::make_coercivity(sp, cell, n, p);
    double fx = m_p_value(sp, cell, n, p, x);
    Vec g = detail::pmean_subgrad(sp, cell, n, p, x);
    double t0 = 1.0;
    bool cert_ok = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        const double gn = detail::norm2(g);
        if (gn * (co.radius2(fx) + detail::norm2(x)) <= opt.tol * (1.0 + fx)) {
            cert_ok = true;
            break;
        }
        double t = t0;
        bool accepted = false;
        Vec xt(x.size());
        double ft = 0.0;
        for (int ls = 0; ls < 70; ++ls) {
            xt = x;
            detail::axpy(xt, -t, g);
            ft = m_p_value(sp, cell, n, p, xt);
            if (ft <= fx - 1e-4 * t * gn * gn) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // kink: leave it to the refinement
        x = std::move(xt);
        fx = ft;
        g = detail::pmean_subgrad(sp, cell, n, p, x);
        t0 = std::min(t * 2.0, 1e12);
    }
    res.iterations = it;

    double eps = detail::linearization_eps(sp, cell, n, p, x, fx, g);
    if (!cert_ok && opt.certify && eps > opt.tol * (1.0 + fx)) {
        const auto bound = detail::cell_lower_bound(
            sp, cell, n, p, fx, x, opt.tol * (1.0 + fx), opt.refine_passes);
        if (bound.best_value < fx) {
            x = bound.best_point;
            fx = bound.best_value;
            g = detail::pmean_subgrad(sp, cell, n, p, x);
        }
        eps = std::max(0.0, fx - bound.lb);
        eps = std::min(eps,
                       detail::linearization_eps(sp, cell, n, p, x, fx, g));
    }

    res.point = std::move(x);
    res.value = fx;
    res.grad_norm = detail::norm2(g);
    res.eps_certificate = eps;
    res.converged = eps <= opt.tol * (1.0 + fx);
    return res;
}

inline PMeanResult solve_pmean(const MeasureSpace& sp, const Cell& cell,
                               const NormDescriptor& n, double p,
                               double tol = 1e-9, int max_iter = 10000) {
    PMeanOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    return solve_pmean(sp, cell, n, p, opt);
}

/// The p = inf mean: minimizes the worst distance max_{a in A} ||f_a - x||
/// (the center of the smallest enclosing ball). Certified by the same
/// shrinking-box bound; there is no gradient stopping rule to lean on.
inline PMeanResult chebyshev_center(const MeasureSpace& sp, const Cell& cell,
                                    const NormDescriptor& n,
                                    double tol = 1e-9,
                                    int refine_passes = 120) {
    detail::check(n.dim == sp.dim(), "chebyshev_center: dimension mismatch");
    detail::check(tol > 0.0, "chebyshev_center: tol must be > 0");
    detail::check_cell(sp, cell);

    PMeanResult res;
    if (detail::cell_is_constant(sp, cell)) {
        res.point = sp.atom(cell[0]).value;
        return res;
    }
    const Vec x0 = detail::weighted_mean(sp, cell);
    const double f0 = m_p_value(sp, cell, n, kInf, x0);
    const auto bound = detail::cell_lower_bound(sp, cell, n, kInf, f0, x0,
                                                tol * (1.0 + f0),
                                                refine_passes);
    res.point = bound.best_point;
    res.value = bound.best_value;
    res.grad_norm =
        detail::norm2(detail::pmean_subgrad(sp, cell, n, kInf, res.point));
    res.eps_certificate = std::max(0.0, res.value - bound.lb);
    res.iterations = bound.passes;
    res.converged = res.eps_certificate <= tol * (1.0 + res.value);
    return res;
}

/// Certified eps for a *given* point: M_p(x) - (certified lower bound on
/// inf M_p). Reports, never moves the point. Works for p in [1, inf].
inline double certify_pmean_eps(const MeasureSpace& sp, const Cell& cell,
                                const NormDescriptor& n, double p,
                                const Vec& x, double tol,
                                int refine_passes = 60) {
    detail::check(p >= 1.0, "certify_pmean_eps: p must be in [1, inf]");
    detail::check_cell(sp, cell);
    const double fx = m_p_value(sp, cell, n, p, x);
    if (fx == 0.0) return 0.0;
    const Vec g = detail::pmean_subgrad(sp, cell, n, p, x);
    const double lin = detail::linearization_eps(sp, cell, n, p, x, fx, g);
    if (lin <= tol * (1.0 + fx)) return lin;
    const auto bound = detail::cell_lower_bound(sp, cell, n, p, fx, x,
                                                tol * (1.0 + fx),
                                                refine_passes);
    return std::min(lin, std::max(0.0, fx - bound.lb));
}

}  // namespace lpquant
