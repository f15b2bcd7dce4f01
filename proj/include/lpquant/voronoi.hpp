#pragma once

#include "core.hpp"
#include "norms.hpp"
#include "simple_function.hpp"
#include "space.hpp"

namespace lpquant {

/// Voronoi partition machinery with deterministic lowest-index
/// tie-breaking. Ties are decided within an effective tolerance of
/// tie_tol * diam(centers), so the disjoint refinement D_1 = V_1,
/// D_j = V_j \ (D_1 u ... u D_{j-1}) is reproduced exactly on boundaries.
struct VoronoiDiagram {
    std::vector<Vec> centers;
    double tie_tol = 1e-9;       // relative to the center distance scale
    double effective_tie = 0.0;  // tie_tol * diam(centers), fixed at create

    static VoronoiDiagram create(std::vector<Vec> centers, double tie_tol,
                                 const NormDescriptor& n) {
        detail::check(!centers.empty(), "voronoi: needs >= 1 center");
        detail::check(std::isfinite(tie_tol) && tie_tol >= 0.0,
                      "voronoi: tie_tol must be >= 0");
        for (const Vec& c : centers) {
            detail::check(static_cast<int>(c.size()) == n.dim,
                          "voronoi: center dimension mismatch");
            detail::check(detail::all_finite(c),
                          "voronoi: centers must be finite");
        }
        double diam = 0.0, min_sep = kInf;
        for (std::size_t i = 0; i < centers.size(); ++i)
            for (std::size_t j = i + 1; j < centers.size(); ++j) {
                const double d = eval(n, detail::sub(centers[i], centers[j]));
                diam = std::max(diam, d);
                min_sep = std::min(min_sep, d);
            }
        VoronoiDiagram vd;
        vd.effective_tie = tie_tol * diam;
        detail::check(centers.size() < 2 || min_sep > vd.effective_tie,
                      "voronoi: centers must be pairwise separated by more "
                      "than the tie tolerance");
        vd.centers = std::move(centers);
        vd.tie_tol = tie_tol;
        return vd;
    }
};

/// Smallest index attaining min_i ||point - x_i|| within the tie tolerance.
inline int assign(const VoronoiDiagram& vd, const Vec& point,
                  const NormDescriptor& n) {
    detail::check(static_cast<int>(point.size()) == n.dim,
                  "assign: point dimension mismatch");
    double dmin = kInf;
    std::vector<double> d(vd.centers.size());
    for (std::size_t i = 0; i < vd.centers.size(); ++i) {
        d[i] = eval(n, detail::sub(point, vd.centers[i]));
        dmin = std::min(dmin, d[i]);
    }
    for (std::size_t i = 0; i < vd.centers.size(); ++i)
        if (d[i] <= dmin + vd.effective_tie) return static_cast<int>(i);
    return 0;  // unreachable
}

/// Mass of the atoms whose two smallest center distances differ by at most
/// tol: the mass sitting on (a fattening of) the cell boundaries. With a
/// single center there is no boundary.
inline double boundary_mass(const MeasureSpace& sp, const VoronoiDiagram& vd,
                            const NormDescriptor& n, double tol) {
    detail::check(tol >= 0.0, "boundary_mass: tol must be >= 0");
    detail::check(n.dim == sp.dim(),
                  "boundary_mass: norm/space dimension mismatch");
    if (vd.centers.size() < 2) return 0.0;
    double mass = 0.0;
    for (const Atom& a : sp.atoms()) {
        double d1 = kInf, d2 = kInf;  // two smallest distances
        for (const Vec& c : vd.centers) {
            const double d = eval(n, detail::sub(a.value, c));
            if (d < d1) {
                d2 = d1;
                d1 = d;
            } else if (d < d2) {
                d2 = d;
            }
        }
        if (d2 - d1 <= tol) mass += a.weight;
    }
    return mass;
}

/// Reassigns every atom to its nearest center (lowest index on ties),
/// keeping centers and background fixed. Pointwise no distance grows, so
/// cost(space, n, p, project(h)) <= cost(space, n, p, h) for every p, and
/// the map is idempotent.
inline SimpleFunction project(const MeasureSpace& sp, const NormDescriptor& n,
                              const SimpleFunction& h, double tie_tol = 1e-9) {
    validate(sp, h);
    const VoronoiDiagram vd = VoronoiDiagram::create(h.centers, tie_tol, n);
    SimpleFunction out = h;
    for (std::size_t a = 0; a < sp.size(); ++a)
        out.assignment[a] = assign(vd, sp.atom(a).value, n);
    return out;
}

/// Moves a zone of cell-1 boundary atoms into cell 1 (index 0) and
/// re-refines everything else with D_1(Z) = Z u int(V_1),
/// D_j(Z) = V_j \ (D_1(Z) u ... u D_{j-1}(Z)). Every zone atom must be tied
/// between cell 1 and its current cell; h must already be in f-Voronoi
/// form. Cost is unchanged up to the tie tolerance. An empty zone yields
/// the canonical refinement (boundary atoms of V_1 leave cell 1).
inline SimpleFunction boundary_reassign(const MeasureSpace& sp,
                                        const NormDescriptor& n,
                                        const SimpleFunction& h,
                                        const std::vector<int>& target_zone,
                                        double tie_tol = 1e-9) {
    validate(sp, h);
    const VoronoiDiagram vd = VoronoiDiagram::create(h.centers, tie_tol, n);
    const double tie = vd.effective_tie;

    std::vector<char> in_zone(sp.size(), 0);
    for (int a : target_zone) {
        detail::check(a >= 0 && a < static_cast<int>(sp.size()),
                      "boundary_reassign: zone atom index out of range");
        in_zone[a] = 1;
    }

    std::vector<std::vector<double>> dist(sp.size());
    for (std::size_t a = 0; a < sp.size(); ++a) {
        dist[a].resize(vd.centers.size());
        double dmin = kInf;
        for (std::size_t i = 0; i < vd.centers.size(); ++i) {
            dist[a][i] = eval(n, detail::sub(sp.atom(a).value, vd.centers[i]));
            dmin = std::min(dmin, dist[a][i]);
        }
        detail::check(dist[a][h.assignment[a]] <= dmin + tie,
                      "boundary_reassign: h is not in f-Voronoi form");
        if (in_zone[a]) {
            detail::check(dist[a][0] <= dmin + tie &&
                              std::fabs(dist[a][0] - dist[a][h.assignment[a]]) <=
                                  tie,
                          "boundary_reassign: zone atom is not tied between "
                          "cell 1 and its current cell");
        }
    }

    SimpleFunction out = h;
    for (std::size_t a = 0; a < sp.size(); ++a) {
        if (in_zone[a]) {
            out.assignment[a] = 0;
            continue;
        }
        double dmin = kInf;
        for (double d : dist[a]) dmin = std::min(dmin, d);
        int pick = -1;  // lowest tied index other than 0
        for (std::size_t i = 1; i < vd.centers.size(); ++i)
            if (dist[a][i] <= dmin + tie) {
                pick = static_cast<int>(i);
                break;
            }
        // only the interior of V_1 stays in cell 1; its boundary outside the
        // zone falls through to the next tied cell
        out.assignment[a] = pick < 0 ? 0 : pick;
    }
    return out;
}

}  // namespace lpquant
