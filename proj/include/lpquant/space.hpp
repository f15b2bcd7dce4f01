#pragma once

#include <utility>

#include "core.hpp"
#include "norms.hpp"

namespace lpquant {

struct Atom {
    double weight = 0.0;
    Vec value;
};

/// A discrete measure space carrying the function f: atom i has mass
/// weight_i and value f_i in R^d. The infinite_mass flag models an
/// additional background of infinite measure on which f vanishes; it is
/// purely structural (no atoms), but it forces a pinned zero center
/// downstream, since any simple function with finite L^p distance to f must
/// be 0 on the background.
class MeasureSpace {
  public:
    static MeasureSpace load(std::vector<Atom> atoms, int dim,
                             bool infinite_mass) {
        detail::check(dim >= 1, "space: dim must be >= 1");
        detail::check(!atoms.empty(), "space: atom list must be nonempty");
        double mass = 0.0;
        for (const Atom& a : atoms) {
            detail::check(std::isfinite(a.weight) && a.weight > 0.0,
                          "space: atom weights must be positive and finite");
            detail::check(static_cast<int>(a.value.size()) == dim,
                          "space: atom value dimension mismatch");
            detail::check(detail::all_finite(a.value),
                          "space: atom values must be finite");
            mass += a.weight;
        }
        MeasureSpace sp;
        sp.atoms_ = std::move(atoms);
        sp.dim_ = dim;
        sp.infinite_mass_ = infinite_mass;
        sp.mass_ = mass;
        return sp;
    }

    int dim() const { return dim_; }
    bool infinite_mass() const { return infinite_mass_; }
    std::size_t size() const { return atoms_.size(); }
    const Atom& atom(std::size_t i) const { return atoms_[i]; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    /// Total atom mass; the infinite background is not included.
    double finite_mass() const { return mass_; }

  private:
    MeasureSpace() = default;
    std::vector<Atom> atoms_;
    int dim_ = 0;
    bool infinite_mass_ = false;
    double mass_ = 0.0;

    friend MeasureSpace tail_truncate(const MeasureSpace&,
                                      const NormDescriptor&, double);
};

/// ||f||_p = (sum_i w_i ||f_i||^p)^{1/p}, max_i ||f_i|| for p = inf.
/// The background contributes nothing (f = 0 there).
inline double lp_norm(const MeasureSpace& sp, const NormDescriptor& n,
                      double p) {
    detail::check(p >= 1.0, "lp_norm: p must be in [1, inf]");
    detail::check(n.dim == sp.dim(), "lp_norm: norm/space dimension mismatch");
    if (p == kInf) {
        double m = 0.0;
        for (const Atom& a : sp.atoms()) m = std::max(m, eval(n, a.value));
        return m;
    }
    double s = 0.0;
    for (const Atom& a : sp.atoms())
        s += a.weight * std::pow(eval(n, a.value), p);
    return std::pow(s, 1.0 / p);
}

/// Restriction of the space to the tail set {||f|| >= eps}. The result can
/// be empty (eps above every atom) and never carries infinite mass: the
/// background sits inside {f = 0}, which the tail excludes. By the Markov
/// bound, eps^p * finite_mass(result) <= lp_norm(sp, n, p)^p.
inline MeasureSpace tail_truncate(const MeasureSpace& sp,
                                  const NormDescriptor& n, double eps) {
    detail::check(std::isfinite(eps) && eps > 0.0,
                  "tail_truncate: eps must be positive and finite");
    detail::check(n.dim == sp.dim(),
                  "tail_truncate: norm/space dimension mismatch");
    MeasureSpace out;
    out.dim_ = sp.dim();
    out.infinite_mass_ = false;
    out.mass_ = 0.0;
    for (const Atom& a : sp.atoms()) {
        if (eval(n, a.value) >= eps) {
            out.atoms_.push_back(a);
            out.mass_ += a.weight;
        }
    }
    return out;
}

}  // namespace lpquant
