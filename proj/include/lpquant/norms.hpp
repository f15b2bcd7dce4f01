#pragma once

#include <cstdio>
#include <string>
#include <string_view>

#include "core.hpp"

namespace lpquant {

enum class NormKind { euclidean, q_norm, weighted_euclidean };

/// A norm on R^d with directional-derivative support.
///
/// Three kinds are available: the euclidean norm, the q-norm for finite
/// q > 1, and the weighted euclidean norm with positive axis weights.
/// All three are strictly convex and smooth away from 0, which is exactly
/// what the mean solvers and the structure certificates rely on; norms that
/// lack smoothness off the origin (the max norm, q = 1) are rejected at
/// parse time. Everything here is finite-dimensional.
struct NormDescriptor {
    NormKind kind = NormKind::euclidean;
    int dim = 0;
    double q = 2.0;  // q_norm exponent
    Vec weights;     // weighted_euclidean axis weights

    static NormDescriptor euclidean(int dim) {
        detail::check(dim >= 1, "norm: dim must be >= 1");
        NormDescriptor n;
        n.kind = NormKind::euclidean;
        n.dim = dim;
        return n;
    }

    static NormDescriptor lq(int dim, double q) {
        detail::check(dim >= 1, "norm: dim must be >= 1");
        detail::check(std::isfinite(q) && q > 1.0,
                      "norm: q must be finite and > 1 (q = 1 and the max norm "
                      "are not smooth away from 0)");
        NormDescriptor n;
        n.kind = NormKind::q_norm;
        n.dim = dim;
        n.q = q;
        return n;
    }

    static NormDescriptor weighted(Vec w) {
        detail::check(!w.empty(), "norm: weights must be nonempty");
        for (double v : w)
            detail::check(std::isfinite(v) && v > 0.0,
                          "norm: weights must be positive and finite");
        NormDescriptor n;
        n.kind = NormKind::weighted_euclidean;
        n.dim = static_cast<int>(w.size());
        n.weights = std::move(w);
        return n;
    }

    bool strictly_convex() const { return true; }
    bool gateaux_smooth() const { return true; }

    /// Config-string form, the inverse of parse_norm.
    std::string spec() const {
        char buf[64];
        switch (kind) {
            case NormKind::euclidean:
                return "euclidean";
            case NormKind::q_norm:
                std::snprintf(buf, sizeof buf, "q:%.17g", q);
                return buf;
            case NormKind::weighted_euclidean: {
                std::string s = "weighted:";
                for (std::size_t i = 0; i < weights.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%.17g", weights[i]);
                    if (i) s += ',';
                    s += buf;
                }
                return s;
            }
        }
        return "";
    }
};

namespace detail {

inline void check_dim(const NormDescriptor& n, const Vec& z) {
    check(static_cast<int>(z.size()) == n.dim, "norm: dimension mismatch");
}

}  // namespace detail

inline double eval(const NormDescriptor& n, const Vec& z) {
    detail::check_dim(n, z);
    switch (n.kind) {
        case NormKind::euclidean:
            return detail::norm2(z);
        case NormKind::weighted_euclidean: {
            double s = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i)
                s += n.weights[i] * z[i] * z[i];
            return std::sqrt(s);
        }
        case NormKind::q_norm: {
            // scale by the max component so pow stays in range
            double m = 0.0;
            for (double v : z) m = std::max(m, std::fabs(v));
            if (m == 0.0) return 0.0;
            double s = 0.0;
            for (double v : z) s += std::pow(std::fabs(v) / m, n.q);
            return m * std::pow(s, 1.0 / n.q);
        }
    }
    return 0.0;
}

/// Gradient of z -> ||z|| at z != 0. For all three kinds the norm is
/// (Frechet) differentiable away from the origin.
inline Vec norm_gradient(const NormDescriptor& n, const Vec& z) {
    detail::check_dim(n, z);
    detail::check(!detail::is_zero(z), "norm_gradient: z must be nonzero");
    Vec g(z.size());
    switch (n.kind) {
        case NormKind::euclidean: {
            const double nz = detail::norm2(z);
            for (std::size_t i = 0; i < z.size(); ++i) g[i] = z[i] / nz;
            break;
        }
        case NormKind::weighted_euclidean: {
            const double nz = eval(n, z);
            for (std::size_t i = 0; i < z.size(); ++i)
                g[i] = n.weights[i] * z[i] / nz;
            break;
        }
        case NormKind::q_norm: {
            // g_i = sign(z_i) |z_i|^{q-1} / ||z||^{q-1}, scale-invariant form
            double m = 0.0;
            for (double v : z) m = std::max(m, std::fabs(v));
            double s = 0.0;
            for (double v : z) s += std::pow(std::fabs(v) / m, n.q);
            const double denom = std::pow(s, (n.q - 1.0) / n.q);
            for (std::size_t i = 0; i < z.size(); ++i) {
                const double u = std::fabs(z[i]) / m;
                const double t = u > 0.0 ? std::pow(u, n.q - 1.0) / denom : 0.0;
                g[i] = z[i] < 0.0 ? -t : t;
            }
            break;
        }
    }
    return g;
}

/// Directional (Gateaux) derivative of z -> ||z|| at z != 0 in direction v.
inline double dir_deriv(const NormDescriptor& n, const Vec& z, const Vec& v) {
    detail::check_dim(n, v);
    return detail::dot(norm_gradient(n, z), v);
}

/// Directional derivative of z -> ||z||^p for p > 1: p ||z||^{p-1} d_v||z||,
/// extended by its limit 0 at z = 0.
inline double grad_pth_power(const NormDescriptor& n, const Vec& z, const Vec& v,
                             double p) {
    detail::check(std::isfinite(p) && p > 1.0,
                  "grad_pth_power: p must be finite and > 1");
    detail::check_dim(n, z);
    detail::check_dim(n, v);
    if (detail::is_zero(z)) return 0.0;
    const double nz = eval(n, z);
    if (nz == 0.0) return 0.0;
    return p * std::pow(nz, p - 1.0) * dir_deriv(n, z, v);
}

/// c1 with c1 * |z|_2 <= ||z|| for all z (equivalence constant).
inline double lower_ratio(const NormDescriptor& n) {
    switch (n.kind) {
        case NormKind::euclidean:
            return 1.0;
        case NormKind::weighted_euclidean: {
            double m = n.weights[0];
            for (double w : n.weights) m = std::min(m, w);
            return std::sqrt(m);
        }
        case NormKind::q_norm:
            // q <= 2: ||z||_q >= ||z||_2; q >= 2: ||z||_q >= d^{1/q-1/2} ||z||_2
            return n.q <= 2.0 ? 1.0
                              : std::pow(static_cast<double>(n.dim),
                                         1.0 / n.q - 0.5);
    }
    return 1.0;
}

/// c2 with ||z|| <= c2 * |z|_2 for all z.
inline double upper_ratio(const NormDescriptor& n) {
    switch (n.kind) {
        case NormKind::euclidean:
            return 1.0;
        case NormKind::weighted_euclidean: {
            double m = n.weights[0];
            for (double w : n.weights) m = std::max(m, w);
            return std::sqrt(m);
        }
        case NormKind::q_norm:
            return n.q >= 2.0 ? 1.0
                              : std::pow(static_cast<double>(n.dim),
                                         1.0 / n.q - 0.5);
    }
    return 1.0;
}

/// Parses "euclidean", "q:<float>" or "weighted:<w1>,<w2>,..." against a
/// known ambient dimension. Rejects non-smooth requests (q:1, q:inf, linf).
inline NormDescriptor parse_norm(std::string_view s, int dim) {
    detail::check(dim >= 1, "parse_norm: dim must be >= 1");
    if (s == "euclidean") return NormDescriptor::euclidean(dim);
    const auto starts_with = [&](std::string_view p) {
        return s.size() >= p.size() && s.substr(0, p.size()) == p;
    };
    if (starts_with("q:")) {
        const std::string body(s.substr(2));
        detail::check(!body.empty(), "parse_norm: missing exponent after 'q:'");
        std::size_t pos = 0;
        double q = 0.0;
        try {
            q = std::stod(body, &pos);
        } catch (const std::exception&) {
            throw error("parse_norm: bad q exponent '" + body + "'");
        }
        detail::check(pos == body.size(),
                      "parse_norm: trailing characters in q exponent");
        detail::check(std::isfinite(q) && q > 1.0,
                      "parse_norm: q must be finite and > 1 (q:1, q:inf and "
                      "linf are not smooth away from 0)");
        return NormDescriptor::lq(dim, q);
    }
    if (starts_with("weighted:")) {
        std::string body(s.substr(9));
        Vec w;
        std::size_t start = 0;
        while (start <= body.size()) {
            std::size_t comma = body.find(',', start);
            if (comma == std::string::npos) comma = body.size();
            const std::string tok = body.substr(start, comma - start);
            detail::check(!tok.empty(), "parse_norm: empty weight entry");
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                throw error("parse_norm: bad weight '" + tok + "'");
            }
            detail::check(pos == tok.size(),
                          "parse_norm: trailing characters in weight");
            w.push_back(v);
            start = comma + 1;
            if (comma == body.size()) break;
        }
        detail::check(static_cast<int>(w.size()) == dim,
                      "parse_norm: weight count must equal the space dimension");
        return NormDescriptor::weighted(std::move(w));
    }
    throw error("parse_norm: unknown norm '" + std::string(s) +
                "' (expected euclidean, q:<float> or weighted:<floats>)");
}

}  // namespace lpquant
