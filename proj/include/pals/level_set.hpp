#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "pals/grid.hpp"
#include "pals/model.hpp"

namespace pals {

/// Smoothed scaled distance || beta (x - chi) ||_dagger = sqrt(beta^2 |x - chi|^2 + upsilon^2).
inline double scaled_radius(const Bump& b, const Vec2& x, double upsilon) {
    const double d2 = (x - b.center).squaredNorm();
    return std::sqrt(b.dilation * b.dilation * d2 + upsilon * upsilon);
}

/// True when x lies strictly inside the support disk of the bump.
inline bool in_support(const Bump& b, const Vec2& x, double upsilon) {
    return scaled_radius(b, x, upsilon) < 1.0;
}

/// phi(x) = sum_j alpha_j psi(|| beta_j (x - chi_j) ||_dagger) at every cell center.
inline Eigen::VectorXd eval_phi(const PalsModel& m, const Grid2D& g) {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(g.size());
    for (const auto& b : m.bumps) {
        if (b.weight == 0.0) continue;
        for (Index c = 0; c < g.size(); ++c) {
            const double r = scaled_radius(b, g.center(c), m.norm_smoothing);
            if (r < 1.0) phi[c] += b.weight * m.kernel.eval(r);
        }
    }
    return phi;
}

namespace detail {

/// d phi / d mu for a bump-bound parameter at a single point.
inline double phi_derivative_at(const PalsModel& m, const ParamIndex& idx, const Vec2& x) {
    const Bump& b = m.bumps[static_cast<std::size_t>(idx.bump)];
    const double r = scaled_radius(b, x, m.norm_smoothing);
    if (r >= 1.0) return 0.0;
    switch (idx.kind) {
    case ParamIndex::Kind::Weight:
        return m.kernel.eval(r);
    case ParamIndex::Kind::Dilation:
        return b.weight * b.dilation * (x - b.center).squaredNorm() / r * m.kernel.eval_deriv(r);
    case ParamIndex::Kind::CenterX:
    case ParamIndex::Kind::CenterY: {
        const int k = idx.kind == ParamIndex::Kind::CenterX ? 0 : 1;
        return b.weight * b.dilation * b.dilation * (b.center[k] - x[k]) / r * m.kernel.eval_deriv(r);
    }
    default:
        throw std::invalid_argument("phi sensitivity: contrast parameters do not enter phi");
    }
}

} // namespace detail

/// d phi / d mu_j for a bump-bound parameter; zero outside the bump's support.
inline Eigen::VectorXd eval_phi_sensitivity(const PalsModel& m, const Grid2D& g, const ParamIndex& idx) {
    if (!idx.bump_bound()) throw std::invalid_argument("phi sensitivity: contrast parameters do not enter phi");
    if (idx.bump < 0 || idx.bump >= m.bump_count()) throw std::out_of_range("phi sensitivity: bump index");
    Eigen::VectorXd out(g.size());
    for (Index c = 0; c < g.size(); ++c) out[c] = detail::phi_derivative_at(m, idx, g.center(c));
    return out;
}

/// p(x) = p_in H(phi - c) + p_out (1 - H(phi - c)).
inline Eigen::VectorXd property_from_phi(const PalsModel& m, const Eigen::VectorXd& phi) {
    Eigen::VectorXd p(phi.size());
    for (Index c = 0; c < phi.size(); ++c) {
        const double h = heaviside(m.heaviside, m.epsilon, phi[c] - m.level);
        p[c] = m.contrast_in * h + m.contrast_out * (1.0 - h);
    }
    return p;
}

inline Eigen::VectorXd property_map(const PalsModel& m, const Grid2D& g) {
    return property_from_phi(m, eval_phi(m, g));
}

/// Columns d p / d mu for the requested parameters, evaluated with one pass
/// over phi. Bump-bound columns are (p_in - p_out) delta(phi - c) d phi/d mu.
inline Eigen::MatrixXd property_jacobian(const PalsModel& m, const Grid2D& g,
                                         const std::vector<ParamIndex>& params) {
    const Eigen::VectorXd phi = eval_phi(m, g);
    Eigen::VectorXd dp_dphi(g.size()), h(g.size());
    for (Index c = 0; c < g.size(); ++c) {
        const double t = phi[c] - m.level;
        dp_dphi[c] = (m.contrast_in - m.contrast_out) * delta(m.heaviside, m.epsilon, t);
        h[c] = heaviside(m.heaviside, m.epsilon, t);
    }
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(g.size(), static_cast<Index>(params.size()));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const ParamIndex& idx = params[k];
        const Index col = static_cast<Index>(k);
        if (idx.kind == ParamIndex::Kind::ContrastIn) {
            P.col(col) = h;
        } else if (idx.kind == ParamIndex::Kind::ContrastOut) {
            P.col(col) = Eigen::VectorXd::Ones(g.size()) - h;
        } else {
            for (Index c = 0; c < g.size(); ++c) {
                if (dp_dphi[c] == 0.0) continue;
                P(c, col) = dp_dphi[c] * detail::phi_derivative_at(m, idx, g.center(c));
            }
        }
    }
    return P;
}

inline Eigen::VectorXd property_sensitivity(const PalsModel& m, const Grid2D& g, const ParamIndex& idx) {
    return property_jacobian(m, g, {idx}).col(0);
}

/// Bumps whose support meets the band |phi - c| < epsilon at some cell center.
/// Under H1 the delta has global support and every bump is active.
inline std::vector<bool> active_bumps(const PalsModel& m, const Grid2D& g) {
    std::vector<bool> active(m.bumps.size(), m.heaviside == HeavisideKind::H1);
    if (m.heaviside == HeavisideKind::H1) return active;
    const Eigen::VectorXd phi = eval_phi(m, g);
    for (Index c = 0; c < g.size(); ++c) {
        if (!(std::abs(phi[c] - m.level) < m.epsilon)) continue;
        const Vec2 x = g.center(c);
        for (std::size_t j = 0; j < m.bumps.size(); ++j)
            if (!active[j] && in_support(m.bumps[j], x, m.norm_smoothing)) active[j] = true;
    }
    return active;
}

/// Indicator of the c-superlevel set {phi >= c}.
inline std::vector<bool> superlevel_mask(const Eigen::VectorXd& phi, double level) {
    std::vector<bool> mask(static_cast<std::size_t>(phi.size()));
    for (Index c = 0; c < phi.size(); ++c) mask[static_cast<std::size_t>(c)] = phi[c] >= level;
    return mask;
}

} // namespace pals
