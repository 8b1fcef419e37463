#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "pals/forward.hpp"
#include "pals/model.hpp"
#include "pals/optim.hpp"

namespace pals::selfcheck {

template <class Scalar, class Rng>
VectorX<Scalar> random_vector(Index n, Rng& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    VectorX<Scalar> v(n);
    for (Index k = 0; k < n; ++k) {
        if constexpr (is_complex_v<Scalar>)
            v[k] = Scalar(n01(rng), n01(rng));
        else
            v[k] = n01(rng);
    }
    return v;
}

/// |<w, S v> - <S^H w, v>| / (|w| |S v|) with S v from the assembled
/// sensitivity and S^H w from the matrix-free adjoint route.
template <class Scalar, class Rng>
double adjoint_mismatch(const ForwardModel<Scalar>& fwd, const Eigen::VectorXd& p, Rng& rng) {
    const Eigen::VectorXd v = random_vector<double>(p.size(), rng);
    const VectorX<Scalar> w = random_vector<Scalar>(fwd.data_size(), rng);
    const VectorX<Scalar> Sv = fwd.sensitivity(p).apply(v);
    const VectorX<Scalar> Shw = fwd.sensitivity_adjoint(p, w);
    const Scalar lhs = w.dot(Sv);
    const Scalar rhs = Shw.dot(v.template cast<Scalar>());
    return std::abs(lhs - rhs) / (w.norm() * Sv.norm());
}

/// Relative error of S v against the central difference of M along v
/// (v scaled so that h v is a fraction rel of p).
template <class Scalar>
double jacobian_fd_error(const ForwardModel<Scalar>& fwd, const Eigen::VectorXd& p, const Eigen::VectorXd& v,
                         double rel = 1e-4) {
    const double h = rel * p.norm() / v.norm();
    const VectorX<Scalar> fd = (fwd.predict(p + h * v) - fwd.predict(p - h * v)) / (2.0 * h);
    const VectorX<Scalar> Sv = fwd.sensitivity(p).apply(v);
    return (fd - Sv).norm() / Sv.norm();
}

/// Largest relative error between the analytic gradient Re(J^H r) and
/// central differences of 1/2 |R|^2, relative to the largest gradient entry.
template <class Scalar>
double gradient_fd_error(const PalsProblem<Scalar>& prob, const PalsModel& m, const std::vector<ParamIndex>& params,
                         double rel = 1e-6) {
    const auto lin = prob.linearize(m, params);
    const Eigen::VectorXd g = gradient<Scalar>(lin.jacobian, lin.residual);
    const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-300);
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double v = get(m, params[k]);
        const double h = rel * std::max(1.0, std::abs(v));
        PalsModel a = m, b = m;
        set(a, params[k], v + h);
        set(b, params[k], v - h);
        const double fd = (prob.cost(a) - prob.cost(b)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g[static_cast<Index>(k)]) / scale);
    }
    return worst;
}

} // namespace pals::selfcheck
