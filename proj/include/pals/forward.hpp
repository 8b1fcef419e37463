#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pals/grid.hpp"

namespace pals {

using Complex = std::complex<double>;

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a linear solve inside a forward model fails.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a property image is outside a model's physical domain
/// (e.g. non-positive conductivity). Optimizers treat it as a rejected trial.
class InvalidProperty : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <class Scalar>
inline constexpr bool is_complex_v = !std::is_same_v<Scalar, double>;

/// Discrete Frechet derivative of a forward model with respect to the
/// per-cell property: S(k, cell) = d(measurement k) / d(property at cell).
/// Stored sparse (ray models) or dense (PDE models).
template <class Scalar>
class SensitivityMatrix {
public:
    using Sparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
    using Dense = MatrixX<Scalar>;

    SensitivityMatrix() = default;
    explicit SensitivityMatrix(Sparse s) : m_(std::move(s)) {}
    explicit SensitivityMatrix(Dense d) : m_(std::move(d)) {}

    Index rows() const {
        return std::visit([](const auto& m) { return static_cast<Index>(m.rows()); }, m_);
    }
    Index cols() const {
        return std::visit([](const auto& m) { return static_cast<Index>(m.cols()); }, m_);
    }
    bool is_sparse() const { return std::holds_alternative<Sparse>(m_); }

    /// S * v for a pixel-space vector (real or complex).
    template <class Derived>
    VectorX<Scalar> apply(const Eigen::MatrixBase<Derived>& v) const {
        return std::visit([&](const auto& m) -> VectorX<Scalar> { return m * v.template cast<Scalar>(); }, m_);
    }

    /// S^H * w.
    VectorX<Scalar> apply_adjoint(const VectorX<Scalar>& w) const {
        return std::visit([&](const auto& m) -> VectorX<Scalar> { return m.adjoint() * w; }, m_);
    }

    /// S * P for a real pixel-by-parameter matrix P.
    MatrixX<Scalar> times(const Eigen::MatrixXd& P) const {
        return std::visit([&](const auto& m) -> MatrixX<Scalar> { return m * P.template cast<Scalar>(); }, m_);
    }

    Dense to_dense() const {
        if (const auto* s = std::get_if<Sparse>(&m_)) return Dense(*s);
        return std::get<Dense>(m_);
    }

private:
    std::variant<Sparse, Dense> m_;
};

template <class Scalar>
struct Linearization {
    VectorX<Scalar> prediction;
    SensitivityMatrix<Scalar> sensitivity;
};

/// Contract shared by the tomographic forward models. A model maps a
/// property image on its parameter grid to a data vector; it never sees
/// level-set parameters.
template <class Scalar_>
class ForwardModel {
public:
    using Scalar = Scalar_;

    virtual ~ForwardModel() = default;

    /// Grid on which the unknown property lives.
    virtual const Grid2D& grid() const = 0;
    virtual Index data_size() const = 0;

    /// M(p).
    virtual VectorX<Scalar> predict(const Eigen::VectorXd& p) const = 0;

    /// M(p) together with S = M'(p).
    virtual Linearization<Scalar> linearize(const Eigen::VectorXd& p) const = 0;

    /// S^H w computed without forming S (adjoint-field route).
    virtual VectorX<Scalar> sensitivity_adjoint(const Eigen::VectorXd& p, const VectorX<Scalar>& w) const = 0;

    /// R(p) = M(p) - u.
    VectorX<Scalar> residual(const Eigen::VectorXd& p, const VectorX<Scalar>& data) const {
        check_data(data);
        return predict(p) - data;
    }

    SensitivityMatrix<Scalar> sensitivity(const Eigen::VectorXd& p) const { return linearize(p).sensitivity; }

protected:
    void check_property(const Eigen::VectorXd& p) const { require_on_grid(grid(), p.size(), "forward model"); }

    void check_data(const VectorX<Scalar>& d) const {
        if (d.size() != data_size())
            throw std::invalid_argument("forward model: data vector has " + std::to_string(d.size()) +
                                        " entries, expected " + std::to_string(data_size()));
    }
};

} // namespace pals
