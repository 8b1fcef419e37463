#pragma once

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "pals/forward.hpp"
#include "pals/fv.hpp"

namespace pals {

struct DotSetup {
    Grid2D grid;
    std::vector<Vec2> sources;
    std::vector<Vec2> detectors;
    std::vector<double> frequencies_hz{0.0, 25e6, 50e6};
    double reduced_scattering = 600.0;  // 1/m
    double refractive_index = 1.37;

    static constexpr double speed_of_light = 299792458.0;

    double diffusion() const { return 1.0 / (3.0 * reduced_scattering); }
    double light_speed() const { return speed_of_light / refractive_index; }

    /// 5 cm x 5 cm square (in metres) on a 50 x 50 grid, 8 sources under the
    /// top surface and 8 detectors above the bottom surface, each placed one
    /// transport mean free path (1 / mu_s') inside the boundary.
    static DotSetup standard() {
        DotSetup s;
        const Rect r{0.0, 0.05, 0.0, 0.05};
        s.grid = Grid2D::uniform(r, 50, 50);
        const double depth = 1.0 / s.reduced_scattering;
        for (int k = 0; k < 8; ++k) {
            const double x = r.x0 + (k + 0.5) * r.width() / 8.0;
            s.sources.emplace_back(x, r.y1 - depth);
            s.detectors.emplace_back(x, r.y0 + depth);
        }
        return s;
    }

    void validate() const {
        if (sources.empty() || detectors.empty()) throw std::invalid_argument("DotSetup: need sources and detectors");
        if (frequencies_hz.empty()) throw std::invalid_argument("DotSetup: need at least one frequency");
        for (double f : frequencies_hz)
            if (f < 0.0) throw std::invalid_argument("DotSetup: frequencies must be non-negative");
        if (!(reduced_scattering > 0.0)) throw std::invalid_argument("DotSetup: reduced scattering must be positive");
        if (!(refractive_index > 0.0)) throw std::invalid_argument("DotSetup: refractive index must be positive");
    }
};

/// Frequency-domain diffuse optical tomography:
/// -div(D grad u) + mu_a u + i (omega / v) u = s with the Robin condition
/// u + 2 D du/dn = 0, omega = 2 pi f. The absorption mu_a is the unknown.
/// Data are stacked frequency-major, then source, then detector.
class DotModel final : public ForwardModel<Complex> {
public:
    using SparseMatrix = Eigen::SparseMatrix<Complex>;
    using Solver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

    explicit DotModel(DotSetup setup) : setup_(std::move(setup)) {
        setup_.validate();
        bc_.kind = {fv::BoundaryKind::Robin, fv::BoundaryKind::Robin, fv::BoundaryKind::Robin, fv::BoundaryKind::Robin};
        bc_.robin_extrapolation = 2.0;
        const Index n = setup_.grid.size();
        src_ = Eigen::MatrixXcd::Zero(n, static_cast<Index>(setup_.sources.size()));
        det_ = Eigen::MatrixXcd::Zero(n, static_cast<Index>(setup_.detectors.size()));
        for (std::size_t s = 0; s < setup_.sources.size(); ++s)
            src_.col(static_cast<Index>(s)) = fv::point_vector<Complex>(setup_.grid, setup_.sources[s]);
        for (std::size_t d = 0; d < setup_.detectors.size(); ++d)
            det_.col(static_cast<Index>(d)) = fv::point_vector<Complex>(setup_.grid, setup_.detectors[d]);
    }

    const DotSetup& setup() const { return setup_; }
    const Grid2D& grid() const override { return setup_.grid; }
    Index frequency_count() const { return static_cast<Index>(setup_.frequencies_hz.size()); }
    Index source_count() const { return src_.cols(); }
    Index detector_count() const { return det_.cols(); }
    Index data_size() const override { return frequency_count() * source_count() * detector_count(); }

    Index data_index(Index f, Index s, Index d) const { return (f * source_count() + s) * detector_count() + d; }

    SparseMatrix system_matrix(const Eigen::VectorXd& absorption, double frequency_hz) const {
        check_absorption(absorption);
        const Eigen::VectorXd D = Eigen::VectorXd::Constant(setup_.grid.size(), setup_.diffusion());
        auto trip = fv::diffusion_triplets<Complex>(setup_.grid, D, bc_);
        const double k = 2.0 * std::numbers::pi * frequency_hz / setup_.light_speed();
        for (Index c = 0; c < setup_.grid.size(); ++c)
            trip.emplace_back(c, c, setup_.grid.area(c) * Complex(absorption[c], k));
        SparseMatrix K(setup_.grid.size(), setup_.grid.size());
        K.setFromTriplets(trip.begin(), trip.end());
        K.makeCompressed();
        return K;
    }

    /// Photon density for cell-integrated sources (columns of rhs).
    Eigen::MatrixXcd solve(const Eigen::VectorXd& absorption, double frequency_hz, const Eigen::MatrixXcd& rhs) const {
        Solver lu;
        factor(lu, absorption, frequency_hz);
        Eigen::MatrixXcd u = lu.solve(rhs);
        if (lu.info() != Eigen::Success) throw SolverFailure("DOT: solve failed");
        return u;
    }

    Eigen::VectorXcd point_source(const Vec2& x) const { return fv::point_vector<Complex>(setup_.grid, x); }

    Eigen::VectorXcd predict(const Eigen::VectorXd& p) const override {
        check_property(p);
        Eigen::VectorXcd out(data_size());
        for (Index f = 0; f < frequency_count(); ++f) {
            const Eigen::MatrixXcd U = solve(p, setup_.frequencies_hz[static_cast<std::size_t>(f)], src_);
            const Eigen::MatrixXcd M = det_.transpose() * U;  // detectors x sources
            for (Index s = 0; s < source_count(); ++s)
                for (Index d = 0; d < detector_count(); ++d) out[data_index(f, s, d)] = M(d, s);
        }
        return out;
    }

    /// Sensitivity entry -area_c u_s(c) g_d(c): the product of forward and
    /// adjoint fields, no conjugation (complex-symmetric operator).
    Linearization<Complex> linearize(const Eigen::VectorXd& p) const override {
        check_property(p);
        const Index ns = source_count(), nd = detector_count();
        Eigen::VectorXcd pred(data_size());
        Eigen::MatrixXcd S(data_size(), setup_.grid.size());
        const Eigen::VectorXd area = setup_.grid.areas();
        for (Index f = 0; f < frequency_count(); ++f) {
            Solver lu;
            factor(lu, p, setup_.frequencies_hz[static_cast<std::size_t>(f)]);
            const Eigen::MatrixXcd U = lu.solve(src_);
            const Eigen::MatrixXcd G = lu.solve(det_);
            if (lu.info() != Eigen::Success) throw SolverFailure("DOT: solve failed");
            const Eigen::MatrixXcd M = det_.transpose() * U;
            for (Index s = 0; s < ns; ++s)
                for (Index d = 0; d < nd; ++d) {
                    const Index k = data_index(f, s, d);
                    pred[k] = M(d, s);
                    S.row(k) = -(U.col(s).array() * G.col(d).array() * area.array().cast<Complex>()).transpose();
                }
        }
        return {std::move(pred), SensitivityMatrix<Complex>(std::move(S))};
    }

    /// S^H w with one combined adjoint solve per (frequency, source).
    Eigen::VectorXcd sensitivity_adjoint(const Eigen::VectorXd& p, const Eigen::VectorXcd& w) const override {
        check_property(p);
        check_data(w);
        const Index ns = source_count(), nd = detector_count();
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(setup_.grid.size());
        for (Index f = 0; f < frequency_count(); ++f) {
            Solver lu;
            factor(lu, p, setup_.frequencies_hz[static_cast<std::size_t>(f)]);
            const Eigen::MatrixXcd U = lu.solve(src_);
            Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(setup_.grid.size(), ns);
            for (Index s = 0; s < ns; ++s)
                for (Index d = 0; d < nd; ++d) rhs.col(s) += std::conj(w[data_index(f, s, d)]) * det_.col(d);
            const Eigen::MatrixXcd L = lu.solve(rhs);
            if (lu.info() != Eigen::Success) throw SolverFailure("DOT: solve failed");
            for (Index c = 0; c < setup_.grid.size(); ++c) {
                Complex acc = 0.0;
                for (Index s = 0; s < ns; ++s) acc += U(c, s) * L(c, s);
                out[c] -= setup_.grid.area(c) * std::conj(acc);
            }
        }
        return out;
    }

private:
    void check_absorption(const Eigen::VectorXd& a) const {
        require_on_grid(setup_.grid, a.size(), "DOT absorption");
        for (Index c = 0; c < a.size(); ++c)
            if (!(a[c] > 0.0))
                throw InvalidProperty("DOT: absorption must be positive (cell " + std::to_string(c) + " has " +
                                      std::to_string(a[c]) + ")");
    }

    void factor(Solver& lu, const Eigen::VectorXd& absorption, double frequency_hz) const {
        lu.compute(system_matrix(absorption, frequency_hz));
        if (lu.info() != Eigen::Success) throw SolverFailure("DOT: factorization failed");
    }

    DotSetup setup_;
    fv::BoundaryConditions bc_;
    Eigen::MatrixXcd src_;
    Eigen::MatrixXcd det_;
};

} // namespace pals
