#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "pals/forward.hpp"
#include "pals/fv.hpp"

namespace pals {

/// Sensors equally spaced along the left side (bottom to top), the top
/// (left to right) and the right side (top to bottom) of a rectangle.
inline std::vector<Vec2> perimeter_sensors(const Rect& r, int count) {
    const double h = r.height(), w = r.width();
    const double total = 2.0 * h + w;
    std::vector<Vec2> out;
    for (int k = 0; k < count; ++k) {
        const double s = (k + 0.5) * total / count;
        if (s < h)
            out.emplace_back(r.x0, r.y0 + s);
        else if (s < h + w)
            out.emplace_back(r.x0 + (s - h), r.y1);
        else
            out.emplace_back(r.x1, r.y1 - (s - h - w));
    }
    return out;
}

/// Deterministic cross-medium dipole pairing for sensors laid out by
/// perimeter_sensors(): pairs (k, k + d) for perimeter offsets
/// d = n/2, 2n/3, 5n/6, 3n/5 taking n/2, n/3, n/6, n/3 pairs respectively.
/// For n = 30 this gives 40 distinct pairs whose connecting segments cross
/// the imaging region.
inline std::vector<std::pair<int, int>> cross_medium_dipoles(int n) {
    if (n % 30 != 0)
        throw std::invalid_argument("cross_medium_dipoles: sensor count must be a multiple of 30; list dipoles explicitly");
    const std::array<std::pair<int, int>, 4> plan{{{n / 2, n / 2}, {2 * n / 3, n / 3}, {5 * n / 6, n / 6}, {3 * n / 5, n / 3}}};
    std::vector<std::pair<int, int>> out;
    for (const auto& [offset, count] : plan)
        for (int k = 0; k < count; ++k) out.emplace_back(k, k + offset);
    return out;
}

/// DC resistivity setup: conductivity solve on the full domain, inversion
/// restricted to the cells of the imaging region.
struct ErtSetup {
    Grid2D grid;
    Rect imaging;
    std::vector<Vec2> sensors;
    std::vector<std::pair<int, int>> dipoles;
    double current = 1.0;
    double background = 0.01;

    /// [-3,3] x [-3,0] with a uniform 75 x 75 block on [-0.5,0.5] x [-1,0]
    /// and linearly coarsening cells outside (125 x 100 overall), 30
    /// perimeter sensors and 40 cross-medium dipoles.
    static ErtSetup standard(double background = 0.01) {
        ErtSetup s;
        s.imaging = {-0.5, 0.5, -1.0, 0.0};
        s.grid = Grid2D(graded_edges(-3.0, 25, -0.5, 0.5, 75, 25, 3.0), graded_edges(-3.0, 25, -1.0, 0.0, 75, 0, 0.0));
        s.sensors = perimeter_sensors(s.imaging, 30);
        s.dipoles = cross_medium_dipoles(30);
        s.background = background;
        return s;
    }

    void validate() const {
        if (sensors.size() < 3) throw std::invalid_argument("ErtSetup: need at least 3 sensors");
        if (dipoles.empty()) throw std::invalid_argument("ErtSetup: need at least one dipole");
        for (const auto& [a, b] : dipoles) {
            const int n = static_cast<int>(sensors.size());
            if (a < 0 || b < 0 || a >= n || b >= n || a == b)
                throw std::invalid_argument("ErtSetup: dipole (" + std::to_string(a) + "," + std::to_string(b) +
                                            ") must use two distinct sensors");
        }
        if (!(background > 0.0)) throw std::invalid_argument("ErtSetup: background conductivity must be positive");
        if (!grid.bounds().contains(imaging.x0, imaging.y0) || !grid.bounds().contains(imaging.x1, imaging.y1))
            throw std::invalid_argument("ErtSetup: imaging region must lie inside the grid");
    }
};

/// Electrical resistance tomography on a cell-centered grid:
/// -div(sigma grad u) = I (delta_a - delta_b), zero-flux top surface,
/// grounded (u = 0) sides and bottom. Measurements are the potentials at
/// every sensor not driving the current.
class ErtModel final : public ForwardModel<double> {
public:
    using SparseMatrix = Eigen::SparseMatrix<double>;

    explicit ErtModel(ErtSetup setup) : setup_(std::move(setup)) {
        setup_.validate();
        bc_.kind = {fv::BoundaryKind::Dirichlet, fv::BoundaryKind::Dirichlet, fv::BoundaryKind::Dirichlet,
                    fv::BoundaryKind::Neumann};
        build_active_grid();
        for (const auto& s : setup_.sensors) sensor_weights_.push_back(fv::point_weights(setup_.grid, s));
        for (const auto& [a, b] : setup_.dipoles) {
            std::vector<int> meas;
            for (int i = 0; i < static_cast<int>(setup_.sensors.size()); ++i)
                if (i != a && i != b) meas.push_back(i);
            measured_.push_back(std::move(meas));
        }
        for (const auto& m : measured_) data_size_ += static_cast<Index>(m.size());
    }

    const ErtSetup& setup() const { return setup_; }
    const Grid2D& grid() const override { return active_grid_; }
    const Grid2D& full_grid() const { return setup_.grid; }
    Index data_size() const override { return data_size_; }
    const std::vector<Index>& active_cells() const { return active_to_full_; }

    /// Full-domain conductivity with the imaging cells set from p.
    Eigen::VectorXd full_conductivity(const Eigen::VectorXd& p) const {
        check_property(p);
        Eigen::VectorXd s = Eigen::VectorXd::Constant(setup_.grid.size(), setup_.background);
        for (Index k = 0; k < p.size(); ++k) s[active_to_full_[static_cast<std::size_t>(k)]] = p[k];
        return s;
    }

    SparseMatrix system_matrix(const Eigen::VectorXd& sigma_full) const {
        check_conductivity(sigma_full);
        const auto trip = fv::diffusion_triplets<double>(setup_.grid, sigma_full, bc_);
        SparseMatrix K(setup_.grid.size(), setup_.grid.size());
        K.setFromTriplets(trip.begin(), trip.end());
        return K;
    }

    /// Solve K(sigma) u = rhs on the full grid; rhs holds cell-integrated sources.
    Eigen::MatrixXd solve(const Eigen::VectorXd& sigma_full, const Eigen::MatrixXd& rhs) const {
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(system_matrix(sigma_full));
        if (ldlt.info() != Eigen::Success) throw SolverFailure("ERT: factorization failed");
        Eigen::MatrixXd u = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success) throw SolverFailure("ERT: solve failed");
        return u;
    }

    /// Cell-integrated source vector of a unit point current at x.
    Eigen::VectorXd point_source(const Vec2& x) const { return fv::point_vector<double>(setup_.grid, x); }

    /// Value of a full-grid field at sensor i.
    double sample(const Eigen::VectorXd& u, int sensor) const {
        double v = 0.0;
        for (const auto& [c, w] : sensor_weights_[static_cast<std::size_t>(sensor)]) v += w * u[c];
        return v;
    }

    Eigen::VectorXd predict(const Eigen::VectorXd& p) const override {
        const Eigen::MatrixXd G = sensor_fields(full_conductivity(p));
        return measurements(G);
    }

    Linearization<double> linearize(const Eigen::VectorXd& p) const override {
        const Eigen::VectorXd sigma = full_conductivity(p);
        const Eigen::MatrixXd G = sensor_fields(sigma);
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(data_size_, active_grid_.size());

        // Exact discrete derivative: dm/dsigma_c = -g_i^T (dK/dsigma_c) u_l,
        // summed over the faces of c as dT/dsigma_c * (jump in u_l) * (jump in g_i).
        fv::for_each_face(setup_.grid, [&](const fv::Face& f) {
            const Index ca = full_to_active_[static_cast<std::size_t>(f.a)];
            const Index cb = f.b >= 0 ? full_to_active_[static_cast<std::size_t>(f.b)] : -1;
            if (ca < 0 && cb < 0) return;
            const Eigen::VectorXd jump = f.b >= 0 ? Eigen::VectorXd(G.row(f.a) - G.row(f.b)) : Eigen::VectorXd(G.row(f.a));
            double ta = 0.0, tb = 0.0;
            if (f.b >= 0) {
                if (ca >= 0) ta = fv::interior_transmissibility_da(f, sigma[f.a], sigma[f.b]);
                if (cb >= 0) tb = fv::interior_transmissibility_db(f, sigma[f.a], sigma[f.b]);
            } else {
                ta = fv::boundary_transmissibility_da(f, bc_, sigma[f.a]);
            }
            if (ta == 0.0 && tb == 0.0) return;
            Index row = 0;
            for (std::size_t l = 0; l < setup_.dipoles.size(); ++l) {
                const auto [a, b] = setup_.dipoles[l];
                const double ju = setup_.current * (jump[a] - jump[b]);
                for (int i : measured_[l]) {
                    const double prod = -ju * jump[i];
                    if (ca >= 0) S(row, ca) += ta * prod;
                    if (cb >= 0) S(row, cb) += tb * prod;
                    ++row;
                }
            }
        });
        return {measurements(G), SensitivityMatrix<double>(std::move(S))};
    }

    /// S^T w via one combined adjoint solve per experiment.
    Eigen::VectorXd sensitivity_adjoint(const Eigen::VectorXd& p, const Eigen::VectorXd& w) const override {
        check_data(w);
        const Eigen::VectorXd sigma = full_conductivity(p);
        const Index nexp = static_cast<Index>(setup_.dipoles.size());
        const Index ncell = setup_.grid.size();
        Eigen::MatrixXd rhs_fwd = Eigen::MatrixXd::Zero(ncell, nexp);
        Eigen::MatrixXd rhs_adj = Eigen::MatrixXd::Zero(ncell, nexp);
        Index row = 0;
        for (Index l = 0; l < nexp; ++l) {
            const auto [a, b] = setup_.dipoles[static_cast<std::size_t>(l)];
            for (const auto& [c, wt] : sensor_weights_[static_cast<std::size_t>(a)]) rhs_fwd(c, l) += setup_.current * wt;
            for (const auto& [c, wt] : sensor_weights_[static_cast<std::size_t>(b)]) rhs_fwd(c, l) -= setup_.current * wt;
            for (int i : measured_[static_cast<std::size_t>(l)]) {
                for (const auto& [c, wt] : sensor_weights_[static_cast<std::size_t>(i)]) rhs_adj(c, l) += w[row] * wt;
                ++row;
            }
        }
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(system_matrix(sigma));
        if (ldlt.info() != Eigen::Success) throw SolverFailure("ERT: factorization failed");
        const Eigen::MatrixXd U = ldlt.solve(rhs_fwd);
        const Eigen::MatrixXd L = ldlt.solve(rhs_adj);

        Eigen::VectorXd out = Eigen::VectorXd::Zero(active_grid_.size());
        fv::for_each_face(setup_.grid, [&](const fv::Face& f) {
            const Index ca = full_to_active_[static_cast<std::size_t>(f.a)];
            const Index cb = f.b >= 0 ? full_to_active_[static_cast<std::size_t>(f.b)] : -1;
            if (ca < 0 && cb < 0) return;
            double e = 0.0;
            for (Index l = 0; l < nexp; ++l) {
                const double ju = f.b >= 0 ? U(f.a, l) - U(f.b, l) : U(f.a, l);
                const double jl = f.b >= 0 ? L(f.a, l) - L(f.b, l) : L(f.a, l);
                e -= ju * jl;
            }
            if (f.b >= 0) {
                if (ca >= 0) out[ca] += fv::interior_transmissibility_da(f, sigma[f.a], sigma[f.b]) * e;
                if (cb >= 0) out[cb] += fv::interior_transmissibility_db(f, sigma[f.a], sigma[f.b]) * e;
            } else {
                out[ca] += fv::boundary_transmissibility_da(f, bc_, sigma[f.a]) * e;
            }
        });
        return out;
    }

    /// Unit-current monopole field for every sensor (columns), which doubles
    /// as the adjoint field of a measurement at that sensor.
    Eigen::MatrixXd sensor_fields(const Eigen::VectorXd& sigma_full) const {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(setup_.grid.size(), static_cast<Index>(setup_.sensors.size()));
        for (std::size_t s = 0; s < sensor_weights_.size(); ++s)
            for (const auto& [c, w] : sensor_weights_[s]) B(c, static_cast<Index>(s)) += w;
        return solve(sigma_full, B);
    }

private:
    void check_conductivity(const Eigen::VectorXd& sigma) const {
        require_on_grid(setup_.grid, sigma.size(), "ERT conductivity");
        for (Index c = 0; c < sigma.size(); ++c)
            if (!(sigma[c] > 0.0))
                throw InvalidProperty("ERT: conductivity must be positive (cell " + std::to_string(c) +
                                            " has " + std::to_string(sigma[c]) + ")");
    }

    Eigen::VectorXd measurements(const Eigen::MatrixXd& G) const {
        const Index ns = static_cast<Index>(setup_.sensors.size());
        Eigen::MatrixXd V(ns, ns);
        for (Index s = 0; s < ns; ++s)
            for (Index i = 0; i < ns; ++i) V(i, s) = sample(G.col(s), static_cast<int>(i));
        Eigen::VectorXd d(data_size_);
        Index row = 0;
        for (std::size_t l = 0; l < setup_.dipoles.size(); ++l) {
            const auto [a, b] = setup_.dipoles[l];
            for (int i : measured_[l]) d[row++] = setup_.current * (V(i, a) - V(i, b));
        }
        return d;
    }

    void build_active_grid() {
        const auto& xe = setup_.grid.x_edges();
        const auto& ye = setup_.grid.y_edges();
        auto span = [](const std::vector<double>& e, double lo, double hi) {
            const double tol = 1e-9 * (e.back() - e.front());
            Index i0 = -1, i1 = -1;
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (std::abs(e[i] - lo) < tol) i0 = static_cast<Index>(i);
                if (std::abs(e[i] - hi) < tol) i1 = static_cast<Index>(i);
            }
            if (i0 < 0 || i1 <= i0) throw std::invalid_argument("ERT: imaging region must align with grid edges");
            return std::pair{i0, i1};
        };
        const auto [x0, x1] = span(xe, setup_.imaging.x0, setup_.imaging.x1);
        const auto [y0, y1] = span(ye, setup_.imaging.y0, setup_.imaging.y1);
        active_grid_ = Grid2D(std::vector<double>(xe.begin() + x0, xe.begin() + x1 + 1),
                              std::vector<double>(ye.begin() + y0, ye.begin() + y1 + 1));
        full_to_active_.assign(static_cast<std::size_t>(setup_.grid.size()), -1);
        for (Index iy = y0; iy < y1; ++iy)
            for (Index ix = x0; ix < x1; ++ix) {
                const Index full = setup_.grid.index(ix, iy);
                full_to_active_[static_cast<std::size_t>(full)] = static_cast<Index>(active_to_full_.size());
                active_to_full_.push_back(full);
            }
    }

    ErtSetup setup_;
    fv::BoundaryConditions bc_;
    Grid2D active_grid_;
    std::vector<Index> active_to_full_;
    std::vector<Index> full_to_active_;
    std::vector<std::vector<std::pair<Index, double>>> sensor_weights_;
    std::vector<std::vector<int>> measured_;
    Index data_size_ = 0;
};

} // namespace pals
