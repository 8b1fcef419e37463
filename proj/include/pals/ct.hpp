#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "pals/forward.hpp"

namespace pals {

/// Cells crossed by the line origin + t * dir and the length of each crossing.
/// Exact traversal in the style of Siddon: the parametric crossings with every
/// grid line are merged and each sub-segment is attributed to the cell that
/// contains its midpoint. Zero-length pieces are dropped.
inline std::vector<std::pair<Index, double>> ray_cell_lengths(const Grid2D& g, const Vec2& origin, const Vec2& dir) {
    std::vector<std::pair<Index, double>> out;
    const Vec2 d = dir.normalized();
    const Rect b = g.bounds();
    double t_in = -std::numeric_limits<double>::infinity();
    double t_out = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2; ++k) {
        const double lo = k == 0 ? b.x0 : b.y0;
        const double hi = k == 0 ? b.x1 : b.y1;
        if (std::abs(d[k]) < 1e-15) {
            if (origin[k] <= lo || origin[k] >= hi) return out;
            continue;
        }
        double t0 = (lo - origin[k]) / d[k];
        double t1 = (hi - origin[k]) / d[k];
        if (t0 > t1) std::swap(t0, t1);
        t_in = std::max(t_in, t0);
        t_out = std::min(t_out, t1);
    }
    if (!(t_out > t_in)) return out;

    std::vector<double> ts{t_in, t_out};
    auto add_crossings = [&](const std::vector<double>& edges, int k) {
        if (std::abs(d[k]) < 1e-15) return;
        for (double e : edges) {
            const double t = (e - origin[k]) / d[k];
            if (t > t_in && t < t_out) ts.push_back(t);
        }
    };
    add_crossings(g.x_edges(), 0);
    add_crossings(g.y_edges(), 1);
    std::sort(ts.begin(), ts.end());

    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double len = ts[i] - ts[i - 1];
        if (len <= 1e-14) continue;
        const Vec2 mid = origin + 0.5 * (ts[i] + ts[i - 1]) * d;
        const Index cell = g.locate(mid.x(), mid.y());
        if (cell >= 0) out.emplace_back(cell, len);
    }
    return out;
}

/// Parallel-beam acquisition: for each angle theta the detector array axis
/// is (cos theta, sin theta) through the domain center and rays travel along
/// (-sin theta, cos theta). Detector k sits at the center of the k-th of
/// n_detectors equal slots spanning the domain width.
struct CtGeometry {
    Rect domain;
    int detectors = 34;
    std::vector<double> angles;

    /// Angles lo, lo + step, ... strictly inside (lo_deg, hi_deg) when open,
    /// otherwise the closed range. Degrees in, radians out.
    static std::vector<double> angle_range(double lo_deg, double hi_deg, double step_deg, bool open = true) {
        std::vector<double> a;
        const double eps = 1e-9 * step_deg;
        for (double t = open ? lo_deg + step_deg : lo_deg; open ? t < hi_deg - eps : t <= hi_deg + eps; t += step_deg)
            a.push_back(t * std::numbers::pi / 180.0);
        return a;
    }

    void validate() const {
        if (angles.empty()) throw std::invalid_argument("CtGeometry: at least one angle is required");
        if (detectors < 2) throw std::invalid_argument("CtGeometry: at least two detectors are required");
    }

    Index ray_count() const { return static_cast<Index>(angles.size()) * detectors; }

    /// Ray k = angle_index * detectors + detector_index.
    std::pair<Vec2, Vec2> ray(Index k) const {
        const double theta = angles[static_cast<std::size_t>(k / detectors)];
        const Index det = k % detectors;
        const Vec2 axis(std::cos(theta), std::sin(theta));
        const Vec2 dir(-std::sin(theta), std::cos(theta));
        const Vec2 center(0.5 * (domain.x0 + domain.x1), 0.5 * (domain.y0 + domain.y1));
        const double w = domain.width();
        const double offset = -0.5 * w + (static_cast<double>(det) + 0.5) * w / detectors;
        return {center + offset * axis, dir};
    }
};

/// Monoenergetic parallel-beam CT: u_k = integral of attenuation along ray k.
class CtModel final : public ForwardModel<double> {
public:
    CtModel(Grid2D grid, CtGeometry geom) : grid_(std::move(grid)), geom_(std::move(geom)) {
        geom_.validate();
        std::vector<Eigen::Triplet<double>> trip;
        for (Index k = 0; k < geom_.ray_count(); ++k) {
            const auto [o, d] = geom_.ray(k);
            for (const auto& [cell, len] : ray_cell_lengths(grid_, o, d)) trip.emplace_back(k, cell, len);
        }
        A_.resize(geom_.ray_count(), grid_.size());
        A_.setFromTriplets(trip.begin(), trip.end());
        A_.makeCompressed();
    }

    const Grid2D& grid() const override { return grid_; }
    const CtGeometry& geometry() const { return geom_; }
    Index data_size() const override { return geom_.ray_count(); }

    /// The constant ray-length matrix.
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& system_matrix() const { return A_; }

    Eigen::VectorXd predict(const Eigen::VectorXd& p) const override {
        check_property(p);
        return A_ * p;
    }

    Linearization<double> linearize(const Eigen::VectorXd& p) const override {
        return {predict(p), SensitivityMatrix<double>(A_)};
    }

    /// Backprojection by re-tracing every ray.
    Eigen::VectorXd sensitivity_adjoint(const Eigen::VectorXd& p, const Eigen::VectorXd& w) const override {
        check_property(p);
        check_data(w);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(grid_.size());
        for (Index k = 0; k < geom_.ray_count(); ++k) {
            if (w[k] == 0.0) continue;
            const auto [o, d] = geom_.ray(k);
            for (const auto& [cell, len] : ray_cell_lengths(grid_, o, d)) out[cell] += len * w[k];
        }
        return out;
    }

private:
    Grid2D grid_;
    CtGeometry geom_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> A_;
};

} // namespace pals
