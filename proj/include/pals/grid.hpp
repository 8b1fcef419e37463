#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pals {

using Index = Eigen::Index;
using Vec2 = Eigen::Vector2d;

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double diagonal() const { return std::hypot(width(), height()); }
    bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// Tensor-product rectangular grid described by its cell edges.
///
/// Cells are stored row-major with x varying fastest:
/// cell (ix, iy) has flat index iy * nx + ix.
class Grid2D {
public:
    Grid2D() = default;

    Grid2D(std::vector<double> x_edges, std::vector<double> y_edges)
        : x_edges_(std::move(x_edges)), y_edges_(std::move(y_edges)) {
        check_axis(x_edges_, "x");
        check_axis(y_edges_, "y");
    }

    static Grid2D uniform(const Rect& r, Index nx, Index ny) {
        return Grid2D(linspace(r.x0, r.x1, nx), linspace(r.y0, r.y1, ny));
    }

    const std::vector<double>& x_edges() const { return x_edges_; }
    const std::vector<double>& y_edges() const { return y_edges_; }

    Index nx() const { return static_cast<Index>(x_edges_.size()) - 1; }
    Index ny() const { return static_cast<Index>(y_edges_.size()) - 1; }
    Index size() const { return nx() * ny(); }

    Index index(Index ix, Index iy) const { return iy * nx() + ix; }
    Index ix_of(Index cell) const { return cell % nx(); }
    Index iy_of(Index cell) const { return cell / nx(); }

    double dx(Index ix) const { return x_edges_[ix + 1] - x_edges_[ix]; }
    double dy(Index iy) const { return y_edges_[iy + 1] - y_edges_[iy]; }
    double xc(Index ix) const { return 0.5 * (x_edges_[ix] + x_edges_[ix + 1]); }
    double yc(Index iy) const { return 0.5 * (y_edges_[iy] + y_edges_[iy + 1]); }

    Vec2 center(Index cell) const { return {xc(ix_of(cell)), yc(iy_of(cell))}; }
    double area(Index cell) const { return dx(ix_of(cell)) * dy(iy_of(cell)); }

    Eigen::VectorXd areas() const {
        Eigen::VectorXd a(size());
        for (Index c = 0; c < size(); ++c) a[c] = area(c);
        return a;
    }

    Rect bounds() const { return {x_edges_.front(), x_edges_.back(), y_edges_.front(), y_edges_.back()}; }

    double min_spacing() const {
        double h = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < nx(); ++i) h = std::min(h, dx(i));
        for (Index j = 0; j < ny(); ++j) h = std::min(h, dy(j));
        return h;
    }

    /// Cell containing (x, y), or -1 if outside. Points on interior edges
    /// belong to the cell on the upper side.
    Index locate(double x, double y) const {
        const Index ix = locate_axis(x_edges_, x);
        const Index iy = locate_axis(y_edges_, y);
        if (ix < 0 || iy < 0) return -1;
        return index(ix, iy);
    }

    static Index locate_axis(const std::vector<double>& edges, double v) {
        if (v < edges.front() || v > edges.back()) return -1;
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        Index i = static_cast<Index>(it - edges.begin()) - 1;
        return std::min<Index>(i, static_cast<Index>(edges.size()) - 2);
    }

    bool same_as(const Grid2D& o) const { return x_edges_ == o.x_edges_ && y_edges_ == o.y_edges_; }

    static std::vector<double> linspace(double a, double b, Index n_intervals) {
        if (n_intervals < 1) throw std::invalid_argument("linspace: need at least one interval");
        std::vector<double> v(static_cast<std::size_t>(n_intervals) + 1);
        for (Index i = 0; i <= n_intervals; ++i)
            v[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n_intervals);
        v.back() = b;
        return v;
    }

private:
    static void check_axis(const std::vector<double>& e, const char* name) {
        if (e.size() < 2)
            throw std::invalid_argument(std::string("Grid2D: ") + name + " axis needs at least 2 edges");
        for (std::size_t i = 1; i < e.size(); ++i)
            if (!(e[i] > e[i - 1]))
                throw std::invalid_argument(std::string("Grid2D: ") + name + " edges must be strictly increasing");
    }

    std::vector<double> x_edges_;
    std::vector<double> y_edges_;
};

/// Edges of an axis that is uniform on [inner_lo, inner_hi] with n_inner
/// cells and coarsens linearly outward: the k-th cell beyond the inner block
/// has width h + k * d, with d chosen so the outer blocks end exactly at
/// outer_lo / outer_hi. A block with zero cells must have zero length.
inline std::vector<double> graded_edges(double outer_lo, Index n_lo, double inner_lo, double inner_hi,
                                        Index n_inner, Index n_hi, double outer_hi) {
    if (!(outer_lo <= inner_lo && inner_lo < inner_hi && inner_hi <= outer_hi) || n_inner < 1)
        throw std::invalid_argument("graded_edges: inconsistent extents");
    const double h = (inner_hi - inner_lo) / static_cast<double>(n_inner);

    auto outward = [h](double length, Index n) {
        std::vector<double> widths;
        if (n == 0) {
            if (length > 0.0) throw std::invalid_argument("graded_edges: outer block has length but no cells");
            return widths;
        }
        const double nn = static_cast<double>(n);
        const double d = (length - nn * h) / (nn * (nn + 1.0) / 2.0);
        if (d < 0.0) throw std::invalid_argument("graded_edges: outer block too short to coarsen");
        for (Index k = 1; k <= n; ++k) widths.push_back(h + static_cast<double>(k) * d);
        return widths;
    };

    const auto lo = outward(inner_lo - outer_lo, n_lo);
    const auto hi = outward(outer_hi - inner_hi, n_hi);

    std::vector<double> edges{outer_lo};
    double x = outer_lo;
    for (auto it = lo.rbegin(); it != lo.rend(); ++it) {
        x += *it;
        edges.push_back(x);
    }
    if (!lo.empty()) edges.back() = inner_lo;
    for (Index i = 1; i <= n_inner; ++i) edges.push_back(inner_lo + h * static_cast<double>(i));
    edges.back() = inner_hi;
    x = inner_hi;
    for (double w : hi) {
        x += w;
        edges.push_back(x);
    }
    if (!hi.empty()) edges.back() = outer_hi;
    return edges;
}

inline void require_on_grid(const Grid2D& g, Index n, const char* what) {
    if (n != g.size())
        throw std::invalid_argument(std::string(what) + ": field has " + std::to_string(n) +
                                    " values but grid has " + std::to_string(g.size()) + " cells");
}

} // namespace pals
