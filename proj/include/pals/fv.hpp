#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include <Eigen/SparseCore>

#include "pals/grid.hpp"

namespace pals::fv {

enum class Side { Left, Right, Bottom, Top };

enum class BoundaryKind { Dirichlet, Neumann, Robin };

/// Boundary condition per side. Robin means u + robin_extrapolation * k du/dn = 0.
struct BoundaryConditions {
    std::array<BoundaryKind, 4> kind{BoundaryKind::Dirichlet, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet,
                                     BoundaryKind::Dirichlet};
    double robin_extrapolation = 2.0;

    BoundaryKind operator[](Side s) const { return kind[static_cast<std::size_t>(s)]; }
};

/// A cell face. Interior faces join cells a and b; boundary faces have b = -1.
/// ha / hb are the cell widths normal to the face.
struct Face {
    Index a = -1;
    Index b = -1;
    double length = 0.0;
    double ha = 0.0;
    double hb = 0.0;
    Side side = Side::Left;
};

template <class F>
void for_each_face(const Grid2D& g, F&& f) {
    const Index nx = g.nx(), ny = g.ny();
    for (Index iy = 0; iy < ny; ++iy) {
        for (Index ix = 0; ix < nx; ++ix) {
            const Index c = g.index(ix, iy);
            if (ix + 1 < nx) f(Face{c, g.index(ix + 1, iy), g.dy(iy), g.dx(ix), g.dx(ix + 1), Side::Left});
            if (iy + 1 < ny) f(Face{c, g.index(ix, iy + 1), g.dx(ix), g.dy(iy), g.dy(iy + 1), Side::Left});
            if (ix == 0) f(Face{c, -1, g.dy(iy), g.dx(ix), 0.0, Side::Left});
            if (ix == nx - 1) f(Face{c, -1, g.dy(iy), g.dx(ix), 0.0, Side::Right});
            if (iy == 0) f(Face{c, -1, g.dx(ix), g.dy(iy), 0.0, Side::Bottom});
            if (iy == ny - 1) f(Face{c, -1, g.dx(ix), g.dy(iy), 0.0, Side::Top});
        }
    }
}

/// Flux coefficient of an interior face with harmonic averaging of the
/// cell coefficients (two half-cells in series).
inline double interior_transmissibility(const Face& f, double ka, double kb) {
    return f.length / (f.ha / (2.0 * ka) + f.hb / (2.0 * kb));
}

/// d T / d ka for an interior face.
inline double interior_transmissibility_da(const Face& f, double ka, double kb) {
    const double t = interior_transmissibility(f, ka, kb);
    return t * t / f.length * f.ha / (2.0 * ka * ka);
}

/// d T / d kb for an interior face.
inline double interior_transmissibility_db(const Face& f, double ka, double kb) {
    const double t = interior_transmissibility(f, ka, kb);
    return t * t / f.length * f.hb / (2.0 * kb * kb);
}

inline double boundary_transmissibility(const Face& f, const BoundaryConditions& bc, double ka) {
    switch (bc[f.side]) {
    case BoundaryKind::Dirichlet: return f.length * 2.0 * ka / f.ha;
    case BoundaryKind::Neumann: return 0.0;
    case BoundaryKind::Robin: return f.length / (f.ha / (2.0 * ka) + bc.robin_extrapolation);
    }
    return 0.0;
}

inline double boundary_transmissibility_da(const Face& f, const BoundaryConditions& bc, double ka) {
    switch (bc[f.side]) {
    case BoundaryKind::Dirichlet: return f.length * 2.0 / f.ha;
    case BoundaryKind::Neumann: return 0.0;
    case BoundaryKind::Robin: {
        const double t = boundary_transmissibility(f, bc, ka);
        return t * t / f.length * f.ha / (2.0 * ka * ka);
    }
    }
    return 0.0;
}

/// Five-point finite-volume discretization of -div(k grad u), integrated
/// over cells, with the given boundary conditions. Symmetric by construction.
template <class Scalar>
std::vector<Eigen::Triplet<Scalar>> diffusion_triplets(const Grid2D& g, const Eigen::VectorXd& k,
                                                      const BoundaryConditions& bc) {
    std::vector<Eigen::Triplet<Scalar>> trip;
    trip.reserve(static_cast<std::size_t>(5 * g.size()));
    for_each_face(g, [&](const Face& f) {
        if (f.b >= 0) {
            const double t = interior_transmissibility(f, k[f.a], k[f.b]);
            trip.emplace_back(f.a, f.a, t);
            trip.emplace_back(f.b, f.b, t);
            trip.emplace_back(f.a, f.b, -t);
            trip.emplace_back(f.b, f.a, -t);
        } else {
            const double t = boundary_transmissibility(f, bc, k[f.a]);
            if (t != 0.0) trip.emplace_back(f.a, f.a, t);
        }
    });
    return trip;
}

/// Bilinear weights distributing a point onto the surrounding cell centers.
/// Outside the hull of cell centers the coordinate is clamped to the nearest
/// row/column of centers. Preserves the zeroth and first moments.
inline std::vector<std::pair<Index, double>> point_weights(const Grid2D& g, const Vec2& x) {
    auto axis = [](const Grid2D& grid, bool is_x, double v) {
        const Index n = is_x ? grid.nx() : grid.ny();
        auto center = [&](Index i) { return is_x ? grid.xc(i) : grid.yc(i); };
        std::array<std::pair<Index, double>, 2> w{{{0, 1.0}, {0, 0.0}}};
        if (n == 1 || v <= center(0)) return w;
        if (v >= center(n - 1)) {
            w[0].first = n - 1;
            return w;
        }
        Index lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            const Index mid = (lo + hi) / 2;
            (center(mid) <= v ? lo : hi) = mid;
        }
        const double s = (v - center(lo)) / (center(hi) - center(lo));
        w[0] = {lo, 1.0 - s};
        w[1] = {hi, s};
        return w;
    };
    const auto wx = axis(g, true, x.x());
    const auto wy = axis(g, false, x.y());
    std::vector<std::pair<Index, double>> out;
    for (const auto& [iy, sy] : wy)
        for (const auto& [ix, sx] : wx)
            if (sx * sy != 0.0) out.emplace_back(g.index(ix, iy), sx * sy);
    return out;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> point_vector(const Grid2D& g, const Vec2& x) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(g.size());
    for (const auto& [c, w] : point_weights(g, x)) v[c] += w;
    return v;
}

} // namespace pals::fv
