#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pals/grid.hpp"

namespace pals {

/// Shape primitive. Shapes are applied in order: an additive shape marks
/// the cells whose center lies inside it, a subtractive one clears them.
struct Shape {
    enum class Kind { Disc, Ellipse, Polygon, Lobed };

    Kind kind = Kind::Disc;
    bool subtract = false;
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
    Vec2 semi_axes = Vec2::Zero();
    double rotation = 0.0;  // radians, ellipses and lobed shapes
    std::vector<Vec2> vertices;
    double amplitude = 0.0;  // lobed shapes only
    int lobes = 0;

    static Shape disc(Vec2 c, double r, bool subtract = false) {
        Shape s;
        s.kind = Kind::Disc;
        s.center = c;
        s.radius = r;
        s.subtract = subtract;
        return s;
    }

    static Shape ellipse(Vec2 c, Vec2 axes, double rotation, bool subtract = false) {
        Shape s;
        s.kind = Kind::Ellipse;
        s.center = c;
        s.semi_axes = axes;
        s.rotation = rotation;
        s.subtract = subtract;
        return s;
    }

    /// Star-shaped curve r(theta) = radius * (1 + amplitude * cos(lobes * (theta - rotation))).
    static Shape lobed(Vec2 c, double radius, double amplitude, int lobes, double rotation = 0.0,
                       bool subtract = false) {
        Shape s;
        s.kind = Kind::Lobed;
        s.center = c;
        s.radius = radius;
        s.amplitude = amplitude;
        s.lobes = lobes;
        s.rotation = rotation;
        s.subtract = subtract;
        return s;
    }

    static Shape polygon(std::vector<Vec2> v, bool subtract = false) {
        Shape s;
        s.kind = Kind::Polygon;
        s.vertices = std::move(v);
        s.subtract = subtract;
        return s;
    }

    bool contains(const Vec2& x) const {
        switch (kind) {
        case Kind::Disc:
            return (x - center).squaredNorm() <= radius * radius;
        case Kind::Ellipse: {
            const double c = std::cos(rotation), s = std::sin(rotation);
            const Vec2 d = x - center;
            const double u = (c * d.x() + s * d.y()) / semi_axes.x();
            const double v = (-s * d.x() + c * d.y()) / semi_axes.y();
            return u * u + v * v <= 1.0;
        }
        case Kind::Lobed: {
            const Vec2 d = x - center;
            const double t = std::atan2(d.y(), d.x());
            const double r = radius * (1.0 + amplitude * std::cos(lobes * (t - rotation)));
            return d.norm() <= r;
        }
        case Kind::Polygon: {
            // even-odd rule
            bool inside = false;
            const std::size_t n = vertices.size();
            for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                const Vec2& a = vertices[i];
                const Vec2& b = vertices[j];
                if ((a.y() > x.y()) != (b.y() > x.y()) &&
                    x.x() < (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x())
                    inside = !inside;
            }
            return inside;
        }
        }
        return false;
    }

    void validate() const {
        if (kind == Kind::Disc && !(radius > 0.0)) throw std::invalid_argument("phantom: disc radius must be positive");
        if (kind == Kind::Ellipse && !(semi_axes.x() > 0.0 && semi_axes.y() > 0.0))
            throw std::invalid_argument("phantom: ellipse semi-axes must be positive");
        if (kind == Kind::Lobed && !(radius > 0.0 && amplitude >= 0.0 && amplitude < 1.0 && lobes >= 1))
            throw std::invalid_argument("phantom: lobed shape needs radius > 0, 0 <= amplitude < 1 and lobes >= 1");
        if (kind == Kind::Polygon && vertices.size() < 3)
            throw std::invalid_argument("phantom: polygon needs at least 3 vertices");
    }
};

/// Piecewise-constant phantom with optional additive per-cell heterogeneity
/// (Gaussian, std = heterogeneity * spatial mean of the clean image).
struct PhantomSpec {
    std::vector<Shape> shapes;
    double inside = 1.0;
    double outside = 0.0;
    double heterogeneity = 0.0;
};

struct Phantom {
    std::vector<bool> mask;
    Eigen::VectorXd truth;
};

/// Cell-center rasterization: a cell is inside iff its center is.
inline std::vector<bool> rasterize(const std::vector<Shape>& shapes, const Grid2D& g) {
    std::vector<bool> mask(static_cast<std::size_t>(g.size()), false);
    for (const auto& s : shapes) {
        s.validate();
        for (Index c = 0; c < g.size(); ++c)
            if (s.contains(g.center(c))) mask[static_cast<std::size_t>(c)] = !s.subtract;
    }
    return mask;
}

template <class Rng>
Phantom make_phantom(const PhantomSpec& spec, const Grid2D& g, Rng& rng) {
    Phantom ph;
    ph.mask = rasterize(spec.shapes, g);
    ph.truth.resize(g.size());
    for (Index c = 0; c < g.size(); ++c) ph.truth[c] = ph.mask[static_cast<std::size_t>(c)] ? spec.inside : spec.outside;
    if (spec.heterogeneity > 0.0) {
        std::normal_distribution<double> n01(0.0, 1.0);
        const double sd = spec.heterogeneity * ph.truth.mean();
        for (Index c = 0; c < g.size(); ++c) ph.truth[c] += sd * n01(rng);
    }
    return ph;
}

} // namespace pals
