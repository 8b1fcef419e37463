#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "pals/forward.hpp"
#include "pals/level_set.hpp"
#include "pals/model.hpp"
#include "pals/phantom.hpp"

namespace pals {

/// global:     iid N(0, s^2), s = (percent/100) ||clean|| / sqrt(N)
/// per_sample: entry k gets std (percent/100) |clean_k|
enum class NoiseConvention { Global, PerSample };

template <class Scalar>
struct SyntheticData {
    VectorX<Scalar> clean;
    VectorX<Scalar> noisy;
    double noise_norm = 0.0;
};

/// Adds Gaussian noise to clean data. Complex entries get independent real
/// and imaginary perturbations with std s / sqrt(2) each.
template <class Scalar, class Rng>
SyntheticData<Scalar> add_noise(const VectorX<Scalar>& clean, double percent, Rng& rng,
                                NoiseConvention conv = NoiseConvention::Global) {
    if (percent < 0.0) throw std::invalid_argument("noise: percent must be non-negative");
    SyntheticData<Scalar> out{clean, clean, 0.0};
    if (percent == 0.0 || clean.size() == 0) return out;
    std::normal_distribution<double> n01(0.0, 1.0);
    const double frac = percent / 100.0;
    const double global_sd = frac * clean.norm() / std::sqrt(static_cast<double>(clean.size()));
    VectorX<Scalar> e(clean.size());
    for (Index k = 0; k < clean.size(); ++k) {
        const double sd = conv == NoiseConvention::Global ? global_sd : frac * std::abs(clean[k]);
        if constexpr (is_complex_v<Scalar>) {
            const double re = n01(rng);
            const double im = n01(rng);
            e[k] = Scalar(re, im) * (sd / std::sqrt(2.0));
        } else {
            e[k] = sd * n01(rng);
        }
    }
    out.noisy = clean + e;
    out.noise_norm = e.norm();
    return out;
}

/// Box and counts for the random initial level set.
struct InitSpec {
    int bumps = 40;
    Rect box{-0.4, 0.4, -0.8, 0.0};
    double weight = 0.2;
    double dilation = 4.0;
    double level = 0.15;
    double epsilon = 0.1;
    HeavisideKind heaviside = HeavisideKind::H2;
    WendlandKernel kernel{};
    std::optional<double> norm_smoothing;
    double contrast_in = 1.0;
    double contrast_out = 0.0;
};

/// Centers uniform in the box, weights alternating +w / -w, uniform dilation.
/// Without an explicit norm smoothing it is 1% of the grid's minimum spacing.
template <class Rng>
PalsModel init_pals(const InitSpec& spec, const Grid2D& g, Rng& rng) {
    if (spec.bumps < 1) throw std::invalid_argument("init: at least one bump is required");
    PalsModel m;
    std::uniform_real_distribution<double> ux(spec.box.x0, spec.box.x1), uy(spec.box.y0, spec.box.y1);
    for (int j = 0; j < spec.bumps; ++j) {
        Bump b;
        b.center.x() = ux(rng);
        b.center.y() = uy(rng);
        b.weight = (j % 2 == 0) ? spec.weight : -spec.weight;
        b.dilation = spec.dilation;
        m.bumps.push_back(b);
    }
    m.level = spec.level;
    m.epsilon = spec.epsilon;
    m.heaviside = spec.heaviside;
    m.kernel = spec.kernel;
    m.norm_smoothing = spec.norm_smoothing.value_or(0.01 * g.min_spacing());
    m.contrast_in = spec.contrast_in;
    m.contrast_out = spec.contrast_out;
    m.validate();
    return m;
}

struct ShapeMetrics {
    double jaccard = 0.0;
    /// |recon xor truth| / |truth| by area.
    double symmetric_difference = 0.0;
    double contrast_in = 0.0;
    double contrast_out = 0.0;
};

inline ShapeMetrics shape_metrics(const std::vector<bool>& recon, const std::vector<bool>& truth, const Grid2D& g) {
    require_on_grid(g, static_cast<Index>(recon.size()), "shape metrics (reconstruction)");
    require_on_grid(g, static_cast<Index>(truth.size()), "shape metrics (truth)");
    double inter = 0.0, uni = 0.0, xr = 0.0, tr = 0.0;
    for (Index c = 0; c < g.size(); ++c) {
        const bool a = recon[static_cast<std::size_t>(c)], b = truth[static_cast<std::size_t>(c)];
        const double area = g.area(c);
        if (a && b) inter += area;
        if (a || b) uni += area;
        if (a != b) xr += area;
        if (b) tr += area;
    }
    ShapeMetrics out;
    out.jaccard = uni > 0.0 ? inter / uni : 1.0;
    out.symmetric_difference = tr > 0.0 ? xr / tr : (xr > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return out;
}

inline ShapeMetrics shape_metrics(const PalsModel& m, const std::vector<bool>& truth, const Grid2D& g) {
    ShapeMetrics out = shape_metrics(superlevel_mask(eval_phi(m, g), m.level), truth, g);
    out.contrast_in = m.contrast_in;
    out.contrast_out = m.contrast_out;
    return out;
}

} // namespace pals
