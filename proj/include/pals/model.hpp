#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pals/csrbf.hpp"
#include "pals/grid.hpp"
#include "pals/heaviside.hpp"

namespace pals {

/// One term alpha * psi(|| beta (x - chi) ||_dagger) of the level set expansion.
struct Bump {
    double weight = 0.0;
    double dilation = 1.0;
    Vec2 center = Vec2::Zero();
};

/// Full parameter state of a parametric level set model.
struct PalsModel {
    std::vector<Bump> bumps;
    double contrast_in = 1.0;
    double contrast_out = 0.0;
    double level = 0.0;
    HeavisideKind heaviside = HeavisideKind::H2;
    double epsilon = 0.1;
    double norm_smoothing = 1e-4;
    WendlandKernel kernel{};

    Index bump_count() const { return static_cast<Index>(bumps.size()); }

    /// Throws std::invalid_argument on a violated model invariant.
    void validate() const {
        if (bumps.empty()) throw std::invalid_argument("PalsModel: at least one bump is required");
        if (!(epsilon > 0.0)) throw std::invalid_argument("PalsModel: epsilon must be positive");
        if (norm_smoothing == 0.0) throw std::invalid_argument("PalsModel: norm smoothing must be nonzero");
        if (heaviside == HeavisideKind::H2 && std::abs(level) < epsilon)
            throw std::invalid_argument("PalsModel: the h2 heaviside requires |c| >= epsilon (got c=" +
                                        std::to_string(level) + ", epsilon=" + std::to_string(epsilon) + ")");
        for (const auto& b : bumps)
            if (b.dilation == 0.0) throw std::invalid_argument("PalsModel: dilation factors must be nonzero");
    }
};

/// Identifies one scalar entry of the flat parameter vector.
struct ParamIndex {
    enum class Kind { Weight, Dilation, CenterX, CenterY, ContrastIn, ContrastOut };

    Kind kind = Kind::Weight;
    Index bump = 0;

    bool bump_bound() const { return kind != Kind::ContrastIn && kind != Kind::ContrastOut; }

    static ParamIndex weight(Index j) { return {Kind::Weight, j}; }
    static ParamIndex dilation(Index j) { return {Kind::Dilation, j}; }
    static ParamIndex center(Index j, int axis) { return {axis == 0 ? Kind::CenterX : Kind::CenterY, j}; }
    static ParamIndex contrast_in() { return {Kind::ContrastIn, 0}; }
    static ParamIndex contrast_out() { return {Kind::ContrastOut, 0}; }

    friend bool operator==(const ParamIndex&, const ParamIndex&) = default;
};

inline std::string to_string(const ParamIndex& p) {
    switch (p.kind) {
    case ParamIndex::Kind::Weight: return "alpha[" + std::to_string(p.bump) + "]";
    case ParamIndex::Kind::Dilation: return "beta[" + std::to_string(p.bump) + "]";
    case ParamIndex::Kind::CenterX: return "chi_x[" + std::to_string(p.bump) + "]";
    case ParamIndex::Kind::CenterY: return "chi_y[" + std::to_string(p.bump) + "]";
    case ParamIndex::Kind::ContrastIn: return "p_in";
    case ParamIndex::Kind::ContrastOut: return "p_out";
    }
    return "?";
}

inline double get(const PalsModel& m, const ParamIndex& p) {
    switch (p.kind) {
    case ParamIndex::Kind::Weight: return m.bumps[p.bump].weight;
    case ParamIndex::Kind::Dilation: return m.bumps[p.bump].dilation;
    case ParamIndex::Kind::CenterX: return m.bumps[p.bump].center.x();
    case ParamIndex::Kind::CenterY: return m.bumps[p.bump].center.y();
    case ParamIndex::Kind::ContrastIn: return m.contrast_in;
    case ParamIndex::Kind::ContrastOut: return m.contrast_out;
    }
    return 0.0;
}

inline void set(PalsModel& m, const ParamIndex& p, double v) {
    switch (p.kind) {
    case ParamIndex::Kind::Weight: m.bumps[p.bump].weight = v; break;
    case ParamIndex::Kind::Dilation: m.bumps[p.bump].dilation = v; break;
    case ParamIndex::Kind::CenterX: m.bumps[p.bump].center.x() = v; break;
    case ParamIndex::Kind::CenterY: m.bumps[p.bump].center.y() = v; break;
    case ParamIndex::Kind::ContrastIn: m.contrast_in = v; break;
    case ParamIndex::Kind::ContrastOut: m.contrast_out = v; break;
    }
}

/// Flat ordering [alpha_1..alpha_m, beta_1..beta_m, chi_1x, chi_1y, .., chi_mx, chi_my, (p_in, p_out)].
inline std::vector<ParamIndex> parameter_layout(Index bumps, bool with_contrasts) {
    std::vector<ParamIndex> out;
    out.reserve(static_cast<std::size_t>(4 * bumps + 2));
    for (Index j = 0; j < bumps; ++j) out.push_back(ParamIndex::weight(j));
    for (Index j = 0; j < bumps; ++j) out.push_back(ParamIndex::dilation(j));
    for (Index j = 0; j < bumps; ++j) {
        out.push_back(ParamIndex::center(j, 0));
        out.push_back(ParamIndex::center(j, 1));
    }
    if (with_contrasts) {
        out.push_back(ParamIndex::contrast_in());
        out.push_back(ParamIndex::contrast_out());
    }
    return out;
}

inline Eigen::VectorXd pack(const PalsModel& m, const std::vector<ParamIndex>& layout) {
    Eigen::VectorXd v(static_cast<Index>(layout.size()));
    for (std::size_t i = 0; i < layout.size(); ++i) v[static_cast<Index>(i)] = get(m, layout[i]);
    return v;
}

inline void unpack(PalsModel& m, const std::vector<ParamIndex>& layout, const Eigen::VectorXd& v) {
    for (std::size_t i = 0; i < layout.size(); ++i) set(m, layout[i], v[static_cast<Index>(i)]);
}

} // namespace pals
