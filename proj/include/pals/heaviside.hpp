#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pals {

/// Regularized Heaviside variants.
///   H1: 1/2 (1 + 2/pi atan(pi t / eps))      smooth, global support of delta
///   H2: 1/2 + t/(2 eps) + sin(pi t/eps)/(2pi) on |t| <= eps, saturating
///       exactly to 0 / 1 outside; delta has support [-eps, eps].
enum class HeavisideKind { H1, H2 };

inline HeavisideKind parse_heaviside(std::string_view s) {
    if (s == "h1" || s == "H1") return HeavisideKind::H1;
    if (s == "h2" || s == "H2") return HeavisideKind::H2;
    throw std::invalid_argument("unknown heaviside kind '" + std::string(s) + "' (expected h1 or h2)");
}

inline const char* to_string(HeavisideKind k) { return k == HeavisideKind::H1 ? "h1" : "h2"; }

inline double heaviside(HeavisideKind kind, double eps, double t) {
    constexpr double pi = std::numbers::pi;
    if (kind == HeavisideKind::H1) return 0.5 * (1.0 + (2.0 / pi) * std::atan(pi * t / eps));
    if (t > eps) return 1.0;
    if (t < -eps) return 0.0;
    return 0.5 + t / (2.0 * eps) + std::sin(pi * t / eps) / (2.0 * pi);
}

/// Exact derivative of heaviside() in t.
inline double delta(HeavisideKind kind, double eps, double t) {
    constexpr double pi = std::numbers::pi;
    if (kind == HeavisideKind::H1) {
        const double s = pi * t / eps;
        return 1.0 / (eps * (1.0 + s * s));
    }
    if (t > eps || t < -eps) return 0.0;
    return (1.0 + std::cos(pi * t / eps)) / (2.0 * eps);
}

} // namespace pals
