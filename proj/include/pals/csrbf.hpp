#pragma once

#include <array>
#include <stdexcept>

namespace pals {

/// Wendland compactly supported radial basis function of minimal degree.
///
/// psi_{n,l}(r) = (1 - r)_+^k * Q(r), with ell = floor(n/2) + l + 1,
/// k = ell + l and Q a polynomial of degree l. The kernel is C^{2l} and
/// vanishes identically for r >= 1.
class WendlandKernel {
public:
    WendlandKernel() : WendlandKernel(1, 1) {}

    WendlandKernel(int space_dim, int smoothness)
        : space_dim_(space_dim), smoothness_(smoothness) {
        if (space_dim < 1)
            throw std::invalid_argument("WendlandKernel: space dimension must be >= 1");
        if (smoothness < 1 || smoothness > 3)
            throw std::invalid_argument("WendlandKernel: smoothness index must be 1, 2 or 3");
        ell_ = space_dim / 2 + smoothness + 1;
        power_ = ell_ + smoothness;
        const double l = ell_;
        switch (smoothness) {
        case 1:
            coeffs_ = {1.0, l + 1.0, 0.0, 0.0};
            break;
        case 2:
            coeffs_ = {3.0, 3.0 * l + 6.0, l * l + 4.0 * l + 3.0, 0.0};
            break;
        default:
            coeffs_ = {15.0, 15.0 * l + 45.0, 6.0 * l * l + 36.0 * l + 45.0,
                       l * l * l + 9.0 * l * l + 23.0 * l + 15.0};
            break;
        }
    }

    int space_dim() const { return space_dim_; }
    int smoothness() const { return smoothness_; }
    int ell() const { return ell_; }

    double operator()(double r) const { return eval(r); }

    double eval(double r) const {
        if (r >= 1.0) return 0.0;
        return ipow(1.0 - r, power_) * poly(r);
    }

    /// d psi / dr. Product rule on (1-r)^k Q(r):
    /// (1-r)^{k-1} [ (1-r) Q'(r) - k Q(r) ].
    double eval_deriv(double r) const {
        if (r >= 1.0) return 0.0;
        const double s = 1.0 - r;
        return ipow(s, power_ - 1) * (s * poly_deriv(r) - power_ * poly(r));
    }

    friend bool operator==(const WendlandKernel&, const WendlandKernel&) = default;

private:
    static double ipow(double base, int e) {
        double out = 1.0;
        for (int i = 0; i < e; ++i) out *= base;
        return out;
    }

    double poly(double r) const {
        return ((coeffs_[3] * r + coeffs_[2]) * r + coeffs_[1]) * r + coeffs_[0];
    }

    double poly_deriv(double r) const {
        return (3.0 * coeffs_[3] * r + 2.0 * coeffs_[2]) * r + coeffs_[1];
    }

    int space_dim_;
    int smoothness_;
    int ell_ = 0;
    int power_ = 0;
    std::array<double, 4> coeffs_{};
};

} // namespace pals
