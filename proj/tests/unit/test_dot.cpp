#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pals/dot.hpp"
#include "pals/selfcheck.hpp"

using namespace pals;

namespace {

DotSetup uniform_setup(Index n) {
    DotSetup s = DotSetup::standard();
    s.grid = Grid2D::uniform({0.0, 0.05, 0.0, 0.05}, n, n);
    return s;
}

double smooth_absorption(const Vec2& x) { return 0.5 + 0.3 * std::sin(60.0 * x.x()) * std::cos(40.0 * x.y()); }
double smooth_source(const Vec2& x) {
    const Vec2 d = x - Vec2(0.02, 0.03);
    return std::exp(-d.squaredNorm() / 5e-5);
}

Eigen::VectorXcd solve_smooth(Index n, double freq) {
    const DotModel m(uniform_setup(n));
    const Grid2D& g = m.grid();
    Eigen::VectorXd mua(g.size());
    Eigen::VectorXcd f(g.size());
    for (Index c = 0; c < g.size(); ++c) {
        mua[c] = smooth_absorption(g.center(c));
        f[c] = smooth_source(g.center(c)) * g.area(c);
    }
    return m.solve(mua, freq, f);
}

Eigen::VectorXcd restrict2(const Eigen::VectorXcd& fine, Index n) {
    Eigen::VectorXcd out(n * n);
    for (Index iy = 0; iy < n; ++iy)
        for (Index ix = 0; ix < n; ++ix) {
            const Index fx = 2 * ix, fy = 2 * iy, fn = 2 * n;
            out[iy * n + ix] = 0.25 * (fine[fy * fn + fx] + fine[fy * fn + fx + 1] + fine[(fy + 1) * fn + fx] +
                                       fine[(fy + 1) * fn + fx + 1]);
        }
    return out;
}

Eigen::VectorXd two_disc_absorption(const DotModel& m) {
    const Grid2D& g = m.grid();
    Eigen::VectorXd p(g.size());
    for (Index c = 0; c < g.size(); ++c) {
        const Vec2 x = g.center(c);
        const bool in = (x - Vec2(0.015, 0.025)).norm() < 0.006 || (x - Vec2(0.035, 0.025)).norm() < 0.006;
        p[c] = in ? 1.5 : 0.5;
    }
    return p;
}

} // namespace

TEST(DotDiscretization, SecondOrderSelfConvergence) {
    for (double freq : {0.0, 50e6}) {
        const Eigen::VectorXcd u16 = solve_smooth(16, freq), u32 = solve_smooth(32, freq), u64 = solve_smooth(64, freq);
        const double e1 = (u16 - restrict2(u32, 16)).norm() / 16.0;
        const double e2 = (u32 - restrict2(u64, 32)).norm() / 32.0;
        EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.3) << "f=" << freq << " e1=" << e1 << " e2=" << e2;
    }
}

TEST(DotDiscretization, SystemMatrixIsComplexSymmetric) {
    const DotModel m(uniform_setup(12));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    Eigen::VectorXd mua(m.grid().size());
    for (Index c = 0; c < mua.size(); ++c) mua[c] = u(rng);
    const Eigen::MatrixXcd K = Eigen::MatrixXcd(m.system_matrix(mua, 50e6));
    EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-15 * K.cwiseAbs().maxCoeff());
    // Not Hermitian once the frequency term is present.
    EXPECT_GT((K - K.adjoint()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DotModel, SourceDetectorReciprocity) {
    const DotModel m(DotSetup::standard());
    const Eigen::VectorXd mua = two_disc_absorption(m);
    const Vec2 a(0.011, 0.043), b(0.037, 0.006);
    for (double freq : {0.0, 25e6}) {
        const Eigen::VectorXcd ua = m.solve(mua, freq, m.point_source(a));
        const Eigen::VectorXcd ub = m.solve(mua, freq, m.point_source(b));
        const Complex ab = m.point_source(b).transpose() * ua;
        const Complex ba = m.point_source(a).transpose() * ub;
        EXPECT_LT(std::abs(ab - ba), 1e-10 * std::abs(ab));
    }
}

TEST(DotModel, DataOrderingIsFrequencySourceDetector) {
    const DotModel m(DotSetup::standard());
    EXPECT_EQ(m.data_size(), 3 * 8 * 8);
    EXPECT_EQ(m.data_index(0, 0, 1), 1);
    EXPECT_EQ(m.data_index(0, 1, 0), 8);
    EXPECT_EQ(m.data_index(1, 0, 0), 64);
    const Eigen::VectorXd mua = two_disc_absorption(m);
    const Eigen::VectorXcd u = m.predict(mua);
    const Eigen::VectorXcd field = m.solve(mua, 25e6, m.point_source(m.setup().sources[3]));
    const Complex direct = m.point_source(m.setup().detectors[5]).transpose() * field;
    EXPECT_LT(std::abs(u[m.data_index(1, 3, 5)] - direct), 1e-12 * std::abs(direct));
    // Static data are real; modulated data pick up a phase lag.
    EXPECT_EQ(u[m.data_index(0, 3, 5)].imag(), 0.0);
    EXPECT_LT(u[m.data_index(2, 3, 5)].imag(), 0.0);
}

TEST(DotModel, AdjointIdentity) {
    const DotModel m(DotSetup::standard());
    std::mt19937_64 rng(6);
    EXPECT_LT(selfcheck::adjoint_mismatch<Complex>(m, two_disc_absorption(m), rng), 1e-10);
}

TEST(DotModel, JacobianMatchesFiniteDifferences) {
    const DotModel m(DotSetup::standard());
    std::mt19937_64 rng(7);
    const Eigen::VectorXd p = two_disc_absorption(m);
    const Eigen::VectorXd v = selfcheck::random_vector<double>(p.size(), rng);
    EXPECT_LT(selfcheck::jacobian_fd_error<Complex>(m, p, v), 1e-3);
}

TEST(DotModel, MoreAbsorptionMeansLessLight) {
    const DotModel m(DotSetup::standard());
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(m.grid().size(), 0.5);
    const Eigen::VectorXcd a = m.predict(lo), b = m.predict(lo * 2.0);
    for (Index k = 0; k < a.size(); ++k) EXPECT_LT(std::abs(b[k]), std::abs(a[k]));
}
