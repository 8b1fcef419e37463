#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "pals/ct.hpp"
#include "pals/selfcheck.hpp"

using namespace pals;

namespace {

const Rect kDomain{-1.0, 1.0, -1.0, 1.0};

CtModel make_ct(Index n, double lo_deg, double hi_deg, double step_deg, int detectors) {
    CtGeometry geom;
    geom.domain = kDomain;
    geom.detectors = detectors;
    geom.angles = CtGeometry::angle_range(lo_deg, hi_deg, step_deg, false);
    return CtModel(Grid2D::uniform(kDomain, n, n), std::move(geom));
}

// Length of the chord cut from a line by a disc of radius r at distance s.
double chord(double r, double s) { return std::abs(s) < r ? 2.0 * std::sqrt(r * r - s * s) : 0.0; }

} // namespace

TEST(RayTrace, AxisAlignedRayThroughCellCentersHasCellSizedSegments) {
    const Grid2D g = Grid2D::uniform(kDomain, 8, 8);
    const auto segs = ray_cell_lengths(g, {-2.0, g.yc(3)}, {1.0, 0.0});
    ASSERT_EQ(segs.size(), 8u);
    for (Index i = 0; i < 8; ++i) {
        EXPECT_EQ(segs[static_cast<std::size_t>(i)].first, g.index(i, 3));
        EXPECT_NEAR(segs[static_cast<std::size_t>(i)].second, 0.25, 1e-14);
    }
}

TEST(RayTrace, SegmentLengthsSumToChordThroughSquare) {
    const Grid2D g = Grid2D::uniform(kDomain, 37, 29);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ang(0.0, std::numbers::pi), off(-0.9, 0.9);
    for (int t = 0; t < 200; ++t) {
        const double a = ang(rng), s = off(rng);
        const Vec2 dir(std::cos(a), std::sin(a));
        const Vec2 normal(-dir.y(), dir.x());
        const Vec2 o = s * normal - 5.0 * dir;
        double total = 0.0;
        for (const auto& [c, len] : ray_cell_lengths(g, o, dir)) total += len;
        // Clip the parametric line to the square directly.
        double t0 = -1e300, t1 = 1e300;
        for (int k = 0; k < 2; ++k) {
            if (std::abs(dir[k]) < 1e-15) continue;
            double a0 = (-1.0 - o[k]) / dir[k], a1 = (1.0 - o[k]) / dir[k];
            if (a0 > a1) std::swap(a0, a1);
            t0 = std::max(t0, a0);
            t1 = std::min(t1, a1);
        }
        EXPECT_NEAR(total, std::max(0.0, t1 - t0), 1e-12);
    }
}

TEST(RayTrace, RayMissingTheGridIsEmpty) {
    const Grid2D g = Grid2D::uniform(kDomain, 8, 8);
    EXPECT_TRUE(ray_cell_lengths(g, {-2.0, 1.5}, {1.0, 0.0}).empty());
    EXPECT_TRUE(ray_cell_lengths(g, {-3.0, 0.0}, {1.0, 1.0}).empty());
}

TEST(CtModel, DiscProjectionMatchesChordLengths) {
    // Uniform disc of radius r: every projection is 2 sqrt(r^2 - s^2).
    const double r = 0.6;
    const CtModel ct = make_ct(128, 0.0, 180.0, 15.0, 64);
    const Grid2D& g = ct.grid();
    Eigen::VectorXd p(g.size());
    for (Index c = 0; c < g.size(); ++c) p[c] = g.center(c).norm() <= r ? 1.0 : 0.0;
    const Eigen::VectorXd u = ct.predict(p);
    Eigen::VectorXd exact(u.size());
    for (Index k = 0; k < u.size(); ++k) {
        // Ray origins sit on the detector axis through the disc center.
        exact[k] = chord(r, ct.geometry().ray(k).first.norm());
    }
    EXPECT_LT((u - exact).norm() / exact.norm(), 0.02);
}

TEST(CtModel, DetectorsAreEvenlySpacedAcrossTheDomain) {
    CtGeometry geom;
    geom.domain = kDomain;
    geom.detectors = 4;
    geom.angles = {0.0};
    for (Index k = 0; k < 4; ++k) {
        const auto [o, d] = geom.ray(k);
        EXPECT_NEAR(o.x(), -0.75 + 0.5 * static_cast<double>(k), 1e-15);
        EXPECT_NEAR(d.x(), 0.0, 1e-15);
        EXPECT_NEAR(d.y(), 1.0, 1e-15);
    }
}

TEST(CtModel, AngleRangeOpenAndClosed) {
    EXPECT_EQ(CtGeometry::angle_range(0.0, 180.0, 1.0).size(), 179u);
    EXPECT_EQ(CtGeometry::angle_range(45.0, 135.0, 1.0).size(), 89u);
    EXPECT_EQ(CtGeometry::angle_range(0.0, 180.0, 1.0, false).size(), 181u);
}

TEST(CtModel, IsLinearWithConstantSensitivity) {
    const CtModel ct = make_ct(24, 0.0, 180.0, 10.0, 20);
    std::mt19937_64 rng(2);
    const Eigen::VectorXd a = selfcheck::random_vector<double>(ct.grid().size(), rng);
    const Eigen::VectorXd b = selfcheck::random_vector<double>(ct.grid().size(), rng);
    EXPECT_LT((ct.predict(2.0 * a - b) - (2.0 * ct.predict(a) - ct.predict(b))).norm(), 1e-12 * ct.predict(a).norm());
    const Eigen::MatrixXd S = ct.sensitivity(a).to_dense();
    EXPECT_EQ((S - Eigen::MatrixXd(ct.system_matrix())).cwiseAbs().maxCoeff(), 0.0);
}

TEST(CtModel, AdjointIdentity) {
    const CtModel ct = make_ct(32, 0.0, 180.0, 6.0, 30);
    std::mt19937_64 rng(7);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(ct.grid().size(), 1.0);
    EXPECT_LT(selfcheck::adjoint_mismatch<double>(ct, p, rng), 1e-10);
}

TEST(CtModel, JacobianMatchesFiniteDifferences) {
    const CtModel ct = make_ct(32, 45.0, 135.0, 5.0, 30);
    std::mt19937_64 rng(8);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(ct.grid().size(), 1.0);
    const Eigen::VectorXd v = selfcheck::random_vector<double>(p.size(), rng);
    EXPECT_LT(selfcheck::jacobian_fd_error<double>(ct, p, v), 1e-3);
}

TEST(CtModel, RejectsMismatchedSizes) {
    const CtModel ct = make_ct(8, 0.0, 90.0, 45.0, 4);
    EXPECT_THROW(ct.predict(Eigen::VectorXd::Zero(5)), std::invalid_argument);
    EXPECT_THROW(ct.residual(Eigen::VectorXd::Zero(64), Eigen::VectorXd::Zero(3)), std::invalid_argument);
    CtGeometry empty;
    empty.domain = kDomain;
    EXPECT_THROW(CtModel(Grid2D::uniform(kDomain, 4, 4), empty), std::invalid_argument);
}
