/** @file test_geometry.cpp

    @brief Surface kinematics: identity, dilatation, cylinder curvature,
    invariants, lattice angle and frame invariance.
*/
#include "shellmodal/model.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace shellmodal;

namespace {

std::vector<Vec3> gather(const ShellModel& m, const Element& e) {
    std::vector<Vec3> x;
    for (int n : e.nodes) x.push_back(m.nodes[static_cast<std::size_t>(n)]);
    return x;
}

ShellModel small_plate() { return make_square_plate(5.0, 2, 2, MaterialParams{}, {}); }

Mat3 rotation(double a, double b, double c) {
    return (Eigen::AngleAxisd(a, Vec3::UnitZ()) * Eigen::AngleAxisd(b, Vec3::UnitY()) *
            Eigen::AngleAxisd(c, Vec3::UnitX()))
        .toRotationMatrix();
}

} // namespace

TEST(Geometry, IdentityConfigurationIsUnstretchedAndFlat) {
    const ShellModel m = small_plate();
    for (const Element& e : m.elements) {
        const auto x = gather(m, e);
        for (const QuadPoint& q : e.qps) {
            const SurfacePointState s = evaluate_kinematics(x, x, q.basis);
            EXPECT_NEAR(s.lambda1, 1.0, 1e-12);
            EXPECT_NEAR(s.lambda2, 1.0, 1e-12);
            EXPECT_NEAR(s.J, 1.0, 1e-12);
            EXPECT_NEAR(s.kappa1, 0.0, 1e-12);
            EXPECT_NEAR(s.kappa2, 0.0, 1e-12);
            EXPECT_NEAR(s.n_vec.norm(), 1.0, 1e-12);
            EXPECT_TRUE((s.b_ab - s.B_ab).norm() < 1e-12);
        }
    }
}

TEST(Geometry, UniformScalingGivesEqualStretches) {
    const ShellModel m = small_plate();
    const double sc = 1.07;
    const Element& e = m.elements[1];
    const auto x = gather(m, e);
    std::vector<Vec3> y;
    for (const Vec3& p : x) y.push_back(Vec3(sc * p[0], sc * p[1], p[2]));
    const SurfacePointState s = evaluate_kinematics(x, y, e.qps[2].basis);
    EXPECT_NEAR(s.lambda1, sc, 1e-12);
    EXPECT_NEAR(s.lambda2, sc, 1e-12);
    EXPECT_NEAR(s.J, sc * sc, 1e-12);
    EXPECT_TRUE(s.degenerate_stretch);
    const LogInvariants inv = log_invariants(s);
    EXPECT_NEAR(inv.J1, 2.0 * std::log(sc), 1e-12);
    EXPECT_NEAR(inv.J2, 0.0, 1e-14);
    EXPECT_NEAR(inv.J3, 0.0, 1e-14);
}

TEST(Geometry, TubeCurvatureConvergesToInverseRadius) {
    // The periodic polynomial ring approximates the circle; curvature error falls with refinement.
    const double R = cnt_radius(10, 10);
    auto worst = [&](int circ) {
        const ShellModel m = make_cnt(10, 10, 2.0, circ, 4, MaterialParams{}, {});
        double e = 0.0;
        for (const Element& el : m.elements) {
            const auto x = gather(m, el);
            for (const QuadPoint& q : el.qps) {
                const SurfacePointState s = evaluate_kinematics(x, x, q.basis, m.lattice.at(q.point));
                const double kmax = std::max(std::abs(s.kappa1), std::abs(s.kappa2));
                const double kmin = std::min(std::abs(s.kappa1), std::abs(s.kappa2));
                EXPECT_NEAR(kmin, 0.0, 1e-9 / R);
                e = std::max(e, std::abs(kmax * R - 1.0));
            }
        }
        return e;
    };
    const double e16 = worst(16), e48 = worst(48);
    EXPECT_LT(e16, 0.05);
    EXPECT_LT(e48, e16 / 5.0);
    EXPECT_LT(e48, 5e-3);
}

TEST(Geometry, LogInvariantsOfUniaxialStretch) {
    const double l = std::log(1.2);
    double J1, J2, J3;
    // C = diag(1.44, 1) along armchair.
    log_invariants_from_cauchy_green(1.44, 0.0, 1.0, J1, J2, J3);
    EXPECT_NEAR(J1, l, 1e-13);
    EXPECT_NEAR(J2, std::pow(0.5 * l, 2), 1e-13);
    EXPECT_NEAR(J3, std::pow(0.5 * l, 3), 1e-13);
    // Stretch at 30 degrees: C = R diag(1.44, 1) R^T.
    const double c = std::cos(pi / 6), s = std::sin(pi / 6);
    const double C11 = 1.44 * c * c + s * s, C12 = (1.44 - 1.0) * c * s, C22 = 1.44 * s * s + c * c;
    log_invariants_from_cauchy_green(C11, C12, C22, J1, J2, J3);
    EXPECT_NEAR(J1, l, 1e-13);
    EXPECT_NEAR(J2, std::pow(0.5 * l, 2), 1e-13);
    EXPECT_NEAR(J3, -std::pow(0.5 * l, 3), 1e-13);
    // Pure dilatation 1.1.
    log_invariants_from_cauchy_green(1.21, 0.0, 1.21, J1, J2, J3);
    EXPECT_NEAR(J1, 2.0 * std::log(1.1), 1e-13);
    EXPECT_NEAR(J2, 0.0, 1e-15);
    EXPECT_NEAR(J3, 0.0, 1e-15);
}

TEST(Geometry, InvariantsBoundAndSixFoldSymmetry) {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> st(0.8, 1.3), an(0.0, pi);
    for (int k = 0; k < 50; ++k) {
        const double a = st(gen), b = st(gen), t = an(gen);
        auto eval = [&](double theta) {
            const double c = std::cos(theta), s = std::sin(theta);
            const double C11 = a * a * c * c + b * b * s * s, C12 = (a * a - b * b) * c * s,
                         C22 = a * a * s * s + b * b * c * c;
            double J1, J2, J3;
            log_invariants_from_cauchy_green(C11, C12, C22, J1, J2, J3);
            return std::array<double, 3>{J1, J2, J3};
        };
        const auto x = eval(t), y = eval(t + pi / 3), z = eval(-t);
        EXPECT_LE(std::abs(x[2]), std::pow(x[1], 1.5) + 1e-14);
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(x[i], y[i], 1e-12);
            EXPECT_NEAR(x[i], z[i], 1e-12);
        }
        const double lam = std::log(std::max(a, b) / std::min(a, b)) / 2.0;
        const double theta = a >= b ? t : t + pi / 2;
        EXPECT_NEAR(x[2], lam * lam * lam * std::cos(6 * theta), 1e-12);
    }
}

TEST(Geometry, MaxStretchAngle) {
    EXPECT_NEAR(max_stretch_angle(Vec3::UnitX(), Vec3::UnitX()), 0.0, 1e-15);
    EXPECT_NEAR(max_stretch_angle(Vec3::UnitY(), Vec3::UnitX()), pi / 2, 1e-15);
    EXPECT_NEAR(std::cos(6 * max_stretch_angle(Vec3::UnitY(), Vec3::UnitX())), -1.0, 1e-12);
    const Vec3 y30(std::cos(pi / 6), std::sin(pi / 6), 0.0);
    EXPECT_NEAR(std::cos(6 * max_stretch_angle(y30, Vec3::UnitX())), -1.0, 1e-12);
    EXPECT_THROW(max_stretch_angle(2.0 * Vec3::UnitX(), Vec3::UnitX()), InvalidArgument);
}

TEST(Geometry, FrameInvariance) {
    const ShellModel m = small_plate();
    const Element& e = m.elements[3];
    const auto x = gather(m, e);
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> d(-0.2, 0.2);
    std::vector<Vec3> y;
    for (const Vec3& p : x) y.push_back(p + Vec3(d(gen), d(gen), d(gen)));
    const Mat3 Q = rotation(0.3, -0.7, 1.1);
    const Vec3 t(1.0, -2.0, 0.5);
    std::vector<Vec3> z;
    for (const Vec3& p : y) z.push_back(Q * p + t);
    for (const QuadPoint& q : e.qps) {
        const SurfacePointState a = evaluate_kinematics(x, y, q.basis);
        const SurfacePointState b = evaluate_kinematics(x, z, q.basis);
        EXPECT_NEAR(a.lambda1, b.lambda1, 1e-10);
        EXPECT_NEAR(a.lambda2, b.lambda2, 1e-10);
        EXPECT_NEAR(a.kappa1, b.kappa1, 1e-10);
        EXPECT_NEAR(a.kappa2, b.kappa2, 1e-10);
        const LogInvariants ia = log_invariants(a), ib = log_invariants(b);
        EXPECT_NEAR(ia.J1, ib.J1, 1e-10);
        EXPECT_NEAR(ia.J2, ib.J2, 1e-10);
        EXPECT_NEAR(ia.J3, ib.J3, 1e-10);
    }
}

TEST(Geometry, PrincipalStretchEigenResidual) {
    const ShellModel m = small_plate();
    const Element& e = m.elements[0];
    const auto x = gather(m, e);
    std::mt19937 gen(9);
    std::uniform_real_distribution<double> d(-0.2, 0.2);
    std::vector<Vec3> y;
    for (const Vec3& p : x) y.push_back(p + Vec3(d(gen), d(gen), d(gen)));
    for (const QuadPoint& q : e.qps) {
        const SurfacePointState s = evaluate_kinematics(x, y, q.basis);
        EXPECT_GE(s.lambda1, s.lambda2);
        EXPECT_GT(s.lambda2, 0.0);
        EXPECT_NEAR(s.J, s.lambda1 * s.lambda2, 1e-12);
        const Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> es(s.a_ab, s.A_ab);
        EXPECT_NEAR(std::sqrt(es.eigenvalues()[1]), s.lambda1, 1e-10);
        EXPECT_NEAR(std::sqrt(es.eigenvalues()[0]), s.lambda2, 1e-10);
        for (int i = 0; i < 2; ++i) {
            const Eigen::Vector2d v = es.eigenvectors().col(i);
            EXPECT_LE((s.a_ab * v - es.eigenvalues()[i] * s.A_ab * v).norm(), 1e-10 * v.norm());
        }
    }
}

TEST(Geometry, InvertedElementThrows) {
    const ShellModel m = small_plate();
    const Element& e = m.elements[0];
    const auto x = gather(m, e);
    std::vector<Vec3> y;
    for (const Vec3& p : x) y.push_back(Vec3(p[0], 0.0, p[2]));  // collapse to a line
    EXPECT_THROW(evaluate_kinematics(x, y, e.qps[0].basis), DegenerateMetricError);
}
