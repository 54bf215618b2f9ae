/** @file test_analytical.cpp

    @brief Closed-form plate frequencies, Bessel functions and
    characteristic roots.
*/
#include "shellmodal/analytical.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace shellmodal;

namespace {

PlateSpec circle(Boundary b) {
    PlateSpec s;
    s.shape = PlateShape::Circle;
    s.boundary = b;
    return s;
}

double circle_thz(int m, int n, Boundary b) {
    const double g = circular_char_roots(m, n + 1, b)[static_cast<std::size_t>(n)];
    return to_thz(circular_frequency(g, circle(b)));
}

} // namespace

TEST(Analytical, BesselValues) {
    EXPECT_NEAR(bessel_j(0, 1.0), 0.7651976865579666, 1e-14);
    EXPECT_NEAR(bessel_j(1, 2.5), 0.4970941024642741, 1e-14);
    EXPECT_NEAR(bessel_j(3, 10.0), 0.0583793793051868, 1e-13);
    EXPECT_NEAR(bessel_i(0, 1.0), 1.2660658777520082, 1e-14);
    EXPECT_NEAR(bessel_i(2, 3.0), 2.2452124409299512, 1e-13);
    EXPECT_DOUBLE_EQ(bessel_j(2, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(bessel_i(0, 0.0), 1.0);
}

TEST(Analytical, SquareTable) {
    // The nine lowest 5 nm simply supported square plate frequencies [THz].
    const PlateSpec spec;
    EXPECT_NEAR(to_thz(rect_ss_frequency(1, 1, spec)), 0.07027, 5e-6);
    EXPECT_NEAR(to_thz(rect_ss_frequency(1, 2, spec)), 0.17568, 5e-6);
    EXPECT_NEAR(to_thz(rect_ss_frequency(2, 1, spec)), 0.17568, 5e-6);
    EXPECT_NEAR(to_thz(rect_ss_frequency(2, 2, spec)), 0.28109, 5e-6);
    EXPECT_NEAR(to_thz(rect_ss_frequency(1, 3, spec)), 0.35136, 1e-5);
    EXPECT_NEAR(to_thz(rect_ss_frequency(2, 3, spec)), 0.45677, 5e-6);
    EXPECT_NEAR(to_thz(rect_ss_frequency(1, 4, spec)), 0.59732, 5e-6);
    EXPECT_NEAR(to_thz(rect_ss_frequency(3, 3, spec)), 0.63246, 5e-6);
    // Scaling: f ~ 1/a^2 and f ~ sqrt(c / rho).
    PlateSpec big = spec;
    big.a = big.b = 10.0;
    EXPECT_NEAR(rect_ss_frequency(1, 1, big) * 4.0, rect_ss_frequency(1, 1, spec), 1e-15);
    PlateSpec stiff = spec;
    stiff.c_bend *= 4.0;
    EXPECT_NEAR(rect_ss_frequency(2, 1, stiff), 2.0 * rect_ss_frequency(2, 1, spec), 1e-14);
}

TEST(Analytical, CircularTables) {
    const std::vector<std::pair<int, int>> shown{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {0, 1}, {1, 1}, {2, 1}, {5, 0}};
    const std::vector<double> clamped{0.03636, 0.07568, 0.12416, 0.18167, 0.14158, 0.21655, 0.30112, 0.323038};
    const std::vector<double> ss{0.01582, 0.04806, 0.08987, 0.14099, 0.10453, 0.17136, 0.248427, 0.27008};
    for (std::size_t i = 0; i < shown.size(); ++i) {
        const auto [m, n] = shown[i];
        EXPECT_NEAR(circle_thz(m, n, Boundary::Clamped), clamped[i], 1e-5) << m << "," << n;
        EXPECT_NEAR(circle_thz(m, n, Boundary::SimplySupported), ss[i], 1e-5) << m << "," << n;
    }
}

TEST(Analytical, CharacteristicRoots) {
    // Classical clamped circular plate root.
    EXPECT_NEAR(circular_char_roots(0, 1, Boundary::Clamped)[0], 3.1962206165, 1e-9);
    for (Boundary b : {Boundary::Clamped, Boundary::SimplySupported}) {
        for (int m = 0; m <= 6; ++m) {
            const std::vector<double> r = circular_char_roots(m, 5, b);
            ASSERT_EQ(r.size(), 5u);
            EXPECT_TRUE(std::is_sorted(r.begin(), r.end()));
            for (double g : r) {
                EXPECT_GT(g, 0.0);
                EXPECT_LE(std::abs(circular_characteristic(m, g, b)), 1e-12);
            }
        }
    }
    for (int m = 0; m <= 4; ++m) {
        const auto c = circular_char_roots(m, 3, Boundary::Clamped);
        const auto s = circular_char_roots(m, 3, Boundary::SimplySupported);
        for (int n = 0; n < 3; ++n) EXPECT_GT(c[static_cast<std::size_t>(n)], s[static_cast<std::size_t>(n)]);
    }
}

TEST(Analytical, PrestressedFrequency) {
    const PlateSpec spec;
    const double w0 = rect_ss_frequency(1, 2, spec);
    PrestressedFrequency f = rect_prestressed_frequency(1, 2, spec, 0.0, 0.0);
    EXPECT_NEAR(f.omega, w0, 1e-14);
    EXPECT_FALSE(f.unstable);
    const double Nx = 0.3, Ny = 0.1;
    f = rect_prestressed_frequency(1, 2, spec, Nx, Ny);
    const double expected = w0 * w0 + (Nx * std::pow(pi / 5.0, 2) + Ny * std::pow(2.0 * pi / 5.0, 2)) / spec.rho;
    EXPECT_NEAR(f.omega2, expected, 1e-13);
    f = rect_prestressed_frequency(1, 1, spec, -1.0, -1.0);
    EXPECT_TRUE(f.unstable);
    EXPECT_LT(f.omega, 0.0);
    EXPECT_NEAR(f.omega, -std::sqrt(-f.omega2), 1e-15);
}

TEST(Analytical, ModeShapes) {
    EXPECT_NEAR(rect_mode_shape(1, 1, 5.0, 5.0, 2.5, 2.5), 1.0, 1e-15);
    EXPECT_NEAR(rect_mode_shape(2, 1, 5.0, 5.0, 2.5, 1.0), 0.0, 1e-15);
    const double a = 5.0;
    for (int m = 0; m <= 3; ++m) {
        const double gc = circular_char_roots(m, 1, Boundary::Clamped)[0];
        EXPECT_NEAR(circular_radial_shape(m, gc, a, a), 0.0, 1e-12);
        EXPECT_NEAR(circular_radial_shape_derivative(m, gc, a, a), 0.0, 1e-9);
        const double gs = circular_char_roots(m, 1, Boundary::SimplySupported)[0];
        EXPECT_NEAR(circular_radial_shape(m, gs, a, a), 0.0, 1e-12);
        const double h = 1e-6, r = 0.7 * a;
        const double fd = (circular_radial_shape(m, gs, a, r + h) - circular_radial_shape(m, gs, a, r - h)) / (2 * h);
        EXPECT_NEAR(circular_radial_shape_derivative(m, gs, a, r), fd, 1e-7);
    }
    const PlateSpec c = circle(Boundary::Clamped);
    const std::vector<Vec2> pts{Vec2(1.0, 0.0), Vec2(0.0, 1.0), Vec2(-1.0, 0.0)};
    const std::vector<double> s = mode_shape_samples(c, 2, 0, pts);
    EXPECT_NEAR(s[0], -s[1], 1e-12);
    EXPECT_NEAR(s[0], s[2], 1e-12);
    const std::vector<double> t = mode_shape_samples(c, 1, 0, pts, pi / 2);
    EXPECT_NEAR(t[0], 0.0, 1e-12);
}

TEST(Analytical, InvalidSpecsThrow) {
    PlateSpec bad;
    bad.a = -1.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    EXPECT_THROW(rect_ss_frequency(0, 1, PlateSpec{}), InvalidArgument);
    EXPECT_THROW(circular_char_roots(-1, 2, Boundary::Clamped), InvalidArgument);
}
