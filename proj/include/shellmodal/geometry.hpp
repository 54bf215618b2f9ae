/** @file geometry.hpp

    @brief Surface kinematics at a quadrature point: metrics, curvatures,
    Christoffel symbols, principal stretches, logarithmic strain invariants
    and the lattice angle.
*/
#pragma once

#include "shellmodal/common.hpp"
#include "shellmodal/dual.hpp"

#include <cmath>
#include <span>

namespace shellmodal {

/// Shape function values and parametric derivatives at one point.
/// `dN` is n x 2 (d/dxi1, d/dxi2); `ddN` is n x 3 (11, 12, 22).
struct PointBasis {
    VecX N;
    MatX dN;
    MatX ddN;
};

/// Differential geometry of a surface point x(xi) = sum N_i x_i.
struct SurfaceFrame {
    std::array<Vec3, 2> tangent;      ///< a_alpha
    std::array<Vec3, 3> second;       ///< a_{alpha,beta} as (11, 12, 22)
    std::array<Vec3, 2> dual;         ///< a^alpha
    Vec3 normal;                      ///< unit normal
    Mat2 metric;                      ///< a_{alpha beta}
    Mat2 metric_inv;                  ///< a^{alpha beta}
    Mat2 curvature;                   ///< b_{alpha beta}
    double area_factor = 0.0;         ///< sqrt(det a)

    /// Gamma^gamma_{alpha beta} = a^gamma . a_{alpha,beta}, index [gamma](alpha, beta).
    std::array<Mat2, 2> christoffel() const;
};

/// Evaluates the frame; throws DegenerateMetricError if det(a) <= 0.
SurfaceFrame evaluate_frame(std::span<const Vec3> points, const PointBasis& basis);

/// Orthonormal lattice frame in the tangent plane of a reference point.
/// Row i holds e_i . A^alpha, so that covariant components of a tensor map
/// to Cartesian components in the (armchair, zigzag) basis.
Mat2 lattice_map(const SurfaceFrame& reference, const Vec3& armchair);

/// Projects `armchair` onto the tangent plane of `reference` and normalizes.
Vec3 tangent_armchair(const SurfaceFrame& reference, const Vec3& armchair);

struct SurfacePointState {
    Mat2 A_ab;                        ///< reference covariant metric
    Mat2 a_ab;                        ///< current covariant metric
    Mat2 B_ab;                        ///< reference covariant curvature
    Mat2 b_ab;                        ///< current covariant curvature
    Mat2 a_contra;                    ///< a^{alpha beta}
    Vec3 n_vec;
    std::array<Mat2, 2> christoffel;  ///< Gamma^gamma_{alpha beta}
    Mat2 lattice;                     ///< see lattice_map()
    Vec3 armchair;                    ///< armchair direction in the reference tangent plane
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    Vec3 Y1;                          ///< reference direction of maximum stretch
    double J = 1.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double theta = 0.0;
    bool degenerate_stretch = true;   ///< lambda1 == lambda2 to 1e-8 relative
};

SurfacePointState evaluate_kinematics(std::span<const Vec3> ref_points, std::span<const Vec3> cur_points,
                                      const PointBasis& basis, const Vec3& armchair = Vec3::UnitX());

struct LogInvariants {
    double J1 = 0.0;
    double J2 = 0.0;
    double J3 = 0.0;
};

/// J1 = ln J, J2 = (ln lambda)^2, J3 = (ln lambda)^3 cos(6 theta), lambda = sqrt(lambda1/lambda2).
LogInvariants log_invariants(const SurfacePointState& state);

/// theta = arccos(Y1 . armchair) in [0, pi]. Both inputs must be unit vectors.
double max_stretch_angle(const Vec3& Y1, const Vec3& armchair);

namespace detail {

/// atanh(sqrt(y)) / sqrt(y), analytic in y >= 0 (series branch near 0).
template <typename T>
T atanh_sqrt_ratio(const T& y) {
    using std::log;
    using std::sqrt;
    if (value_of(y) < 1e-4) {
        return 1.0 + y * (1.0 / 3.0 + y * (1.0 / 5.0 + y * (1.0 / 7.0 + y * (1.0 / 9.0))));
    }
    const T s = sqrt(y);
    return 0.5 * log((1.0 + s) / (1.0 - s)) / s;
}

} // namespace detail

/// Logarithmic strain invariants from the right Cauchy-Green tensor expressed
/// in the orthonormal (armchair, zigzag) frame. Smooth through the
/// equal-stretch state: the deviatoric log strain is formed as
/// E_dev = f1/2 (C - tr C/2 I) with f1 the divided difference of ln over the
/// eigenvalues of C, and J3 is the structural-tensor polynomial
/// [(M:E_dev)^3 - 3 (M:E_dev)(N:E_dev)^2] / 8.
template <typename T>
void log_invariants_from_cauchy_green(const T& C11, const T& C12, const T& C22, T& J1, T& J2, T& J3) {
    using std::log;
    const T tr = C11 + C22;
    const T det = C11 * C22 - C12 * C12;
    const T diff = C11 - C22;
    const T y = (diff * diff + 4.0 * C12 * C12) / (tr * tr);
    const T f1 = 2.0 * detail::atanh_sqrt_ratio(y) / tr;
    const T e11 = 0.25 * f1 * diff;   // E_dev_11 = -E_dev_22
    const T e12 = 0.5 * f1 * C12;
    J1 = 0.5 * log(det);
    J2 = e11 * e11 + e12 * e12;
    const T m = 2.0 * e11;            // M : E_dev
    const T nn = 2.0 * e12;           // N : E_dev
    J3 = (m * m * m - 3.0 * m * nn * nn) / 8.0;
}

/// C in the lattice frame from covariant metric components.
template <typename T>
void cauchy_green_in_lattice(const Mat2& lattice, const Sym2<T>& a, T& C11, T& C12, T& C22) {
    auto comp = [&](int i, int j) {
        const double t1 = lattice(i, 0), t2 = lattice(i, 1);
        const double s1 = lattice(j, 0), s2 = lattice(j, 1);
        return (t1 * s1) * a.c11 + (t1 * s2 + t2 * s1) * a.c12 + (t2 * s2) * a.c22;
    };
    C11 = comp(0, 0);
    C12 = comp(0, 1);
    C22 = comp(1, 1);
}

} // namespace shellmodal
