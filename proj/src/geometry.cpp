/** @file geometry.cpp

    @brief Surface frames and point kinematics.
*/
#include "shellmodal/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace shellmodal {

std::array<Mat2, 2> SurfaceFrame::christoffel() const {
    std::array<Mat2, 2> gam;
    for (int g = 0; g < 2; ++g) {
        const double g11 = dual[g].dot(second[0]);
        const double g12 = dual[g].dot(second[1]);
        const double g22 = dual[g].dot(second[2]);
        gam[g] << g11, g12, g12, g22;
    }
    return gam;
}

SurfaceFrame evaluate_frame(std::span<const Vec3> points, const PointBasis& basis) {
    SurfaceFrame f;
    f.tangent = {Vec3::Zero(), Vec3::Zero()};
    f.second = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    const auto n = static_cast<Eigen::Index>(points.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3& x = points[static_cast<std::size_t>(i)];
        f.tangent[0] += basis.dN(i, 0) * x;
        f.tangent[1] += basis.dN(i, 1) * x;
        f.second[0] += basis.ddN(i, 0) * x;
        f.second[1] += basis.ddN(i, 1) * x;
        f.second[2] += basis.ddN(i, 2) * x;
    }
    f.metric << f.tangent[0].dot(f.tangent[0]), f.tangent[0].dot(f.tangent[1]),
        f.tangent[1].dot(f.tangent[0]), f.tangent[1].dot(f.tangent[1]);
    const double det = f.metric.determinant();
    const double scale = f.metric.trace();
    if (!(det > 1e-14 * scale * scale)) {
        throw DegenerateMetricError("metric determinant " + std::to_string(det) + " is not positive");
    }
    f.metric_inv = f.metric.inverse();
    const Vec3 cross = f.tangent[0].cross(f.tangent[1]);
    f.area_factor = std::sqrt(det);
    f.normal = cross / cross.norm();
    for (int a = 0; a < 2; ++a) {
        f.dual[a] = f.metric_inv(a, 0) * f.tangent[0] + f.metric_inv(a, 1) * f.tangent[1];
    }
    const double b11 = f.normal.dot(f.second[0]);
    const double b12 = f.normal.dot(f.second[1]);
    const double b22 = f.normal.dot(f.second[2]);
    f.curvature << b11, b12, b12, b22;
    return f;
}

Vec3 tangent_armchair(const SurfaceFrame& reference, const Vec3& armchair) {
    Vec3 t = armchair - armchair.dot(reference.normal) * reference.normal;
    const double len = t.norm();
    if (len < 1e-10) {
        throw InvalidArgument("geometry", "armchair direction is normal to the surface");
    }
    return t / len;
}

Mat2 lattice_map(const SurfaceFrame& reference, const Vec3& armchair) {
    const Vec3 e1 = tangent_armchair(reference, armchair);
    const Vec3 e2 = reference.normal.cross(e1);
    Mat2 t;
    t << e1.dot(reference.dual[0]), e1.dot(reference.dual[1]), e2.dot(reference.dual[0]), e2.dot(reference.dual[1]);
    return t;
}

SurfacePointState evaluate_kinematics(std::span<const Vec3> ref_points, std::span<const Vec3> cur_points,
                                      const PointBasis& basis, const Vec3& armchair) {
    if (ref_points.size() != cur_points.size()) {
        throw InvalidArgument("geometry", "reference and current control point counts differ");
    }
    const SurfaceFrame ref = evaluate_frame(ref_points, basis);
    const SurfaceFrame cur = evaluate_frame(cur_points, basis);

    SurfacePointState s;
    s.A_ab = ref.metric;
    s.a_ab = cur.metric;
    s.B_ab = ref.curvature;
    s.b_ab = cur.curvature;
    s.a_contra = cur.metric_inv;
    s.n_vec = cur.normal;
    s.christoffel = cur.christoffel();
    s.lattice = lattice_map(ref, armchair);
    s.armchair = tangent_armchair(ref, armchair);

    // Right Cauchy-Green tensor in the orthonormal lattice frame.
    const Mat2 C = s.lattice * s.a_ab * s.lattice.transpose();
    const double mean = 0.5 * C.trace();
    const double rad = std::hypot(0.5 * (C(0, 0) - C(1, 1)), C(0, 1));
    s.lambda1 = std::sqrt(mean + rad);
    s.lambda2 = std::sqrt(std::max(mean - rad, 0.0));
    if (!(s.lambda2 > 0.0)) {
        throw DegenerateMetricError("principal stretch collapsed to zero");
    }
    s.J = s.lambda1 * s.lambda2;
    s.degenerate_stretch = (s.lambda1 - s.lambda2) < 1e-8 * s.lambda1;

    const Vec3 e1 = s.armchair;
    const Vec3 e2 = ref.normal.cross(e1);
    if (s.degenerate_stretch) {
        s.Y1 = e1;
        s.theta = 0.0;
    } else {
        const double phi = 0.5 * std::atan2(2.0 * C(0, 1), C(0, 0) - C(1, 1));
        s.Y1 = std::cos(phi) * e1 + std::sin(phi) * e2;
        s.theta = max_stretch_angle(s.Y1, e1);
    }

    // Principal curvatures: roots of det(b - kappa a) = 0, ordered by magnitude.
    const double H = 0.5 * (cur.metric_inv.cwiseProduct(cur.curvature)).sum();
    const double K = cur.curvature.determinant() / cur.metric.determinant();
    const double disc = std::sqrt(std::max(H * H - K, 0.0));
    double k1 = H + disc;
    double k2 = H - disc;
    if (std::abs(k2) > std::abs(k1)) {
        std::swap(k1, k2);
    }
    s.kappa1 = k1;
    s.kappa2 = k2;
    return s;
}

LogInvariants log_invariants(const SurfacePointState& state) {
    LogInvariants inv;
    inv.J1 = std::log(state.lambda1 * state.lambda2);
    const double ln_lambda = 0.5 * std::log(state.lambda1 / state.lambda2);
    inv.J2 = ln_lambda * ln_lambda;
    inv.J3 = state.degenerate_stretch ? 0.0 : ln_lambda * ln_lambda * ln_lambda * std::cos(6.0 * state.theta);
    return inv;
}

double max_stretch_angle(const Vec3& Y1, const Vec3& armchair) {
    constexpr double tol = 1e-9;
    if (std::abs(Y1.norm() - 1.0) > tol || std::abs(armchair.norm() - 1.0) > tol) {
        throw InvalidArgument("geometry", "max_stretch_angle expects unit vectors");
    }
    return std::acos(std::clamp(Y1.dot(armchair), -1.0, 1.0));
}

} // namespace shellmodal
