/** @file contact.cpp

    @brief Half-space adhesion energy, force and stiffness.
*/
#include "shellmodal/contact.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace shellmodal {

void SubstrateProfile::validate() const {
    if (kind == Kind::Cavity && !(R1 > 0.0 && R2 > 0.0 && R2 <= R1 && depth >= 0.0)) {
        throw InvalidArgument("contact", "cavity profile needs R1 > 0, 0 < R2 <= R1 and depth >= 0");
    }
}

void AdhesionParams::validate() const {
    if (!(Gamma >= 0.0)) throw InvalidArgument("contact", "Gamma must be non-negative");
    if (!(h0 > 0.0)) throw InvalidArgument("contact", "h0 must be positive");
    profile.validate();
}

namespace {

void require_gap(double r) {
    if (!(r > 0.0)) {
        throw PenetrationError("nonpositive gap " + std::to_string(r));
    }
}

template <typename T>
T potential(const T& r, const AdhesionParams& p) {
    const T s = p.h0 / r;
    const T s3 = s * s * s;
    const T s9 = s3 * s3 * s3;
    return -p.Gamma * (1.5 * s3 - 0.5 * s9);
}

Vec3 point_of(const std::vector<Vec3>& x, const Element& e, const QuadPoint& q) {
    Vec3 pt = Vec3::Zero();
    for (std::size_t i = 0; i < e.nodes.size(); ++i) {
        pt += q.basis.N[static_cast<Eigen::Index>(i)] * x[static_cast<std::size_t>(e.nodes[i])];
    }
    return pt;
}

void check_penetration(double gap, const AdhesionParams& p) {
    if (!(gap > 0.05 * p.h0)) {
        throw PenetrationError("gap " + std::to_string(gap) + " nm is below 0.05 h0");
    }
}

} // namespace

double half_space_potential(double r, const AdhesionParams& p) {
    require_gap(r);
    return potential(r, p);
}

double half_space_potential_derivative(double r, const AdhesionParams& p) {
    require_gap(r);
    const double s = p.h0 / r;
    return -p.Gamma * (-4.5 * std::pow(s, 3) + 4.5 * std::pow(s, 9)) / r;
}

double half_space_potential_second_derivative(double r, const AdhesionParams& p) {
    require_gap(r);
    const double s = p.h0 / r;
    return -p.Gamma * (18.0 * std::pow(s, 3) - 45.0 * std::pow(s, 9)) / (r * r);
}

double potential_inflection(const AdhesionParams& p) { return std::pow(2.5, 1.0 / 6.0) * p.h0; }

double minimum_gap(const ShellModel& model, const VecX& u, const AdhesionParams& p) {
    const std::vector<Vec3> x = model.current_nodes(u);
    double g = std::numeric_limits<double>::infinity();
    for (const Element& e : model.elements) {
        for (const QuadPoint& q : e.qps) {
            const Vec3 pt = point_of(x, e, q);
            g = std::min(g, pt[2] - p.profile.height(pt[0], pt[1]));
        }
    }
    return g;
}

double adhesion_energy(const ShellModel& model, const VecX& u, const AdhesionParams& p) {
    if (p.Gamma == 0.0) return 0.0;
    const std::vector<Vec3> x = model.current_nodes(u);
    double total = 0.0;
    for (const Element& e : model.elements) {
        for (const QuadPoint& q : e.qps) {
            const Vec3 pt = point_of(x, e, q);
            const double gap = pt[2] - p.profile.height(pt[0], pt[1]);
            check_penetration(gap, p);
            total += q.dA * potential(gap, p);
        }
    }
    return total;
}

void contact_force_and_stiffness(const ShellModel& model, const VecX& u, const AdhesionParams& p, VecX& f,
                                 SpMat* K) {
    if (f.size() != model.num_dofs()) f = VecX::Zero(model.num_dofs());
    if (K != nullptr && K->nonZeros() == 0) *K = make_pattern(model);
    if (p.Gamma == 0.0) return;
    const std::vector<Vec3> x = model.current_nodes(u);
    std::optional<BlockScatter> scatter;
    if (K != nullptr) scatter.emplace(*K);
    using D = Dual2<3>;
    for (const Element& e : model.elements) {
        const auto n = static_cast<Eigen::Index>(e.nodes.size());
        VecX fe = VecX::Zero(3 * n);
        MatX Ke;
        if (K != nullptr) Ke = MatX::Zero(3 * n, 3 * n);
        for (const QuadPoint& q : e.qps) {
            const Vec3 pt = point_of(x, e, q);
            const D X = D::variable(pt[0], 0), Y = D::variable(pt[1], 1), Z = D::variable(pt[2], 2);
            const D gap = Z - p.profile.height(X, Y);
            check_penetration(gap.v, p);
            const D psi = potential(gap, p);
            for (Eigen::Index i = 0; i < n; ++i) {
                fe.segment<3>(3 * i) += q.dA * q.basis.N[i] * psi.g;
            }
            if (K != nullptr) {
                for (Eigen::Index j = 0; j < n; ++j) {
                    for (Eigen::Index i = 0; i < n; ++i) {
                        Ke.block<3, 3>(3 * i, 3 * j) += (q.dA * q.basis.N[i] * q.basis.N[j]) * psi.h;
                    }
                }
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            f.segment<3>(3 * e.nodes[static_cast<std::size_t>(i)]) += fe.segment<3>(3 * i);
        }
        if (scatter) scatter->add_local(e.nodes, Ke);
    }
}

} // namespace shellmodal
