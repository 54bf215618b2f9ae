/** @file assembly.cpp

    @brief Element integration and global scatter.
*/
#include "shellmodal/assembly.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

namespace shellmodal {

namespace {

/// Unit normal of a_1 x a_2 for any scalar type.
template <typename T>
std::array<T, 3> unit_normal(const std::array<T, 3>& a1, const std::array<T, 3>& a2) {
    using std::sqrt;
    std::array<T, 3> c{a1[1] * a2[2] - a1[2] * a2[1], a1[2] * a2[0] - a1[0] * a2[2], a1[0] * a2[1] - a1[1] * a2[0]};
    const T inv = 1.0 / sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    return {c[0] * inv, c[1] * inv, c[2] * inv};
}

template <int N>
std::array<Dual2<N>, 3> seed(const Vec3& x, int offset) {
    return {Dual2<N>::variable(x[0], offset), Dual2<N>::variable(x[1], offset + 1),
            Dual2<N>::variable(x[2], offset + 2)};
}

/// Adds scale * C-mapped gradient/Hessian over 3-vector variable blocks
/// into node-major local arrays. C(i, b) is the coefficient of node i in
/// variable block b.
void accumulate(const MatX& C, const VecX& g, const MatX* H, double scale, VecX& fe, MatX* Ke) {
    const auto n = C.rows(), nb = C.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index b = 0; b < nb; ++b) {
            fe.segment<3>(3 * i) += scale * C(i, b) * g.segment<3>(3 * b);
        }
    }
    if (Ke == nullptr || H == nullptr) {
        return;
    }
    MatX Hdd(nb, nb);
    for (int d = 0; d < 3; ++d) {
        for (int e = 0; e < 3; ++e) {
            for (Eigen::Index b = 0; b < nb; ++b) {
                for (Eigen::Index c = 0; c < nb; ++c) {
                    Hdd(b, c) = (*H)(3 * b + d, 3 * c + e);
                }
            }
            const MatX Kde = scale * (C * Hdd * C.transpose());
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = 0; j < n; ++j) {
                    (*Ke)(3 * i + d, 3 * j + e) += Kde(i, j);
                }
            }
        }
    }
}

std::vector<Vec3> gather_current(const std::vector<Vec3>& x, const std::vector<int>& ids) {
    std::vector<Vec3> out;
    out.reserve(ids.size());
    for (int i : ids) out.push_back(x[static_cast<std::size_t>(i)]);
    return out;
}

void scatter_vector(const std::vector<int>& nodes, const VecX& fe, VecX& f) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        f.segment<3>(3 * nodes[i]) += fe.segment<3>(3 * static_cast<Eigen::Index>(i));
    }
}

void ensure_pattern(const ShellModel& model, SpMat* K) {
    if (K != nullptr && K->nonZeros() == 0) {
        *K = make_pattern(model);
    }
}

} // namespace

namespace detail {

PointDerivatives point_energy_derivatives(const Vec3& a1, const Vec3& a2, const Vec3& s11, const Vec3& s12,
                                          const Vec3& s22, const QuadPoint& q, const MaterialParams& p,
                                          bool with_hessian) {
    using D = Dual2<6>;
    const auto n = unit_normal(seed<6>(a1, 0), seed<6>(a2, 3));
    const Vec3 nv(n[0].v, n[1].v, n[2].v);
    const Vec3 s[3] = {s11, s12, s22};
    Mat2 a, b;
    a << a1.dot(a1), a1.dot(a2), a1.dot(a2), a2.dot(a2);
    b << nv.dot(s11), nv.dot(s12), nv.dot(s12), nv.dot(s22);

    const EnergyDerivatives ed = strain_energy_derivatives(a, b, q.lattice, q.B, p);
    PointDerivatives out;
    out.energy = ed.energy;

    // Jacobian of v = (a11, a12, a22, b11, b12, b22) w.r.t. y.
    Eigen::Matrix<double, 6, 15> Jv = Eigen::Matrix<double, 6, 15>::Zero();
    Jv.block<1, 3>(0, 0) = 2.0 * a1.transpose();
    Jv.block<1, 3>(1, 0) = a2.transpose();
    Jv.block<1, 3>(1, 3) = a1.transpose();
    Jv.block<1, 3>(2, 3) = 2.0 * a2.transpose();
    std::array<D, 3> bk;
    for (int k = 0; k < 3; ++k) {
        bk[static_cast<std::size_t>(k)] = s[k][0] * n[0] + s[k][1] * n[1] + s[k][2] * n[2];
        Jv.block<1, 6>(3 + k, 0) = bk[static_cast<std::size_t>(k)].g.transpose();
        Jv.block<1, 3>(3 + k, 6 + 3 * k) = nv.transpose();
    }
    out.gradient = Jv.transpose() * ed.gradient;
    if (!with_hessian) {
        out.hessian.setZero();
        return out;
    }
    out.hessian = Jv.transpose() * ed.hessian * Jv;
    const Eigen::Vector<double, 6>& g = ed.gradient;
    const Mat3 I = Mat3::Identity();
    out.hessian.block<3, 3>(0, 0) += 2.0 * g[0] * I;
    out.hessian.block<3, 3>(0, 3) += g[1] * I;
    out.hessian.block<3, 3>(3, 0) += g[1] * I;
    out.hessian.block<3, 3>(3, 3) += 2.0 * g[2] * I;
    for (int k = 0; k < 3; ++k) {
        const double gk = g[3 + k];
        out.hessian.block<6, 6>(0, 0) += gk * bk[static_cast<std::size_t>(k)].h;
        Eigen::Matrix<double, 6, 3> dn;
        for (int c = 0; c < 3; ++c) dn.col(c) = n[static_cast<std::size_t>(c)].g;
        out.hessian.block<6, 3>(0, 6 + 3 * k) += gk * dn;
        out.hessian.block<3, 6>(6 + 3 * k, 0) += gk * dn.transpose();
    }
    return out;
}

} // namespace detail

SpMat make_pattern(const ShellModel& model) {
    std::vector<std::set<int>> adj(static_cast<std::size_t>(model.num_nodes()));
    auto couple = [&](const std::vector<int>& nodes) {
        for (int i : nodes) {
            for (int j : nodes) adj[static_cast<std::size_t>(i)].insert(j);
        }
    };
    for (const Element& e : model.elements) couple(e.nodes);
    for (const InterfacePenaltyPoint& ip : model.interface_penalty) {
        std::vector<int> u = model.elements[static_cast<std::size_t>(ip.plus.element)].nodes;
        const auto& m = model.elements[static_cast<std::size_t>(ip.minus.element)].nodes;
        u.insert(u.end(), m.begin(), m.end());
        couple(u);
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t j = 0; j < adj.size(); ++j) {
        for (int i : adj[j]) {
            for (int c = 0; c < 3; ++c) {
                for (int r = 0; r < 3; ++r) {
                    trip.emplace_back(3 * i + r, 3 * static_cast<int>(j) + c, 0.0);
                }
            }
        }
    }
    SpMat K(model.num_dofs(), model.num_dofs());
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    return K;
}

void BlockScatter::add(int node_i, int node_j, const Mat3& block) {
    const int* inner = K_.innerIndexPtr();
    const int* outer = K_.outerIndexPtr();
    double* val = K_.valuePtr();
    for (int c = 0; c < 3; ++c) {
        const int col = 3 * node_j + c;
        const int* begin = inner + outer[col];
        const int* end = inner + outer[col + 1];
        const int* it = std::lower_bound(begin, end, 3 * node_i);
        if (it == end || *it != 3 * node_i) {
            throw InvalidArgument("assembly", "entry outside the sparsity pattern");
        }
        const auto pos = it - inner;
        for (int r = 0; r < 3; ++r) val[pos + r] += block(r, c);
    }
}

void BlockScatter::add_local(const std::vector<int>& nodes, const MatX& Ke) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            add(nodes[i], nodes[j], Ke.block<3, 3>(3 * static_cast<Eigen::Index>(i), 3 * static_cast<Eigen::Index>(j)));
        }
    }
}

SpMat assemble_mass(const ShellModel& model) {
    SpMat M = make_pattern(model);
    BlockScatter s(M);
    const double rho = model.material.rho0;
    for (const Element& e : model.elements) {
        const auto n = static_cast<Eigen::Index>(e.nodes.size());
        MatX me = MatX::Zero(n, n);
        for (const QuadPoint& q : e.qps) {
            me.noalias() += (rho * q.dA) * q.basis.N * q.basis.N.transpose();
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                s.add(e.nodes[static_cast<std::size_t>(i)], e.nodes[static_cast<std::size_t>(j)], me(i, j) * Mat3::Identity());
            }
        }
    }
    return M;
}

namespace {

struct CurrentKinematics {
    Vec3 a1, a2, s11, s12, s22;
};

CurrentKinematics current_kinematics(const std::vector<Vec3>& x, const PointBasis& b) {
    CurrentKinematics k{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        k.a1 += b.dN(r, 0) * x[i];
        k.a2 += b.dN(r, 1) * x[i];
        k.s11 += b.ddN(r, 0) * x[i];
        k.s12 += b.ddN(r, 1) * x[i];
        k.s22 += b.ddN(r, 2) * x[i];
    }
    return k;
}

/// Coefficients of each node in y = (a_1, a_2, a_11, a_12, a_22).
MatX kinematic_coefficients(const PointBasis& b) {
    MatX C(b.N.size(), 5);
    C.leftCols<2>() = b.dN;
    C.rightCols<3>() = b.ddN;
    return C;
}

} // namespace

double strain_energy_total(const ShellModel& model, const VecX& u) {
    const std::vector<Vec3> x = model.current_nodes(u);
    double total = 0.0;
    for (const Element& e : model.elements) {
        const std::vector<Vec3> xe = gather_current(x, e.nodes);
        for (const QuadPoint& q : e.qps) {
            const CurrentKinematics k = current_kinematics(xe, q.basis);
            const Vec3 n = k.a1.cross(k.a2).normalized();
            const Sym2<double> a{k.a1.dot(k.a1), k.a1.dot(k.a2), k.a2.dot(k.a2)};
            if (!(a.det() > 1e-14 * a.trace() * a.trace())) {
                throw DegenerateMetricError("current metric is not positive definite");
            }
            const Sym2<double> b{n.dot(k.s11), n.dot(k.s12), n.dot(k.s22)};
            const Sym2<double> B{q.B(0, 0), q.B(0, 1), q.B(1, 1)};
            total += q.dA * strain_energy(a, b, q.lattice, B, model.material);
        }
    }
    return total;
}

void assemble_internal(const ShellModel& model, const VecX& u, VecX& f, SpMat* K) {
    if (f.size() != model.num_dofs()) f = VecX::Zero(model.num_dofs());
    ensure_pattern(model, K);
    const std::vector<Vec3> x = model.current_nodes(u);
    std::optional<BlockScatter> scatter;
    if (K != nullptr) scatter.emplace(*K);
    for (const Element& e : model.elements) {
        const std::vector<Vec3> xe = gather_current(x, e.nodes);
        const auto n = static_cast<Eigen::Index>(e.nodes.size());
        VecX fe = VecX::Zero(3 * n);
        MatX Ke;
        if (K != nullptr) Ke = MatX::Zero(3 * n, 3 * n);
        for (const QuadPoint& q : e.qps) {
            const CurrentKinematics k = current_kinematics(xe, q.basis);
            const double det = k.a1.cross(k.a2).squaredNorm();
            if (!(det > 1e-14 * std::pow(k.a1.squaredNorm() + k.a2.squaredNorm(), 2))) {
                throw DegenerateMetricError("current metric is not positive definite");
            }
            const detail::PointDerivatives pd =
                detail::point_energy_derivatives(k.a1, k.a2, k.s11, k.s12, k.s22, q, model.material, K != nullptr);
            const MatX C = kinematic_coefficients(q.basis);
            const VecX g = pd.gradient;
            const MatX H = pd.hessian;
            accumulate(C, g, K != nullptr ? &H : nullptr, q.dA, fe, K != nullptr ? &Ke : nullptr);
        }
        scatter_vector(e.nodes, fe, f);
        if (scatter) scatter->add_local(e.nodes, Ke);
    }
}

namespace {

/// Clamped-edge penalty on one point; returns energy.
double rotation_point(const ShellModel& model, const RotationPenaltyPoint& rp, const std::vector<Vec3>& x, double kp,
                      VecX* f, BlockScatter* K) {
    const Element& e = model.elements[static_cast<std::size_t>(rp.side.element)];
    const std::vector<Vec3> xe = gather_current(x, e.nodes);
    const CurrentKinematics k = current_kinematics(xe, rp.side.basis);
    using D = Dual2<6>;
    const auto n = unit_normal(seed<6>(k.a1, 0), seed<6>(k.a2, 3));
    D E(0.0);
    for (int c = 0; c < 3; ++c) {
        const D d = n[static_cast<std::size_t>(c)] - rp.side.normal[c];
        E += d * d;
    }
    E *= 0.5 * kp * rp.ds;
    if (f != nullptr) {
        const auto nn = static_cast<Eigen::Index>(e.nodes.size());
        VecX fe = VecX::Zero(3 * nn);
        MatX Ke;
        if (K != nullptr) Ke = MatX::Zero(3 * nn, 3 * nn);
        const VecX g = E.g;
        const MatX H = E.h;
        accumulate(rp.side.basis.dN, g, K != nullptr ? &H : nullptr, 1.0, fe, K != nullptr ? &Ke : nullptr);
        scatter_vector(e.nodes, fe, *f);
        if (K != nullptr) K->add_local(e.nodes, Ke);
    }
    return E.v;
}

double interface_point(const ShellModel& model, const InterfacePenaltyPoint& ip, const std::vector<Vec3>& x,
                       double k_if, VecX* f, BlockScatter* K) {
    const Element& ep = model.elements[static_cast<std::size_t>(ip.plus.element)];
    const Element& em = model.elements[static_cast<std::size_t>(ip.minus.element)];
    const CurrentKinematics kp = current_kinematics(gather_current(x, ep.nodes), ip.plus.basis);
    const CurrentKinematics km = current_kinematics(gather_current(x, em.nodes), ip.minus.basis);
    using D = Dual2<12>;
    const auto np = unit_normal(seed<12>(kp.a1, 0), seed<12>(kp.a2, 3));
    const auto nm = unit_normal(seed<12>(km.a1, 6), seed<12>(km.a2, 9));
    const Vec3 jump0 = ip.plus.normal - ip.minus.normal;
    D E(0.0);
    for (std::size_t c = 0; c < 3; ++c) {
        const D d = np[c] - nm[c] - jump0[static_cast<Eigen::Index>(c)];
        E += d * d;
    }
    E *= 0.5 * k_if * ip.ds;
    if (f != nullptr) {
        // Union of both element node sets with coefficients on 4 blocks.
        std::vector<int> nodes = ep.nodes;
        for (int g : em.nodes) {
            if (std::find(nodes.begin(), nodes.end(), g) == nodes.end()) nodes.push_back(g);
        }
        const auto nn = static_cast<Eigen::Index>(nodes.size());
        MatX C = MatX::Zero(nn, 4);
        for (std::size_t i = 0; i < ep.nodes.size(); ++i) {
            C.block<1, 2>(static_cast<Eigen::Index>(i), 0) = ip.plus.basis.dN.row(static_cast<Eigen::Index>(i));
        }
        for (std::size_t i = 0; i < em.nodes.size(); ++i) {
            const auto r = std::find(nodes.begin(), nodes.end(), em.nodes[i]) - nodes.begin();
            C.block<1, 2>(r, 2) = ip.minus.basis.dN.row(static_cast<Eigen::Index>(i));
        }
        VecX fe = VecX::Zero(3 * nn);
        MatX Ke;
        if (K != nullptr) Ke = MatX::Zero(3 * nn, 3 * nn);
        const VecX g = E.g;
        const MatX H = E.h;
        accumulate(C, g, K != nullptr ? &H : nullptr, 1.0, fe, K != nullptr ? &Ke : nullptr);
        scatter_vector(nodes, fe, *f);
        if (K != nullptr) K->add_local(nodes, Ke);
    }
    return E.v;
}

} // namespace

double penalty_energy(const ShellModel& model, const VecX& u) {
    const std::vector<Vec3> x = model.current_nodes(u);
    double total = 0.0;
    for (const RotationPenaltyPoint& rp : model.rotation_penalty) {
        total += rotation_point(model, rp, x, model.kp, nullptr, nullptr);
    }
    for (const InterfacePenaltyPoint& ip : model.interface_penalty) {
        total += interface_point(model, ip, x, model.k_interface, nullptr, nullptr);
    }
    return total;
}

void assemble_rotation_penalty(const ShellModel& model, const VecX& u, double kp, VecX& f, SpMat* K) {
    if (f.size() != model.num_dofs()) f = VecX::Zero(model.num_dofs());
    ensure_pattern(model, K);
    const std::vector<Vec3> x = model.current_nodes(u);
    std::optional<BlockScatter> scatter;
    if (K != nullptr) scatter.emplace(*K);
    for (const RotationPenaltyPoint& rp : model.rotation_penalty) {
        rotation_point(model, rp, x, kp, &f, scatter ? &*scatter : nullptr);
    }
}

void assemble_penalties(const ShellModel& model, const VecX& u, VecX& f, SpMat* K) {
    assemble_rotation_penalty(model, u, model.kp, f, K);
    const std::vector<Vec3> x = model.current_nodes(u);
    std::optional<BlockScatter> scatter;
    if (K != nullptr) scatter.emplace(*K);
    for (const InterfacePenaltyPoint& ip : model.interface_penalty) {
        interface_point(model, ip, x, model.k_interface, &f, scatter ? &*scatter : nullptr);
    }
}

DofMap::DofMap(const ShellModel& model) {
    free = model.free_dofs();
    full_to_free.assign(static_cast<std::size_t>(model.num_dofs()), -1);
    for (std::size_t i = 0; i < free.size(); ++i) {
        full_to_free[static_cast<std::size_t>(free[i])] = static_cast<int>(i);
    }
}

VecX DofMap::restrict_vector(const VecX& full) const {
    VecX r(num_free());
    for (std::size_t i = 0; i < free.size(); ++i) r[static_cast<Eigen::Index>(i)] = full[free[i]];
    return r;
}

void DofMap::scatter(const VecX& reduced, VecX& full) const {
    for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = reduced[static_cast<Eigen::Index>(i)];
}

SpMat DofMap::restrict_matrix(const SpMat& full) const {
    SpMat R(num_free(), num_free());
    Eigen::VectorXi per_col(num_free());
    for (int j = 0; j < num_free(); ++j) {
        const int fj = free[static_cast<std::size_t>(j)];
        per_col[j] = static_cast<int>(full.outerIndexPtr()[fj + 1] - full.outerIndexPtr()[fj]);
    }
    R.reserve(per_col);
    for (int j = 0; j < num_free(); ++j) {
        for (SpMat::InnerIterator it(full, free[static_cast<std::size_t>(j)]); it; ++it) {
            const int i = full_to_free[static_cast<std::size_t>(it.row())];
            if (i >= 0) R.insert(i, j) = it.value();
        }
    }
    R.makeCompressed();
    return R;
}

SystemMatrices apply_dirichlet(const ShellModel& model, const SystemMatrices& full) {
    const DofMap map(model);
    if (map.num_free() == 0) {
        throw InvalidArgument("assembly", "all dofs are constrained");
    }
    SystemMatrices r;
    r.M = map.restrict_matrix(full.M);
    r.K = map.restrict_matrix(full.K);
    r.f_int = full.f_int.size() > 0 ? map.restrict_vector(full.f_int) : VecX();
    r.f_ext = full.f_ext.size() > 0 ? map.restrict_vector(full.f_ext) : VecX();
    return r;
}

void write_matrix_market(const SpMat& A, const std::string& path) {
    if (!Eigen::saveMarket(A, path)) {
        throw ShellError("assembly", "cannot write matrix file " + path);
    }
}

} // namespace shellmodal
