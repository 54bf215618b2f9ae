/** @file test_assembly.cpp

    @brief Mass, internal force, tangent and penalty assembly checks.
*/
#include "shellmodal/assembly.hpp"

#include <Eigen/SparseCholesky>
#include <gtest/gtest.h>

#include <random>

using namespace shellmodal;

namespace {

VecX random_displacement(const ShellModel& m, double amp, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-amp, amp);
    VecX u(m.num_dofs());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = d(gen);
    return u;
}

double total_energy(const ShellModel& m, const VecX& u) { return strain_energy_total(m, u) + penalty_energy(m, u); }

void forces(const ShellModel& m, const VecX& u, VecX& f, SpMat* K) {
    f = VecX::Zero(m.num_dofs());
    assemble_internal(m, u, f, K);
    assemble_penalties(m, u, f, K);
}

void check_consistency(const ShellModel& m, const VecX& u) {
    VecX f;
    SpMat K;
    forces(m, u, f, &K);
    const double h = 1e-6;
    double fmax = f.cwiseAbs().maxCoeff();
    for (int i = 0; i < m.num_dofs(); i += 7) {
        VecX up = u, um = u;
        up[i] += h;
        um[i] -= h;
        const double fd = (total_energy(m, up) - total_energy(m, um)) / (2 * h);
        EXPECT_NEAR(fd, f[i], 1e-5 * fmax + 1e-7) << "dof " << i;
        VecX fp, fm;
        forces(m, up, fp, nullptr);
        forces(m, um, fm, nullptr);
        const VecX col = (fp - fm) / (2 * h);
        const VecX kc = K.col(i);
        const double kmax = kc.cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < col.size(); ++r) {
            if (std::abs(kc[r]) > 1e-3 * kmax) {
                EXPECT_NEAR(col[r], kc[r], 1e-4 * std::abs(kc[r]) + 1e-6 * kmax) << "entry " << r << "," << i;
            }
        }
    }
    const SpMat asym = SpMat(K.transpose()) - K;
    EXPECT_LE(asym.norm(), 1e-9 * K.norm());
}

} // namespace

TEST(Assembly, PlateForceAndTangentMatchFiniteDifferences) {
    ShellModel m = make_square_plate(5.0, 2, 2, MaterialParams{});
    check_consistency(m, random_displacement(m, 0.05, 1));
}

TEST(Assembly, ClampedDiskForceAndTangentMatchFiniteDifferences) {
    MeshOptions opt;
    opt.boundary = Boundary::Clamped;
    ShellModel m = make_disk(5.0, 2, MaterialParams{}, opt);
    check_consistency(m, random_displacement(m, 0.05, 2));
}

TEST(Assembly, TubeForceAndTangentMatchFiniteDifferences) {
    MeshOptions opt;
    opt.boundary = Boundary::Free;
    ShellModel m = make_cnt(10, 10, 2.0, 6, 3, MaterialParams{}, opt);
    check_consistency(m, random_displacement(m, 0.01, 3));
}

TEST(Assembly, MassIsSymmetricPositiveAndExact) {
    const ShellModel m = make_square_plate(5.0, 4, 4, MaterialParams{});
    const SpMat M = assemble_mass(m);
    EXPECT_LE((SpMat(M.transpose()) - M).norm(), 1e-14 * M.norm());
    // Rigid translation along x: u^T M u = rho0 * area.
    VecX ex = VecX::Zero(m.num_dofs());
    for (int i = 0; i < m.num_nodes(); ++i) ex[3 * i] = 1.0;
    EXPECT_NEAR(ex.dot(M * ex), 19.0265, 1e-10);
    Eigen::SimplicialLLT<SpMat> llt(M);
    EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Assembly, ReferenceStateIsStressFree) {
    MeshOptions opt;
    opt.boundary = Boundary::Clamped;
    for (const ShellModel& m : {make_square_plate(5.0, 3, 3, MaterialParams{}, opt), make_disk(5.0, 2, MaterialParams{}, opt),
                                make_cnt(7, 7, 2.0, 8, 3, MaterialParams{}, opt)}) {
        VecX f;
        forces(m, VecX::Zero(m.num_dofs()), f, nullptr);
        EXPECT_LE(f.norm(), 1e-12);
        EXPECT_NEAR(total_energy(m, VecX::Zero(m.num_dofs())), 0.0, 1e-12);
    }
}

TEST(Assembly, FreeTubeStiffnessAnnihilatesRigidMotions) {
    MeshOptions opt;
    opt.boundary = Boundary::Free;
    const ShellModel m = make_cnt(10, 10, 2.0, 12, 4, MaterialParams{}, opt);
    VecX f;
    SpMat K;
    forces(m, VecX::Zero(m.num_dofs()), f, &K);
    const double scale = K.norm();
    for (int k = 0; k < 6; ++k) {
        VecX r(m.num_dofs());
        for (int i = 0; i < m.num_nodes(); ++i) {
            const Vec3 x = m.nodes[static_cast<std::size_t>(i)];
            r.segment<3>(3 * i) = k < 3 ? Vec3(Vec3::Unit(k)) : Vec3(Vec3::Unit(k - 3).cross(x));
        }
        EXPECT_LE((K * r).norm(), 1e-10 * scale * r.norm()) << "rigid mode " << k;
    }
}

TEST(Assembly, DirichletCounting) {
    const int m = 4, n = 3, p = 2;
    const ShellModel ss = make_square_plate(5.0, m, n, MaterialParams{});
    const int boundary = 2 * (m + p) + 2 * (n + p) - 4;
    EXPECT_EQ(DofMap(ss).num_free(), 3 * ((m + p) * (n + p) - boundary));
    EXPECT_EQ(static_cast<int>(ss.free_dofs().size()), DofMap(ss).num_free());
    MeshOptions opt;
    opt.boundary = Boundary::Free;
    EXPECT_EQ(DofMap(make_square_plate(5.0, m, n, MaterialParams{}, opt)).num_free(), 3 * (m + p) * (n + p));
    MeshOptions clamped;
    clamped.boundary = Boundary::Clamped;
    const ShellModel cl = make_square_plate(5.0, m, n, MaterialParams{}, clamped);
    EXPECT_EQ(DofMap(cl).num_free(), DofMap(ss).num_free());
    EXPECT_FALSE(cl.rotation_penalty.empty());
    EXPECT_TRUE(ss.rotation_penalty.empty());
    const DofMap map(ss);
    VecX full = VecX::Zero(ss.num_dofs());
    const VecX red = VecX::LinSpaced(map.num_free(), 1.0, map.num_free());
    map.scatter(red, full);
    EXPECT_EQ(map.restrict_vector(full), red);
}

TEST(Assembly, RotationPenaltyIsLinearInKp) {
    MeshOptions opt;
    opt.boundary = Boundary::Clamped;
    const ShellModel m = make_square_plate(5.0, 3, 3, MaterialParams{}, opt);
    const VecX u = random_displacement(m, 0.05, 4);
    VecX f1 = VecX::Zero(m.num_dofs()), f2 = VecX::Zero(m.num_dofs());
    SpMat K1 = make_pattern(m), K2 = make_pattern(m);
    assemble_rotation_penalty(m, u, 10.0, f1, &K1);
    assemble_rotation_penalty(m, u, 30.0, f2, &K2);
    EXPECT_GT(f1.norm(), 0.0);
    EXPECT_LE((f2 - 3.0 * f1).norm(), 1e-12 * f2.norm());
    EXPECT_LE((K2 - 3.0 * K1).norm(), 1e-12 * K2.norm());
}
