/** @file test_contact.cpp

    @brief Lennard-Jones half-space adhesion: potential values, derivatives
    and the assembled force and stiffness.
*/
#include "shellmodal/assembly.hpp"
#include "shellmodal/contact.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace shellmodal;

namespace {

AdhesionParams unit_gamma() {
    AdhesionParams p;
    p.Gamma = 1.0;
    return p;
}

} // namespace

TEST(Contact, PotentialValues) {
    const AdhesionParams p = unit_gamma();
    EXPECT_NEAR(half_space_potential(p.h0, p), -1.0, 1e-15);
    EXPECT_NEAR(half_space_potential(2.0 * p.h0, p), -0.1865234375, 1e-15);
    EXPECT_NEAR(half_space_potential_derivative(p.h0, p), 0.0, 1e-13);
    EXPECT_GT(half_space_potential_second_derivative(p.h0, p), 0.0);
    EXPECT_GT(half_space_potential(0.5 * p.h0, p), 0.0);
    EXPECT_THROW(half_space_potential(0.0, p), PenetrationError);
    EXPECT_THROW(half_space_potential(-0.1, p), PenetrationError);
}

TEST(Contact, DerivativesMatchFiniteDifferences) {
    const AdhesionParams p = unit_gamma();
    const double h = 1e-7;
    for (double r : {0.8 * p.h0, 1.2 * p.h0, 2.0 * p.h0}) {
        const double d1 = (half_space_potential(r + h, p) - half_space_potential(r - h, p)) / (2 * h);
        const double d2 =
            (half_space_potential_derivative(r + h, p) - half_space_potential_derivative(r - h, p)) / (2 * h);
        EXPECT_NEAR(half_space_potential_derivative(r, p), d1, 1e-6 * std::max(1.0, std::abs(d1)));
        EXPECT_NEAR(half_space_potential_second_derivative(r, p), d2, 1e-5 * std::max(1.0, std::abs(d2)));
    }
}

TEST(Contact, InflectionSoftening) {
    const AdhesionParams p = unit_gamma();
    const double ri = potential_inflection(p);
    EXPECT_NEAR(ri, std::pow(2.5, 1.0 / 6.0) * p.h0, 1e-15);
    EXPECT_NEAR(half_space_potential_second_derivative(ri, p), 0.0, 1e-10);
    EXPECT_GT(half_space_potential_second_derivative(0.95 * ri, p), 0.0);
    EXPECT_LT(half_space_potential_second_derivative(1.05 * ri, p), 0.0);
}

TEST(Contact, ZeroGammaContributesNothing) {
    const ShellModel m = make_square_plate(5.0, 2, 2, MaterialParams{}, {});
    AdhesionParams p;
    p.profile.z_s = -1.0;
    const VecX u = VecX::Zero(m.num_dofs());
    EXPECT_DOUBLE_EQ(adhesion_energy(m, u, p), 0.0);
    VecX f = VecX::Zero(m.num_dofs());
    SpMat K = make_pattern(m);
    contact_force_and_stiffness(m, u, p, f, &K);
    EXPECT_DOUBLE_EQ(f.norm(), 0.0);
    EXPECT_DOUBLE_EQ(K.norm(), 0.0);
}

TEST(Contact, FlatSheetAtEquilibriumGap) {
    const ShellModel m = make_square_plate(5.0, 2, 2, MaterialParams{}, {});
    AdhesionParams p = unit_gamma();
    p.profile.z_s = -p.h0;
    const VecX u = VecX::Zero(m.num_dofs());
    EXPECT_NEAR(minimum_gap(m, u, p), p.h0, 1e-14);
    EXPECT_NEAR(adhesion_energy(m, u, p), -25.0, 1e-12);
    VecX f = VecX::Zero(m.num_dofs());
    contact_force_and_stiffness(m, u, p, f, nullptr);
    EXPECT_LE(f.norm(), 1e-12);
}

TEST(Contact, ForceAndStiffnessMatchFiniteDifferences) {
    for (bool cavity : {false, true}) {
        const ShellModel m = make_disk(5.0, 2, MaterialParams{}, {});
        AdhesionParams p = unit_gamma();
        p.profile.z_s = -1.2 * p.h0;
        if (cavity) {
            p.profile.kind = SubstrateProfile::Kind::Cavity;
            p.profile.R1 = 3.0;
            p.profile.R2 = 1.5;
            p.profile.depth = 0.2;
        }
        std::mt19937 gen(8);
        std::uniform_real_distribution<double> d(-0.02, 0.02);
        VecX u(m.num_dofs());
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = d(gen);
        VecX f = VecX::Zero(m.num_dofs());
        SpMat K = make_pattern(m);
        contact_force_and_stiffness(m, u, p, f, &K);
        const double h = 1e-6;
        const double fmax = f.cwiseAbs().maxCoeff();
        for (int i = 2; i < m.num_dofs(); i += 5) {
            VecX up = u, um = u;
            up[i] += h;
            um[i] -= h;
            EXPECT_NEAR((adhesion_energy(m, up, p) - adhesion_energy(m, um, p)) / (2 * h), f[i], 1e-6 * fmax);
            VecX fp = VecX::Zero(m.num_dofs()), fm = VecX::Zero(m.num_dofs());
            contact_force_and_stiffness(m, up, p, fp, nullptr);
            contact_force_and_stiffness(m, um, p, fm, nullptr);
            const VecX col = (fp - fm) / (2 * h);
            const VecX kc = K.col(i);
            EXPECT_LE((col - kc).norm(), 1e-5 * std::max(kc.norm(), 1e-3 * K.norm()));
        }
    }
}

TEST(Contact, PenetrationIsRejected) {
    const ShellModel m = make_square_plate(5.0, 2, 2, MaterialParams{}, {});
    AdhesionParams p = unit_gamma();
    p.profile.z_s = -0.5;
    VecX u = VecX::Zero(m.num_dofs());
    for (int i = 2; i < m.num_dofs(); i += 3) u[i] = -0.6;
    EXPECT_THROW(adhesion_energy(m, u, p), PenetrationError);
    AdhesionParams bad = p;
    bad.h0 = -1.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
}
