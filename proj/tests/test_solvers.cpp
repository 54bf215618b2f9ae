/** @file test_solvers.cpp

    @brief Eigensolver, mode tracking, instability detection, Newton solves
    and load continuation.
*/
#include "shellmodal/solvers.hpp"

#include <gtest/gtest.h>

using namespace shellmodal;

namespace {

SpMat diagonal(const std::vector<double>& d) {
    SpMat A(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) A.insert(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
    A.makeCompressed();
    return A;
}

SpMat identity(int n) { return diagonal(std::vector<double>(static_cast<std::size_t>(n), 1.0)); }

int find_label(const ModalStep& s, const std::string& l) {
    for (int i = 0; i < s.size(); ++i) {
        if (s.labels[static_cast<std::size_t>(i)] == l) return i;
    }
    return -1;
}

} // namespace

TEST(Solvers, ToyPencil) {
    EigenOptions opt;
    opt.num_modes = 2;
    const EigenResult r = solve_generalized(diagonal({4.0, 9.0}), identity(2), opt);
    ASSERT_EQ(r.values.size(), 2);
    EXPECT_NEAR(std::sqrt(r.values[0]), 2.0, 1e-14);
    EXPECT_NEAR(std::sqrt(r.values[1]), 3.0, 1e-14);
    // Scaled mass halves omega^2.
    const EigenResult s = solve_generalized(diagonal({4.0, 9.0}), diagonal({2.0, 2.0}), opt);
    EXPECT_NEAR(s.values[0], 2.0, 1e-14);
}

TEST(Solvers, SparsePathMatchesDense) {
    const ShellModel plate = make_square_plate(5.0, 8, 8, MaterialParams{});
    const DofMap map(plate);
    SpMat K = make_pattern(plate);
    VecX f = VecX::Zero(plate.num_dofs());
    assemble_internal(plate, VecX::Zero(plate.num_dofs()), f, &K);
    const SpMat Kr = map.restrict_matrix(K), Mr = map.restrict_matrix(assemble_mass(plate));
    EigenOptions dense;
    dense.num_modes = 8;
    EigenOptions sparse = dense;
    sparse.dense_threshold = 0;
    const EigenResult a = solve_generalized(Kr, Mr, dense), b = solve_generalized(Kr, Mr, sparse);
    EXPECT_TRUE(a.dense);
    EXPECT_FALSE(b.dense);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9 * a.values[7]);
    EXPECT_LE(b.max_residual, 1e-8);
    EXPECT_LE(b.max_orthogonality, 1e-8);
}

TEST(Solvers, NegativeEigenvaluesAreNeverDropped) {
    const SpMat K = diagonal({-50.0, 1.0, 2.0, 3.0, 4.0, 5.0});
    const ModalStep s = modal_analysis(K, identity(6), 2, 0.0, false);
    ASSERT_EQ(s.size(), 2);
    EXPECT_NEAR(s.omega2[0], -50.0, 1e-12);
    EXPECT_TRUE(s.unstable(0));
    EXPECT_LT(s.frequency(0), 0.0);
    EXPECT_NEAR(s.omega2[1], 1.0, 1e-12);
}

TEST(Solvers, ShiftSelectsNearestValues) {
    // Singular free pencil: the null space must not count as negative.
    const SpMat K = diagonal({0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0});
    const ModalStep s = modal_analysis(K, identity(10), 3, 5.2, true);
    ASSERT_EQ(s.size(), 3);
    EXPECT_NEAR(s.omega2[0], 4.0, 1e-12);
    EXPECT_NEAR(s.omega2[1], 5.0, 1e-12);
    EXPECT_NEAR(s.omega2[2], 6.0, 1e-12);
    const ModalStep n = modal_analysis(diagonal({-9.0, 1.0, 2.0, 3.0, 4.0, 5.0}), identity(6), 2, 4.1, false);
    ASSERT_EQ(n.size(), 2);
    EXPECT_NEAR(n.omega2[0], -9.0, 1e-12);
    EXPECT_NEAR(n.omega2[1], 4.0, 1e-12);
}

TEST(Solvers, FreeTubeHasSixRigidModes) {
    MeshOptions opt;
    opt.boundary = Boundary::Free;
    const ShellModel tube = make_cnt(5, 5, 2.0, 10, 4, MaterialParams{}, opt);
    const DofMap map(tube);
    SpMat K = make_pattern(tube);
    VecX f = VecX::Zero(tube.num_dofs());
    assemble_internal(tube, VecX::Zero(tube.num_dofs()), f, &K);
    const ModalStep s = modal_analysis(map.restrict_matrix(K), map.restrict_matrix(assemble_mass(tube)), 4, 0.0, true);
    ASSERT_EQ(s.size(), 10);
    int rigid = 0;
    for (int i = 0; i < s.size(); ++i) rigid += s.rigid[static_cast<std::size_t>(i)] ? 1 : 0;
    EXPECT_EQ(rigid, 6);
    EXPECT_FALSE(s.rigid[6]);
}

TEST(Solvers, MacAndTracking) {
    const SpMat M = identity(3);
    const VecX e0 = VecX::Unit(3, 0), e1 = VecX::Unit(3, 1);
    EXPECT_NEAR(mac(e0, 2.0 * e0, M), 1.0, 1e-15);
    EXPECT_NEAR(mac(e0, e1, M), 0.0, 1e-15);
    MatX prev(3, 2), cur(3, 2);
    prev << 1, 0, 0, 1, 0, 0;
    cur << 0, 1, 1, 0, 0, 0;
    const TrackingResult t = track_modes(prev, cur, M);
    EXPECT_EQ(t.match, (std::vector<int>{1, 0}));
    MatX far(3, 2);
    far << 0, 0, 0, 0, 1, 0;
    far(0, 1) = 1.0;
    const TrackingResult u = track_modes(prev, far, M, 0.6);
    EXPECT_EQ(u.match[0], -1);
    EXPECT_EQ(u.match[1], 0);
}

TEST(Solvers, AlignDegenerateRotatesOntoReference) {
    const SpMat M = identity(2);
    MatX ref = MatX::Identity(2, 2);
    const double c = std::cos(0.4), s = std::sin(0.4);
    MatX v(2, 2);
    v << c, -s, s, c;
    VecX w(2);
    w << 1.0, 1.0;
    align_degenerate(ref, w, v, M);
    EXPECT_NEAR(std::abs(v(0, 0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(v(1, 1)), 1.0, 1e-12);
    EXPECT_LE((v.transpose() * v - MatX::Identity(2, 2)).norm(), 1e-12);
}

TEST(Solvers, ZeroCrossingsAndInstabilityDetection) {
    const std::vector<double> z = zero_crossings({0.0, 1.0, 2.0}, {1.0, -1.0, -2.0});
    ASSERT_EQ(z.size(), 1u);
    EXPECT_NEAR(z[0], 0.5, 1e-15);
    EXPECT_TRUE(zero_crossings({0.0, 1.0}, {1.0, 2.0}).empty());

    auto step = [](double p, double w) {
        ModalStep s;
        s.parameter = p;
        s.omega2 = VecX::Constant(1, w);
        s.vectors = MatX::Identity(1, 1);
        s.rigid = {false};
        s.labels = {"(1,1)"};
        return s;
    };
    ModalResult stable;
    for (double p : {0.0, 1.0, 2.0}) stable.steps.push_back(step(p, 1.0 + p));
    EXPECT_TRUE(detect_instability(stable).empty());

    ModalResult crossing;
    crossing.steps = {step(0.0, 1.0), step(1.0, 0.5), step(2.0, -0.5)};
    const auto c = detect_instability(crossing);
    ASSERT_FALSE(c.empty());
    EXPECT_EQ(c[0].kind, "zero-crossing");
    EXPECT_NEAR(c[0].parameter, 1.5, 1e-15);

    ModalResult dip;
    dip.steps = {step(0.0, 1.0), step(1.0, 1e-4), step(2.0, 0.8)};
    const auto d = detect_instability(dip);
    ASSERT_FALSE(d.empty());
    EXPECT_EQ(d[0].kind, "dip");
}

TEST(Solvers, NewtonAtReferenceIsTrivial) {
    const ShellModel plate = make_square_plate(5.0, 4, 4, MaterialParams{});
    const LoadedModel system(plate, LoadProgram{});
    const NewtonResult r = newton_solve(system, 0.0, VecX::Zero(plate.num_dofs()), NewtonOptions{});
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.u.norm(), 0.0);
}

TEST(Solvers, DilatationStateIsHomogeneous) {
    const ShellModel plate = make_square_plate(5.0, 4, 4, MaterialParams{});
    LoadProgram lp;
    lp.kind = LoadKind::AreaStretch;
    lp.start = 1.0;
    lp.end = 1.2;
    const LoadedModel system(plate, lp);
    const double J = 1.1;
    const VecX h = system.homogeneous(J);
    const NewtonResult r = newton_solve(system, J, VecX::Zero(plate.num_dofs()), NewtonOptions{});
    EXPECT_LE((r.u - h).cwiseAbs().maxCoeff(), 1e-9);
    // The homogeneous state stretches every node radially by sqrt(J).
    const Vec3 d = plate.nodes[7] - plate.center;
    EXPECT_LE((h.segment<3>(21) - (std::sqrt(J) - 1.0) * d).norm(), 1e-14);
}

TEST(Solvers, DegeneracySplitsUnderUniaxialStretch) {
    const ShellModel plate = make_square_plate(5.0, 8, 8, MaterialParams{});
    LoadProgram lp;
    lp.kind = LoadKind::Uniaxial;
    lp.start = 1.0;
    lp.end = 1.02;
    lp.steps = 2;
    ContinuationOptions opt;
    opt.num_modes = 4;
    const ModalResult r = run_continuation(plate, lp, opt);
    ASSERT_EQ(r.steps.size(), 3u);
    auto split = [](const ModalStep& s) {
        const int a = find_label(s, "(1,2)"), b = find_label(s, "(2,1)");
        EXPECT_GE(a, 0);
        EXPECT_GE(b, 0);
        return std::abs(s.frequency(a) - s.frequency(b)) / s.frequency(a);
    };
    EXPECT_LE(split(r.steps.front()), 1e-3);
    EXPECT_GT(split(r.steps.back()), 1e-2);
    EXPECT_GT(r.steps.back().frequency(0), r.steps.front().frequency(0));
}

TEST(Solvers, DilatationIsIsotropicInLatticeAngle) {
    LoadProgram lp;
    lp.kind = LoadKind::AreaStretch;
    lp.start = 1.0;
    lp.end = 1.05;
    lp.steps = 1;
    ContinuationOptions opt;
    opt.num_modes = 4;
    MeshOptions rotated;
    rotated.armchair_angle = 0.3;
    const ModalResult a = run_continuation(make_square_plate(5.0, 6, 6, MaterialParams{}), lp, opt);
    const ModalResult b = run_continuation(make_square_plate(5.0, 6, 6, MaterialParams{}, rotated), lp, opt);
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(a.steps.back().omega2[i], b.steps.back().omega2[i], 1e-8 * a.steps.back().omega2[i]);
    }
}

TEST(Solvers, InvalidProgramsThrow) {
    LoadProgram lp;
    lp.kind = LoadKind::AreaStretch;
    lp.start = 1.0;
    lp.end = 1.0;
    EXPECT_THROW(lp.validate(), InvalidArgument);
    lp.end = 1.1;
    lp.steps = 0;
    EXPECT_THROW(lp.validate(), InvalidArgument);
    lp.steps = 2;
    lp.start = -1.0;
    EXPECT_THROW(lp.validate(), InvalidArgument);
    LoadProgram axial;
    axial.kind = LoadKind::AxialStrain;
    axial.start = 0.0;
    axial.end = -0.01;
    EXPECT_THROW(LoadedModel(make_square_plate(5.0, 2, 2, MaterialParams{}), axial), InvalidArgument);
    EXPECT_THROW(modal_analysis(identity(2), identity(2), 0, 0.0, false), InvalidArgument);
}

TEST(Solvers, ArclengthAgreesWithParameterStepping) {
    const ShellModel plate = make_square_plate(5.0, 4, 4, MaterialParams{});
    LoadProgram lp;
    lp.kind = LoadKind::AreaStretch;
    lp.start = 1.0;
    lp.end = 1.1;
    lp.steps = 4;
    ContinuationOptions opt;
    opt.num_modes = 3;
    const ModalResult stepped = run_continuation(plate, lp, opt);
    lp.arclength = true;
    const ModalResult traced = run_continuation(plate, lp, opt);
    EXPECT_FALSE(traced.terminated);
    EXPECT_GE(traced.steps.size(), 3u);
    EXPECT_DOUBLE_EQ(traced.steps.back().parameter, 1.1);
    for (std::size_t k = 1; k < traced.steps.size(); ++k) {
        EXPECT_GT(traced.steps[k].parameter, traced.steps[k - 1].parameter);
    }
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(traced.steps.back().omega2[i], stepped.steps.back().omega2[i], 1e-8 * stepped.steps.back().omega2[i]);
    }
}
