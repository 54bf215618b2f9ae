/** @file test_nurbs.cpp

    @brief B-spline and NURBS bases, quadrature and the plate, disk and
    tube generators.
*/
#include "shellmodal/model.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace shellmodal;

namespace {

double sample(const KnotVector& kv, std::mt19937& gen) {
    std::uniform_real_distribution<double> d(kv.first(), kv.last());
    return d(gen);
}

} // namespace

TEST(Nurbs, UnivariatePartitionOfUnity) {
    std::mt19937 gen(1);
    for (const KnotVector& kv : {open_uniform(2, 5), open_uniform(3, 4, -1.0, 2.0), periodic_uniform(2, 7)}) {
        for (int k = 0; k < 20; ++k) {
            const double u = sample(kv, gen);
            const MatX d = kv.derivatives(kv.find_span(u), u, 2);
            EXPECT_NEAR(d.row(0).sum(), 1.0, 1e-14);
            EXPECT_NEAR(d.row(1).sum(), 0.0, 1e-12);
            EXPECT_NEAR(d.row(2).sum(), 0.0, 1e-10);
            EXPECT_GE(d.row(0).minCoeff(), -1e-15);
        }
    }
}

TEST(Nurbs, DerivativesMatchFiniteDifferences) {
    const KnotVector kv = open_uniform(3, 4);
    const double u = 0.37, h = 1e-6;
    const int s = kv.find_span(u);
    const MatX d = kv.derivatives(s, u, 2);
    const MatX dp = kv.derivatives(s, u + h, 1), dm = kv.derivatives(s, u - h, 1);
    for (int i = 0; i <= kv.degree; ++i) {
        EXPECT_NEAR(d(1, i), (dp(0, i) - dm(0, i)) / (2 * h), 1e-8);
        EXPECT_NEAR(d(2, i), (dp(1, i) - dm(1, i)) / (2 * h), 1e-6);
    }
}

TEST(Nurbs, RationalBasisSumsOnDiskPatches) {
    const ShellModel disk = make_disk(5.0, 3, MaterialParams{}, {});
    for (const Element& e : disk.elements) {
        for (const QuadPoint& q : e.qps) {
            EXPECT_NEAR(q.basis.N.sum(), 1.0, 1e-13);
            EXPECT_NEAR(q.basis.dN.col(0).sum(), 0.0, 1e-11);
            EXPECT_NEAR(q.basis.dN.col(1).sum(), 0.0, 1e-11);
            for (int c = 0; c < 3; ++c) EXPECT_NEAR(q.basis.ddN.col(c).sum(), 0.0, 1e-9);
        }
    }
}

TEST(Nurbs, PlateHasLinearPrecision) {
    const double L = 5.0;
    const ShellModel plate = make_square_plate(L, 4, 3, MaterialParams{}, {});
    std::mt19937 gen(2);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const Vec2 xi(d(gen), d(gen));
        const ElementBasis eb = plate.basis_at(0, xi);
        Vec3 x = Vec3::Zero();
        for (std::size_t i = 0; i < eb.local.size(); ++i) {
            x += eb.basis.N[static_cast<Eigen::Index>(i)] *
                 plate.nodes[static_cast<std::size_t>(plate.patch_nodes[0][static_cast<std::size_t>(eb.local[i])])];
        }
        EXPECT_NEAR(x[0], L * xi[0], 1e-12);
        EXPECT_NEAR(x[1], L * xi[1], 1e-12);
        EXPECT_NEAR(x[2], 0.0, 1e-15);
    }
}

TEST(Nurbs, DiskRimIsExactCircle) {
    const double a = 5.0;
    const ShellModel disk = make_disk(a, 2, MaterialParams{}, {});
    int exact_sides = 0;
    for (const NurbsPatch& p : disk.patches) {
        for (int side = 0; side < 4; ++side) {
            double worst = 0.0;
            for (int k = 0; k <= 40; ++k) {
                const double t = k / 40.0;
                const double u = side < 2 ? (side == 0 ? p.u.first() : p.u.last()) : p.u.first() + t * (p.u.last() - p.u.first());
                const double v = side >= 2 ? (side == 2 ? p.v.first() : p.v.last()) : p.v.first() + t * (p.v.last() - p.v.first());
                worst = std::max(worst, std::abs(p.evaluate(u, v).head<2>().norm() - a));
            }
            exact_sides += worst < 1e-12 ? 1 : 0;
        }
    }
    EXPECT_EQ(exact_sides, 4);
}

TEST(Nurbs, ControlPointCounts) {
    for (int p : {2, 3}) {
        MeshOptions opt;
        opt.degree = p;
        EXPECT_EQ(make_square_plate(5.0, 4, 6, MaterialParams{}, opt).num_nodes(), (4 + p) * (6 + p));
        EXPECT_EQ(make_cnt(5, 5, 2.0, 12, 5, MaterialParams{}, opt).num_nodes(), 12 * (5 + p));
    }
}

TEST(Nurbs, DiskAreaConverges) {
    const double a = 5.0;
    const ShellModel disk = make_disk(a, 20, MaterialParams{}, {});
    EXPECT_LT(std::abs(disk.reference_area() - pi * a * a) / (pi * a * a), 1e-3);
    const ShellModel plate = make_square_plate(5.0, 3, 3, MaterialParams{}, {});
    EXPECT_NEAR(plate.reference_area(), 25.0, 1e-12);
}

TEST(Nurbs, NanotubeGeometry) {
    // sqrt(3) 0.142 / (2 pi) sqrt(300)
    EXPECT_NEAR(cnt_radius(10, 10), 0.678000, 1e-6);
    EXPECT_NEAR(cnt_chiral_angle(7, 0), 0.0, 1e-15);
    EXPECT_NEAR(cnt_chiral_angle(7, 7), pi / 6, 1e-15);
    const ShellModel tube = make_cnt(10, 10, 5.669, 16, 8, MaterialParams{}, {});
    EXPECT_NEAR(tube.length, 5.669 * 2.0 * cnt_radius(10, 10), 1e-12);
}

TEST(Nurbs, KnotInsertionKeepsGeometry) {
    const ShellModel disk = make_disk(5.0, 2, MaterialParams{}, {});
    const NurbsPatch& original = disk.patches[1];
    NurbsPatch refined = original;
    insert_knot(refined, 0, 0.5 * (original.u.first() + original.u.last()) + 0.013);
    refine_uniform(refined, 1, 3);
    EXPECT_GT(refined.points.size(), original.points.size());
    std::mt19937 gen(4);
    for (int k = 0; k < 30; ++k) {
        const double u = sample(original.u, gen), v = sample(original.v, gen);
        EXPECT_LE((refined.evaluate(u, v) - original.evaluate(u, v)).norm(), 1e-12);
    }
}

TEST(Nurbs, PeriodicSeamIsSmooth) {
    const ShellModel tube = make_cnt(7, 7, 3.0, 12, 4, MaterialParams{}, {});
    const NurbsPatch& p = tube.patches[0];
    const double a = p.u.first(), b = p.u.last(), h = 1e-5;
    for (double v : {p.v.first(), 0.3, p.v.last()}) {
        EXPECT_LE((p.evaluate(a, v) - p.evaluate(b, v)).norm(), 1e-12);
        const Vec3 left = (p.evaluate(b, v) - p.evaluate(b - h, v)) / h;
        const Vec3 right = (p.evaluate(a + h, v) - p.evaluate(a, v)) / h;
        EXPECT_LE((left - right).norm(), 1e-4 * left.norm());
    }
}

TEST(Nurbs, GaussLegendreExactness) {
    for (int n = 1; n <= 6; ++n) {
        std::vector<double> x, w;
        gauss_legendre(n, x, w);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += w[static_cast<std::size_t>(i)] * std::pow(x[static_cast<std::size_t>(i)], k);
            EXPECT_NEAR(s, k % 2 == 0 ? 2.0 / (k + 1) : 0.0, 1e-14);
        }
    }
}

TEST(Nurbs, InvalidInputsThrow) {
    KnotVector kv;
    kv.degree = 2;
    kv.knots = {0, 0, 0, 0.6, 0.4, 1, 1, 1};
    EXPECT_THROW(kv.validate(), InvalidArgument);
    EXPECT_THROW(make_square_plate(-1.0, 2, 2, MaterialParams{}, {}), InvalidArgument);
    EXPECT_THROW(make_cnt(5, 5, 2.0, 2, 4, MaterialParams{}, {}), InvalidArgument);
    const ShellModel plate = make_square_plate(5.0, 2, 2, MaterialParams{}, {});
    EXPECT_THROW(basis_eval(plate.patches[0], 0, Vec2(0.9, 0.9)), InvalidArgument);
}
