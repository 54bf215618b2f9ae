/** @file eigensolver.cpp

    @brief Dense and shift-invert block Krylov generalized eigensolvers.
*/
#include "shellmodal/eigensolver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace shellmodal {

double norm1(const SpMat& A) {
    double best = 0.0;
    for (int j = 0; j < A.outerSize(); ++j) {
        double s = 0.0;
        for (SpMat::InnerIterator it(A, j); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

namespace {

/// Indices of the k values nearest `shift`, returned in ascending value order.
std::vector<int> nearest(const VecX& values, int k, double shift) {
    std::vector<int> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::abs(values[a] - shift) < std::abs(values[b] - shift); });
    idx.resize(static_cast<std::size_t>(std::min<Eigen::Index>(k, values.size())));
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return values[a] < values[b]; });
    return idx;
}

void finish(const SpMat& K, const SpMat& M, EigenResult& r) {
    const double kn = std::max(norm1(K), 1e-300);
    r.max_residual = 0.0;
    for (Eigen::Index i = 0; i < r.vectors.cols(); ++i) {
        const VecX v = r.vectors.col(i);
        const VecX res = K * v - r.values[i] * (M * v);
        r.max_residual = std::max(r.max_residual, res.norm() / (kn * v.norm()));
    }
    const MatX G = r.vectors.transpose() * (M * r.vectors);
    r.max_orthogonality = (G - MatX::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

EigenResult dense_solve(const SpMat& K, const SpMat& M, const EigenOptions& opt) {
    const MatX Kd = MatX(K), Md = MatX(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatX> es(0.5 * (Kd + Kd.transpose()), 0.5 * (Md + Md.transpose()));
    if (es.info() != Eigen::Success) {
        throw ConvergenceError("solvers", "dense generalized eigensolver failed (mass matrix not SPD?)");
    }
    const std::vector<int> idx = nearest(es.eigenvalues(), opt.num_modes, opt.shift);
    EigenResult r;
    r.dense = true;
    r.shift_used = opt.shift;
    r.values.resize(static_cast<Eigen::Index>(idx.size()));
    r.vectors.resize(K.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        r.values[static_cast<Eigen::Index>(i)] = es.eigenvalues()[idx[i]];
        r.vectors.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(idx[i]);
    }
    finish(K, M, r);
    return r;
}

/// M-orthonormalizes the columns of W against V(:, 0:used) and each other.
/// Rank-deficient columns are replaced with random directions.
void orthonormalize(const SpMat& M, const MatX& V, Eigen::Index used, MatX& W, std::mt19937& gen) {
    std::normal_distribution<double> nd;
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
        for (int attempt = 0; attempt < 5; ++attempt) {
            VecX w = W.col(c);
            const double before = std::sqrt(std::max(w.dot(M * w), 0.0));
            for (int pass = 0; pass < 2; ++pass) {
                if (used > 0) {
                    const VecX h = V.leftCols(used).transpose() * (M * w);
                    w -= V.leftCols(used) * h;
                }
                for (Eigen::Index p = 0; p < c; ++p) {
                    const VecX wp = W.col(p);
                    w -= wp * wp.dot(M * w);
                }
            }
            const double after = std::sqrt(std::max(w.dot(M * w), 0.0));
            if (after > 1e-10 * before && after > 0.0) {
                W.col(c) = w / after;
                break;
            }
            for (Eigen::Index i = 0; i < w.size(); ++i) W(i, c) = nd(gen);
        }
    }
}

} // namespace

EigenResult solve_generalized(const SpMat& K, const SpMat& M, const EigenOptions& opt) {
    const Eigen::Index n = K.rows();
    if (n == 0 || M.rows() != n) {
        throw InvalidArgument("solvers", "eigenproblem needs square matrices of equal size");
    }
    if (opt.num_modes < 1) {
        throw InvalidArgument("solvers", "at least one mode must be requested");
    }
    const int k = static_cast<int>(std::min<Eigen::Index>(opt.num_modes, n));
    if (n <= opt.dense_threshold) {
        return dense_solve(K, M, opt);
    }

    // Factor K - sigma M, moving the shift if it is (nearly) singular.
    const double scale = norm1(K) / std::max(norm1(M), 1e-300);
    Eigen::SimplicialLDLT<SpMat> ldlt;
    double sigma = opt.shift;
    bool factored = false;
    for (int attempt = 0; attempt < 5 && !factored; ++attempt) {
        if (attempt > 0) sigma = opt.shift - scale * std::pow(10.0, -9.0 + 1.5 * attempt);
        const SpMat A = K - sigma * M;
        ldlt.compute(A);
        if (ldlt.info() != Eigen::Success) continue;
        const VecX d = ldlt.vectorD().cwiseAbs();
        factored = d.minCoeff() > 1e-13 * d.maxCoeff() && d.allFinite();
    }
    if (!factored) {
        throw ConvergenceError("solvers", "could not factor the shifted stiffness matrix");
    }

    std::mt19937 gen(opt.seed);
    std::normal_distribution<double> nd;
    const Eigen::Index b = std::min<Eigen::Index>(opt.block_size, n);
    const Eigen::Index m_init = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * k + 2 * b, k + 4 * b));
    const Eigen::Index m_max = std::min<Eigen::Index>(n, std::max<Eigen::Index>(8 * m_init, 400));
    MatX V(n, m_max);
    Eigen::Index used = 0;

    MatX W(n, b);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = nd(gen);
    orthonormalize(M, V, 0, W, gen);
    const Eigen::Index first = std::min(b, m_max);
    V.leftCols(first) = W.leftCols(first);
    used = first;
    Eigen::Index prev_start = 0, prev_cols = first;

    EigenResult best;
    Eigen::Index next_check = m_init;
    while (true) {
        if (used >= next_check || used >= m_max) {
            const MatX Vu = V.leftCols(used);
            const MatX KV = K * Vu;
            const MatX MV = M * Vu;
            MatX Kr = Vu.transpose() * KV;
            MatX Mr = Vu.transpose() * MV;
            Kr = 0.5 * (Kr + Kr.transpose()).eval();
            Mr = 0.5 * (Mr + Mr.transpose()).eval();
            Eigen::GeneralizedSelfAdjointEigenSolver<MatX> es(Kr, Mr);
            if (es.info() != Eigen::Success) {
                throw ConvergenceError("solvers", "Rayleigh-Ritz projection failed");
            }
            const std::vector<int> idx = nearest(es.eigenvalues(), k, sigma);
            EigenResult r;
            r.shift_used = sigma;
            r.values.resize(static_cast<Eigen::Index>(idx.size()));
            r.vectors.resize(n, static_cast<Eigen::Index>(idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i) {
                r.values[static_cast<Eigen::Index>(i)] = es.eigenvalues()[idx[i]];
                r.vectors.col(static_cast<Eigen::Index>(i)) = Vu * es.eigenvectors().col(idx[i]);
            }
            finish(K, M, r);
            best = r;
            if (r.max_residual <= opt.tolerance || used >= m_max) {
                break;
            }
            next_check = used + std::max<Eigen::Index>(b, m_init / 4);
        }
        // Next block: (K - sigma M)^-1 M applied to the latest block.
        const Eigen::Index cols = std::min(prev_cols, m_max - used);
        MatX Wn(n, cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            Wn.col(c) = ldlt.solve(M * V.col(prev_start + c));
        }
        orthonormalize(M, V, used, Wn, gen);
        V.middleCols(used, cols) = Wn;
        prev_start = used;
        prev_cols = cols;
        used += cols;
    }
    if (best.max_residual > 1e3 * opt.tolerance) {
        // Krylov space exhausted without convergence; fall back to dense if affordable.
        if (n <= 4000) return dense_solve(K, M, opt);
        throw ConvergenceError("solvers", "shift-invert iteration did not converge");
    }
    return best;
}

} // namespace shellmodal
