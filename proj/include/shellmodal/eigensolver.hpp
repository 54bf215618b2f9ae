/** @file eigensolver.hpp

    @brief Symmetric generalized eigenproblem K v = omega^2 M v: dense
    solver for small systems, shift-invert block Krylov with full
    M-reorthogonalization for large ones.
*/
#pragma once

#include "shellmodal/assembly.hpp"

namespace shellmodal {

struct EigenOptions {
    int num_modes = 10;
    double shift = 0.0;          ///< eigenvalues closest to the shift are returned
    int dense_threshold = 600;   ///< dense solver at or below this size
    int block_size = 8;
    double tolerance = 1e-9;     ///< residual / (||K|| ||v||)
    unsigned seed = 12345;
};

struct EigenResult {
    VecX values;                 ///< ascending
    MatX vectors;                ///< M-orthonormal columns
    double max_residual = 0.0;   ///< max ||K v - w M v|| / (||K|| ||v||)
    double max_orthogonality = 0.0;  ///< max |V^T M V - I|
    double shift_used = 0.0;
    bool dense = false;
};

/// Returns the `num_modes` eigenpairs nearest the shift (or all if fewer).
EigenResult solve_generalized(const SpMat& K, const SpMat& M, const EigenOptions& opt);

/// 1-norm of a sparse matrix.
double norm1(const SpMat& A);

} // namespace shellmodal
