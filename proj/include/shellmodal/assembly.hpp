/** @file assembly.hpp

    @brief Global mass matrix, internal force and tangent stiffness of the
    rotation-free shell, boundary penalties and Dirichlet reduction.

    The tangent is the exact Hessian of the discrete energy. At each
    quadrature point the energy is a function of the 15 kinematic quantities
    (a_1, a_2, a_{,11}, a_{,12}, a_{,22}); its gradient and Hessian with
    respect to them are formed from the constitutive derivatives and the
    exact first and second derivatives of a_{ab} and b_{ab} = n . a_{,ab},
    then mapped to control point dofs through the basis functions.
*/
#pragma once

#include "shellmodal/model.hpp"

#include <Eigen/Sparse>

#include <string>

namespace shellmodal {

using SpMat = Eigen::SparseMatrix<double>;

struct SystemMatrices {
    SpMat M;
    SpMat K;
    VecX f_int;
    VecX f_ext;
};

/// Symbolic pattern of all node pairs coupled by elements or penalties
/// (3 x 3 blocks, values zero).
SpMat make_pattern(const ShellModel& model);

/// Adds dense 3x3 node blocks into a matrix that already holds the pattern.
class BlockScatter {
public:
    explicit BlockScatter(SpMat& K) : K_(K) {}
    void add(int node_i, int node_j, const Mat3& block);
    /// Adds a local matrix over `nodes` (3 dofs each, node-major).
    void add_local(const std::vector<int>& nodes, const MatX& Ke);

private:
    SpMat& K_;
};

/// Consistent mass matrix rho0 N^T N over the reference surface.
SpMat assemble_mass(const ShellModel& model);

/// Total membrane + bending energy for displacement u.
double strain_energy_total(const ShellModel& model, const VecX& u);

/// Internal force (gradient of strain energy) and, if K is non-null,
/// material + geometric tangent added into *K (pattern created if empty).
void assemble_internal(const ShellModel& model, const VecX& u, VecX& f, SpMat* K);

/// Energy of the clamped-edge and patch-interface penalties.
double penalty_energy(const ShellModel& model, const VecX& u);

/// Adds penalty forces into f and, if non-null, stiffness into *K.
void assemble_penalties(const ShellModel& model, const VecX& u, VecX& f, SpMat* K);

/// Only the clamped-edge part, with an explicit penalty parameter.
void assemble_rotation_penalty(const ShellModel& model, const VecX& u, double kp, VecX& f, SpMat* K);

/// Free-dof bookkeeping for elimination of Dirichlet dofs.
struct DofMap {
    std::vector<int> free;          ///< reduced -> full
    std::vector<int> full_to_free;  ///< full -> reduced, -1 if fixed

    explicit DofMap(const ShellModel& model);
    int num_free() const { return static_cast<int>(free.size()); }
    VecX restrict_vector(const VecX& full) const;
    SpMat restrict_matrix(const SpMat& full) const;
    /// Writes reduced values into the free entries of `full`.
    void scatter(const VecX& reduced, VecX& full) const;
};

/// Eliminates fixed rows and columns. Throws if no free dof remains.
SystemMatrices apply_dirichlet(const ShellModel& model, const SystemMatrices& full);

/// Writes a matrix in Matrix Market coordinate format.
void write_matrix_market(const SpMat& A, const std::string& path);

namespace detail {

/// Energy density and its derivatives w.r.t. y = (a_1, a_2, a_11, a_12, a_22)
/// at one quadrature point.
struct PointDerivatives {
    double energy = 0.0;
    Eigen::Matrix<double, 15, 1> gradient;
    Eigen::Matrix<double, 15, 15> hessian;
};

PointDerivatives point_energy_derivatives(const Vec3& a1, const Vec3& a2, const Vec3& s11, const Vec3& s12,
                                          const Vec3& s22, const QuadPoint& q, const MaterialParams& p,
                                          bool with_hessian);

} // namespace detail

} // namespace shellmodal
