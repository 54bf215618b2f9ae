/** @file solvers.hpp

    @brief Load programs, Newton equilibrium solves, modal analysis about
    equilibria, mode tracking and continuation with instability detection.

    Loading is applied through the Dirichlet dofs (a homogeneous motion of
    the fixed control points) or through the adhesion energy. The total
    potential is strain energy + penalties + adhesion; the residual is its
    gradient restricted to the free dofs.
*/
#pragma once

#include "shellmodal/assembly.hpp"
#include "shellmodal/contact.hpp"
#include "shellmodal/eigensolver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace shellmodal {

enum class LoadKind { None, AreaStretch, Uniaxial, AxialStrain, Adhesion };

std::string to_string(LoadKind k);

struct LoadProgram {
    LoadKind kind = LoadKind::None;
    double start = 0.0;
    double end = 0.0;
    int steps = 1;                    ///< increments from start to end
    double direction_angle = 0.0;     ///< uniaxial: angle from the armchair direction [rad]
    AdhesionParams adhesion;          ///< Gamma is replaced by the parameter for Adhesion
    double min_step_fraction = 1e-4;  ///< smallest increment, fraction of |end - start|
    bool stop_on_instability = true;  ///< stop after the first step with a negative elastic omega^2
    bool record_substeps = false;     ///< modal analysis also at bisected intermediate states
    double jump_limit = 0.0;          ///< max nodal change vs predictor before a step counts as a snap [nm]; 0 = off
    /// Pseudo-arclength path following: the parameter becomes an unknown so
    /// limit points and the unstable branch beyond them are traced instead
    /// of jumped. Every converged arclength point is recorded; jump_limit
    /// then caps the nodal change per arclength step.
    bool arclength = false;

    /// Throws InvalidArgument for a non-monotone or empty schedule.
    void validate() const;
    /// Parameter values of the nominal steps (steps + 1 values; one for None).
    std::vector<double> schedule() const;
};

/// Model plus load program: Dirichlet motion and total potential.
class LoadedModel {
public:
    LoadedModel(const ShellModel& model, const LoadProgram& program);

    const ShellModel& model() const { return model_; }
    const LoadProgram& program() const { return program_; }
    const DofMap& dofs() const { return map_; }

    /// Displacement of every node under the homogeneous boundary motion at p.
    VecX homogeneous(double p) const;
    /// Overwrites the fixed dofs of u with the boundary motion at p.
    void impose(double p, VecX& u) const;
    /// Adhesion parameters at p (Gamma = p for adhesion programs).
    AdhesionParams adhesion(double p) const;

    double energy(const VecX& u, double p) const;
    /// Full gradient and, if K is non-null, full tangent at (u, p).
    void gradient(const VecX& u, double p, VecX& g, SpMat* K) const;

private:
    const ShellModel& model_;
    LoadProgram program_;
    DofMap map_;
    Vec3 dir_ = Vec3::UnitX(), perp_ = Vec3::UnitY();
};

struct NewtonOptions {
    int max_iterations = 30;
    double relative_tolerance = 1e-10;
    double absolute_tolerance = 1e-12;  ///< nN
    double max_increment = 0.5;         ///< largest nodal update per iteration [nm]
    int fallback_iterations = 400;
};

struct NewtonResult {
    VecX u;                   ///< full displacement
    SpMat K;                  ///< full tangent at u
    int iterations = 0;
    double residual = 0.0;
    double initial_residual = 0.0;
    bool fallback = false;    ///< found by the energy-descent fallback
};

/// Newton iteration on the free dofs from `guess` (fixed dofs are reset to
/// the boundary motion). Throws ConvergenceError on failure.
NewtonResult newton_solve(const LoadedModel& system, double p, const VecX& guess, const NewtonOptions& opt);

/// Damped, energy-decreasing iteration (K + mu M) d = -r with line search;
/// used when Newton cannot follow the branch. Throws ConvergenceError.
NewtonResult descent_solve(const LoadedModel& system, double p, const VecX& guess, const NewtonOptions& opt);

struct ModalStep {
    double parameter = 0.0;
    VecX omega2;                        ///< ascending [1/ps^2]
    MatX vectors;                       ///< reduced, M-orthonormal
    std::vector<bool> rigid;
    std::vector<std::string> labels;
    double max_residual = 0.0;
    double max_orthogonality = 0.0;
    int newton_iterations = 0;
    double newton_residual = 0.0;
    bool substep = false;
    bool snap = false;                  ///< accepted after a jump or via the fallback
    VecX u;                             ///< full equilibrium displacement

    int size() const { return static_cast<int>(omega2.size()); }
    /// sign(omega^2) sqrt|omega^2| / 2 pi [THz].
    double frequency(int i) const;
    bool unstable(int i) const { return omega2[i] < 0.0; }
};

struct Instability {
    std::string label;
    std::string kind;      ///< "zero-crossing" or "dip"
    double parameter = 0.0;
    int step = 0;          ///< index of the first step past the event
};

struct ModalResult {
    std::vector<ModalStep> steps;
    std::vector<Instability> instabilities;
    double reference_frequency = 0.0;  ///< first elastic frequency at step 0 [THz]
    bool terminated = false;
    bool solver_failure = false;       ///< terminated because no equilibrium was found
    std::string termination;
};

/// Modal analysis of the reduced pencil. For free models (`free_model`)
/// six extra pairs are requested and |omega^2| < 1e-6 |omega^2_7| is marked
/// rigid. Negative eigenvalues (counted by inertia) are always included;
/// the remaining slots hold the values nearest the shift, ascending. Throws ConvergenceError if residual or orthogonality
/// exceed 1e-8.
ModalStep modal_analysis(const SpMat& K, const SpMat& M, int k, double shift, bool free_model,
                         const EigenOptions& base = {});

/// MAC(v, w) = (v^T M w)^2 / ((v^T M v)(w^T M w)).
double mac(const VecX& v, const VecX& w, const SpMat& M);

struct TrackingResult {
    std::vector<int> match;    ///< per current mode: previous index or -1
    std::vector<double> mac;
};

/// Greedy MAC matching of current to previous modes, largest MAC first;
/// pairs below `threshold` stay unmatched. Rows or columns flagged in the
/// skip vectors (rigid modes) never match.
TrackingResult track_modes(const MatX& previous, const MatX& current, const SpMat& M, double threshold = 0.6,
                           const std::vector<bool>& skip_previous = {}, const std::vector<bool>& skip_current = {});

/// Rotates each cluster of (relatively within `tolerance`) equal eigenvalues
/// so its vectors best align with `reference` columns. Keeps M-orthonormality.
void align_degenerate(const MatX& reference, const VecX& omega2, MatX& vectors, const SpMat& M,
                      double tolerance = 1e-8);

/// Physical mode labels: plate (m,n), disk (m,n) with n from 0, nanotube
/// RB/TM/AM/BB/SH with ascending numbering, in-plane sheet modes IPk.
/// Rigid modes are "rigid". With `align`, degenerate clusters of plate and
/// disk modes are first rotated onto the analytic shapes.
std::vector<std::string> classify_modes(const ShellModel& model, const DofMap& dofs, ModalStep& step,
                                        bool align = true);

/// Linearly interpolated zero crossings of omega^2(parameter).
std::vector<double> zero_crossings(const std::vector<double>& parameter, const std::vector<double>& omega2);

/// Zero crossings of every tracked label and of the lowest elastic omega^2
/// (label "lowest"), plus dips below `dip_ratio` of the first value that
/// later recover.
std::vector<Instability> detect_instability(const ModalResult& result, double dip_ratio = 1e-3);

struct ContinuationOptions {
    int num_modes = 10;
    double shift = 0.0;                ///< [1/ps^2]
    EigenOptions eigen;
    NewtonOptions newton;
    double mac_threshold = 0.6;
    /// Called after each recorded step (index into result.steps).
    std::function<void(const ModalResult&, int)> on_step;
};

/// Equilibrium + modal solve + tracking per step. Solver failures after
/// step 0 terminate the run with the partial result; failure at step 0 throws.
ModalResult run_continuation(const ShellModel& model, const LoadProgram& program, const ContinuationOptions& opt);

} // namespace shellmodal
