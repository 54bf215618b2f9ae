/** @file material.hpp

    @brief Anisotropic hyperelastic graphene law: logarithmic-strain membrane
    energy with six-fold lattice anisotropy plus Canham bending.

    The strain energy per reference area is
        W = eps [1 - (1 + alpha ea) exp(-alpha ea)] + 2 mu(ea) J2 + eta(ea) J3
          + J c/2 (kappa1^2 + kappa2^2),
    mu(ea) = mu0 - mu1 exp(beta ea), eta(ea) = eta0 - eta1 ea^2, ea = J1.
*/
#pragma once

#include "shellmodal/common.hpp"
#include "shellmodal/dual.hpp"
#include "shellmodal/geometry.hpp"

#include <string>

namespace shellmodal {

enum class MembraneSet { GGA, LDA };
enum class BendingSet { FGBP, SGBP, QM };

struct MaterialParams {
    double alpha_hat = 1.53;
    double epsilon = 93.84;   ///< N/m
    double mu0 = 172.18;      ///< N/m
    double mu1 = 27.03;       ///< N/m
    double beta_hat = 5.16;
    double eta0 = 94.65;      ///< N/m
    double eta1 = 4393.26;    ///< N/m
    double c_bend = 0.238;    ///< nN nm
    double rho0 = 0.76106;    ///< (nN ps^2/nm) / nm^2
    MembraneSet membrane_set = MembraneSet::GGA;
    BendingSet bending_set = BendingSet::QM;

    static MaterialParams preset(MembraneSet membrane, BendingSet bending);
    /// Throws InvalidArgument unless all moduli are positive and mu0 > mu1.
    void validate() const;
};

MembraneSet membrane_set_from_name(const std::string& name);
BendingSet bending_set_from_name(const std::string& name);
std::string to_string(MembraneSet s);
std::string to_string(BendingSet s);

/// Kirchhoff stress tau^{ab} = 2 dW/da_ab and moment M0^{ab} = dW/db_ab.
struct StressState {
    Mat2 tau_ab = Mat2::Zero();
    Mat2 M0_ab = Mat2::Zero();
};

/// Fourth-order tangents, index [a][b](c, d):
/// c = 4 d2W/da da, d = 2 d2W/da db, e = 2 d2W/db da, f = d2W/db db.
struct TangentTensors {
    using Tensor4 = std::array<std::array<Mat2, 2>, 2>;
    Tensor4 c{}, d{}, e{}, f{};
};

double membrane_energy(double J1, double J2, double J3, const MaterialParams& p);
double bending_energy(double kappa1, double kappa2, double J, const MaterialParams& p);

StressState stress_and_moment(const SurfacePointState& state, const MaterialParams& p);
TangentTensors tangent_tensors(const SurfacePointState& state, const MaterialParams& p);

struct VanishingShear {
    double strain = 0.0;       ///< ea* = ln(mu0/mu1)/beta
    double area_stretch = 1.0; ///< J* = exp(ea*)
};

/// Area strain at which mu(ea) = 0 under pure dilatation.
VanishingShear vanishing_shear_strain(const MaterialParams& p);

/// Reference areal mass density of graphene [mass units / nm^2]; 0.76106e-6 kg/m^2.
double graphene_density();

/// 2 m / A_RAE with A_RAE = 3 sqrt(3)/2 a^2, returned in kg/m^2.
double graphene_density_from_lattice(double atom_mass_kg, double bond_length_nm);

/// Cauchy membrane tension under pure dilatation J: dW_dil/dJ.
double dilatation_tension(double J, const MaterialParams& p);

/// Lateral stretch giving zero lateral stress for a uniaxial stretch
/// `lambda1` applied at angle `theta` from the armchair direction.
double uniaxial_lateral_stretch(double lambda1, double theta, const MaterialParams& p);

/// Strain energy per reference area as a function of the current metric and
/// curvature components. `lattice` is lattice_map() of the reference point,
/// `B` the reference curvature; bending is measured from it so that curved
/// references (nanotubes) are stress free.
template <typename T>
T strain_energy(const Sym2<T>& a, const Sym2<T>& b, const Mat2& lattice, const Sym2<double>& B,
                const MaterialParams& p) {
    using std::exp;
    using std::sqrt;
    T C11, C12, C22, J1, J2, J3;
    cauchy_green_in_lattice(lattice, a, C11, C12, C22);
    log_invariants_from_cauchy_green(C11, C12, C22, J1, J2, J3);

    const T mu = p.mu0 - p.mu1 * exp(p.beta_hat * J1);
    const T eta = p.eta0 - p.eta1 * J1 * J1;
    const T w_dil = p.epsilon * (1.0 - (1.0 + p.alpha_hat * J1) * exp(-p.alpha_hat * J1));
    const T w_dev = 2.0 * mu * J2 + eta * J3;

    // kappa1^2 + kappa2^2 = tr((a^-1 k)^2), k = b - B.
    const T det_a = a.det();
    const T k11 = b.c11 - B.c11, k12 = b.c12 - B.c12, k22 = b.c22 - B.c22;
    const T i11 = a.c22 / det_a, i12 = -a.c12 / det_a, i22 = a.c11 / det_a;
    const T m11 = i11 * k11 + i12 * k12;  // mixed k^1_1
    const T m12 = i11 * k12 + i12 * k22;  // k^1_2
    const T m21 = i12 * k11 + i22 * k12;  // k^2_1
    const T m22 = i12 * k12 + i22 * k22;  // k^2_2
    const T kk = m11 * m11 + 2.0 * m12 * m21 + m22 * m22;
    const T J = sqrt(C11 * C22 - C12 * C12);
    const T w_b = J * (0.5 * p.c_bend) * kk;
    return w_dil + w_dev + w_b;
}

/// Energy, gradient and Hessian with respect to (a11, a12, a22, b11, b12, b22),
/// off-diagonal components counted once.
struct EnergyDerivatives {
    double energy = 0.0;
    Eigen::Matrix<double, 6, 1> gradient;
    Eigen::Matrix<double, 6, 6> hessian;
};

EnergyDerivatives strain_energy_derivatives(const Mat2& a, const Mat2& b, const Mat2& lattice, const Mat2& B,
                                            const MaterialParams& p);

} // namespace shellmodal
