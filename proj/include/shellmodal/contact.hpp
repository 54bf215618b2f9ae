/** @file contact.hpp

    @brief Adhesion to a rigid substrate through the Lennard-Jones
    half-space potential psi(r) = -Gamma [3/2 (h0/r)^3 - 1/2 (h0/r)^9].

    The gap r is measured vertically (along +z, the substrate normal) from
    the substrate surface to the sheet. The potential is integrated over the
    reference surface.
*/
#pragma once

#include "shellmodal/assembly.hpp"

namespace shellmodal {

/// Substrate surface z = height(x, y). Flat: z = z_s everywhere. Cavity: an
/// axisymmetric pit of the given depth below z_s inside radius R1, blended
/// to the flat rim over a fillet of width R2 with a C2 quintic step.
struct SubstrateProfile {
    enum class Kind { Flat, Cavity };
    Kind kind = Kind::Flat;
    double z_s = 0.0;        ///< rim height [nm]
    Vec2 center = Vec2::Zero();
    double R1 = 0.0;         ///< cavity radius [nm]
    double R2 = 0.0;         ///< fillet width [nm]
    double depth = 0.0;      ///< cavity depth [nm]

    template <typename T>
    T height(const T& x, const T& y) const {
        if (kind == Kind::Flat) {
            return T(z_s);
        }
        using std::sqrt;
        const T dx = x - center[0], dy = y - center[1];
        const T rho = sqrt(dx * dx + dy * dy + 1e-30);
        const double inner = R1 - R2;
        if (value_of(rho) <= inner) return T(z_s - depth);
        if (value_of(rho) >= R1) return T(z_s);
        const T t = (rho - inner) / R2;
        const T step = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        return (z_s - depth) + depth * step;
    }

    void validate() const;
};

struct AdhesionParams {
    double Gamma = 0.0;  ///< adhesion energy per area [N/m]
    double h0 = 0.34;    ///< equilibrium distance [nm]
    SubstrateProfile profile;

    void validate() const;
};

/// psi(r); throws PenetrationError if r <= 0.
double half_space_potential(double r, const AdhesionParams& p);
double half_space_potential_derivative(double r, const AdhesionParams& p);
double half_space_potential_second_derivative(double r, const AdhesionParams& p);
/// Gap at which psi'' changes sign: 2.5^(1/6) h0.
double potential_inflection(const AdhesionParams& p);

/// Minimal vertical gap over all quadrature points.
double minimum_gap(const ShellModel& model, const VecX& u, const AdhesionParams& p);

/// Integrated adhesion energy. Throws PenetrationError if some gap <= 0.05 h0.
double adhesion_energy(const ShellModel& model, const VecX& u, const AdhesionParams& p);

/// Adds the adhesion force (energy gradient) into f and its Hessian into *K.
void contact_force_and_stiffness(const ShellModel& model, const VecX& u, const AdhesionParams& p, VecX& f, SpMat* K);

} // namespace shellmodal
