/** @file material.cpp

    @brief Graphene constitutive law: presets, energies, stresses, tangents.
*/
#include "shellmodal/material.hpp"

#include <cmath>

namespace shellmodal {

MaterialParams MaterialParams::preset(MembraneSet membrane, BendingSet bending) {
    MaterialParams p;
    switch (membrane) {
    case MembraneSet::GGA:
        p.alpha_hat = 1.53;
        p.epsilon = 93.84;
        p.mu0 = 172.18;
        p.mu1 = 27.03;
        p.beta_hat = 5.16;
        p.eta0 = 94.65;
        p.eta1 = 4393.26;
        break;
    case MembraneSet::LDA:
        p.alpha_hat = 1.38;
        p.epsilon = 116.43;
        p.mu0 = 164.17;
        p.mu1 = 17.31;
        p.beta_hat = 6.22;
        p.eta0 = 86.9;
        p.eta1 = 3611.5;
        break;
    }
    switch (bending) {
    case BendingSet::FGBP: p.c_bend = 0.133; break;
    case BendingSet::SGBP: p.c_bend = 0.225; break;
    case BendingSet::QM: p.c_bend = 0.238; break;
    }
    p.rho0 = graphene_density();
    p.membrane_set = membrane;
    p.bending_set = bending;
    return p;
}

void MaterialParams::validate() const {
    const bool positive = alpha_hat > 0 && epsilon > 0 && mu0 > 0 && mu1 > 0 && beta_hat > 0 && eta0 > 0 &&
                          eta1 > 0 && c_bend > 0 && rho0 > 0;
    if (!positive) {
        throw InvalidArgument("material", "all material constants must be positive");
    }
    if (!(mu0 > mu1)) {
        throw InvalidArgument("material", "mu0 must exceed mu1 so that the initial shear modulus is positive");
    }
}

MembraneSet membrane_set_from_name(const std::string& name) {
    if (name == "GGA") return MembraneSet::GGA;
    if (name == "LDA") return MembraneSet::LDA;
    throw InvalidArgument("material", "unknown membrane preset '" + name + "' (expected GGA or LDA)");
}

BendingSet bending_set_from_name(const std::string& name) {
    if (name == "FGBP") return BendingSet::FGBP;
    if (name == "SGBP") return BendingSet::SGBP;
    if (name == "QM") return BendingSet::QM;
    throw InvalidArgument("material", "unknown bending preset '" + name + "' (expected FGBP, SGBP or QM)");
}

std::string to_string(MembraneSet s) { return s == MembraneSet::GGA ? "GGA" : "LDA"; }

std::string to_string(BendingSet s) {
    switch (s) {
    case BendingSet::FGBP: return "FGBP";
    case BendingSet::SGBP: return "SGBP";
    case BendingSet::QM: return "QM";
    }
    return "QM";
}

double membrane_energy(double J1, double J2, double J3, const MaterialParams& p) {
    const double mu = p.mu0 - p.mu1 * std::exp(p.beta_hat * J1);
    const double eta = p.eta0 - p.eta1 * J1 * J1;
    const double w_dil = p.epsilon * (1.0 - (1.0 + p.alpha_hat * J1) * std::exp(-p.alpha_hat * J1));
    return w_dil + 2.0 * mu * J2 + eta * J3;
}

double bending_energy(double kappa1, double kappa2, double J, const MaterialParams& p) {
    return J * 0.5 * p.c_bend * (kappa1 * kappa1 + kappa2 * kappa2);
}

EnergyDerivatives strain_energy_derivatives(const Mat2& a, const Mat2& b, const Mat2& lattice, const Mat2& B,
                                            const MaterialParams& p) {
    using D = Dual2<6>;
    const Sym2<D> ad{D::variable(a(0, 0), 0), D::variable(a(0, 1), 1), D::variable(a(1, 1), 2)};
    const Sym2<D> bd{D::variable(b(0, 0), 3), D::variable(b(0, 1), 4), D::variable(b(1, 1), 5)};
    const Sym2<double> Bs{B(0, 0), B(0, 1), B(1, 1)};
    const D w = strain_energy(ad, bd, lattice, Bs, p);
    EnergyDerivatives out;
    out.energy = w.v;
    out.gradient = w.g;
    out.hessian = w.h;
    return out;
}

namespace {

// Independent-component index of (alpha, beta) and the factor converting a
// derivative with respect to it into a derivative w.r.t. the symmetric pair.
int component(int a, int b) { return a == b ? (a == 0 ? 0 : 2) : 1; }
double sym_factor(int a, int b) { return a == b ? 1.0 : 0.5; }

EnergyDerivatives derivatives_at(const SurfacePointState& s, const MaterialParams& p) {
    return strain_energy_derivatives(s.a_ab, s.b_ab, s.lattice, s.B_ab, p);
}

} // namespace

StressState stress_and_moment(const SurfacePointState& state, const MaterialParams& p) {
    const EnergyDerivatives d = derivatives_at(state, p);
    StressState out;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const int i = component(a, b);
            out.tau_ab(a, b) = 2.0 * sym_factor(a, b) * d.gradient[i];
            out.M0_ab(a, b) = sym_factor(a, b) * d.gradient[3 + i];
        }
    }
    return out;
}

TangentTensors tangent_tensors(const SurfacePointState& state, const MaterialParams& p) {
    const EnergyDerivatives d = derivatives_at(state, p);
    TangentTensors t;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int c = 0; c < 2; ++c) {
                for (int e = 0; e < 2; ++e) {
                    const int i = component(a, b), j = component(c, e);
                    const double s = sym_factor(a, b) * sym_factor(c, e);
                    t.c[a][b](c, e) = 4.0 * s * d.hessian(i, j);
                    t.d[a][b](c, e) = 2.0 * s * d.hessian(i, 3 + j);
                    t.e[a][b](c, e) = 2.0 * s * d.hessian(3 + i, j);
                    t.f[a][b](c, e) = s * d.hessian(3 + i, 3 + j);
                }
            }
        }
    }
    return t;
}

VanishingShear vanishing_shear_strain(const MaterialParams& p) {
    if (!(p.mu1 > 0.0) || !(p.mu0 > 0.0) || !(p.beta_hat > 0.0)) {
        throw InvalidArgument("material", "vanishing shear strain requires mu0, mu1, beta > 0");
    }
    VanishingShear v;
    v.strain = std::log(p.mu0 / p.mu1) / p.beta_hat;
    v.area_stretch = std::exp(v.strain);
    return v;
}

double graphene_density() { return 0.76106; }

double graphene_density_from_lattice(double atom_mass_kg, double bond_length_nm) {
    const double a = bond_length_nm * 1e-9;
    const double area = 1.5 * std::sqrt(3.0) * a * a;
    return 2.0 * atom_mass_kg / area;
}

double dilatation_tension(double J, const MaterialParams& p) {
    const double lnJ = std::log(J);
    return p.epsilon * p.alpha_hat * p.alpha_hat * lnJ * std::exp(-(1.0 + p.alpha_hat) * lnJ);
}

double uniaxial_lateral_stretch(double lambda1, double theta, const MaterialParams& p) {
    // Minimize W over the lateral stretch with the principal axes fixed.
    const double c = std::cos(theta), s = std::sin(theta);
    const Mat2 lattice = Mat2::Identity();
    const Sym2<double> flat{0.0, 0.0, 0.0};
    double lambda2 = 1.0;
    for (int it = 0; it < 60; ++it) {
        using D = Dual2<1>;
        const D l2 = D::variable(lambda2, 0);
        const D l1sq = D(lambda1 * lambda1);
        const D l2sq = l2 * l2;
        // C = R diag(l1^2, l2^2) R^T with R the rotation by theta.
        const Sym2<D> C{c * c * l1sq + s * s * l2sq, c * s * (l1sq - l2sq), s * s * l1sq + c * c * l2sq};
        const D w = strain_energy(C, Sym2<D>{}, lattice, flat, p);
        const double step = w.g[0] / w.h(0, 0);
        lambda2 -= step;
        if (std::abs(step) < 1e-15 * lambda2) {
            return lambda2;
        }
    }
    throw ConvergenceError("material", "lateral stretch iteration did not converge");
}

} // namespace shellmodal
