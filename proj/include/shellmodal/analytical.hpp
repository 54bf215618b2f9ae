/** @file analytical.hpp

    @brief Closed-form Canham plate frequencies: rectangular simply
    supported plates with optional membrane prestress, and circular plates
    (clamped or simply supported) through their Bessel characteristic
    equations.

    The rectangular formula uses the full edge lengths a, b:
        omega = pi^2 (m^2/a^2 + n^2/b^2) sqrt(c/rho).
    Circular plates: omega = gamma^2 / a^2 sqrt(c/rho) with gamma a root of
        clamped:          J_{m+1}/J_m + I_{m+1}/I_m = 0
        simply supported: J_{m+1}/J_m + I_{m+1}/I_m = 2 gamma
*/
#pragma once

#include "shellmodal/common.hpp"
#include "shellmodal/model.hpp"

#include <vector>

namespace shellmodal {

enum class PlateShape { Rectangle, Circle };

struct PlateSpec {
    PlateShape shape = PlateShape::Rectangle;
    double a = 5.0;  ///< edge length or radius [nm]
    double b = 5.0;  ///< second edge length [nm]
    Boundary boundary = Boundary::SimplySupported;
    double c_bend = 0.238;
    double rho = 0.76106;

    void validate() const;
};

/// Bessel function of the first kind J_m(x), m >= 0.
double bessel_j(int m, double x);
/// Modified Bessel function of the first kind I_m(x), m >= 0, x >= 0.
double bessel_i(int m, double x);

/// omega-hat_(m,n) [rad/ps] for a simply supported rectangle.
double rect_ss_frequency(int m, int n, const PlateSpec& spec);

struct PrestressedFrequency {
    double omega2 = 0.0;   ///< [1/ps^2]; negative means unstable
    double omega = 0.0;    ///< sign(omega2) sqrt|omega2|
    bool unstable = false;
};

/// omega^2 = omega-hat^2 + (1/rho) [Nx (pi m/a)^2 + Ny (pi n/b)^2], N in N/m.
PrestressedFrequency rect_prestressed_frequency(int m, int n, const PlateSpec& spec, double Nx, double Ny);

/// Left side minus right side of the characteristic equation, cleared of
/// denominators: J_{m+1} I_m + I_{m+1} J_m - rhs J_m I_m.
double circular_characteristic(int m, double gamma, Boundary boundary);

/// First `n_max` positive roots for circumferential order m, ascending.
std::vector<double> circular_char_roots(int m, int n_max, Boundary boundary);

/// omega-hat = gamma^2 / a^2 sqrt(c / rho) [rad/ps].
double circular_frequency(double gamma, const PlateSpec& spec);

/// Converts an angular frequency [rad/ps] to THz.
inline double to_thz(double omega) { return omega / (2.0 * pi); }

/// sin(m pi x / a) sin(n pi y / b) on [0, a] x [0, b].
double rect_mode_shape(int m, int n, double a, double b, double x, double y);

/// R(r) = I_m(gamma) J_m(gamma r/a) - J_m(gamma) I_m(gamma r/a).
double circular_radial_shape(int m, double gamma, double a, double r);
/// dR/dr.
double circular_radial_shape_derivative(int m, double gamma, double a, double r);

/// Samples an analytic mode shape at points (x, y): rectangle modes on
/// [0, a] x [0, b]; circle modes R(r) cos(m phi + phase) about the origin.
std::vector<double> mode_shape_samples(const PlateSpec& spec, int m, int n, const std::vector<Vec2>& points,
                                       double phase = 0.0);

} // namespace shellmodal
