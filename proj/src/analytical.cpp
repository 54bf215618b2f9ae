/** @file analytical.cpp

    @brief Bessel functions, characteristic roots and plate frequencies.
*/
#include "shellmodal/analytical.hpp"

#include <cmath>

namespace shellmodal {

void PlateSpec::validate() const {
    if (!(a > 0.0) || !(c_bend > 0.0) || !(rho > 0.0) || (shape == PlateShape::Rectangle && !(b > 0.0))) {
        throw InvalidArgument("analytical", "plate dimensions, bending modulus and density must be positive");
    }
    if (shape == PlateShape::Rectangle && boundary != Boundary::SimplySupported) {
        throw InvalidArgument("analytical", "only simply supported rectangles have a closed form");
    }
    if (shape == PlateShape::Circle && boundary == Boundary::Free) {
        throw InvalidArgument("analytical", "circular plates must be clamped or simply supported");
    }
}

double bessel_j(int m, double x) {
    if (m < 0) throw InvalidArgument("analytical", "Bessel order must be non-negative");
    if (x < 0.0) return (m % 2 == 0 ? 1.0 : -1.0) * bessel_j(m, -x);
    if (x == 0.0) return m == 0 ? 1.0 : 0.0;
    if (x < 1e-3) {
        // Leading series terms are exact to double precision here.
        double t = 1.0;
        for (int k = 1; k <= m; ++k) t *= 0.5 * x / k;
        return t * (1.0 - 0.25 * x * x / (m + 1));
    }
    // Miller backward recurrence normalized by J0 + 2 sum J_2k = 1.
    const double top = std::max(static_cast<double>(m), x);
    int N = static_cast<int>(top + 40.0 + 4.0 * std::sqrt(top));
    N += N % 2;
    double jp1 = 0.0, j = 1e-300, result = 0.0, sum = 0.0;
    if (N == m) result = j;
    sum += 2.0 * j;  // N is even
    for (int k = N; k >= 1; --k) {
        const double jm1 = 2.0 * k / x * j - jp1;
        jp1 = j;
        j = jm1;  // J_{k-1}
        if (k - 1 == m) result = j;
        if (k - 1 > 0 && (k - 1) % 2 == 0) sum += 2.0 * j;
        if (std::abs(j) > 1e250) {
            j *= 1e-250;
            jp1 *= 1e-250;
            result *= 1e-250;
            sum *= 1e-250;
        }
    }
    sum += j;
    return result / sum;
}

double bessel_i(int m, double x) {
    if (m < 0) throw InvalidArgument("analytical", "Bessel order must be non-negative");
    if (x < 0.0) return (m % 2 == 0 ? 1.0 : -1.0) * bessel_i(m, -x);
    double t = 1.0;
    for (int k = 1; k <= m; ++k) t *= 0.5 * x / k;
    double s = t;
    const double q = 0.25 * x * x;
    for (int k = 0; k < 1000; ++k) {
        t *= q / ((k + 1.0) * (k + 1.0 + m));
        s += t;
        if (t < 1e-17 * s) break;
    }
    return s;
}

double rect_ss_frequency(int m, int n, const PlateSpec& spec) {
    if (m < 1 || n < 1) throw InvalidArgument("analytical", "mode indices must be >= 1");
    spec.validate();
    return pi * pi * (m * m / (spec.a * spec.a) + n * n / (spec.b * spec.b)) * std::sqrt(spec.c_bend / spec.rho);
}

PrestressedFrequency rect_prestressed_frequency(int m, int n, const PlateSpec& spec, double Nx, double Ny) {
    const double w0 = rect_ss_frequency(m, n, spec);
    const double kx = pi * m / spec.a, ky = pi * n / spec.b;
    PrestressedFrequency out;
    out.omega2 = w0 * w0 + (Nx * kx * kx + Ny * ky * ky) / spec.rho;
    out.unstable = out.omega2 < 0.0;
    out.omega = std::copysign(std::sqrt(std::abs(out.omega2)), out.omega2);
    return out;
}

double circular_characteristic(int m, double gamma, Boundary boundary) {
    const double jm = bessel_j(m, gamma), jm1 = bessel_j(m + 1, gamma);
    const double im = bessel_i(m, gamma), im1 = bessel_i(m + 1, gamma);
    const double rhs = boundary == Boundary::Clamped ? 0.0 : 2.0 * gamma;
    // Scale by I_m to keep magnitudes moderate at large gamma.
    return (jm1 * im + im1 * jm - rhs * jm * im) / im;
}

std::vector<double> circular_char_roots(int m, int n_max, Boundary boundary) {
    if (m < 0 || n_max < 1) throw InvalidArgument("analytical", "need m >= 0 and n_max >= 1");
    if (boundary == Boundary::Free) throw InvalidArgument("analytical", "boundary must be clamped or simply supported");
    std::vector<double> roots;
    const double step = 0.02;
    double x0 = 1e-3, f0 = circular_characteristic(m, x0, boundary);
    while (static_cast<int>(roots.size()) < n_max) {
        const double x1 = x0 + step;
        const double f1 = circular_characteristic(m, x1, boundary);
        if (x1 > 200.0 + 4.0 * n_max) throw ConvergenceError("analytical", "root bracketing failed");
        if (f0 == 0.0) {
            roots.push_back(x0);
        } else if (f0 * f1 < 0.0) {
            double a = x0, b = x1, fa = f0;
            for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
                const double c = 0.5 * (a + b);
                const double fc = circular_characteristic(m, c, boundary);
                if (fc == 0.0) {
                    a = b = c;
                    break;
                }
                if (fa * fc < 0.0) {
                    b = c;
                } else {
                    a = c;
                    fa = fc;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

double circular_frequency(double gamma, const PlateSpec& spec) {
    if (!(gamma > 0.0)) throw InvalidArgument("analytical", "gamma must be positive");
    spec.validate();
    return gamma * gamma / (spec.a * spec.a) * std::sqrt(spec.c_bend / spec.rho);
}

double rect_mode_shape(int m, int n, double a, double b, double x, double y) {
    return std::sin(m * pi * x / a) * std::sin(n * pi * y / b);
}

double circular_radial_shape(int m, double gamma, double a, double r) {
    return bessel_i(m, gamma) * bessel_j(m, gamma * r / a) - bessel_j(m, gamma) * bessel_i(m, gamma * r / a);
}

double circular_radial_shape_derivative(int m, double gamma, double a, double r) {
    const double x = gamma * r / a;
    const double dj = m == 0 ? -bessel_j(1, x) : 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x));
    const double di = m == 0 ? bessel_i(1, x) : 0.5 * (bessel_i(m - 1, x) + bessel_i(m + 1, x));
    return gamma / a * (bessel_i(m, gamma) * dj - bessel_j(m, gamma) * di);
}

std::vector<double> mode_shape_samples(const PlateSpec& spec, int m, int n, const std::vector<Vec2>& points,
                                       double phase) {
    spec.validate();
    std::vector<double> out;
    out.reserve(points.size());
    if (spec.shape == PlateShape::Rectangle) {
        for (const Vec2& p : points) out.push_back(rect_mode_shape(m, n, spec.a, spec.b, p[0], p[1]));
        return out;
    }
    const double gamma = circular_char_roots(m, n + 1, spec.boundary)[static_cast<std::size_t>(n)];
    for (const Vec2& p : points) {
        const double r = std::min(p.norm(), spec.a);
        out.push_back(circular_radial_shape(m, gamma, spec.a, r) * std::cos(m * std::atan2(p[1], p[0]) + phase));
    }
    return out;
}

} // namespace shellmodal
