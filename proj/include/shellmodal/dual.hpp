/** @file dual.hpp

    @brief Second-order forward-mode dual numbers.

    `Dual2<N>` carries a value, its gradient and its (symmetric) Hessian with
    respect to N seed variables. Constitutive laws are written once as
    templates over the scalar type and instantiated with `double` for energy
    evaluation and with `Dual2<N>` for exact stresses and tangents.
*/
#pragma once

#include <Eigen/Core>

#include <cmath>

namespace shellmodal {

template <int N>
struct Dual2 {
    using Grad = Eigen::Matrix<double, N, 1>;
    using Hess = Eigen::Matrix<double, N, N>;

    double v = 0.0;
    Grad g = Grad::Zero();
    Hess h = Hess::Zero();

    Dual2() = default;
    Dual2(double value) : v(value) {} // NOLINT: implicit constant promotion is intended

    static Dual2 variable(double value, int index) {
        Dual2 d(value);
        d.g[index] = 1.0;
        return d;
    }

    Dual2& operator+=(const Dual2& o) {
        v += o.v;
        g += o.g;
        h += o.h;
        return *this;
    }
    Dual2& operator-=(const Dual2& o) {
        v -= o.v;
        g -= o.g;
        h -= o.h;
        return *this;
    }
    Dual2& operator*=(const Dual2& o) {
        h = v * o.h + o.v * h + g * o.g.transpose() + o.g * g.transpose();
        g = v * o.g + o.v * g;
        v *= o.v;
        return *this;
    }
    Dual2& operator*=(double s) {
        v *= s;
        g *= s;
        h *= s;
        return *this;
    }
};

/// Applies a scalar function with known first and second derivatives.
template <int N>
Dual2<N> chain(const Dual2<N>& x, double f, double df, double ddf) {
    Dual2<N> r;
    r.v = f;
    r.g = df * x.g;
    r.h = df * x.h + ddf * (x.g * x.g.transpose());
    return r;
}

template <int N> Dual2<N> operator+(Dual2<N> a, const Dual2<N>& b) { return a += b; }
template <int N> Dual2<N> operator-(Dual2<N> a, const Dual2<N>& b) { return a -= b; }
template <int N> Dual2<N> operator*(Dual2<N> a, const Dual2<N>& b) { return a *= b; }
template <int N> Dual2<N> operator+(Dual2<N> a, double b) { a.v += b; return a; }
template <int N> Dual2<N> operator+(double b, Dual2<N> a) { a.v += b; return a; }
template <int N> Dual2<N> operator-(Dual2<N> a, double b) { a.v -= b; return a; }
template <int N> Dual2<N> operator-(double b, const Dual2<N>& a) {
    Dual2<N> r;
    r.v = b - a.v;
    r.g = -a.g;
    r.h = -a.h;
    return r;
}
template <int N> Dual2<N> operator-(const Dual2<N>& a) { return 0.0 - a; }
template <int N> Dual2<N> operator*(Dual2<N> a, double s) { return a *= s; }
template <int N> Dual2<N> operator*(double s, Dual2<N> a) { return a *= s; }
template <int N> Dual2<N> operator/(Dual2<N> a, double s) { return a *= (1.0 / s); }

template <int N>
Dual2<N> inverse(const Dual2<N>& x) {
    const double iv = 1.0 / x.v;
    return chain(x, iv, -iv * iv, 2.0 * iv * iv * iv);
}
template <int N> Dual2<N> operator/(const Dual2<N>& a, const Dual2<N>& b) { return a * inverse(b); }
template <int N> Dual2<N> operator/(double a, const Dual2<N>& b) { return a * inverse(b); }

template <int N>
Dual2<N> exp(const Dual2<N>& x) {
    const double e = std::exp(x.v);
    return chain(x, e, e, e);
}
template <int N>
Dual2<N> log(const Dual2<N>& x) {
    return chain(x, std::log(x.v), 1.0 / x.v, -1.0 / (x.v * x.v));
}
template <int N>
Dual2<N> sqrt(const Dual2<N>& x) {
    const double s = std::sqrt(x.v);
    return chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}

/// Plain value regardless of scalar type.
inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual2<N>& x) { return x.v; }

} // namespace shellmodal
