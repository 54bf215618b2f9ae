/** @file nurbs.hpp

    @brief Knot vectors, B-spline/NURBS basis evaluation with second
    derivatives, knot insertion and Gauss quadrature.
*/
#pragma once

#include "shellmodal/common.hpp"
#include "shellmodal/geometry.hpp"

#include <vector>

namespace shellmodal {

/// Knot vector of one parametric direction. Periodic directions use an
/// unclamped uniform vector whose last `degree` functions wrap onto the first.
struct KnotVector {
    int degree = 2;
    std::vector<double> knots;
    bool periodic = false;

    /// Number of distinct basis functions (after wrapping when periodic).
    int num_basis() const;
    /// Raw number of functions defined by the knot sequence.
    int raw_basis() const { return static_cast<int>(knots.size()) - degree - 1; }
    double first() const { return knots[static_cast<std::size_t>(degree)]; }
    double last() const { return knots[knots.size() - static_cast<std::size_t>(degree) - 1]; }
    /// Knot-span indices of the non-empty spans inside [first, last].
    std::vector<int> element_spans() const;
    /// Span containing u, with u == last() assigned to the final span.
    int find_span(double u) const;
    /// Basis functions and derivatives up to order `nd` at u in span `span`.
    /// Row k holds the k-th derivatives of the p+1 functions span-p .. span.
    MatX derivatives(int span, double u, int nd) const;
    /// Maps a raw function index to its distinct index.
    int wrap(int i) const { return periodic ? i % num_basis() : i; }

    void validate() const;
};

/// Open uniform knot vector on [a, b] with `elements` spans.
KnotVector open_uniform(int degree, int elements, double a = 0.0, double b = 1.0);

/// Periodic uniform knot vector with `elements` unit spans on [0, elements].
KnotVector periodic_uniform(int degree, int elements);

/// Greville abscissae of an open knot vector.
std::vector<double> greville(const KnotVector& kv);

/// Tensor-product NURBS surface. Control point (i, j) lives at i + nu * j.
struct NurbsPatch {
    KnotVector u, v;
    std::vector<Vec3> points;
    std::vector<double> weights;

    int nu() const { return u.num_basis(); }
    int nv() const { return v.num_basis(); }
    int index(int i, int j) const { return i + nu() * j; }
    int num_elements() const;
    /// Parametric box [u0, u1] x [v0, v1] of an element.
    std::array<double, 4> element_box(int element) const;

    Vec3 evaluate(double xi, double eta) const;
    void validate() const;
};

/// Local basis at one point of one element: control point indices into the
/// patch and rational shape functions with derivatives.
struct ElementBasis {
    std::vector<int> local;
    PointBasis basis;
};

/// Evaluates the rational basis at parametric point (xi, eta) of `element`.
/// Throws InvalidArgument if the point lies outside the element box.
ElementBasis basis_eval(const NurbsPatch& patch, int element, const Vec2& xi);

/// Inserts knot `t` once in direction `dir` (0 = u, 1 = v); geometry unchanged.
void insert_knot(NurbsPatch& patch, int dir, double t);

/// Uniformly subdivides every span of direction `dir` into `parts` pieces.
void refine_uniform(NurbsPatch& patch, int dir, int parts);

/// Gauss-Legendre points and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

} // namespace shellmodal
