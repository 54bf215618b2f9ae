/** @file nurbs.cpp

    @brief B-spline/NURBS basis functions, knot insertion, Gauss rules.
*/
#include "shellmodal/nurbs.hpp"

#include <algorithm>
#include <cmath>

namespace shellmodal {

int KnotVector::num_basis() const { return periodic ? raw_basis() - degree : raw_basis(); }

std::vector<int> KnotVector::element_spans() const {
    std::vector<int> spans;
    const int last_span = static_cast<int>(knots.size()) - degree - 2;
    for (int k = degree; k <= last_span; ++k) {
        if (knots[static_cast<std::size_t>(k + 1)] > knots[static_cast<std::size_t>(k)]) {
            spans.push_back(k);
        }
    }
    return spans;
}

int KnotVector::find_span(double u) const {
    const int n = static_cast<int>(knots.size()) - degree - 2;
    if (u >= knots[static_cast<std::size_t>(n + 1)]) {
        // Last non-empty span.
        int k = n;
        while (k > degree && knots[static_cast<std::size_t>(k)] == knots[static_cast<std::size_t>(k + 1)]) {
            --k;
        }
        return k;
    }
    if (u <= knots[static_cast<std::size_t>(degree)]) {
        int k = degree;
        while (k < n && knots[static_cast<std::size_t>(k)] == knots[static_cast<std::size_t>(k + 1)]) {
            ++k;
        }
        return k;
    }
    const auto it = std::upper_bound(knots.begin() + degree, knots.begin() + n + 1, u);
    return static_cast<int>(it - knots.begin()) - 1;
}

MatX KnotVector::derivatives(int span, double u, int nd) const {
    const int p = degree;
    const auto U = [&](int i) { return knots[static_cast<std::size_t>(i)]; };
    MatX ndu(p + 1, p + 1);
    std::vector<double> left(static_cast<std::size_t>(p + 1)), right(static_cast<std::size_t>(p + 1));
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[static_cast<std::size_t>(j)] = u - U(span + 1 - j);
        right[static_cast<std::size_t>(j)] = U(span + j) - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[static_cast<std::size_t>(r + 1)] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        ndu(j, j) = saved;
    }
    MatX ders = MatX::Zero(nd + 1, p + 1);
    for (int j = 0; j <= p; ++j) {
        ders(0, j) = ndu(j, p);
    }
    MatX a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= std::min(nd, p); ++k) {
            double d = 0.0;
            const int rk = r - k, pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            ders(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= std::min(nd, p); ++k) {
        ders.row(k) *= factor;
        factor *= (p - k);
    }
    return ders;
}

void KnotVector::validate() const {
    if (degree < 1) {
        throw InvalidArgument("discretization", "degree must be at least 1");
    }
    if (static_cast<int>(knots.size()) < 2 * degree + 2) {
        throw InvalidArgument("discretization", "knot vector too short for its degree");
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (knots[i] < knots[i - 1]) {
            throw InvalidArgument("discretization", "knot vector must be non-decreasing");
        }
    }
    if (!periodic) {
        for (int i = 1; i <= degree; ++i) {
            if (knots[static_cast<std::size_t>(i)] != knots[0] ||
                knots[knots.size() - 1 - static_cast<std::size_t>(i)] != knots.back()) {
                throw InvalidArgument("discretization", "non-periodic knot vector must be open");
            }
        }
    }
}

KnotVector open_uniform(int degree, int elements, double a, double b) {
    if (degree < 1 || elements < 1 || !(b > a)) {
        throw InvalidArgument("discretization", "open_uniform needs degree >= 1, elements >= 1, b > a");
    }
    KnotVector kv;
    kv.degree = degree;
    for (int i = 0; i < degree; ++i) {
        kv.knots.push_back(a);
    }
    for (int e = 0; e <= elements; ++e) {
        kv.knots.push_back(e == elements ? b : a + (b - a) * e / elements);
    }
    for (int i = 0; i < degree; ++i) {
        kv.knots.push_back(b);
    }
    return kv;
}

KnotVector periodic_uniform(int degree, int elements) {
    if (degree < 1 || elements < degree + 1) {
        throw InvalidArgument("discretization", "periodic direction needs more elements than its degree");
    }
    KnotVector kv;
    kv.degree = degree;
    kv.periodic = true;
    for (int k = 0; k <= elements + 2 * degree; ++k) {
        kv.knots.push_back(static_cast<double>(k - degree));
    }
    return kv;
}

std::vector<double> greville(const KnotVector& kv) {
    std::vector<double> g;
    for (int i = 0; i < kv.raw_basis(); ++i) {
        double s = 0.0;
        for (int k = 1; k <= kv.degree; ++k) {
            s += kv.knots[static_cast<std::size_t>(i + k)];
        }
        g.push_back(s / kv.degree);
    }
    return g;
}

int NurbsPatch::num_elements() const {
    return static_cast<int>(u.element_spans().size() * v.element_spans().size());
}

std::array<double, 4> NurbsPatch::element_box(int element) const {
    const auto su = u.element_spans();
    const auto sv = v.element_spans();
    const int ne_u = static_cast<int>(su.size());
    if (element < 0 || element >= num_elements()) {
        throw InvalidArgument("discretization", "element index out of range");
    }
    const int ku = su[static_cast<std::size_t>(element % ne_u)];
    const int kv = sv[static_cast<std::size_t>(element / ne_u)];
    return {u.knots[static_cast<std::size_t>(ku)], u.knots[static_cast<std::size_t>(ku + 1)],
            v.knots[static_cast<std::size_t>(kv)], v.knots[static_cast<std::size_t>(kv + 1)]};
}

void NurbsPatch::validate() const {
    u.validate();
    v.validate();
    const std::size_t n = static_cast<std::size_t>(nu() * nv());
    if (points.size() != n || weights.size() != n) {
        throw InvalidArgument("discretization", "control net size does not match knot vectors");
    }
    for (double w : weights) {
        if (!(w > 0.0)) {
            throw InvalidArgument("discretization", "weights must be positive");
        }
    }
}

namespace {

ElementBasis basis_at_spans(const NurbsPatch& patch, int ku, int kv, double xi, double eta) {
    const int p = patch.u.degree, q = patch.v.degree;
    const MatX du = patch.u.derivatives(ku, xi, 2);
    const MatX dv = patch.v.derivatives(kv, eta, 2);
    const int n = (p + 1) * (q + 1);
    ElementBasis eb;
    eb.local.resize(static_cast<std::size_t>(n));
    VecX N(n);
    MatX dN(n, 2), ddN(n, 3);
    double W = 0.0;
    Vec2 Wd = Vec2::Zero();
    Eigen::Vector3d Wdd = Eigen::Vector3d::Zero();
    int c = 0;
    for (int b = 0; b <= q; ++b) {
        for (int a = 0; a <= p; ++a, ++c) {
            const int iu = patch.u.wrap(ku - p + a);
            const int iv = patch.v.wrap(kv - q + b);
            const int loc = patch.index(iu, iv);
            eb.local[static_cast<std::size_t>(c)] = loc;
            const double w = patch.weights[static_cast<std::size_t>(loc)];
            N[c] = du(0, a) * dv(0, b) * w;
            dN(c, 0) = du(1, a) * dv(0, b) * w;
            dN(c, 1) = du(0, a) * dv(1, b) * w;
            ddN(c, 0) = du(2, a) * dv(0, b) * w;
            ddN(c, 1) = du(1, a) * dv(1, b) * w;
            ddN(c, 2) = du(0, a) * dv(2, b) * w;
            W += N[c];
            Wd += dN.row(c).transpose();
            Wdd += ddN.row(c).transpose();
        }
    }
    // Quotient rule for R = N w / W.
    PointBasis& pb = eb.basis;
    pb.N = N / W;
    pb.dN.resize(n, 2);
    pb.ddN.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        const double R = pb.N[i];
        const double R1 = (dN(i, 0) - R * Wd[0]) / W;
        const double R2 = (dN(i, 1) - R * Wd[1]) / W;
        pb.dN(i, 0) = R1;
        pb.dN(i, 1) = R2;
        pb.ddN(i, 0) = (ddN(i, 0) - 2.0 * R1 * Wd[0] - R * Wdd[0]) / W;
        pb.ddN(i, 1) = (ddN(i, 1) - R1 * Wd[1] - R2 * Wd[0] - R * Wdd[1]) / W;
        pb.ddN(i, 2) = (ddN(i, 2) - 2.0 * R2 * Wd[1] - R * Wdd[2]) / W;
    }
    return eb;
}

} // namespace

ElementBasis basis_eval(const NurbsPatch& patch, int element, const Vec2& xi) {
    const auto box = patch.element_box(element);
    const double tol = 1e-12 * std::max({1.0, std::abs(box[1]), std::abs(box[3])});
    if (xi[0] < box[0] - tol || xi[0] > box[1] + tol || xi[1] < box[2] - tol || xi[1] > box[3] + tol) {
        throw InvalidArgument("discretization", "evaluation point outside the element");
    }
    const auto su = patch.u.element_spans();
    const auto sv = patch.v.element_spans();
    const int ne_u = static_cast<int>(su.size());
    return basis_at_spans(patch, su[static_cast<std::size_t>(element % ne_u)],
                          sv[static_cast<std::size_t>(element / ne_u)], std::clamp(xi[0], box[0], box[1]),
                          std::clamp(xi[1], box[2], box[3]));
}

Vec3 NurbsPatch::evaluate(double xi, double eta) const {
    const int ku = u.find_span(xi);
    const int kv = v.find_span(eta);
    const ElementBasis eb = basis_at_spans(*this, ku, kv, xi, eta);
    Vec3 x = Vec3::Zero();
    for (std::size_t i = 0; i < eb.local.size(); ++i) {
        x += eb.basis.N[static_cast<Eigen::Index>(i)] * points[static_cast<std::size_t>(eb.local[i])];
    }
    return x;
}

void insert_knot(NurbsPatch& patch, int dir, double t) {
    KnotVector& kv = dir == 0 ? patch.u : patch.v;
    if (kv.periodic) {
        throw InvalidArgument("discretization", "knot insertion in a periodic direction is not supported");
    }
    if (!(t > kv.first() && t < kv.last())) {
        throw InvalidArgument("discretization", "inserted knot must lie strictly inside the parameter range");
    }
    const int p = kv.degree;
    const int k = kv.find_span(t);
    int s = 0;
    for (double knot : kv.knots) {
        s += knot == t ? 1 : 0;
    }
    if (s >= p) {
        throw InvalidArgument("discretization", "knot multiplicity would exceed degree");
    }
    const int nu = patch.nu(), nv = patch.nv();
    const int n_old = dir == 0 ? nu : nv;
    const int n_rows = dir == 0 ? nv : nu;
    const int nu_new = dir == 0 ? nu + 1 : nu;
    std::vector<Vec3> pts(static_cast<std::size_t>((nu + (dir == 0)) * (nv + (dir == 1))));
    std::vector<double> wts(pts.size());
    for (int r = 0; r < n_rows; ++r) {
        auto old_at = [&](int i) { return dir == 0 ? i + nu * r : r + nu * i; };
        auto new_at = [&](int i) { return dir == 0 ? i + nu_new * r : r + nu_new * i; };
        for (int i = 0; i <= n_old; ++i) {
            Eigen::Vector4d q;
            auto hom = [&](int j) {
                const double w = patch.weights[static_cast<std::size_t>(old_at(j))];
                Eigen::Vector4d h;
                h << w * patch.points[static_cast<std::size_t>(old_at(j))], w;
                return h;
            };
            if (i <= k - p) {
                q = hom(i);
            } else if (i <= k - s) {
                const double ui = kv.knots[static_cast<std::size_t>(i)];
                const double alpha = (t - ui) / (kv.knots[static_cast<std::size_t>(i + p)] - ui);
                q = alpha * hom(i) + (1.0 - alpha) * hom(i - 1);
            } else {
                q = hom(i - 1);
            }
            wts[static_cast<std::size_t>(new_at(i))] = q[3];
            pts[static_cast<std::size_t>(new_at(i))] = q.head<3>() / q[3];
        }
    }
    kv.knots.insert(kv.knots.begin() + k + 1, t);
    patch.points = std::move(pts);
    patch.weights = std::move(wts);
}

void refine_uniform(NurbsPatch& patch, int dir, int parts) {
    if (parts < 1) {
        throw InvalidArgument("discretization", "refinement factor must be >= 1");
    }
    const KnotVector& kv = dir == 0 ? patch.u : patch.v;
    std::vector<double> new_knots;
    for (int k : kv.element_spans()) {
        const double a = kv.knots[static_cast<std::size_t>(k)], b = kv.knots[static_cast<std::size_t>(k + 1)];
        for (int j = 1; j < parts; ++j) {
            new_knots.push_back(a + (b - a) * j / parts);
        }
    }
    for (double t : new_knots) {
        insert_knot(patch, dir, t);
    }
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1) {
        throw InvalidArgument("discretization", "Gauss rule needs at least one point");
    }
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        x[static_cast<std::size_t>(i)] = -z;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

} // namespace shellmodal
