/** @file model.cpp

    @brief Model assembly from patches and the three geometry generators.
*/
#include "shellmodal/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace shellmodal {

Boundary boundary_from_name(const std::string& name) {
    if (name == "free") return Boundary::Free;
    if (name == "simply-supported") return Boundary::SimplySupported;
    if (name == "clamped") return Boundary::Clamped;
    throw InvalidArgument("discretization",
                          "unknown boundary '" + name + "' (expected free, simply-supported or clamped)");
}

std::string to_string(Boundary b) {
    switch (b) {
    case Boundary::Free: return "free";
    case Boundary::SimplySupported: return "simply-supported";
    case Boundary::Clamped: return "clamped";
    }
    return "free";
}

std::string to_string(Shape s) {
    switch (s) {
    case Shape::SquarePlate: return "square-plate";
    case Shape::Disk: return "disk";
    case Shape::Tube: return "tube";
    }
    return "square-plate";
}

Vec3 LatticeOrientation::at(const Vec3& x) const {
    if (!rolled) {
        return armchair;
    }
    Vec3 r = x - origin;
    r -= r.dot(axis) * axis;
    const double len = r.norm();
    if (len < 1e-14) {
        return axis;
    }
    const Vec3 circ = axis.cross(r / len);
    return std::cos(chiral_angle) * axis + std::sin(chiral_angle) * circ;
}

double ShellModel::reference_area() const {
    double a = 0.0;
    for (const Element& e : elements) {
        for (const QuadPoint& q : e.qps) {
            a += q.dA;
        }
    }
    return a;
}

std::vector<int> ShellModel::free_dofs() const {
    std::vector<int> f;
    for (int i = 0; i < num_nodes(); ++i) {
        for (int d = 0; d < 3; ++d) {
            if (!fixed[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]) {
                f.push_back(3 * i + d);
            }
        }
    }
    return f;
}

std::vector<Vec3> ShellModel::current_nodes(const VecX& u) const {
    std::vector<Vec3> x(nodes);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += u.segment<3>(3 * static_cast<Eigen::Index>(i));
    }
    return x;
}

namespace {

int span_position(const KnotVector& kv, double t) {
    const auto spans = kv.element_spans();
    const int k = kv.find_span(t);
    const auto it = std::find(spans.begin(), spans.end(), k);
    if (it == spans.end()) {
        throw InvalidArgument("discretization", "parameter outside the patch");
    }
    return static_cast<int>(it - spans.begin());
}

/// Converts patch-local basis rows into rows over unique global nodes.
void globalize(const ShellModel& m, int patch, const ElementBasis& eb, std::vector<int>& nodes, PointBasis& out) {
    nodes.clear();
    std::vector<int> row(eb.local.size());
    for (std::size_t i = 0; i < eb.local.size(); ++i) {
        const int g = m.patch_nodes[static_cast<std::size_t>(patch)][static_cast<std::size_t>(eb.local[i])];
        auto it = std::find(nodes.begin(), nodes.end(), g);
        if (it == nodes.end()) {
            nodes.push_back(g);
            row[i] = static_cast<int>(nodes.size()) - 1;
        } else {
            row[i] = static_cast<int>(it - nodes.begin());
        }
    }
    const auto n = static_cast<Eigen::Index>(nodes.size());
    out.N = VecX::Zero(n);
    out.dN = MatX::Zero(n, 2);
    out.ddN = MatX::Zero(n, 3);
    for (std::size_t i = 0; i < eb.local.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(row[i]);
        const auto s = static_cast<Eigen::Index>(i);
        out.N[r] += eb.basis.N[s];
        out.dN.row(r) += eb.basis.dN.row(s);
        out.ddN.row(r) += eb.basis.ddN.row(s);
    }
}

std::vector<Vec3> gather(const std::vector<Vec3>& x, const std::vector<int>& ids) {
    std::vector<Vec3> out;
    out.reserve(ids.size());
    for (int i : ids) {
        out.push_back(x[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// Merges coincident control points of all patches into global nodes.
void merge_nodes(ShellModel& m) {
    double scale = 0.0;
    for (const NurbsPatch& p : m.patches) {
        for (const Vec3& x : p.points) {
            scale = std::max(scale, x.cwiseAbs().maxCoeff());
        }
    }
    const double tol = 1e-9 * std::max(scale, 1.0);
    using Key = std::tuple<long long, long long, long long>;
    std::map<Key, std::vector<int>> grid;
    auto key = [&](const Vec3& x) {
        return Key{std::llround(x[0] / tol / 10.0), std::llround(x[1] / tol / 10.0), std::llround(x[2] / tol / 10.0)};
    };
    m.nodes.clear();
    m.patch_nodes.assign(m.patches.size(), {});
    for (std::size_t p = 0; p < m.patches.size(); ++p) {
        for (const Vec3& x : m.patches[p].points) {
            const Key k = key(x);
            int found = -1;
            for (long long dx = -1; dx <= 1 && found < 0; ++dx) {
                for (long long dy = -1; dy <= 1 && found < 0; ++dy) {
                    for (long long dz = -1; dz <= 1 && found < 0; ++dz) {
                        auto it = grid.find({std::get<0>(k) + dx, std::get<1>(k) + dy, std::get<2>(k) + dz});
                        if (it == grid.end()) continue;
                        for (int g : it->second) {
                            if ((m.nodes[static_cast<std::size_t>(g)] - x).norm() < tol) {
                                found = g;
                                break;
                            }
                        }
                    }
                }
            }
            if (found < 0) {
                found = static_cast<int>(m.nodes.size());
                m.nodes.push_back(x);
                grid[k].push_back(found);
            }
            m.patch_nodes[p].push_back(found);
        }
    }
}

Vec2 edge_param(const NurbsPatch& p, int side, double t) {
    switch (side) {
    case 0: return {p.u.first(), t};
    case 1: return {p.u.last(), t};
    case 2: return {t, p.v.first()};
    default: return {t, p.v.last()};
    }
}

const KnotVector& edge_knots(const NurbsPatch& p, int side) { return side < 2 ? p.v : p.u; }

bool side_exists(const NurbsPatch& p, int side) { return side < 2 ? !p.u.periodic : !p.v.periodic; }

/// Local control point indices lying on a patch side.
std::vector<int> side_points(const NurbsPatch& p, int side) {
    std::vector<int> ids;
    if (side < 2) {
        const int i = side == 0 ? 0 : p.nu() - 1;
        for (int j = 0; j < p.nv(); ++j) ids.push_back(p.index(i, j));
    } else {
        const int j = side == 2 ? 0 : p.nv() - 1;
        for (int i = 0; i < p.nu(); ++i) ids.push_back(p.index(i, j));
    }
    return ids;
}

/// Edge partner test: returns +1 (same direction), -1 (reversed) or 0.
int edges_match(const NurbsPatch& a, int sa, const NurbsPatch& b, int sb, double tol) {
    const KnotVector& ka = edge_knots(a, sa);
    const KnotVector& kb = edge_knots(b, sb);
    const double ts[3] = {0.0, 0.37, 1.0};
    for (int dir : {1, -1}) {
        bool ok = true;
        for (double s : ts) {
            const double ta = ka.first() + s * (ka.last() - ka.first());
            const double sbv = dir > 0 ? s : 1.0 - s;
            const double tb = kb.first() + sbv * (kb.last() - kb.first());
            const Vec2 pa = edge_param(a, sa, ta), pb = edge_param(b, sb, tb);
            if ((a.evaluate(pa[0], pa[1]) - b.evaluate(pb[0], pb[1])).norm() > tol) {
                ok = false;
                break;
            }
        }
        if (ok) return dir;
    }
    return 0;
}

} // namespace

ElementBasis ShellModel::basis_at(int patch, const Vec2& xi, int* element) const {
    const NurbsPatch& p = patches[static_cast<std::size_t>(patch)];
    const int eu = span_position(p.u, xi[0]);
    const int ev = span_position(p.v, xi[1]);
    const int e = eu + static_cast<int>(p.u.element_spans().size()) * ev;
    if (element != nullptr) *element = e;
    return basis_eval(p, e, xi);
}

void finalize_model(ShellModel& m, const MeshOptions& opt) {
    for (const NurbsPatch& p : m.patches) {
        p.validate();
    }
    merge_nodes(m);
    const double tol = 1e-8 * std::max(1.0, m.size);

    // Elements and reference quadrature.
    m.elements.clear();
    std::vector<double> gx, gw;
    const int nq = opt.quadrature > 0 ? opt.quadrature : opt.degree + 1;
    gauss_legendre(nq, gx, gw);
    std::vector<std::vector<int>> element_offset(m.patches.size());
    for (std::size_t pi_ = 0; pi_ < m.patches.size(); ++pi_) {
        const NurbsPatch& p = m.patches[pi_];
        element_offset[pi_].push_back(static_cast<int>(m.elements.size()));
        for (int e = 0; e < p.num_elements(); ++e) {
            const auto box = p.element_box(e);
            Element el;
            el.patch = static_cast<int>(pi_);
            el.index = e;
            const double hu = 0.5 * (box[1] - box[0]), hv = 0.5 * (box[3] - box[2]);
            for (int j = 0; j < nq; ++j) {
                for (int i = 0; i < nq; ++i) {
                    const Vec2 xi{box[0] + hu * (1.0 + gx[static_cast<std::size_t>(i)]),
                                  box[2] + hv * (1.0 + gx[static_cast<std::size_t>(j)])};
                    const ElementBasis eb = basis_eval(p, e, xi);
                    QuadPoint q;
                    std::vector<int> ids;
                    globalize(m, el.patch, eb, ids, q.basis);
                    if (el.nodes.empty()) {
                        el.nodes = ids;
                    } else if (el.nodes != ids) {
                        throw InvalidArgument("discretization", "inconsistent element connectivity");
                    }
                    const std::vector<Vec3> x = gather(m.nodes, el.nodes);
                    const SurfaceFrame f = evaluate_frame(x, q.basis);
                    q.point = Vec3::Zero();
                    for (std::size_t k = 0; k < x.size(); ++k) q.point += q.basis.N[static_cast<Eigen::Index>(k)] * x[k];
                    q.A = f.metric;
                    q.B = f.curvature;
                    q.normal = f.normal;
                    q.lattice = lattice_map(f, m.lattice.at(q.point));
                    q.dA = gw[static_cast<std::size_t>(i)] * gw[static_cast<std::size_t>(j)] * hu * hv * f.area_factor;
                    el.qps.push_back(std::move(q));
                }
            }
            m.elements.push_back(std::move(el));
        }
    }

    // Patch edges: interfaces and boundary.
    std::vector<PatchEdge> edges;
    for (int p = 0; p < static_cast<int>(m.patches.size()); ++p) {
        for (int s = 0; s < 4; ++s) {
            if (side_exists(m.patches[static_cast<std::size_t>(p)], s)) edges.push_back({p, s});
        }
    }
    m.interfaces.clear();
    m.boundary_edges.clear();
    std::vector<int> partner_dir(edges.size(), 0);
    std::vector<int> partner(edges.size(), -1);
    for (std::size_t a = 0; a < edges.size(); ++a) {
        for (std::size_t b = a + 1; b < edges.size(); ++b) {
            if (partner[a] >= 0 || partner[b] >= 0) continue;
            const int d = edges_match(m.patches[static_cast<std::size_t>(edges[a].patch)], edges[a].side,
                                      m.patches[static_cast<std::size_t>(edges[b].patch)], edges[b].side, tol);
            if (d != 0) {
                partner[a] = static_cast<int>(b);
                partner[b] = static_cast<int>(a);
                partner_dir[a] = partner_dir[b] = d;
                m.interfaces.emplace_back(edges[a], edges[b]);
            }
        }
    }
    for (std::size_t a = 0; a < edges.size(); ++a) {
        if (partner[a] < 0) m.boundary_edges.push_back(edges[a]);
    }

    // Dirichlet mask.
    m.fixed.assign(m.nodes.size(), {false, false, false});
    if (m.boundary != Boundary::Free) {
        for (const PatchEdge& e : m.boundary_edges) {
            for (int loc : side_points(m.patches[static_cast<std::size_t>(e.patch)], e.side)) {
                m.fixed[static_cast<std::size_t>(
                    m.patch_nodes[static_cast<std::size_t>(e.patch)][static_cast<std::size_t>(loc)])] = {true, true,
                                                                                                        true};
            }
        }
    }

    // Edge quadrature for penalties.
    auto edge_point = [&](const PatchEdge& e, double t, EdgePoint& ep, double& jac) {
        const Vec2 xi = edge_param(m.patches[static_cast<std::size_t>(e.patch)], e.side, t);
        int local = 0;
        const ElementBasis eb = m.basis_at(e.patch, xi, &local);
        ep.element = element_offset[static_cast<std::size_t>(e.patch)][0] + local;
        std::vector<int> ids;
        globalize(m, e.patch, eb, ids, ep.basis);
        const Element& el = m.elements[static_cast<std::size_t>(ep.element)];
        if (ids != el.nodes) {
            throw InvalidArgument("discretization", "edge point connectivity mismatch");
        }
        const SurfaceFrame f = evaluate_frame(gather(m.nodes, el.nodes), ep.basis);
        ep.normal = f.normal;
        jac = f.tangent[e.side < 2 ? 1 : 0].norm();
    };
    auto for_edge_gauss = [&](const PatchEdge& e, auto&& fn) {
        const KnotVector& kv = edge_knots(m.patches[static_cast<std::size_t>(e.patch)], e.side);
        for (int k : kv.element_spans()) {
            const double a = kv.knots[static_cast<std::size_t>(k)], b = kv.knots[static_cast<std::size_t>(k + 1)];
            for (std::size_t g = 0; g < gx.size(); ++g) {
                fn(0.5 * (a + b) + 0.5 * (b - a) * gx[g], 0.5 * (b - a) * gw[g]);
            }
        }
    };

    m.kp = opt.kp_factor * m.material.c_bend;
    m.k_interface = opt.interface_factor * m.material.c_bend;
    m.rotation_penalty.clear();
    if (m.boundary == Boundary::Clamped) {
        for (const PatchEdge& e : m.boundary_edges) {
            for_edge_gauss(e, [&](double t, double w) {
                RotationPenaltyPoint rp;
                double jac = 0.0;
                edge_point(e, t, rp.side, jac);
                rp.ds = w * jac;
                m.rotation_penalty.push_back(std::move(rp));
            });
        }
    }
    m.interface_penalty.clear();
    for (std::size_t a = 0; a < edges.size(); ++a) {
        const int b = partner[a];
        if (b < static_cast<int>(a)) continue;
        const PatchEdge ea = edges[a], eb = edges[static_cast<std::size_t>(b)];
        const KnotVector& ka = edge_knots(m.patches[static_cast<std::size_t>(ea.patch)], ea.side);
        const KnotVector& kb = edge_knots(m.patches[static_cast<std::size_t>(eb.patch)], eb.side);
        for_edge_gauss(ea, [&](double t, double w) {
            InterfacePenaltyPoint ip;
            double ja = 0.0, jb = 0.0;
            edge_point(ea, t, ip.plus, ja);
            double s = (t - ka.first()) / (ka.last() - ka.first());
            if (partner_dir[a] < 0) s = 1.0 - s;
            edge_point(eb, kb.first() + s * (kb.last() - kb.first()), ip.minus, jb);
            ip.ds = w * ja;
            m.interface_penalty.push_back(std::move(ip));
        });
    }
}

ShellModel make_square_plate(double L, int m, int n, const MaterialParams& mat, const MeshOptions& opt) {
    if (!(L > 0.0) || m < 2 || n < 2 || opt.degree < 2) {
        throw InvalidArgument("discretization", "square plate needs L > 0, m, n >= 2 and degree >= 2");
    }
    mat.validate();
    ShellModel model;
    model.shape = Shape::SquarePlate;
    model.material = mat;
    model.boundary = opt.boundary;
    model.size = L;
    model.center = Vec3(0.5 * L, 0.5 * L, 0.0);
    model.lattice.armchair = Vec3(std::cos(opt.armchair_angle), std::sin(opt.armchair_angle), 0.0);

    NurbsPatch p;
    p.u = open_uniform(opt.degree, m);
    p.v = open_uniform(opt.degree, n);
    const auto gu = greville(p.u), gv = greville(p.v);
    for (double y : gv) {
        for (double x : gu) {
            p.points.emplace_back(L * x, L * y, 0.0);
            p.weights.push_back(1.0);
        }
    }
    model.patches.push_back(std::move(p));
    finalize_model(model, opt);
    return model;
}

ShellModel make_disk(double radius, int elements, const MaterialParams& mat, const MeshOptions& opt) {
    if (!(radius > 0.0) || elements < 1) {
        throw InvalidArgument("discretization", "disk needs radius > 0 and at least one element");
    }
    if (opt.degree != 2) {
        throw InvalidArgument("discretization", "the disk generator supports quadratic patches only");
    }
    mat.validate();
    ShellModel model;
    model.shape = Shape::Disk;
    model.material = mat;
    model.boundary = opt.boundary;
    model.size = radius;
    model.lattice.armchair = Vec3(std::cos(opt.armchair_angle), std::sin(opt.armchair_angle), 0.0);

    const double s = 0.5 * radius;
    const double w = std::sqrt(0.5);
    const double wv[3] = {1.0, w, 1.0};
    const int radial = std::max(2, (elements + 1) / 2);

    NurbsPatch inner;
    inner.u = open_uniform(2, 1);
    inner.v = open_uniform(2, 1);
    const double c[3] = {-s, 0.0, s};
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
            inner.points.emplace_back(c[i], c[j], 0.0);
            inner.weights.push_back(wv[i] * wv[j]);
        }
    }
    refine_uniform(inner, 0, elements);
    refine_uniform(inner, 1, elements);
    model.patches.push_back(std::move(inner));

    // Right patch: u radial (square side to arc), v along the side.
    NurbsPatch right;
    right.u = open_uniform(2, 1);
    right.v = open_uniform(2, 1);
    const Vec3 side[3] = {{s, -s, 0.0}, {s, 0.0, 0.0}, {s, s, 0.0}};
    const Vec3 arc[3] = {{radius * w, -radius * w, 0.0}, {radius / w, 0.0, 0.0}, {radius * w, radius * w, 0.0}};
    for (int j = 0; j < 3; ++j) {
        right.points.push_back(side[j]);
        right.points.push_back(0.5 * (side[j] + arc[j]));
        right.points.push_back(arc[j]);
        for (int i = 0; i < 3; ++i) right.weights.push_back(wv[j]);
    }
    refine_uniform(right, 0, radial);
    refine_uniform(right, 1, elements);
    for (int k = 0; k < 4; ++k) {
        NurbsPatch q = right;
        const double phi = 0.5 * pi * k;
        const Eigen::AngleAxisd rot(phi, Vec3::UnitZ());
        for (Vec3& x : q.points) {
            x = rot * x;
            for (int d = 0; d < 3; ++d) {
                if (std::abs(x[d]) < 1e-15 * radius) x[d] = 0.0;
            }
        }
        model.patches.push_back(std::move(q));
    }
    finalize_model(model, opt);
    return model;
}

double cnt_radius(int n, int m) {
    if (n < 0 || m < 0 || (n == 0 && m == 0)) {
        throw InvalidArgument("discretization", "invalid chirality (n, m)");
    }
    return std::sqrt(3.0) * carbon_bond_length / (2.0 * pi) * std::sqrt(double(n * n + n * m + m * m));
}

double cnt_chiral_angle(int n, int m) {
    if (n < 0 || m < 0 || (n == 0 && m == 0)) {
        throw InvalidArgument("discretization", "invalid chirality (n, m)");
    }
    return std::atan2(std::sqrt(3.0) * m, 2.0 * n + m);
}

ShellModel make_cnt(int n, int m, double aspect_ratio, int circ_elements, int axial_elements,
                    const MaterialParams& mat, const MeshOptions& opt) {
    if (!(aspect_ratio > 0.0) || circ_elements < opt.degree + 1 || axial_elements < 1 || opt.degree < 2) {
        throw InvalidArgument("discretization", "tube needs AR > 0, enough circumferential elements, degree >= 2");
    }
    mat.validate();
    const double R = cnt_radius(n, m);
    const double L = aspect_ratio * 2.0 * R;
    ShellModel model;
    model.shape = Shape::Tube;
    model.material = mat;
    model.boundary = opt.boundary;
    model.size = R;
    model.length = L;
    model.chirality_n = n;
    model.chirality_m = m;
    model.lattice.rolled = true;
    model.lattice.axis = Vec3::UnitZ();
    model.lattice.chiral_angle = cnt_chiral_angle(n, m);

    NurbsPatch p;
    p.u = periodic_uniform(opt.degree, circ_elements);
    p.v = open_uniform(opt.degree, axial_elements);
    const int nc = p.u.num_basis();
    // Unit control polygon first, then scale so that knot points sit on R.
    std::vector<Vec3> ring;
    for (int i = 0; i < nc; ++i) {
        const double phi = 2.0 * pi * i / nc;
        ring.emplace_back(std::cos(phi), std::sin(phi), 0.0);
    }
    NurbsPatch probe;
    probe.u = p.u;
    probe.v = open_uniform(1, 1);
    for (int j = 0; j < 2; ++j) {
        for (const Vec3& x : ring) {
            probe.points.push_back(x + Vec3(0.0, 0.0, j));
            probe.weights.push_back(1.0);
        }
    }
    const double r0 = probe.evaluate(0.0, 0.0).head<2>().norm();
    const double rho = R / r0;
    const auto gv = greville(p.v);
    for (double t : gv) {
        for (const Vec3& x : ring) {
            p.points.emplace_back(rho * x[0], rho * x[1], L * (t - 0.5));
            p.weights.push_back(1.0);
        }
    }
    model.patches.push_back(std::move(p));
    finalize_model(model, opt);
    return model;
}

} // namespace shellmodal
