/** @file labels.cpp

    @brief Physical names for computed modes: plate and disk (m,n) indices
    from analytic shapes, nanotube families from circumferential Fourier
    content.
*/
#include "shellmodal/analytical.hpp"
#include "shellmodal/solvers.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace shellmodal {

namespace {

/// Mode displacement sampled at all quadrature points.
struct Samples {
    std::vector<Vec3> point;
    std::vector<double> weight;
    MatX disp;  ///< (3 * points) x modes
};

Samples sample_modes(const ShellModel& model, const DofMap& map, const MatX& vectors) {
    Samples s;
    for (const Element& e : model.elements) {
        for (const QuadPoint& q : e.qps) {
            s.point.push_back(q.point);
            s.weight.push_back(q.dA);
        }
    }
    const auto np = static_cast<Eigen::Index>(s.point.size());
    s.disp = MatX::Zero(3 * np, vectors.cols());
    VecX full = VecX::Zero(model.num_dofs());
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        full.setZero();
        map.scatter(vectors.col(c), full);
        Eigen::Index k = 0;
        for (const Element& e : model.elements) {
            for (const QuadPoint& q : e.qps) {
                Vec3 d = Vec3::Zero();
                for (std::size_t i = 0; i < e.nodes.size(); ++i) {
                    d += q.basis.N[static_cast<Eigen::Index>(i)] * full.segment<3>(3 * e.nodes[i]);
                }
                s.disp.block<3, 1>(3 * k, c) = d;
                ++k;
            }
        }
    }
    return s;
}

/// Degenerate clusters of ascending omega^2 values: [begin, end) ranges.
std::vector<std::pair<int, int>> clusters(const VecX& omega2, double tol) {
    std::vector<std::pair<int, int>> out;
    const double floor = 1e-12 * (omega2.size() ? omega2.cwiseAbs().maxCoeff() : 0.0);
    int i = 0;
    const int n = static_cast<int>(omega2.size());
    while (i < n) {
        int j = i + 1;
        while (j < n && std::abs(omega2[j] - omega2[j - 1]) <=
                            tol * std::max({std::abs(omega2[j]), std::abs(omega2[j - 1]), floor})) {
            ++j;
        }
        out.emplace_back(i, j);
        i = j;
    }
    return out;
}

struct Shape2 {
    std::string name;
    VecX values;  ///< out-of-plane shape at the samples, unit weighted norm
};

/// Rotates each degenerate cluster so its out-of-plane fields align with
/// the best-matching analytic shapes.
void align_clusters(ModalStep& step, const MatX& w, const VecX& weight, const std::vector<Shape2>& shapes) {
    for (const auto& [b, e] : clusters(step.omega2, 1e-6)) {
        const int c = e - b;
        if (c < 2 || c > static_cast<int>(shapes.size())) continue;
        MatX P(static_cast<Eigen::Index>(shapes.size()), c);
        for (std::size_t k = 0; k < shapes.size(); ++k) {
            for (int j = 0; j < c; ++j) {
                P(static_cast<Eigen::Index>(k), j) = shapes[k].values.dot(weight.cwiseProduct(w.col(b + j)));
            }
        }
        std::vector<int> rows(shapes.size());
        std::iota(rows.begin(), rows.end(), 0);
        std::stable_sort(rows.begin(), rows.end(),
                         [&](int x, int y) { return P.row(x).squaredNorm() > P.row(y).squaredNorm(); });
        rows.resize(static_cast<std::size_t>(c));
        std::sort(rows.begin(), rows.end());
        MatX Ps(c, c);
        for (int r = 0; r < c; ++r) Ps.row(r) = P.row(rows[static_cast<std::size_t>(r)]);
        if (Ps.norm() < 1e-12) continue;
        Eigen::JacobiSVD<MatX> svd(Ps, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const MatX Q = svd.matrixV() * svd.matrixU().transpose();
        step.vectors.middleCols(b, c) = (step.vectors.middleCols(b, c) * Q).eval();
    }
}

std::vector<std::string> flat_labels(const ShellModel& model, const DofMap& map, ModalStep& step, bool align) {
    const bool disk = model.shape == Shape::Disk;
    Samples s = sample_modes(model, map, step.vectors);
    const auto np = static_cast<Eigen::Index>(s.point.size());
    VecX weight(np);
    for (Eigen::Index k = 0; k < np; ++k) weight[k] = s.weight[static_cast<std::size_t>(k)];

    std::vector<Shape2> shapes;
    auto add_shape = [&](std::string name, VecX v) {
        const double nrm = std::sqrt(v.dot(weight.cwiseProduct(v)));
        if (nrm > 1e-12) shapes.push_back({std::move(name), v / nrm});
    };
    if (!disk) {
        const double L = model.size;
        for (int m = 1; m <= 8; ++m) {
            for (int n = 1; n <= 8; ++n) {
                VecX v(np);
                for (Eigen::Index k = 0; k < np; ++k) {
                    const Vec3& p = s.point[static_cast<std::size_t>(k)];
                    v[k] = rect_mode_shape(m, n, L, L, p[0], p[1]);
                }
                add_shape("(" + std::to_string(m) + "," + std::to_string(n) + ")", v);
            }
        }
    } else if (model.boundary != Boundary::Free) {
        PlateSpec spec;
        spec.shape = PlateShape::Circle;
        spec.a = model.size;
        spec.boundary = model.boundary;
        for (int m = 0; m <= 8; ++m) {
            const std::vector<double> roots = circular_char_roots(m, 4, model.boundary);
            for (int n = 0; n < 4; ++n) {
                const double g = roots[static_cast<std::size_t>(n)];
                VecX vc(np), vs(np);
                for (Eigen::Index k = 0; k < np; ++k) {
                    const Vec3 p = s.point[static_cast<std::size_t>(k)] - model.center;
                    const double r = std::min(std::hypot(p[0], p[1]), spec.a);
                    const double phi = std::atan2(p[1], p[0]);
                    const double R = circular_radial_shape(m, g, spec.a, r);
                    vc[k] = R * std::cos(m * phi);
                    vs[k] = R * std::sin(m * phi);
                }
                const std::string base = "(" + std::to_string(m) + "," + std::to_string(n) + ")";
                if (m == 0) {
                    add_shape(base, vc);
                } else {
                    add_shape(base + "c", vc);
                    add_shape(base + "s", vs);
                }
            }
        }
    }

    auto out_of_plane = [&](const MatX& disp) {
        MatX w(np, disp.cols());
        for (Eigen::Index k = 0; k < np; ++k) w.row(k) = disp.row(3 * k + 2);
        return w;
    };
    MatX w = out_of_plane(s.disp);
    if (align && !shapes.empty()) {
        align_clusters(step, w, weight, shapes);
        s = sample_modes(model, map, step.vectors);
        w = out_of_plane(s.disp);
    }

    std::vector<std::string> labels(static_cast<std::size_t>(step.size()));
    int inplane = 0, other = 0;
    for (int i = 0; i < step.size(); ++i) {
        if (step.rigid[static_cast<std::size_t>(i)]) {
            labels[static_cast<std::size_t>(i)] = "rigid";
            continue;
        }
        double total = 0.0;
        for (Eigen::Index k = 0; k < np; ++k) total += weight[k] * s.disp.block<3, 1>(3 * k, i).squaredNorm();
        const VecX wi = w.col(i);
        const double wz = wi.dot(weight.cwiseProduct(wi));
        if (wz < 0.5 * total) {
            labels[static_cast<std::size_t>(i)] = "IP" + std::to_string(++inplane);
            continue;
        }
        double best = 0.0;
        std::string name;
        for (const Shape2& sh : shapes) {
            const double c = sh.values.dot(weight.cwiseProduct(wi));
            const double score = c * c / wz;
            if (score > best) {
                best = score;
                name = sh.name;
            }
        }
        labels[static_cast<std::size_t>(i)] = best >= 0.5 ? name : "mode" + std::to_string(++other);
    }
    return labels;
}

std::vector<std::string> tube_labels(const ShellModel& model, const DofMap& map, const ModalStep& step) {
    const Samples s = sample_modes(model, map, step.vectors);
    const Vec3 axis = model.axis.normalized();
    // Group samples into rings of equal axial coordinate.
    std::map<long long, std::vector<std::size_t>> rings;
    std::vector<Vec3> er(s.point.size()), et(s.point.size());
    std::vector<double> theta(s.point.size());
    const Vec3 ref = std::abs(axis[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 ex = (ref - ref.dot(axis) * axis).normalized(), ey = axis.cross(ex);
    for (std::size_t k = 0; k < s.point.size(); ++k) {
        const Vec3 d = s.point[k] - model.center;
        const double z = d.dot(axis);
        rings[std::llround(z * 1e6)].push_back(k);
        const Vec3 radial = d - z * axis;
        theta[k] = std::atan2(radial.dot(ey), radial.dot(ex));
        er[k] = radial.normalized();
        et[k] = axis.cross(er[k]);
    }
    std::size_t ring_size = s.point.size();
    for (const auto& [key, idx] : rings) ring_size = std::min(ring_size, idx.size());
    const int nmax = std::max(1, std::min<int>(12, static_cast<int>(ring_size) / 2 - 1));

    std::vector<std::string> cls(static_cast<std::size_t>(step.size()));
    for (int i = 0; i < step.size(); ++i) {
        if (step.rigid[static_cast<std::size_t>(i)]) {
            cls[static_cast<std::size_t>(i)] = "rigid";
            continue;
        }
        // energy[n][component] over rings; components radial, circumferential, axial.
        std::vector<std::array<double, 3>> energy(static_cast<std::size_t>(nmax) + 1, {0.0, 0.0, 0.0});
        for (const auto& [key, idx] : rings) {
            double wsum = 0.0;
            for (std::size_t k : idx) wsum += s.weight[k];
            for (int n = 0; n <= nmax; ++n) {
                for (int c = 0; c < 3; ++c) {
                    double a = 0.0, b = 0.0;
                    for (std::size_t k : idx) {
                        const Vec3 d = s.disp.block<3, 1>(3 * static_cast<Eigen::Index>(k), i);
                        const double u = c == 0 ? d.dot(er[k]) : (c == 1 ? d.dot(et[k]) : d.dot(axis));
                        a += s.weight[k] * u * std::cos(n * theta[k]);
                        b += s.weight[k] * u * std::sin(n * theta[k]);
                    }
                    const double norm = n == 0 ? wsum : 0.5 * wsum;
                    energy[static_cast<std::size_t>(n)][static_cast<std::size_t>(c)] += (a * a + b * b) / norm;
                }
            }
        }
        int best_n = 0;
        double best = -1.0;
        for (int n = 0; n <= nmax; ++n) {
            const auto& e = energy[static_cast<std::size_t>(n)];
            const double t = e[0] + e[1] + e[2];
            if (t > best) {
                best = t;
                best_n = n;
            }
        }
        std::string family;
        if (best_n == 0) {
            const auto& e = energy[0];
            const int c = static_cast<int>(std::max_element(e.begin(), e.end()) - e.begin());
            family = c == 0 ? "RB" : (c == 1 ? "TM" : "AM");
            if (c == 0) {
                // Breathing means a uniform radius change; radial fields with
                // axial nodes belong to the shell family.
                double mean = 0.0, total = 0.0, area = 0.0;
                for (std::size_t k = 0; k < s.point.size(); ++k) {
                    const Vec3 d = s.disp.block<3, 1>(3 * static_cast<Eigen::Index>(k), i);
                    mean += s.weight[k] * d.dot(er[k]);
                    total += s.weight[k] * d.squaredNorm();
                    area += s.weight[k];
                }
                if (mean * mean < 0.5 * area * total) family = "SH";
            }
        } else {
            family = best_n == 1 ? "BB" : "SH";
        }
        cls[static_cast<std::size_t>(i)] = family;
    }

    // Number each family by ascending frequency; degenerate pairs share a number.
    std::vector<std::string> labels(cls.size());
    std::map<std::string, int> count;
    for (const auto& [b, e] : clusters(step.omega2, 1e-6)) {
        std::map<std::string, std::vector<int>> members;
        for (int i = b; i < e; ++i) members[cls[static_cast<std::size_t>(i)]].push_back(i);
        for (const auto& [family, ids] : members) {
            if (family == "rigid") {
                for (int i : ids) labels[static_cast<std::size_t>(i)] = "rigid";
                continue;
            }
            for (std::size_t j = 0; j < ids.size(); ++j) {
                if (j % 2 == 0) ++count[family];
                std::string name = family + std::to_string(count[family]);
                if (ids.size() >= 2) name += static_cast<char>('a' + static_cast<int>(j % 2));
                labels[static_cast<std::size_t>(ids[j])] = name;
            }
        }
    }
    return labels;
}

} // namespace

std::vector<std::string> classify_modes(const ShellModel& model, const DofMap& dofs, ModalStep& step, bool align) {
    if (static_cast<int>(step.rigid.size()) != step.size()) step.rigid.assign(static_cast<std::size_t>(step.size()), false);
    if (model.shape == Shape::Tube) return tube_labels(model, dofs, step);
    return flat_labels(model, dofs, step, align);
}

} // namespace shellmodal
