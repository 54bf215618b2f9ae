/** @file tracking.cpp

    @brief MAC mode tracking, degenerate cluster alignment and instability
    detection on continuation histories.
*/
#include "shellmodal/solvers.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace shellmodal {

double mac(const VecX& v, const VecX& w, const SpMat& M) {
    const VecX Mw = M * w;
    const double vw = v.dot(Mw), vv = v.dot(M * v), ww = w.dot(Mw);
    if (vv <= 0.0 || ww <= 0.0) return 0.0;
    return vw * vw / (vv * ww);
}

TrackingResult track_modes(const MatX& previous, const MatX& current, const SpMat& M, double threshold,
                           const std::vector<bool>& skip_previous, const std::vector<bool>& skip_current) {
    const Eigen::Index np = previous.cols(), nc = current.cols();
    TrackingResult out;
    out.match.assign(static_cast<std::size_t>(nc), -1);
    out.mac.assign(static_cast<std::size_t>(nc), 0.0);
    if (np == 0 || nc == 0) return out;
    const MatX MP = M * previous;
    const MatX cross = current.transpose() * MP;
    VecX pn(np), cn(nc);
    for (Eigen::Index j = 0; j < np; ++j) pn[j] = previous.col(j).dot(MP.col(j));
    const MatX MC = M * current;
    for (Eigen::Index i = 0; i < nc; ++i) cn[i] = current.col(i).dot(MC.col(i));

    std::vector<std::tuple<double, int, int>> cand;
    for (Eigen::Index i = 0; i < nc; ++i) {
        if (!skip_current.empty() && skip_current[static_cast<std::size_t>(i)]) continue;
        for (Eigen::Index j = 0; j < np; ++j) {
            if (!skip_previous.empty() && skip_previous[static_cast<std::size_t>(j)]) continue;
            const double m = cross(i, j) * cross(i, j) / (cn[i] * pn[j]);
            if (m >= threshold) cand.emplace_back(m, static_cast<int>(i), static_cast<int>(j));
        }
    }
    // Largest MAC first; ties resolved by index for determinism.
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) < std::get<2>(b);
    });
    std::vector<bool> used(static_cast<std::size_t>(np), false);
    for (const auto& [m, i, j] : cand) {
        if (out.match[static_cast<std::size_t>(i)] >= 0 || used[static_cast<std::size_t>(j)]) continue;
        out.match[static_cast<std::size_t>(i)] = j;
        out.mac[static_cast<std::size_t>(i)] = m;
        used[static_cast<std::size_t>(j)] = true;
    }
    return out;
}

void align_degenerate(const MatX& reference, const VecX& omega2, MatX& vectors, const SpMat& M, double tolerance) {
    const Eigen::Index n = omega2.size();
    if (reference.cols() == 0 || n < 2) return;
    const double floor = 1e-12 * omega2.cwiseAbs().maxCoeff();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && std::abs(omega2[stop] - omega2[stop - 1]) <=
                               tolerance * std::max({std::abs(omega2[stop]), std::abs(omega2[stop - 1]), floor})) {
            ++stop;
        }
        const Eigen::Index c = stop - start;
        if (c >= 2 && c <= reference.cols()) {
            const MatX P = reference.transpose() * (M * vectors.middleCols(start, c));
            std::vector<int> rows(static_cast<std::size_t>(P.rows()));
            std::iota(rows.begin(), rows.end(), 0);
            std::stable_sort(rows.begin(), rows.end(),
                             [&](int a, int b) { return P.row(a).squaredNorm() > P.row(b).squaredNorm(); });
            rows.resize(static_cast<std::size_t>(c));
            std::sort(rows.begin(), rows.end());
            MatX Ps(c, c);
            for (Eigen::Index r = 0; r < c; ++r) Ps.row(r) = P.row(rows[static_cast<std::size_t>(r)]);
            // max trace(Ps Q) over orthogonal Q: Ps = U S W^T -> Q = W U^T.
            Eigen::JacobiSVD<MatX> svd(Ps, Eigen::ComputeFullU | Eigen::ComputeFullV);
            const MatX Q = svd.matrixV() * svd.matrixU().transpose();
            vectors.middleCols(start, c) = (vectors.middleCols(start, c) * Q).eval();
        }
        start = stop;
    }
}

std::vector<double> zero_crossings(const std::vector<double>& parameter, const std::vector<double>& omega2) {
    if (parameter.size() != omega2.size()) {
        throw InvalidArgument("solvers", "parameter and omega^2 histories differ in length");
    }
    std::vector<double> out;
    for (std::size_t k = 1; k < omega2.size(); ++k) {
        const double a = omega2[k - 1], b = omega2[k];
        if ((a >= 0.0 && b < 0.0) || (a < 0.0 && b >= 0.0)) {
            const double t = a / (a - b);
            out.push_back(parameter[k - 1] + t * (parameter[k] - parameter[k - 1]));
        }
    }
    return out;
}

namespace {

struct Sample {
    int step;
    double parameter;
    double omega2;
};

void find_dips(const std::string& label, const std::vector<Sample>& h, double ratio, std::vector<Instability>& out) {
    if (h.size() < 3 || !(h.front().omega2 > 0.0)) return;
    const double level = ratio * h.front().omega2;
    for (std::size_t k = 1; k < h.size(); ++k) {
        if (!(h[k].omega2 < level && h[k].omega2 >= 0.0) || h[k - 1].omega2 < level) continue;
        for (std::size_t t = k + 1; t < h.size(); ++t) {
            if (h[t].omega2 >= level) {
                out.push_back({label, "dip", h[k].parameter, h[k].step});
                break;
            }
        }
    }
}

} // namespace

std::vector<Instability> detect_instability(const ModalResult& result, double dip_ratio) {
    std::vector<Instability> out;
    std::map<std::string, std::vector<Sample>> by_label;
    std::vector<std::string> order;
    std::vector<Sample> lowest;
    for (int s = 0; s < static_cast<int>(result.steps.size()); ++s) {
        const ModalStep& st = result.steps[static_cast<std::size_t>(s)];
        double low = std::numeric_limits<double>::infinity();
        for (int i = 0; i < st.size(); ++i) {
            if (st.rigid[static_cast<std::size_t>(i)]) continue;
            const std::string& l = st.labels[static_cast<std::size_t>(i)];
            if (!by_label.count(l)) order.push_back(l);
            by_label[l].push_back({s, st.parameter, st.omega2[i]});
            low = std::min(low, st.omega2[i]);
        }
        if (std::isfinite(low)) lowest.push_back({s, st.parameter, low});
    }
    for (const std::string& l : order) {
        const std::vector<Sample>& h = by_label[l];
        for (std::size_t k = 1; k < h.size(); ++k) {
            if (h[k].step != h[k - 1].step + 1) continue;
            const auto z = zero_crossings({h[k - 1].parameter, h[k].parameter}, {h[k - 1].omega2, h[k].omega2});
            if (!z.empty()) out.push_back({l, "zero-crossing", z.front(), h[k].step});
        }
        find_dips(l, h, dip_ratio, out);
    }
    for (std::size_t k = 1; k < lowest.size(); ++k) {
        const auto z = zero_crossings({lowest[k - 1].parameter, lowest[k].parameter},
                                      {lowest[k - 1].omega2, lowest[k].omega2});
        if (!z.empty()) out.push_back({"lowest", "zero-crossing", z.front(), lowest[k].step});
    }
    find_dips("lowest", lowest, dip_ratio, out);
    std::stable_sort(out.begin(), out.end(), [](const Instability& a, const Instability& b) { return a.step < b.step; });
    return out;
}

} // namespace shellmodal
