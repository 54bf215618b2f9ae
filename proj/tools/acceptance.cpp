/** @file acceptance.cpp

    @brief Acceptance driver: runs the eight end-to-end criteria and prints
    one PASS/FAIL line per criterion. Arguments select a subset by number.
*/
#include "shellmodal/cli_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace shellmodal;

namespace {

std::string num(double x, const char* f = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int find_label(const ModalStep& s, const std::string& l) {
    for (int i = 0; i < s.size(); ++i) {
        if (s.labels[static_cast<std::size_t>(i)] == l) return i;
    }
    return -1;
}

/// (parameter, omega^2) history of one tracked label.
struct Series {
    std::vector<double> p, w;
};

Series series(const ModalResult& r, const std::string& label) {
    Series s;
    for (const ModalStep& st : r.steps) {
        const int i = find_label(st, label);
        if (i < 0) continue;
        s.p.push_back(st.parameter);
        s.w.push_back(st.omega2[i]);
    }
    return s;
}

/// First zero crossing of any label starting with `family`, or NaN.
double first_crossing(const ModalResult& r, const std::string& family) {
    std::set<std::string> labels;
    for (const ModalStep& st : r.steps) {
        for (const std::string& l : st.labels) {
            if (l.rfind(family, 0) == 0) labels.insert(l);
        }
    }
    double best = std::nan("");
    for (const std::string& l : labels) {
        const Series s = series(r, l);
        for (double c : zero_crossings(s.p, s.w)) {
            if (std::isnan(best) || std::abs(c) < std::abs(best)) best = c;
        }
    }
    return best;
}

/// Deviation of computed values from printed ones, in units of the last printed digit.
double printed_deviation(double got, const std::string& ref) {
    const std::size_t dot = ref.find('.');
    const int decimals = dot == std::string::npos ? 0 : static_cast<int>(ref.size() - dot - 1);
    return std::abs(got - std::stod(ref)) * std::pow(10.0, decimals);
}

Outcome criterion_oracles() {
    // Rectangle: nine lowest (m, n) of the 5 nm square, ascending.
    const PlateSpec spec;
    std::vector<double> f;
    for (int m = 1; m <= 6; ++m) {
        for (int n = 1; n <= 6; ++n) f.push_back(to_thz(rect_ss_frequency(m, n, spec)));
    }
    std::sort(f.begin(), f.end());
    const std::vector<std::string> rect{"0.07027", "0.17568", "0.17568", "0.28109", "0.35136",
                                        "0.35136", "0.45677", "0.45677", "0.59732"};
    double rect_dev = 0.0;
    for (std::size_t i = 0; i < rect.size(); ++i) rect_dev = std::max(rect_dev, printed_deviation(f[i], rect[i]));

    // Circles: the printed mode indices are not all consistent with the
    // characteristic roots, so each printed value is matched to the nearest
    // computed frequency of the low spectrum.
    const std::vector<std::string> clamped{"0.03636", "0.07568", "0.12416", "0.18167",
                                           "0.14158", "0.21655", "0.30112", "0.323038"};
    const std::vector<std::string> simple{"0.01581", "0.04806", "0.08987", "0.14099",
                                          "0.10453", "0.17136", "0.248427", "0.27008"};
    auto circle_dev = [](Boundary b, const std::vector<std::string>& table) {
        PlateSpec s;
        s.shape = PlateShape::Circle;
        s.boundary = b;
        std::vector<double> f;
        for (int m = 0; m <= 8; ++m) {
            for (double g : circular_char_roots(m, 3, b)) f.push_back(to_thz(circular_frequency(g, s)));
        }
        double worst = 0.0;
        for (const std::string& ref : table) {
            double best = 1e300;
            for (double x : f) best = std::min(best, printed_deviation(x, ref));
            worst = std::max(worst, best);
        }
        return worst;
    };
    const double c_dev = circle_dev(Boundary::Clamped, clamped), s_dev = circle_dev(Boundary::SimplySupported, simple);
    // Printed values are rounded or truncated, so one unit of the last
    // printed digit is the resolution of the tables.
    Outcome o;
    o.pass = rect_dev <= 1.0 && c_dev <= 1.0 && s_dev <= 1.0;
    o.detail = "max deviation in last-digit units: square " + num(rect_dev, "%.3f") + ", clamped circle " +
               num(c_dev, "%.3f") + ", simply supported circle " + num(s_dev, "%.3f");
    return o;
}

double first_frequency(const ShellModel& model) {
    ContinuationOptions opt;
    opt.num_modes = 2;
    return run_continuation(model, LoadProgram{}, opt).steps.front().frequency(0);
}

Outcome criterion_convergence() {
    const double f_plate = to_thz(rect_ss_frequency(1, 1, PlateSpec{}));
    std::vector<double> plate_err;
    for (int n : {10, 20, 40}) {
        plate_err.push_back(std::abs(first_frequency(make_square_plate(5.0, n, n, MaterialParams{}, {})) - f_plate) / f_plate);
    }
    PlateSpec circle;
    circle.shape = PlateShape::Circle;
    circle.boundary = Boundary::Clamped;
    const double f_disk = to_thz(circular_frequency(circular_char_roots(0, 1, Boundary::Clamped)[0], circle));
    // The mesh is fine enough that the penalty error, not discretization,
    // dominates at every k_p.
    std::vector<double> disk_err;
    for (double kp : {1e2, 1e3, 1e4}) {
        MeshOptions opt;
        opt.boundary = Boundary::Clamped;
        opt.kp_factor = kp;
        disk_err.push_back(std::abs(first_frequency(make_disk(5.0, 64, MaterialParams{}, opt)) - f_disk) / f_disk);
    }
    Outcome o;
    o.pass = plate_err[0] > plate_err[1] && plate_err[1] > plate_err[2] && plate_err[2] <= 5e-3 &&
             disk_err[0] > disk_err[1] && disk_err[1] > disk_err[2];
    o.detail = "square f(1,1) error at 10/20/40: " + num(100 * plate_err[0], "%.4f") + "% " +
               num(100 * plate_err[1], "%.4f") + "% " + num(100 * plate_err[2], "%.4f") +
               "%; clamped disk (64 per side) f(0,0) error at kp 1e2/1e3/1e4: " + num(100 * disk_err[0], "%.4f") + "% " +
               num(100 * disk_err[1], "%.4f") + "% " + num(100 * disk_err[2], "%.4f") + "%";
    return o;
}

/// Relative (1,1) gap between the continuation and the prestressed oracle.
std::vector<std::pair<double, double>> dilatation_gaps(const ShellModel& plate, double end, int steps) {
    LoadProgram lp;
    lp.kind = LoadKind::AreaStretch;
    lp.start = 1.0;
    lp.end = end;
    lp.steps = steps;
    ContinuationOptions opt;
    opt.num_modes = 4;
    const ModalResult r = run_continuation(plate, lp, opt);
    const MaterialParams mat;
    std::vector<std::pair<double, double>> out;
    for (const ModalStep& s : r.steps) {
        if (s.parameter <= 1.0) continue;
        const int i = find_label(s, "(1,1)");
        if (i < 0) continue;
        const double N = dilatation_tension(s.parameter, mat);
        const double f_ref = to_thz(rect_prestressed_frequency(1, 1, PlateSpec{}, N, N).omega);
        out.emplace_back(s.parameter, std::abs(s.frequency(i) - f_ref) / f_ref);
    }
    return out;
}

Outcome criterion_prestress() {
    const ShellModel plate = make_square_plate(5.0, 40, 40, MaterialParams{}, {});
    std::vector<std::pair<double, double>> gaps = dilatation_gaps(plate, 1.002, 2);
    const auto wide = dilatation_gaps(plate, 1.3, 15);
    gaps.insert(gaps.end(), wide.begin(), wide.end());
    std::sort(gaps.begin(), gaps.end());
    bool monotone = true;
    for (std::size_t k = 1; k < gaps.size(); ++k) monotone = monotone && gaps[k].second > gaps[k - 1].second;
    Outcome o;
    o.pass = !gaps.empty() && std::abs(gaps.front().first - 1.001) < 1e-12 && gaps.front().second <= 0.01 && monotone;
    o.detail = "gap at J=1.001 " + num(100 * gaps.front().second, "%.4f") + "%, at J=" + num(gaps.back().first) + " " +
               num(100 * gaps.back().second, "%.4f") + "%, monotone over " + std::to_string(gaps.size()) +
               " samples: " + (monotone ? "yes" : "no");
    return o;
}

Outcome criterion_instability_locus() {
    const ShellModel plate = make_square_plate(5.0, 20, 20, MaterialParams{}, {});
    LoadProgram lp;
    lp.kind = LoadKind::AreaStretch;
    lp.start = 1.0;
    lp.end = 1.5;
    lp.steps = 50;
    ContinuationOptions opt;
    opt.num_modes = 4;
    const ModalResult r = run_continuation(plate, lp, opt);
    double J = std::nan("");
    for (const Instability& in : r.instabilities) {
        if (in.label == "lowest" && in.kind == "zero-crossing") {
            J = in.parameter;
            break;
        }
    }
    const double J_star = vanishing_shear_strain(MaterialParams{}).area_stretch;
    const double dev = std::abs(J - J_star) / J_star;
    Outcome o;
    o.pass = !std::isnan(J) && dev <= 0.01;
    o.detail = "lowest omega^2 crosses zero at J=" + num(J) + ", vanishing-shear J*=" + num(J_star) + ", deviation " +
               num(100 * dev, "%.3f") + "%";
    return o;
}

double breathing_frequency(double aspect, int circ, int axial) {
    MeshOptions opt;
    opt.boundary = Boundary::Free;
    const ShellModel tube = make_cnt(10, 10, aspect, circ, axial, MaterialParams{}, opt);
    ContinuationOptions co;
    co.num_modes = 30;
    co.shift = std::pow(2.0 * pi * 5.1, 2);
    const ModalStep s = run_continuation(tube, LoadProgram{}, co).steps.front();
    for (int i = 0; i < s.size(); ++i) {
        if (s.labels[static_cast<std::size_t>(i)].rfind("RB", 0) == 0) return s.frequency(i);
    }
    return std::nan("");
}

Outcome criterion_breathing() {
    std::vector<double> f;
    // Axial element count scales with the aspect ratio to keep the element shape.
    for (double ar : {5.669, 10.0, 15.0}) f.push_back(breathing_frequency(ar, 48, static_cast<int>(std::lround(48 * ar / 5.669))));
    const double err = std::abs(f[0] - 5.14269) / 5.14269;
    Outcome o;
    o.pass = err <= 0.02 && f[0] > f[1] && f[1] > f[2];
    o.detail = "f_RB at AR 5.669/10/15: " + num(f[0]) + " " + num(f[1]) + " " + num(f[2]) + " THz, error at 5.669 " +
               num(100 * err, "%.3f") + "%";
    return o;
}

ModalResult compression(int n, int m, double aspect, int circ, int axial, double end, int steps) {
    MeshOptions opt;
    opt.boundary = Boundary::SimplySupported;
    const ShellModel tube = make_cnt(n, m, aspect, circ, axial, MaterialParams{}, opt);
    LoadProgram lp;
    lp.kind = LoadKind::AxialStrain;
    lp.start = 0.0;
    lp.end = end;
    lp.steps = steps;
    lp.stop_on_instability = false;
    ContinuationOptions co;
    co.num_modes = 12;
    return run_continuation(tube, lp, co);
}

Outcome criterion_buckling() {
    const ModalResult zig = compression(7, 0, 15.0, 16, 96, -0.07, 35);
    const ModalResult arm = compression(7, 7, 6.4, 16, 64, -0.09, 45);
    const double bb1 = -100 * first_crossing(zig, "BB1"), bb2 = -100 * first_crossing(zig, "BB2");
    const double sh1 = -100 * first_crossing(arm, "SH1");
    const bool ok1 = std::abs(bb1 - 2.7) <= 0.4, ok2 = std::abs(bb2 - 5.4) <= 0.6, ok3 = std::abs(sh1 - 7.14) <= 0.7;
    Outcome o;
    o.pass = ok1 && ok2 && ok3;
    o.detail = "(7,0) BB1 at " + num(bb1, "%.3f") + "% (target 2.7 +- 0.4) " + (ok1 ? "ok" : "out") + ", BB2 at " +
               num(bb2, "%.3f") + "% (target 5.4 +- 0.6) " + (ok2 ? "ok" : "out") + "; (7,7) SH1 at " +
               num(sh1, "%.3f") + "% (target 7.14 +- 0.7) " + (ok3 ? "ok" : "out");
    return o;
}

Outcome criterion_properties() {
    std::ostringstream log;
    const bool suite = run_verification(log);
    int checks = 0;
    std::string failed;
    std::istringstream in(log.str());
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("PASS ", 0) == 0) ++checks;
        if (line.rfind("FAIL ", 0) == 0) failed += (failed.empty() ? "" : "; ") + line.substr(5);
    }

    // Six rigid modes of the free tube.
    MeshOptions free;
    free.boundary = Boundary::Free;
    ContinuationOptions co;
    co.num_modes = 4;
    const ModalStep tube = run_continuation(make_cnt(5, 5, 3.0, 12, 6, MaterialParams{}, free), LoadProgram{}, co).steps.front();
    int rigid = 0;
    for (bool b : tube.rigid) rigid += b ? 1 : 0;
    const bool rigid_ok = rigid == 6 && tube.max_residual <= 1e-8 && tube.max_orthogonality <= 1e-8;

    // (1,2)/(2,1) pair splits under uniaxial stretch.
    LoadProgram lp;
    lp.kind = LoadKind::Uniaxial;
    lp.start = 1.0;
    lp.end = 1.02;
    lp.steps = 2;
    co.num_modes = 4;
    const ModalResult r = run_continuation(make_square_plate(5.0, 10, 10, MaterialParams{}, {}), lp, co);
    auto split = [](const ModalStep& s) {
        const int a = find_label(s, "(1,2)"), b = find_label(s, "(2,1)");
        if (a < 0 || b < 0) return std::nan("");
        return std::abs(s.frequency(a) - s.frequency(b)) / s.frequency(a);
    };
    const double s0 = split(r.steps.front()), s1 = split(r.steps.back());
    const bool split_ok = s0 <= 1e-3 && s1 > 1e-2;

    Outcome o;
    o.pass = suite && rigid_ok && split_ok;
    o.detail = std::to_string(checks) + " oracle checks passed" + (failed.empty() ? "" : ", failed: " + failed) +
               "; free tube rigid modes " + std::to_string(rigid) + "; (1,2)/(2,1) splitting " + num(s0) +
               " at rest, " + num(s1) + " at 2% stretch";
    return o;
}

Outcome criterion_adhesion() {
    const RunConfig cfg = parse_config(R"({"scenario": "adhesion-sweep"})");
    const ShellModel disk = build_model(cfg);
    LoadProgram lp = cfg.load;
    lp.adhesion = cfg.substrate;
    ContinuationOptions co;
    co.num_modes = cfg.modes;
    const ModalResult r = run_continuation(disk, lp, co);

    // A tracked label whose omega^2 dips below 1e-3 of its zero-Gamma value and recovers.
    std::set<std::string> labels(r.steps.front().labels.begin(), r.steps.front().labels.end());
    std::string dipped;
    double dip_at = 0.0, recover_at = 0.0;
    for (const std::string& l : labels) {
        const Series s = series(r, l);
        if (s.w.empty() || s.p.front() != r.steps.front().parameter || !(s.w.front() > 0.0)) continue;
        const double floor = 1e-3 * s.w.front();
        std::size_t k = 0;
        while (k < s.w.size() && s.w[k] >= floor) ++k;
        std::size_t j = k;
        while (j < s.w.size() && s.w[j] < floor) ++j;
        if (k < s.w.size() && j < s.w.size()) {
            dipped = l;
            dip_at = s.p[k];
            recover_at = s.p[j];
            break;
        }
    }
    Outcome o;
    o.pass = !r.instabilities.empty() && !dipped.empty() && !r.solver_failure;
    std::string flagged;
    for (const Instability& in : r.instabilities) {
        flagged += (flagged.empty() ? "" : ", ") + in.label + " " + in.kind + " at " + num(in.parameter);
    }
    o.detail = std::to_string(r.instabilities.size()) + " flagged instabilities (" + flagged + "); " +
               (dipped.empty() ? "no tracked dip" : dipped + " dips at Gamma " + num(dip_at) + " N/m and recovers at " +
                                                        num(recover_at) + " N/m") +
               "; " + std::to_string(r.steps.size()) + " recorded states";
    return o;
}

} // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const std::vector<Criterion> all{{1, "analytical oracle tables", criterion_oracles},
                                     {2, "FE convergence to the oracles", criterion_convergence},
                                     {3, "prestressed plate agreement", criterion_prestress},
                                     {4, "dilatation instability locus", criterion_instability_locus},
                                     {5, "nanotube radial breathing mode", criterion_breathing},
                                     {6, "nanotube buckling strains", criterion_buckling},
                                     {7, "property suite", criterion_properties},
                                     {8, "adhesion instability", criterion_adhesion}};
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    bool all_pass = true;
    for (const Criterion& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.detail = std::string("exception: ") + e.what();
        }
        const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
                  << " [" << num(t, "%.1f") << " s]" << std::endl;
        all_pass = all_pass && o.pass;
    }
    return all_pass ? 0 : 1;
}
