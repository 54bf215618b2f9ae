/** @file verify.cpp

    @brief Built-in oracle suite behind `shellmodal verify`.
*/
#include "shellmodal/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

namespace shellmodal {

namespace {

struct Check {
    std::ostream& os;
    bool all = true;

    void operator()(const std::string& name, bool ok, const std::string& detail) {
        os << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
        all = all && ok;
    }
};

std::string num(double x, const char* f = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

/// Largest deviation of sorted computed values from sorted printed reference
/// values, in units of each reference's last printed decimal place.
double table_error(std::vector<double> got, std::vector<std::string> ref) {
    std::sort(got.begin(), got.end());
    std::sort(ref.begin(), ref.end(), [](const std::string& a, const std::string& b) { return std::stod(a) < std::stod(b); });
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const std::size_t dot = ref[i].find('.');
        const int decimals = dot == std::string::npos ? 0 : static_cast<int>(ref[i].size() - dot - 1);
        worst = std::max(worst, std::abs(got[i] - std::stod(ref[i])) * std::pow(10.0, decimals));
    }
    return worst;
}

/// Frequencies of the (m, n) pairs shown in the circular-plate tables.
std::vector<double> circular_table(const PlateSpec& spec) {
    static const std::vector<std::pair<int, int>> shown{{0, 0}, {1, 0}, {2, 0}, {3, 0},
                                                        {0, 1}, {1, 1}, {2, 1}, {5, 0}};
    std::vector<double> f;
    for (const auto& [m, n] : shown) {
        const double g = circular_char_roots(m, n + 1, spec.boundary)[static_cast<std::size_t>(n)];
        f.push_back(to_thz(circular_frequency(g, spec)));
    }
    return f;
}

VecX random_vector(Eigen::Index n, double scale, std::mt19937& gen) {
    std::uniform_real_distribution<double> d(-scale, scale);
    VecX v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = d(gen);
    return v;
}

/// Central-difference checks of force against energy and tangent against force.
void derivative_checks(const std::string& name, const ShellModel& model, double amplitude, Check& check) {
    std::mt19937 gen(7);
    const VecX u = random_vector(model.num_dofs(), amplitude, gen);
    const VecX d = random_vector(model.num_dofs(), 1.0, gen);
    auto energy = [&](const VecX& x) { return strain_energy_total(model, x) + penalty_energy(model, x); };
    auto force = [&](const VecX& x, SpMat* K) {
        VecX f = VecX::Zero(model.num_dofs());
        assemble_internal(model, x, f, K);
        assemble_penalties(model, x, f, K);
        return f;
    };
    SpMat K;
    const VecX f = force(u, &K);
    const double h = 1e-6;
    const double dE = (energy(u + h * d) - energy(u - h * d)) / (2.0 * h);
    const double e1 = std::abs(dE - f.dot(d)) / std::max(std::abs(f.dot(d)), 1e-12);
    const VecX df = (force(u + h * d, nullptr) - force(u - h * d, nullptr)) / (2.0 * h);
    const double e2 = (df - K * d).norm() / std::max((K * d).norm(), 1e-12);
    check(name + " force = dE/du", e1 <= 1e-6, "relative error " + num(e1));
    check(name + " stiffness = df/du", e2 <= 1e-6, "relative error " + num(e2));
}

} // namespace

bool run_verification(std::ostream& os) {
    Check check{os};

    // Rectangle table: nine lowest frequencies of the 5 nm simply supported square.
    {
        const PlateSpec spec;
        std::vector<double> f;
        for (int m = 1; m <= 6; ++m) {
            for (int n = 1; n <= 6; ++n) f.push_back(to_thz(rect_ss_frequency(m, n, spec)));
        }
        std::sort(f.begin(), f.end());
        f.resize(9);
        const std::vector<std::string> ref{"0.07027", "0.17568", "0.17568", "0.28109", "0.35136",
                                           "0.35136", "0.45677", "0.45677", "0.59732"};
        const double err = table_error(f, ref);
        check("square SS table (9 values)", err <= 1.0, "max deviation " + num(err) + " units of the last printed digit");
    }
    // Circular tables, radius 5 nm.
    for (Boundary b : {Boundary::SimplySupported, Boundary::Clamped}) {
        PlateSpec spec;
        spec.shape = PlateShape::Circle;
        spec.boundary = b;
        const std::vector<std::string> ref =
            b == Boundary::Clamped
                ? std::vector<std::string>{"0.03636", "0.07568", "0.12416", "0.18167",
                                           "0.14158", "0.21655", "0.30112", "0.323038"}
                : std::vector<std::string>{"0.01581", "0.04806", "0.08987", "0.14099",
                                           "0.10453", "0.17136", "0.248427", "0.27008"};
        const double err = table_error(circular_table(spec), ref);
        check("circle " + to_string(b) + " table (8 values)", err <= 1.0,
              "max deviation " + num(err) + " units of the last printed digit");
        double res = 0.0;
        for (int m = 0; m <= 5; ++m) {
            for (double g : circular_char_roots(m, 4, b)) res = std::max(res, std::abs(circular_characteristic(m, g, b)));
        }
        check("circle " + to_string(b) + " root residual", res <= 1e-12, "max residual " + num(res));
    }

    // Derivative consistency at random states.
    const MaterialParams mat;
    {
        MeshOptions opt;
        opt.boundary = Boundary::Clamped;
        derivative_checks("plate", make_square_plate(5.0, 3, 3, mat, opt), 0.05, check);
        derivative_checks("disk", make_disk(5.0, 2, mat, opt), 0.05, check);
        MeshOptions tube;
        tube.boundary = Boundary::Free;
        derivative_checks("tube", make_cnt(5, 5, 2.0, 6, 3, mat, tube), 0.01, check);
    }

    // Mass: partition of unity gives total mass rho0 * area per direction.
    {
        auto total_mass = [](const ShellModel& model) {
            const SpMat M = assemble_mass(model);
            double total = 0.0;
            for (int j = 0; j < M.outerSize(); ++j) {
                for (SpMat::InnerIterator it(M, j); it; ++it) {
                    if (it.row() % 3 == 0 && it.col() % 3 == 0) total += it.value();
                }
            }
            return total;
        };
        const double plate = total_mass(make_square_plate(5.0, 4, 4, mat, {}));
        const double e1 = std::abs(plate - mat.rho0 * 25.0) / (mat.rho0 * 25.0);
        check("plate total mass", e1 <= 1e-10, "relative error " + num(e1));
        const ShellModel disk = make_disk(5.0, 3, mat, {});
        const double area = disk.reference_area();
        const double e2 = std::abs(total_mass(disk) - mat.rho0 * area) / (mat.rho0 * area);
        const double e3 = std::abs(area - pi * 25.0) / (pi * 25.0);
        check("disk total mass", e2 <= 1e-10, "relative error " + num(e2));
        check("disk integrated area", e3 <= 1e-5, "relative error " + num(e3));
    }

    // Half-space potential: minimum -Gamma at h0.
    {
        AdhesionParams p;
        p.Gamma = 0.1;
        const double d = half_space_potential_derivative(p.h0, p);
        const double v = half_space_potential(p.h0, p);
        check("adhesion potential stationary at h0", std::abs(d) <= 1e-12 && std::abs(v + p.Gamma) <= 1e-14,
              "psi'(h0) = " + num(d) + ", psi(h0) + Gamma = " + num(v + p.Gamma));
    }

    // Linear modal analysis of the plate against the oracle.
    {
        const ShellModel plate = make_square_plate(5.0, 10, 10, mat, {});
        LoadProgram none;
        ContinuationOptions opt;
        opt.num_modes = 6;
        const ModalResult r = run_continuation(plate, none, opt);
        const ModalStep& s = r.steps.front();
        const double f_ref = to_thz(rect_ss_frequency(1, 1, PlateSpec{}));
        const double err = std::abs(s.frequency(0) - f_ref) / f_ref;
        check("plate 10x10 f(1,1)", err <= 0.01, "relative error " + num(err));
        check("plate eigen residual and M-orthonormality", s.max_residual <= 1e-8 && s.max_orthogonality <= 1e-8,
              "residual " + num(s.max_residual) + ", orthogonality " + num(s.max_orthogonality));
        const double split = std::abs(s.frequency(1) - s.frequency(2)) / s.frequency(1);
        check("plate (1,2)/(2,1) degeneracy", split <= 1e-3, "relative splitting " + num(split));
    }
    os << (check.all ? "all checks passed" : "some checks FAILED") << '\n';
    return check.all;
}

} // namespace shellmodal
