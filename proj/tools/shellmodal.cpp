/** @file shellmodal.cpp

    @brief Command-line front end: run, analytical and verify subcommands.
*/
#include "shellmodal/cli_io.hpp"

#include <CLI11.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <iostream>
#include <map>

using namespace shellmodal;

namespace {

/// Runs each config in a child process, at most `jobs` at a time. Returns
/// the largest child exit status.
int run_parallel(const std::vector<std::string>& configs, int jobs) {
    std::map<pid_t, std::string> running;
    int worst = exit_ok;
    auto reap = [&] {
        int status = 0;
        const pid_t pid = ::wait(&status);
        if (pid <= 0) return;
        const int code = WIFEXITED(status) ? WEXITSTATUS(status) : exit_solver;
        std::cerr << running[pid] << ": exit " << code << '\n';
        worst = std::max(worst, code);
        running.erase(pid);
    };
    for (const std::string& cfg : configs) {
        while (static_cast<int>(running.size()) >= jobs) reap();
        std::cout.flush();
        std::cerr.flush();
        const pid_t pid = ::fork();
        if (pid < 0) {
            std::cerr << "error cli_io: fork failed\n";
            return exit_solver;
        }
        if (pid == 0) {
            const int code = run_config_file(cfg, "", std::cerr);
            std::cerr.flush();
            ::_exit(code);
        }
        running[pid] = cfg;
    }
    while (!running.empty()) reap();
    return worst;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear modal analysis of graphene sheets and nanotubes with rotation-free isogeometric shells"};
    app.require_subcommand(1);

    std::vector<std::string> configs;
    std::string output;
    int jobs = 1;
    auto* run_cmd = app.add_subcommand("run", "Run one or more JSON run configurations");
    run_cmd->add_option("config", configs, "Config file(s)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("-o,--output", output, "Override output_dir (single config only)");
    run_cmd->add_option("-j,--jobs", jobs, "Parallel processes for several configs")->check(CLI::PositiveNumber);

    PlateSpec spec;
    std::string shape = "rectangle", boundary = "simply-supported";
    int m_max = 3, n_max = 3;
    double density = spec.rho * 1e-6;
    auto* ana = app.add_subcommand("analytical", "Print closed-form plate frequencies as CSV");
    ana->add_option("--shape", shape, "rectangle or circle")->check(CLI::IsMember({"rectangle", "circle"}));
    ana->add_option("--a-nm", spec.a, "Edge length or radius [nm]")->capture_default_str();
    ana->add_option("--b-nm", spec.b, "Second edge length [nm]")->capture_default_str();
    ana->add_option("--boundary", boundary, "simply-supported (SS) or clamped")
        ->check(CLI::IsMember({"simply-supported", "SS", "clamped"}));
    ana->add_option("--m-max", m_max, "Largest m")->capture_default_str();
    ana->add_option("--n-max", n_max, "Largest n (rectangle) or number of roots (circle)")->capture_default_str();
    ana->add_option("--c-bend-nN-nm", spec.c_bend, "Bending modulus [nN nm]")->capture_default_str();
    ana->add_option("--density-kg-per-m2", density, "Areal density [kg/m^2]")->capture_default_str();

    app.add_subcommand("verify", "Run the built-in oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }

    if (run_cmd->parsed()) {
        if (configs.size() == 1) return run_config_file(configs.front(), output, std::cerr);
        if (!output.empty()) {
            std::cerr << "error cli_io: --output needs exactly one config\n";
            return exit_validation;
        }
        return run_parallel(configs, jobs);
    }
    if (ana->parsed()) {
        try {
            spec.shape = shape == "circle" ? PlateShape::Circle : PlateShape::Rectangle;
            spec.boundary = boundary == "clamped" ? Boundary::Clamped : Boundary::SimplySupported;
            spec.rho = density * 1e6;
            if (spec.shape == PlateShape::Rectangle && spec.boundary != Boundary::SimplySupported) {
                throw InvalidArgument("analytical", "rectangle frequencies exist only for simply supported edges");
            }
            if (m_max < 0 || n_max < 1 || m_max > 10 || n_max > 10) {
                throw InvalidArgument("analytical", "orders must satisfy 0 <= m <= 10 and 1 <= n <= 10");
            }
            write_analytical_csv(spec, m_max, n_max, std::cout);
        } catch (const ShellError& e) {
            std::cerr << "error (validation) " << e.what() << '\n';
            return exit_validation;
        }
        return exit_ok;
    }
    return run_verification(std::cout) ? exit_ok : 1;
}
