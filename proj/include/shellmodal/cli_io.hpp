/** @file cli_io.hpp

    @brief Run configuration (JSON with unit-suffixed keys), scenario
    execution and result emission: frequency CSV, legacy VTK mode shapes
    and the run manifest.
*/
#pragma once

#include "shellmodal/analytical.hpp"
#include "shellmodal/solvers.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace shellmodal {

enum class Scenario {
    PlateModal,
    DiskModal,
    CntModal,
    DilatationSweep,
    UniaxialSweep,
    CompressionSweep,
    AdhesionSweep,
    AnalyticalTable
};

Scenario scenario_from_name(const std::string& name);
std::string to_string(Scenario s);

/// Fully resolved run description. Every field holds its default unless the
/// config file sets it; lengths in nm, angles in degrees, Gamma in N/m.
struct RunConfig {
    Scenario scenario = Scenario::PlateModal;
    std::string output_dir = "shellmodal_out";

    std::string membrane = "GGA";
    std::string bending = "QM";

    Shape shape = Shape::SquarePlate;
    double edge_length_nm = 5.0;
    double radius_nm = 5.0;
    int chirality_n = 10, chirality_m = 10;
    double aspect_ratio = 5.669;
    int elements = 20;          ///< plate: per side; disk: per side of the inner square
    int elements_circ = 48;     ///< tube
    int elements_axial = 48;    ///< tube
    int degree = 2;
    int quadrature = 0;
    double armchair_angle_deg = 0.0;
    Boundary boundary = Boundary::SimplySupported;
    double kp_factor = 1e3;
    double interface_factor = 1e4;

    LoadProgram load;           ///< angles in radians internally
    AdhesionParams substrate;

    int modes = 10;
    double shift_THz = 0.0;
    EigenOptions eigen;
    double mac_threshold = 0.6;
    NewtonOptions newton;

    bool vtk = true;
    int vtk_samples_per_element = 4;
    int vtk_every = 1;

    PlateSpec table;            ///< analytical-table scenario
    int table_m_max = 3, table_n_max = 3;
};

/// Parses and validates a config document; throws ConfigError (or
/// InvalidArgument from the library validators) on any problem, including
/// unknown keys and keys that do not apply to the scenario.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Config document with every field written out; parse_config() of it
/// reproduces the same RunConfig.
std::string resolved_config_json(const RunConfig& cfg);

/// Builds the model of a (non-analytical) scenario.
ShellModel build_model(const RunConfig& cfg);

/// Exit statuses of `run`.
inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_solver = 3;

/// Executes the config at `path`. `output_override` (if non-empty) replaces
/// output_dir. Diagnostics go to `log`. Validation errors leave no outputs.
int run_config_file(const std::string& path, const std::string& output_override, std::ostream& log);
int run(const RunConfig& cfg, std::ostream& log);

/// CSV header plus one row per mode of every recorded step, 17 significant digits.
void write_frequencies_csv(const ModalResult& result, std::ostream& os);

/// CSV of analytic frequencies for (m, n) up to the given orders.
void write_analytical_csv(const PlateSpec& spec, int m_max, int n_max, std::ostream& os);

/// Legacy ASCII VTK of mode shapes: each patch element is sampled on a
/// (s+1) x (s+1) grid of quads; control points follow as vertex cells.
/// `modes` holds full-length displacement vectors (3 per node).
/// Fields `mode_displacement` / `mode_magnitude` carry the first mode;
/// `mode_displacement_NN` / `mode_magnitude_NN` every mode.
void write_mode_vtk(const ShellModel& model, const std::vector<VecX>& modes, const std::vector<std::string>& labels,
                    int samples_per_element, const std::string& title, std::ostream& os);
void write_mode_vtk(const ShellModel& model, const std::vector<VecX>& modes, const std::vector<std::string>& labels,
                    int samples_per_element, const std::string& title, const std::string& path);

/// Built-in oracle suite (analytic tables, derivative consistency, mass,
/// contact potential, eigen bounds). Prints one line per check.
bool run_verification(std::ostream& os);

} // namespace shellmodal
