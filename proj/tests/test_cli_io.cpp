/** @file test_cli_io.cpp

    @brief Config validation, resolved-config round trip, reproducible
    outputs and the content of the emitted CSV and VTK files.
*/
#include "shellmodal/cli_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

using namespace shellmodal;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    static std::mt19937_64 gen(std::random_device{}());
    const fs::path p = fs::temp_directory_path() / ("shellmodal_test_" + name + "_" + std::to_string(gen()));
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

const char* small_plate = R"({
  "scenario": "plate-modal",
  "geometry": { "shape": "square", "edge_length_nm": 5.0, "elements": 6 },
  "eigen": { "modes": 4 }
})";

/// Points and named point fields of a legacy VTK file written by write_mode_vtk.
struct VtkData {
    std::vector<Vec3> points;
    std::map<std::string, std::vector<double>> scalars;
    std::map<std::string, std::vector<Vec3>> vectors;
    std::vector<std::string> labels;
};

VtkData read_vtk(const fs::path& p) {
    VtkData d;
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    const auto pos = line.find("modes:");
    if (pos != std::string::npos) {
        std::istringstream ls(line.substr(pos + 6));
        for (std::string l; ls >> l;) d.labels.push_back(l);
    }
    std::string word;
    std::size_t n = 0;
    while (in >> word) {
        if (word == "POINTS") {
            in >> n >> word;
            d.points.resize(n);
            for (Vec3& x : d.points) in >> x[0] >> x[1] >> x[2];
        } else if (word == "VECTORS") {
            std::string name;
            in >> name >> word;
            auto& v = d.vectors[name];
            v.resize(n);
            for (Vec3& x : v) in >> x[0] >> x[1] >> x[2];
        } else if (word == "SCALARS") {
            std::string name;
            int comps = 0;
            in >> name >> word >> comps >> word >> word;  // type, components, LOOKUP_TABLE default
            if (name.rfind("mode_magnitude", 0) == 0) {
                auto& s = d.scalars[name];
                s.resize(n);
                for (double& x : s) in >> x;
            }
        }
    }
    return d;
}

} // namespace

TEST(CliIo, RejectsInvalidConfigs) {
    EXPECT_THROW(parse_config("{"), ConfigError);
    EXPECT_THROW(parse_config(R"({"geometry": {"shape": "square"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"scenario": "no-such-scenario"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"scenario": "plate-modal", "colour": 1})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"scenario": "plate-modal", "eigen": {"modes": "four"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"scenario": "plate-modal", "geometry": {"shape": "tube"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"scenario": "plate-modal", "load": {"steps": 3}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"scenario": "cnt-modal", "geometry": {"radius_nm": 3.0}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"scenario": "plate-modal", "output": {"vtk_every": 0}})"), ConfigError);
    EXPECT_NO_THROW(parse_config(small_plate));
}

TEST(CliIo, ValidationFailureLeavesNoOutputs) {
    const fs::path dir = scratch_dir("bad");
    fs::create_directories(dir);
    const fs::path cfg = dir / "bad.json";
    write_text(cfg, R"({"scenario": "plate-modal", "geometry": {"elements": -3}})");
    const fs::path out = dir / "out";
    std::ostringstream log;
    EXPECT_EQ(run_config_file(cfg.string(), out.string(), log), exit_validation);
    EXPECT_FALSE(fs::exists(out));
    EXPECT_EQ(run_config_file((dir / "missing.json").string(), out.string(), log), exit_validation);
    EXPECT_FALSE(fs::exists(out));
    fs::remove_all(dir);
}

TEST(CliIo, ResolvedConfigRoundTrips) {
    for (const char* text :
         {small_plate, R"({"scenario": "adhesion-sweep"})", R"({"scenario": "compression-sweep"})",
          R"({"scenario": "cnt-modal", "eigen": {"shift_THz": 4.5}})", R"({"scenario": "analytical-table"})",
          R"({"scenario": "disk-modal", "boundary": "clamped", "penalty": {"kp_factor": 100.0}})"}) {
        const std::string once = resolved_config_json(parse_config(text));
        EXPECT_EQ(resolved_config_json(parse_config(once)), once) << text;
    }
}

TEST(CliIo, OutputsAreReproducibleFromManifest) {
    const fs::path a = scratch_dir("a"), b = scratch_dir("b"), c = scratch_dir("c");
    RunConfig cfg = parse_config(small_plate);
    std::ostringstream log;
    cfg.output_dir = a.string();
    ASSERT_EQ(run(cfg, log), exit_ok);
    cfg.output_dir = b.string();
    ASSERT_EQ(run(cfg, log), exit_ok);
    const std::string csv = slurp(a / "frequencies.csv");
    EXPECT_EQ(csv, slurp(b / "frequencies.csv"));
    EXPECT_EQ(slurp(a / "modes_step0000.vtk"), slurp(b / "modes_step0000.vtk"));

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    EXPECT_EQ(manifest.at("exit_code").get<int>(), exit_ok);
    EXPECT_TRUE(manifest.contains("versions"));
    EXPECT_TRUE(manifest.contains("wall_time_s"));
    const fs::path replay = c;
    fs::create_directories(replay);
    write_text(replay / "config.json", manifest.at("resolved_config").dump(2));
    ASSERT_EQ(run_config_file((replay / "config.json").string(), (replay / "out").string(), log), exit_ok);
    EXPECT_EQ(csv, slurp(replay / "out" / "frequencies.csv"));
    for (const fs::path& p : {a, b, c}) fs::remove_all(p);
}

TEST(CliIo, CsvLayoutAndPrecision) {
    ModalResult r;
    ModalStep s;
    s.parameter = 0.1;
    s.omega2 = VecX::Constant(2, 1.0 / 3.0);
    s.omega2[1] = -0.25;
    s.vectors = MatX::Zero(1, 2);
    s.rigid = {false, false};
    s.labels = {"(1,1)", "a,b"};
    r.steps.push_back(s);
    r.reference_frequency = s.frequency(0);
    std::ostringstream os;
    write_frequencies_csv(r, os);
    std::istringstream in(os.str());
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    EXPECT_EQ(header, "step,parameter,label,f_THz,omega2,unstable,f_normalized");
    EXPECT_EQ(row1.rfind("0,0.10000000000000001,\"(1,1)\",", 0), 0u) << row1;
    EXPECT_NE(row1.find(",0.33333333333333331,0,1"), std::string::npos) << row1;
    EXPECT_NE(row2.find("\"a,b\""), std::string::npos);
    EXPECT_NE(row2.find(",-0.25,1,"), std::string::npos) << row2;
}

TEST(CliIo, ZeroModeGivesZeroField) {
    RunConfig cfg = parse_config(small_plate);
    const ShellModel model = build_model(cfg);
    const fs::path dir = scratch_dir("zero");
    fs::create_directories(dir);
    write_mode_vtk(model, {VecX::Zero(model.num_dofs())}, {"zero"}, 3, "zero", (dir / "z.vtk").string());
    const VtkData d = read_vtk(dir / "z.vtk");
    ASSERT_FALSE(d.points.empty());
    ASSERT_EQ(d.scalars.at("mode_magnitude").size(), d.points.size());
    for (double x : d.scalars.at("mode_magnitude")) EXPECT_EQ(x, 0.0);
    for (const Vec3& v : d.vectors.at("mode_displacement")) EXPECT_EQ(v.norm(), 0.0);
    fs::remove_all(dir);
}

TEST(CliIo, PlateFundamentalHasSingleInteriorPeak) {
    RunConfig cfg = parse_config(small_plate);
    const fs::path dir = scratch_dir("peak");
    cfg.output_dir = dir.string();
    std::ostringstream log;
    ASSERT_EQ(run(cfg, log), exit_ok);
    const VtkData d = read_vtk(dir / "modes_step0000.vtk");
    ASSERT_FALSE(d.labels.empty());
    EXPECT_EQ(d.labels.front(), "(1,1)");

    // Merge coincident samples (control points trail them), then count local
    // maxima on the sample lattice.
    const std::size_t samples = d.points.size() - static_cast<std::size_t>(build_model(cfg).num_nodes());
    const double L = cfg.edge_length_nm, h = L / (cfg.elements * cfg.vtk_samples_per_element);
    std::map<std::pair<long, long>, double> grid;
    const auto& mag = d.scalars.at("mode_magnitude");
    for (std::size_t i = 0; i < samples; ++i) {
        grid[{std::lround(d.points[i][0] / h), std::lround(d.points[i][1] / h)}] = mag[i];
    }
    const long n = std::lround(L / h);
    ASSERT_EQ(grid.size(), static_cast<std::size_t>((n + 1) * (n + 1)));
    double peak = 0.0;
    for (const auto& [k, v] : grid) peak = std::max(peak, v);
    int maxima = 0, interior_minima = 0;
    for (const auto& [k, v] : grid) {
        const bool edge = k.first == 0 || k.second == 0 || k.first == n || k.second == n;
        if (edge) {
            EXPECT_LT(v, 1e-8 * peak);
            continue;
        }
        bool is_max = true, is_min = true;
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                if (dx == 0 && dy == 0) continue;
                const double w = grid.at({k.first + dx, k.second + dy});
                is_max = is_max && v >= w;
                is_min = is_min && v <= w;
            }
        }
        maxima += is_max ? 1 : 0;
        interior_minima += is_min ? 1 : 0;
    }
    EXPECT_EQ(maxima, 1);
    EXPECT_EQ(interior_minima, 0);
    fs::remove_all(dir);
}

TEST(CliIo, TubeBreathingModeIsAxisymmetricRadial) {
    RunConfig cfg = parse_config(R"({
      "scenario": "cnt-modal",
      "geometry": { "shape": "tube", "chirality": [10, 10], "aspect_ratio": 2.0,
                    "elements_circumferential": 16, "elements_axial": 8 },
      "eigen": { "modes": 12, "shift_THz": 5.0 },
      "output": { "vtk_samples_per_element": 2 }
    })");
    const fs::path dir = scratch_dir("rb");
    cfg.output_dir = dir.string();
    std::ostringstream log;
    ASSERT_EQ(run(cfg, log), exit_ok);
    const VtkData d = read_vtk(dir / "modes_step0000.vtk");
    int rb = -1;
    for (std::size_t i = 0; i < d.labels.size() && rb < 0; ++i) {
        if (d.labels[i].rfind("RB", 0) == 0) rb = static_cast<int>(i);
    }
    ASSERT_GE(rb, 0) << "no breathing mode among the computed modes";
    char name[40];
    std::snprintf(name, sizeof name, "mode_displacement_%02d", rb + 1);
    const auto& u = d.vectors.at(name);
    double radial_max = 0.0, tangential_max = 0.0, radial_min = 1e300;
    for (std::size_t i = 0; i < d.points.size(); ++i) {
        const Vec3 er = Vec3(d.points[i][0], d.points[i][1], 0.0).normalized();
        const Vec3 et(-er[1], er[0], 0.0);
        const double ur = std::abs(u[i].dot(er));
        radial_max = std::max(radial_max, ur);
        radial_min = std::min(radial_min, ur);
        tangential_max = std::max(tangential_max, std::abs(u[i].dot(et)));
    }
    EXPECT_GT(radial_min, 0.0);
    EXPECT_LE(tangential_max, 1e-6 * radial_max);
    fs::remove_all(dir);
}
