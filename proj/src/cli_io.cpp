/** @file cli_io.cpp

    @brief Config parsing with unknown-key rejection, scenario runs with
    incremental CSV/VTK emission and the run manifest.
*/
#include "shellmodal/cli_io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#ifndef SHELLMODAL_VERSION
#define SHELLMODAL_VERSION "0.0.0"
#endif

namespace shellmodal {

using json = nlohmann::json;

namespace {

constexpr double deg = pi / 180.0;
/// kg/m^2 -> internal mass per nm^2 (mass unit 1e-24 kg).
constexpr double density_scale = 1e6;

const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
    static const std::vector<std::pair<Scenario, std::string>> names = {
        {Scenario::PlateModal, "plate-modal"},
        {Scenario::DiskModal, "disk-modal"},
        {Scenario::CntModal, "cnt-modal"},
        {Scenario::DilatationSweep, "dilatation-sweep"},
        {Scenario::UniaxialSweep, "uniaxial-sweep"},
        {Scenario::CompressionSweep, "compression-sweep"},
        {Scenario::AdhesionSweep, "adhesion-sweep"},
        {Scenario::AnalyticalTable, "analytical-table"},
    };
    return names;
}

bool is_sweep(Scenario s) {
    return s == Scenario::DilatationSweep || s == Scenario::UniaxialSweep || s == Scenario::CompressionSweep ||
           s == Scenario::AdhesionSweep;
}

std::string shape_key(Shape s) {
    switch (s) {
    case Shape::SquarePlate: return "square";
    case Shape::Disk: return "disk";
    case Shape::Tube: return "tube";
    }
    return "square";
}

Shape shape_from_key(const std::string& k) {
    if (k == "square") return Shape::SquarePlate;
    if (k == "disk") return Shape::Disk;
    if (k == "tube") return Shape::Tube;
    throw ConfigError("geometry.shape must be square, disk or tube (got '" + k + "')");
}

Boundary boundary_from_key(const std::string& k) {
    if (k == "SS") return Boundary::SimplySupported;
    try {
        return boundary_from_name(k);
    } catch (const InvalidArgument&) {
        throw ConfigError("boundary must be free, simply-supported (SS) or clamped (got '" + k + "')");
    }
}

/// Object reader that records consumed keys and rejects the rest.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <typename T>
    T get(const std::string& key, const T& fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        return convert<T>(key);
    }

    template <typename T>
    T require(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError("missing required key " + where(key));
        return convert<T>(key);
    }

    Reader child(const std::string& key) {
        used_.insert(key);
        static const json empty = json::object();
        return Reader(j_.contains(key) ? j_.at(key) : empty, path_.empty() ? key : path_ + "." + key);
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!used_.count(item.key())) {
                throw ConfigError("unknown or inapplicable key " + where(item.key()));
            }
        }
    }

private:
    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "config" : "'" + path_ + "'";
        return "'" + (path_.empty() ? key : path_ + "." + key) + "'";
    }

    template <typename T>
    T convert(const std::string& key) const {
        const json& v = j_.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
            return v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
            const T x = v.get<T>();
            if (!std::isfinite(x)) throw ConfigError(where(key) + " must be finite");
            return x;
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
            return v.get<std::string>();
        } else {
            try {
                return v.get<T>();
            } catch (const json::exception&) {
                throw ConfigError(where(key) + " has the wrong type");
            }
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void positive(double x, const std::string& name) {
    if (!(x > 0.0)) throw ConfigError(name + " must be positive");
}

void at_least(int x, int lo, const std::string& name) {
    if (x < lo) throw ConfigError(name + " must be at least " + std::to_string(lo));
}

/// Scenario defaults applied before reading the file.
RunConfig defaults_for(Scenario s) {
    RunConfig c;
    c.scenario = s;
    c.load.stop_on_instability = true;
    switch (s) {
    case Scenario::PlateModal:
        c.shape = Shape::SquarePlate;
        c.elements = 20;
        break;
    case Scenario::DiskModal:
        c.shape = Shape::Disk;
        c.boundary = Boundary::Clamped;
        c.radius_nm = 5.0;
        c.elements = 8;
        break;
    case Scenario::CntModal:
        c.shape = Shape::Tube;
        c.boundary = Boundary::Free;
        break;
    case Scenario::DilatationSweep:
        c.elements = 10;
        c.load.kind = LoadKind::AreaStretch;
        c.load.start = 1.0;
        c.load.end = 1.5;
        c.load.steps = 50;
        break;
    case Scenario::UniaxialSweep:
        c.elements = 10;
        c.load.kind = LoadKind::Uniaxial;
        c.load.start = 1.0;
        c.load.end = 1.1;
        c.load.steps = 20;
        break;
    case Scenario::CompressionSweep:
        c.shape = Shape::Tube;
        c.chirality_n = 7;
        c.chirality_m = 7;
        c.aspect_ratio = 6.4;
        c.elements_circ = 16;
        c.elements_axial = 64;
        c.load.kind = LoadKind::AxialStrain;
        c.load.start = 0.0;
        c.load.end = -0.09;
        c.load.steps = 45;
        break;
    case Scenario::AdhesionSweep:
        c.shape = Shape::Disk;
        c.radius_nm = 20.0;
        c.elements = 6;
        c.modes = 6;
        c.load.kind = LoadKind::Adhesion;
        c.load.start = 0.0;
        c.load.end = 0.3;
        c.load.steps = 30;
        c.load.min_step_fraction = 1e-7;
        c.load.arclength = true;
        c.load.stop_on_instability = false;
        c.load.jump_limit = 0.2;
        c.substrate.profile.z_s = -2.0;
        break;
    case Scenario::AnalyticalTable: break;
    }
    return c;
}

bool shape_allowed(Scenario s, Shape sh) {
    switch (s) {
    case Scenario::PlateModal: return sh == Shape::SquarePlate;
    case Scenario::DiskModal: return sh == Shape::Disk;
    case Scenario::CntModal:
    case Scenario::CompressionSweep: return sh == Shape::Tube;
    case Scenario::DilatationSweep:
    case Scenario::UniaxialSweep:
    case Scenario::AdhesionSweep: return sh != Shape::Tube;
    case Scenario::AnalyticalTable: return false;
    }
    return false;
}

void read_table(Reader r, RunConfig& c) {
    const std::string shape = r.get<std::string>("shape", c.table.shape == PlateShape::Rectangle ? "rectangle" : "circle");
    if (shape == "rectangle") {
        c.table.shape = PlateShape::Rectangle;
    } else if (shape == "circle") {
        c.table.shape = PlateShape::Circle;
    } else {
        throw ConfigError("table.shape must be rectangle or circle");
    }
    c.table.a = r.get("a_nm", c.table.a);
    if (c.table.shape == PlateShape::Rectangle) {
        c.table.b = r.get("b_nm", c.table.b);
    }
    c.table.boundary = boundary_from_key(r.get<std::string>("boundary", to_string(c.table.boundary)));
    c.table.c_bend = r.get("c_bend_nN_nm", c.table.c_bend);
    c.table.rho = r.get("density_kg_per_m2", c.table.rho / density_scale) * density_scale;
    c.table_m_max = r.get("m_max", c.table_m_max);
    c.table_n_max = r.get("n_max", c.table_n_max);
    r.finish();
    positive(c.table.a, "table.a_nm");
    positive(c.table.b, "table.b_nm");
    if (c.table.boundary == Boundary::Free) throw ConfigError("table.boundary must be simply-supported or clamped");
    if (c.table.shape == PlateShape::Rectangle && c.table.boundary != Boundary::SimplySupported) {
        throw ConfigError("rectangle tables exist only for simply supported edges");
    }
    at_least(c.table_m_max, c.table.shape == PlateShape::Rectangle ? 1 : 0, "table.m_max");
    at_least(c.table_n_max, 1, "table.n_max");
    if (c.table_m_max > 10 || c.table_n_max > 10) throw ConfigError("table orders are limited to 10");
    c.table.validate();
}

void read_load(Reader r, RunConfig& c) {
    std::string lo, hi;
    switch (c.load.kind) {
    case LoadKind::AreaStretch: lo = "J_start"; hi = "J_end"; break;
    case LoadKind::Uniaxial: lo = "stretch_start"; hi = "stretch_end"; break;
    case LoadKind::AxialStrain: lo = "axial_strain_start"; hi = "axial_strain_end"; break;
    case LoadKind::Adhesion: lo = "gamma_start_N_per_m"; hi = "gamma_end_N_per_m"; break;
    case LoadKind::None: break;
    }
    c.load.start = r.get(lo, c.load.start);
    c.load.end = r.get(hi, c.load.end);
    c.load.steps = r.get("steps", c.load.steps);
    if (c.load.kind == LoadKind::Uniaxial) {
        c.load.direction_angle = r.get("direction_angle_deg", c.load.direction_angle / deg) * deg;
    }
    c.load.min_step_fraction = r.get("min_step_fraction", c.load.min_step_fraction);
    c.load.stop_on_instability = r.get("stop_on_instability", c.load.stop_on_instability);
    c.load.record_substeps = r.get("record_substeps", c.load.record_substeps);
    c.load.jump_limit = r.get("jump_limit_nm", c.load.jump_limit);
    c.load.arclength = r.get("arclength", c.load.arclength);
    r.finish();
    at_least(c.load.steps, 1, "load.steps");
}

void read_substrate(Reader r, RunConfig& c) {
    SubstrateProfile& p = c.substrate.profile;
    c.substrate.h0 = r.get("h0_nm", c.substrate.h0);
    const std::string kind = r.get<std::string>("kind", p.kind == SubstrateProfile::Kind::Flat ? "flat" : "cavity");
    if (kind == "flat") {
        p.kind = SubstrateProfile::Kind::Flat;
    } else if (kind == "cavity") {
        p.kind = SubstrateProfile::Kind::Cavity;
    } else {
        throw ConfigError("substrate.kind must be flat or cavity");
    }
    p.z_s = r.get("surface_height_nm", p.z_s);
    if (p.kind == SubstrateProfile::Kind::Cavity) {
        p.R1 = r.get("cavity_radius_nm", p.R1);
        p.R2 = r.get("fillet_width_nm", p.R2);
        p.depth = r.get("depth_nm", p.depth);
        const std::vector<double> ctr = r.get("center_nm", std::vector<double>{p.center[0], p.center[1]});
        if (ctr.size() != 2) throw ConfigError("substrate.center_nm must hold two numbers");
        p.center = Vec2(ctr[0], ctr[1]);
    }
    r.finish();
    positive(c.substrate.h0, "substrate.h0_nm");
    if (!(p.z_s < 0.0)) throw ConfigError("substrate.surface_height_nm must lie below the sheet (negative)");
}

void read_geometry(Reader r, RunConfig& c) {
    c.shape = shape_from_key(r.get<std::string>("shape", shape_key(c.shape)));
    if (!shape_allowed(c.scenario, c.shape)) {
        throw ConfigError("geometry.shape '" + shape_key(c.shape) + "' is not valid for scenario " +
                          to_string(c.scenario));
    }
    switch (c.shape) {
    case Shape::SquarePlate:
        c.edge_length_nm = r.get("edge_length_nm", c.edge_length_nm);
        c.elements = r.get("elements", c.elements);
        break;
    case Shape::Disk:
        c.radius_nm = r.get("radius_nm", c.radius_nm);
        c.elements = r.get("elements", c.elements);
        break;
    case Shape::Tube: {
        const std::vector<int> ch = r.get("chirality", std::vector<int>{c.chirality_n, c.chirality_m});
        if (ch.size() != 2) throw ConfigError("geometry.chirality must be [n, m]");
        c.chirality_n = ch[0];
        c.chirality_m = ch[1];
        c.aspect_ratio = r.get("aspect_ratio", c.aspect_ratio);
        c.elements_circ = r.get("elements_circumferential", c.elements_circ);
        c.elements_axial = r.get("elements_axial", c.elements_axial);
        break;
    }
    }
    if (c.shape != Shape::Tube) c.armchair_angle_deg = r.get("armchair_angle_deg", c.armchair_angle_deg);
    c.degree = r.get("degree", c.degree);
    c.quadrature = r.get("quadrature", c.quadrature);
    r.finish();
    positive(c.edge_length_nm, "geometry.edge_length_nm");
    positive(c.radius_nm, "geometry.radius_nm");
    positive(c.aspect_ratio, "geometry.aspect_ratio");
    at_least(c.elements, 1, "geometry.elements");
    at_least(c.elements_circ, 3, "geometry.elements_circumferential");
    at_least(c.elements_axial, 1, "geometry.elements_axial");
    if (c.chirality_n < 0 || c.chirality_m < 0 || c.chirality_n + c.chirality_m == 0) {
        throw ConfigError("geometry.chirality must be non-negative and not (0, 0)");
    }
    if (c.degree < 2 || c.degree > 4) throw ConfigError("geometry.degree must be 2, 3 or 4 (C1 continuity)");
    if (c.quadrature != 0 && (c.quadrature < 1 || c.quadrature > 10)) {
        throw ConfigError("geometry.quadrature must be 0 (automatic) or 1..10");
    }
}

} // namespace

Scenario scenario_from_name(const std::string& name) {
    for (const auto& [s, n] : scenario_names()) {
        if (n == name) return s;
    }
    std::string list;
    for (const auto& [s, n] : scenario_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown scenario '" + name + "' (expected one of " + list + ")");
}

std::string to_string(Scenario s) {
    for (const auto& [sc, n] : scenario_names()) {
        if (sc == s) return n;
    }
    return "unknown";
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Reader root(doc, "");
    RunConfig c = defaults_for(scenario_from_name(root.require<std::string>("scenario")));
    c.output_dir = root.get("output_dir", c.output_dir);
    if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");

    if (c.scenario == Scenario::AnalyticalTable) {
        read_table(root.child("table"), c);
        root.finish();
        return c;
    }

    {
        Reader m = root.child("material");
        c.membrane = m.get("membrane", c.membrane);
        c.bending = m.get("bending", c.bending);
        m.finish();
        membrane_set_from_name(c.membrane);
        bending_set_from_name(c.bending);
    }
    read_geometry(root.child("geometry"), c);
    c.boundary = boundary_from_key(root.get<std::string>("boundary", to_string(c.boundary)));
    if (c.scenario == Scenario::AdhesionSweep && c.boundary == Boundary::Free) {
        throw ConfigError("adhesion sweeps need a supported boundary");
    }
    if ((c.scenario == Scenario::DilatationSweep || c.scenario == Scenario::UniaxialSweep ||
         c.scenario == Scenario::CompressionSweep) &&
        c.boundary == Boundary::Free) {
        throw ConfigError("boundary-driven sweeps need a supported boundary");
    }
    {
        Reader p = root.child("penalty");
        if (c.boundary == Boundary::Clamped) c.kp_factor = p.get("kp_factor", c.kp_factor);
        if (c.shape == Shape::Disk) c.interface_factor = p.get("interface_factor", c.interface_factor);
        p.finish();
        positive(c.kp_factor, "penalty.kp_factor");
        positive(c.interface_factor, "penalty.interface_factor");
    }
    if (is_sweep(c.scenario)) {
        read_load(root.child("load"), c);
    }
    if (c.scenario == Scenario::AdhesionSweep) {
        read_substrate(root.child("substrate"), c);
    }
    {
        Reader e = root.child("eigen");
        c.modes = e.get("modes", c.modes);
        c.shift_THz = e.get("shift_THz", c.shift_THz);
        c.eigen.dense_threshold = e.get("dense_threshold", c.eigen.dense_threshold);
        c.eigen.block_size = e.get("block_size", c.eigen.block_size);
        c.eigen.tolerance = e.get("tolerance", c.eigen.tolerance);
        c.eigen.seed = e.get("seed", c.eigen.seed);
        c.mac_threshold = e.get("mac_threshold", c.mac_threshold);
        e.finish();
        at_least(c.modes, 1, "eigen.modes");
        at_least(c.eigen.dense_threshold, 0, "eigen.dense_threshold");
        at_least(c.eigen.block_size, 1, "eigen.block_size");
        positive(c.eigen.tolerance, "eigen.tolerance");
        if (!(c.mac_threshold > 0.0 && c.mac_threshold <= 1.0)) throw ConfigError("eigen.mac_threshold must lie in (0, 1]");
    }
    {
        Reader n = root.child("newton");
        c.newton.max_iterations = n.get("max_iterations", c.newton.max_iterations);
        c.newton.relative_tolerance = n.get("relative_tolerance", c.newton.relative_tolerance);
        c.newton.absolute_tolerance = n.get("absolute_tolerance_nN", c.newton.absolute_tolerance);
        c.newton.max_increment = n.get("max_increment_nm", c.newton.max_increment);
        c.newton.fallback_iterations = n.get("fallback_iterations", c.newton.fallback_iterations);
        n.finish();
        at_least(c.newton.max_iterations, 1, "newton.max_iterations");
        at_least(c.newton.fallback_iterations, 0, "newton.fallback_iterations");
        positive(c.newton.relative_tolerance, "newton.relative_tolerance");
        positive(c.newton.absolute_tolerance, "newton.absolute_tolerance_nN");
        if (c.newton.max_increment < 0.0) throw ConfigError("newton.max_increment_nm must be non-negative");
    }
    {
        Reader o = root.child("output");
        c.vtk = o.get("vtk", c.vtk);
        c.vtk_samples_per_element = o.get("vtk_samples_per_element", c.vtk_samples_per_element);
        c.vtk_every = o.get("vtk_every", c.vtk_every);
        o.finish();
        at_least(c.vtk_samples_per_element, 1, "output.vtk_samples_per_element");
        at_least(c.vtk_every, 1, "output.vtk_every");
    }
    root.finish();
    if (c.load.kind != LoadKind::None) {
        c.load.adhesion = c.substrate;
        c.load.validate();
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string resolved_config_json(const RunConfig& c) {
    json j;
    j["scenario"] = to_string(c.scenario);
    j["output_dir"] = c.output_dir;
    if (c.scenario == Scenario::AnalyticalTable) {
        json t;
        t["shape"] = c.table.shape == PlateShape::Rectangle ? "rectangle" : "circle";
        t["a_nm"] = c.table.a;
        if (c.table.shape == PlateShape::Rectangle) t["b_nm"] = c.table.b;
        t["boundary"] = to_string(c.table.boundary);
        t["c_bend_nN_nm"] = c.table.c_bend;
        t["density_kg_per_m2"] = c.table.rho / density_scale;
        t["m_max"] = c.table_m_max;
        t["n_max"] = c.table_n_max;
        j["table"] = t;
        return j.dump(2);
    }
    j["material"] = {{"membrane", c.membrane}, {"bending", c.bending}};
    json g;
    g["shape"] = shape_key(c.shape);
    switch (c.shape) {
    case Shape::SquarePlate:
        g["edge_length_nm"] = c.edge_length_nm;
        g["elements"] = c.elements;
        break;
    case Shape::Disk:
        g["radius_nm"] = c.radius_nm;
        g["elements"] = c.elements;
        break;
    case Shape::Tube:
        g["chirality"] = {c.chirality_n, c.chirality_m};
        g["aspect_ratio"] = c.aspect_ratio;
        g["elements_circumferential"] = c.elements_circ;
        g["elements_axial"] = c.elements_axial;
        break;
    }
    if (c.shape != Shape::Tube) g["armchair_angle_deg"] = c.armchair_angle_deg;
    g["degree"] = c.degree;
    g["quadrature"] = c.quadrature;
    j["geometry"] = g;
    j["boundary"] = to_string(c.boundary);
    json pen = json::object();
    if (c.boundary == Boundary::Clamped) pen["kp_factor"] = c.kp_factor;
    if (c.shape == Shape::Disk) pen["interface_factor"] = c.interface_factor;
    j["penalty"] = pen;
    if (is_sweep(c.scenario)) {
        json l;
        const char* lo = "";
        const char* hi = "";
        switch (c.load.kind) {
        case LoadKind::AreaStretch: lo = "J_start"; hi = "J_end"; break;
        case LoadKind::Uniaxial: lo = "stretch_start"; hi = "stretch_end"; break;
        case LoadKind::AxialStrain: lo = "axial_strain_start"; hi = "axial_strain_end"; break;
        case LoadKind::Adhesion: lo = "gamma_start_N_per_m"; hi = "gamma_end_N_per_m"; break;
        case LoadKind::None: break;
        }
        l[lo] = c.load.start;
        l[hi] = c.load.end;
        l["steps"] = c.load.steps;
        if (c.load.kind == LoadKind::Uniaxial) l["direction_angle_deg"] = c.load.direction_angle / deg;
        l["min_step_fraction"] = c.load.min_step_fraction;
        l["stop_on_instability"] = c.load.stop_on_instability;
        l["record_substeps"] = c.load.record_substeps;
        l["jump_limit_nm"] = c.load.jump_limit;
        l["arclength"] = c.load.arclength;
        j["load"] = l;
    }
    if (c.scenario == Scenario::AdhesionSweep) {
        const SubstrateProfile& p = c.substrate.profile;
        json s;
        s["h0_nm"] = c.substrate.h0;
        s["kind"] = p.kind == SubstrateProfile::Kind::Flat ? "flat" : "cavity";
        s["surface_height_nm"] = p.z_s;
        if (p.kind == SubstrateProfile::Kind::Cavity) {
            s["cavity_radius_nm"] = p.R1;
            s["fillet_width_nm"] = p.R2;
            s["depth_nm"] = p.depth;
            s["center_nm"] = {p.center[0], p.center[1]};
        }
        j["substrate"] = s;
    }
    j["eigen"] = {{"modes", c.modes},
                  {"shift_THz", c.shift_THz},
                  {"dense_threshold", c.eigen.dense_threshold},
                  {"block_size", c.eigen.block_size},
                  {"tolerance", c.eigen.tolerance},
                  {"seed", c.eigen.seed},
                  {"mac_threshold", c.mac_threshold}};
    j["newton"] = {{"max_iterations", c.newton.max_iterations},
                   {"relative_tolerance", c.newton.relative_tolerance},
                   {"absolute_tolerance_nN", c.newton.absolute_tolerance},
                   {"max_increment_nm", c.newton.max_increment},
                   {"fallback_iterations", c.newton.fallback_iterations}};
    j["output"] = {{"vtk", c.vtk}, {"vtk_samples_per_element", c.vtk_samples_per_element}, {"vtk_every", c.vtk_every}};
    return j.dump(2);
}

ShellModel build_model(const RunConfig& c) {
    MaterialParams mat = MaterialParams::preset(membrane_set_from_name(c.membrane), bending_set_from_name(c.bending));
    MeshOptions opt;
    opt.degree = c.degree;
    opt.boundary = c.boundary;
    opt.kp_factor = c.kp_factor;
    opt.interface_factor = c.interface_factor;
    opt.armchair_angle = c.armchair_angle_deg * deg;
    opt.quadrature = c.quadrature;
    switch (c.shape) {
    case Shape::SquarePlate: return make_square_plate(c.edge_length_nm, c.elements, c.elements, mat, opt);
    case Shape::Disk: return make_disk(c.radius_nm, c.elements, mat, opt);
    case Shape::Tube:
        return make_cnt(c.chirality_n, c.chirality_m, c.aspect_ratio, c.elements_circ, c.elements_axial, mat, opt);
    }
    throw ConfigError("unsupported geometry");
}

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

void write_csv_header(std::ostream& os) { os << "step,parameter,label,f_THz,omega2,unstable,f_normalized\n"; }

void write_csv_step(const ModalResult& r, int k, std::ostream& os) {
    const ModalStep& s = r.steps[static_cast<std::size_t>(k)];
    for (int i = 0; i < s.size(); ++i) {
        const double f = s.frequency(i);
        const double fn = r.reference_frequency != 0.0 ? f / r.reference_frequency : std::nan("");
        os << k << ',' << fmt17(s.parameter) << ',' << csv_field(s.labels[static_cast<std::size_t>(i)]) << ','
           << fmt17(f) << ',' << fmt17(s.omega2[i]) << ',' << (s.unstable(i) ? 1 : 0) << ',' << fmt17(fn) << '\n';
    }
}

std::string step_file(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "modes_step%04d.vtk", k);
    return buf;
}

std::string versions_compiler() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
}

json versions_json() {
    json v;
    v["shellmodal"] = SHELLMODAL_VERSION;
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    v["compiler"] = versions_compiler();
    return v;
}

void write_manifest(const RunConfig& c, const json& extra, double wall, const std::filesystem::path& dir) {
    json m = extra;
    m["resolved_config"] = json::parse(resolved_config_json(c));
    m["versions"] = versions_json();
    m["wall_time_s"] = wall;
    std::ofstream out(dir / "manifest.json");
    out << m.dump(2) << '\n';
    if (!out) throw ShellError("cli_io", "cannot write manifest.json");
}

std::vector<VecX> full_modes(const ShellModel& model, const DofMap& map, const ModalStep& s) {
    std::vector<VecX> modes;
    for (int i = 0; i < s.size(); ++i) {
        VecX full = VecX::Zero(model.num_dofs());
        map.scatter(s.vectors.col(i), full);
        modes.push_back(std::move(full));
    }
    return modes;
}

} // namespace

void write_frequencies_csv(const ModalResult& result, std::ostream& os) {
    write_csv_header(os);
    for (int k = 0; k < static_cast<int>(result.steps.size()); ++k) write_csv_step(result, k, os);
}

void write_analytical_csv(const PlateSpec& spec, int m_max, int n_max, std::ostream& os) {
    spec.validate();
    os << "shape,boundary,a_nm,b_nm,m,n,gamma,omega_rad_per_ps,f_THz\n";
    const std::string shape = spec.shape == PlateShape::Rectangle ? "rectangle" : "circle";
    const std::string bnd = to_string(spec.boundary);
    const std::string b = spec.shape == PlateShape::Rectangle ? fmt17(spec.b) : "";
    if (spec.shape == PlateShape::Rectangle) {
        for (int m = 1; m <= m_max; ++m) {
            for (int n = 1; n <= n_max; ++n) {
                const double w = rect_ss_frequency(m, n, spec);
                os << shape << ',' << bnd << ',' << fmt17(spec.a) << ',' << b << ',' << m << ',' << n << ",,"
                   << fmt17(w) << ',' << fmt17(to_thz(w)) << '\n';
            }
        }
        return;
    }
    for (int m = 0; m <= m_max; ++m) {
        const std::vector<double> roots = circular_char_roots(m, n_max, spec.boundary);
        for (int n = 0; n < n_max; ++n) {
            const double g = roots[static_cast<std::size_t>(n)];
            const double w = circular_frequency(g, spec);
            os << shape << ',' << bnd << ',' << fmt17(spec.a) << ',' << b << ',' << m << ',' << n << ','
               << fmt17(g) << ',' << fmt17(w) << ',' << fmt17(to_thz(w)) << '\n';
        }
    }
}

void write_mode_vtk(const ShellModel& model, const std::vector<VecX>& modes, const std::vector<std::string>& labels,
                    int s, const std::string& title, std::ostream& os) {
    if (s < 1) throw InvalidArgument("cli_io", "VTK sampling needs at least one subdivision per element");
    for (const VecX& v : modes) {
        if (v.size() != model.num_dofs()) throw InvalidArgument("cli_io", "mode vector length does not match the model");
    }
    std::vector<Vec3> points;
    std::vector<std::vector<std::pair<int, double>>> weights;  // per sample: (node, N)
    std::vector<std::array<int, 4>> quads;
    for (std::size_t p = 0; p < model.patches.size(); ++p) {
        const NurbsPatch& patch = model.patches[p];
        for (int e = 0; e < patch.num_elements(); ++e) {
            const auto box = patch.element_box(e);
            const int base = static_cast<int>(points.size());
            for (int j = 0; j <= s; ++j) {
                for (int i = 0; i <= s; ++i) {
                    const Vec2 xi(box[0] + (box[1] - box[0]) * i / s, box[2] + (box[3] - box[2]) * j / s);
                    const ElementBasis eb = basis_eval(patch, e, xi);
                    Vec3 x = Vec3::Zero();
                    std::vector<std::pair<int, double>> w;
                    for (std::size_t a = 0; a < eb.local.size(); ++a) {
                        const int node = model.patch_nodes[p][static_cast<std::size_t>(eb.local[a])];
                        const double N = eb.basis.N[static_cast<Eigen::Index>(a)];
                        x += N * model.nodes[static_cast<std::size_t>(node)];
                        w.emplace_back(node, N);
                    }
                    points.push_back(x);
                    weights.push_back(std::move(w));
                }
            }
            for (int j = 0; j < s; ++j) {
                for (int i = 0; i < s; ++i) {
                    const int a = base + i + (s + 1) * j;
                    quads.push_back({a, a + 1, a + s + 2, a + s + 1});
                }
            }
        }
    }
    const int n_samples = static_cast<int>(points.size());
    const int n_total = n_samples + model.num_nodes();

    auto value = [&](const VecX& mode, int pt) {
        if (pt >= n_samples) return Vec3(mode.segment<3>(3 * (pt - n_samples)));
        Vec3 d = Vec3::Zero();
        for (const auto& [node, N] : weights[static_cast<std::size_t>(pt)]) d += N * mode.segment<3>(3 * node);
        return d;
    };
    auto num = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", std::abs(x) < 1e-300 ? 0.0 : x);
        return std::string(buf);
    };

    std::string head = title;
    for (std::size_t i = 0; i < labels.size(); ++i) head += (i == 0 ? " | modes: " : " ") + labels[i];
    if (head.size() > 250) head.resize(250);
    for (char& ch : head) {
        if (ch == '\n') ch = ' ';
    }
    os << "# vtk DataFile Version 3.0\n" << head << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << n_total << " double\n";
    for (const Vec3& x : points) os << num(x[0]) << ' ' << num(x[1]) << ' ' << num(x[2]) << '\n';
    for (const Vec3& x : model.nodes) os << num(x[0]) << ' ' << num(x[1]) << ' ' << num(x[2]) << '\n';
    const std::size_t n_cells = quads.size() + model.nodes.size();
    os << "CELLS " << n_cells << ' ' << 5 * quads.size() + 2 * model.nodes.size() << '\n';
    for (const auto& q : quads) os << "4 " << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << '\n';
    for (int i = 0; i < model.num_nodes(); ++i) os << "1 " << n_samples + i << '\n';
    os << "CELL_TYPES " << n_cells << '\n';
    for (std::size_t i = 0; i < quads.size(); ++i) os << "9\n";
    for (int i = 0; i < model.num_nodes(); ++i) os << "1\n";
    os << "CELL_DATA " << n_cells << "\nSCALARS control_point int 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < quads.size(); ++i) os << "0\n";
    for (int i = 0; i < model.num_nodes(); ++i) os << "1\n";
    os << "POINT_DATA " << n_total << '\n';

    auto emit = [&](const VecX& mode, const std::string& suffix) {
        std::vector<Vec3> d(static_cast<std::size_t>(n_total));
        for (int pt = 0; pt < n_total; ++pt) d[static_cast<std::size_t>(pt)] = value(mode, pt);
        os << "VECTORS mode_displacement" << suffix << " double\n";
        for (const Vec3& v : d) os << num(v[0]) << ' ' << num(v[1]) << ' ' << num(v[2]) << '\n';
        os << "SCALARS mode_magnitude" << suffix << " double 1\nLOOKUP_TABLE default\n";
        for (const Vec3& v : d) os << num(v.norm()) << '\n';
    };
    const VecX zero = VecX::Zero(model.num_dofs());
    emit(modes.empty() ? zero : modes.front(), "");
    for (std::size_t i = 0; i < modes.size(); ++i) {
        char suffix[16];
        std::snprintf(suffix, sizeof suffix, "_%02zu", i + 1);
        emit(modes[i], suffix);
    }
}

void write_mode_vtk(const ShellModel& model, const std::vector<VecX>& modes, const std::vector<std::string>& labels,
                    int samples_per_element, const std::string& title, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ShellError("cli_io", "cannot open '" + path + "' for writing");
    write_mode_vtk(model, modes, labels, samples_per_element, title, out);
    if (!out) throw ShellError("cli_io", "write to '" + path + "' failed");
}

int run(const RunConfig& c, std::ostream& log) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    const fs::path dir(c.output_dir);

    if (c.scenario == Scenario::AnalyticalTable) {
        std::ostringstream csv;
        try {
            write_analytical_csv(c.table, c.table_m_max, c.table_n_max, csv);
        } catch (const InvalidArgument& e) {
            log << "error (validation) " << e.what() << '\n';
            return exit_validation;
        }
        fs::create_directories(dir);
        std::ofstream(dir / "frequencies.csv") << csv.str();
        write_manifest(c, {{"status", "ok"}, {"exit_code", exit_ok}, {"outputs", {"frequencies.csv"}}}, elapsed(), dir);
        log << "wrote " << (dir / "frequencies.csv").string() << '\n';
        return exit_ok;
    }

    // Everything that can be rejected up front is checked before any output exists.
    std::unique_ptr<ShellModel> model;
    LoadProgram program = c.load;
    program.adhesion = c.substrate;
    try {
        model = std::make_unique<ShellModel>(build_model(c));
        const LoadedModel probe(*model, program);
        if (probe.dofs().num_free() == 0) throw InvalidArgument("cli_io", "the model has no free dofs");
    } catch (const InvalidArgument& e) {
        log << "error (validation) " << e.what() << '\n';
        return exit_validation;
    } catch (const ConfigError& e) {
        log << "error (validation) " << e.what() << '\n';
        return exit_validation;
    }

    fs::create_directories(dir);
    std::ofstream csv(dir / "frequencies.csv");
    if (!csv) {
        log << "error cli_io: cannot create outputs in '" << dir.string() << "'\n";
        return exit_validation;
    }
    write_csv_header(csv);
    const DofMap map(*model);
    std::vector<std::string> outputs{"frequencies.csv"};
    int last_vtk = -1;
    auto emit_vtk = [&](const ModalResult& r, int k) {
        const ModalStep& s = r.steps[static_cast<std::size_t>(k)];
        const std::string name = step_file(k);
        write_mode_vtk(*model, full_modes(*model, map, s), s.labels, c.vtk_samples_per_element,
                       "shellmodal " + to_string(c.scenario) + " step " + std::to_string(k) + " parameter " +
                           fmt17(s.parameter),
                       (dir / name).string());
        outputs.push_back(name);
        last_vtk = k;
    };

    ContinuationOptions opt;
    opt.num_modes = c.modes;
    opt.shift = std::copysign(std::pow(2.0 * pi * c.shift_THz, 2), c.shift_THz);
    opt.eigen = c.eigen;
    opt.newton = c.newton;
    opt.mac_threshold = c.mac_threshold;
    opt.on_step = [&](const ModalResult& r, int k) {
        write_csv_step(r, k, csv);
        csv.flush();
        if (c.vtk && k % c.vtk_every == 0) emit_vtk(r, k);
        const ModalStep& s = r.steps[static_cast<std::size_t>(k)];
        log << "step " << k << " parameter " << fmt17(s.parameter) << (s.substep ? " (substep)" : "")
            << (s.snap ? " (snap)" : "") << ": f1 = " << (s.size() > 0 ? fmt17(s.frequency(0)) : "-") << " THz\n";
    };

    json info;
    info["model"] = {{"nodes", model->num_nodes()},
                     {"dofs", model->num_dofs()},
                     {"free_dofs", map.num_free()},
                     {"elements", model->elements.size()}};
    ModalResult result;
    int code = exit_ok;
    std::string failure;
    try {
        result = run_continuation(*model, program, opt);
        if (result.solver_failure) {
            code = exit_solver;
            failure = result.termination;
        }
    } catch (const ShellError& e) {
        code = exit_solver;
        failure = e.what();
    }
    if (c.vtk && !result.steps.empty() && last_vtk != static_cast<int>(result.steps.size()) - 1) {
        emit_vtk(result, static_cast<int>(result.steps.size()) - 1);
    }
    info["status"] = code == exit_ok ? "ok" : "solver-failure";
    info["exit_code"] = code;
    info["termination"] = code == exit_ok ? result.termination : failure;
    info["recorded_steps"] = result.steps.size();
    info["reference_frequency_THz"] = result.reference_frequency;
    json inst = json::array();
    for (const Instability& in : result.instabilities) {
        inst.push_back({{"label", in.label}, {"kind", in.kind}, {"parameter", in.parameter}, {"step", in.step}});
    }
    info["instabilities"] = inst;
    info["outputs"] = outputs;
    write_manifest(c, info, elapsed(), dir);
    for (const Instability& in : result.instabilities) {
        log << "instability " << in.kind << " of " << in.label << " at parameter " << fmt17(in.parameter) << '\n';
    }
    if (code != exit_ok) log << "error (solver) " << failure << '\n';
    return code;
}

int run_config_file(const std::string& path, const std::string& output_override, std::ostream& log) {
    RunConfig c;
    try {
        c = load_config(path);
    } catch (const ShellError& e) {
        log << "error (validation) " << e.what() << '\n';
        return exit_validation;
    }
    if (!output_override.empty()) c.output_dir = output_override;
    try {
        return run(c, log);
    } catch (const ShellError& e) {
        log << "error " << e.what() << '\n';
        return exit_solver;
    } catch (const std::exception& e) {
        log << "error cli_io: " << e.what() << '\n';
        return exit_solver;
    }
}

} // namespace shellmodal
