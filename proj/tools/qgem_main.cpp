// qgem: feasibility calculator for gravitationally entangled matter-wave
// interferometry. Every subcommand prints machine-readable CSV or JSON;
// all numeric I/O is SI unless a flag says otherwise.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qgem/backgrounds.hpp"
#include "qgem/budget.hpp"
#include "qgem/config_io.hpp"
#include "qgem/entangle.hpp"
#include "qgem/errors.hpp"
#include "qgem/interferometer.hpp"
#include "qgem/units.hpp"

using nlohmann::json;
using namespace qgem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitInfeasible = 2;

struct OutputOptions {
    std::string out;            // empty = stdout
    std::string format = "";    // "", "csv", "json": "" = subcommand default
};

void add_output_flags(CLI::App* cmd, OutputOptions& opts) {
    cmd->add_option("--out", opts.out, "Write output to this file instead of stdout");
    cmd->add_option("--format", opts.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

void emit(const OutputOptions& opts, const std::string& payload) {
    if (opts.out.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream f(opts.out, std::ios::binary);
    if (!f) throw config_error("cannot open output file '" + opts.out + "'");
    f << payload;
}

std::string json_payload(const json& j) { return j.dump(2) + "\n"; }

// A "value unit" CLI option, dimension-checked at parse time.
double parse_flag(const std::string& text, const units::dim7& dims, const std::string& name) {
    return units::parse_si(text, dims, name);
}

std::pair<int, int> parse_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw config_error("--pair expects two comma-separated spin projections, e.g. 0,-1");
    try {
        const int l = std::stoi(text.substr(0, comma));
        const int r = std::stoi(text.substr(comma + 1));
        return {l, r};
    } catch (const std::exception&) {
        throw config_error("--pair expects integers, e.g. +1,-1");
    }
}

// --set path="value unit" overrides, applied after --config.
void apply_overrides(budget::ExperimentConfig& config, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw config_error("--set expects path=value, got '" + kv + "'");
        const std::string path = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (path == "arrangement") {
            config.geometry.arrangement = ent::arrangement_from_string(value);
            continue;
        }
        if (path == "shield.enabled") {
            if (value == "true" || value == "1")
                config.shield.enabled = true;
            else if (value == "false" || value == "0")
                config.shield.enabled = false;
            else
                throw config_error("shield.enabled must be true or false");
            continue;
        }
        const units::dim7 dims = budget::parameter_dims(path); // throws on unknown
        budget::set_parameter(config, path, units::parse_si(value, dims, path));
    }
    try {
        config.validate();
    } catch (const value_error& e) {
        throw config_error(std::string("invalid config after --set: ") + e.what());
    }
}

// Shared state for the subcommands that consume an experiment config.
struct ConfigArgs {
    std::string config_path;
    std::vector<std::string> sets;

    io::LoadedConfig load() const {
        io::LoadedConfig loaded;
        if (!config_path.empty()) {
            loaded = io::load_config_file(config_path);
        } else {
            throw config_error("--config <file> is required for this subcommand");
        }
        apply_overrides(loaded.config, sets);
        return loaded;
    }
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--config", args.config_path, "Experiment config JSON (schema 1)");
    cmd->add_option("--set", args.sets,
                    "Override a config field: path=\"value unit\" (repeatable)");
}

// Scan axis flag syntax: path=lo:hi:n[:log], units per path.
budget::ScanAxis axis_from_flag(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw config_error("--axis expects path=lo:hi:n[:log], got '" + text + "'");
    budget::ScanAxis axis;
    axis.path = text.substr(0, eq);
    const units::dim7 dims = budget::parameter_dims(axis.path);

    std::vector<std::string> parts;
    std::string rest = text.substr(eq + 1);
    size_t pos = 0;
    while ((pos = rest.find(':')) != std::string::npos) {
        parts.push_back(rest.substr(0, pos));
        rest = rest.substr(pos + 1);
    }
    parts.push_back(rest);
    if (parts.size() < 3 || parts.size() > 4)
        throw config_error("--axis expects path=lo:hi:n[:log], got '" + text + "'");
    const bool logspace = parts.size() == 4;
    if (logspace && parts[3] != "log" && parts[3] != "lin")
        throw config_error("--axis fourth field must be 'log' or 'lin'");
    const double lo = units::parse_si(parts[0], dims, axis.path);
    const double hi = units::parse_si(parts[1], dims, axis.path);
    long n = 0;
    try {
        n = std::stol(parts[2]);
    } catch (const std::exception&) {
        throw config_error("--axis point count must be an integer");
    }
    if (n < 2) throw config_error("--axis needs n >= 2");
    const bool uselog = logspace && parts[3] == "log";
    if (uselog && !(lo > 0.0 && hi > 0.0))
        throw config_error("--axis log spacing needs positive endpoints");
    for (long i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n - 1);
        axis.values.push_back(uselog ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    return axis;
}

json oscillator_to_json(const bg::OscillatorSpec& osc) {
    return {{"omega0", osc.omega0}, {"k", osc.k},           {"Q", osc.Q},
            {"T_cm", osc.T_cm},     {"bandwidth", osc.bandwidth}, {"z_rms", osc.z_rms}};
}

// ---------------------------------------------------------------------------

int cmd_constants(const OutputOptions& out) {
    const bool csv = out.format == "csv";
    if (csv) {
        std::string payload = "name,value,unit,note\r\n";
        for (const auto& c : constant_table()) {
            payload += io::csv_field(std::string(c.name)) + ',' + io::format_double(c.value) +
                       ',' + io::csv_field(units::format_dims(c.dims)) + ',' +
                       io::csv_field(std::string(c.note)) + "\r\n";
        }
        emit(out, payload);
        return kExitOk;
    }
    json j;
    json units_obj = json::object();
    json notes = json::object();
    for (const auto& c : constant_table()) {
        j[std::string(c.name)] = c.value;
        units_obj[std::string(c.name)] = units::format_dims(c.dims);
        notes[std::string(c.name)] = std::string(c.note);
    }
    j["units"] = units_obj;
    j["notes"] = notes;
    emit(out, json_payload(j));
    return kExitOk;
}

struct SgArgs {
    std::string mass = "1e-14 kg";
    std::string gradient = "1e4 T/m";
    std::string t1 = "0.25 s";
    std::string pair = "+1,-1";
    std::string g_local = "9.81 m/s^2";
    std::string theta = "3.5 mrad";
    std::string reference_tilt = "3.5 mrad";
    double g_factor = Constants::g_e_default;
    int samples = 201;
};

sg::SplittingSpec splitting_from(const SgArgs& a) {
    const auto [l, r] = parse_pair(a.pair);
    sg::SplittingSpec spec;
    spec.ms_left = l;
    spec.ms_right = r;
    spec.gradient = parse_flag(a.gradient, units::field_gradient, "--gradient");
    spec.mass = parse_flag(a.mass, units::mass, "--mass");
    spec.g_factor = a.g_factor;
    return spec;
}

int cmd_sg_trace(const SgArgs& a, const OutputOptions& out) {
    const auto spec = splitting_from(a);
    const auto seq = sg::free_flight_sequence(parse_flag(a.t1, units::time_dim, "--t1"));
    const auto traj = sg::simulate_branches(spec, seq, a.samples);
    if (out.format == "json") {
        json j;
        j["schema"] = 1;
        j["t1"] = traj.t1;
        j["delta_a"] = traj.delta_a;
        j["max_separation"] = sg::max_separation(traj);
        j["integrated_separation"] = sg::integrated_separation(traj);
        j["closure_position"] = traj.closure_position;
        j["closure_velocity"] = traj.closure_velocity;
        json samples = json::array();
        for (const auto& s : traj.samples)
            samples.push_back({{"t", s.t},
                               {"x_left", s.x_left},
                               {"x_right", s.x_right},
                               {"v_left", s.v_left},
                               {"v_right", s.v_right}});
        j["samples"] = samples;
        emit(out, json_payload(j));
    } else {
        emit(out, io::trajectory_to_csv(traj));
    }
    return kExitOk;
}

int cmd_sg_fringe(const SgArgs& a, const OutputOptions& out) {
    const auto spec = splitting_from(a);
    const auto seq = sg::free_flight_sequence(parse_flag(a.t1, units::time_dim, "--t1"));
    const auto traj = sg::simulate_branches(spec, seq, a.samples);
    const double g_local = parse_flag(a.g_local, units::acceleration, "--g-local");
    const double theta = parse_flag(a.theta, units::angle, "--theta");
    const double reference = parse_flag(a.reference_tilt, units::angle, "--reference-tilt");

    const double one_fringe = sg::fringe_tilt(traj, spec.mass, g_local);
    const double phase_at_theta = sg::tilt_phase(traj, theta, spec.mass, g_local);
    const double phase_at_reference = sg::tilt_phase(traj, reference, spec.mass, g_local);

    json j;
    j["schema"] = 1;
    j["max_separation"] = sg::max_separation(traj);
    j["integrated_separation"] = sg::integrated_separation(traj);
    j["fringe_tilt"] = one_fringe;
    j["tilt_phase_at_theta"] = phase_at_theta;
    j["theta"] = theta;
    j["reference_tilt"] = reference;
    j["tilt_phase_at_reference_tilt"] = phase_at_reference;
    j["note"] = "unreconciled parameters: the quoted one-fringe tilt of " +
                io::format_double(reference) +
                " rad does not follow from this configuration; one full fringe needs " +
                io::format_double(one_fringe) + " rad (" +
                io::format_double(phase_at_reference / (2.0 * M_PI)) +
                " fringes at the quoted tilt)";
    emit(out, json_payload(j));
    return kExitOk;
}

struct EntangleArgs {
    std::string mass = "1e-14 kg";
    std::string d = "400 um";
    std::string dx = "100 um";
    std::string tau = "1 s";
    std::string arrangement = "linear";
    std::string gamma1 = "0 1/s";
    std::string gamma2 = "0 1/s";
    double confidence_z = 3.0;

    ent::TwoInterferometerGeometry geometry() const {
        ent::TwoInterferometerGeometry g;
        g.arrangement = ent::arrangement_from_string(arrangement);
        g.d = parse_flag(d, units::length, "--d");
        g.dx = parse_flag(dx, units::length, "--dx");
        return g;
    }
};

int cmd_entangle_phases(const EntangleArgs& a, const OutputOptions& out) {
    const double mass = parse_flag(a.mass, units::mass, "--mass");
    const double tau = parse_flag(a.tau, units::time_dim, "--tau");
    const auto phases = ent::gravitational_phases(mass, tau, ent::pairwise_distances(a.geometry()));
    json j = io::phases_to_json(phases);
    j["entangling_phase"] = ent::entangling_phase(phases);
    j["schema"] = 1;
    emit(out, json_payload(j));
    return kExitOk;
}

ent::TwoQubitState state_from(const EntangleArgs& a, double* phi_out) {
    const double mass = parse_flag(a.mass, units::mass, "--mass");
    const double tau = parse_flag(a.tau, units::time_dim, "--tau");
    const auto phases = ent::gravitational_phases(mass, tau, ent::pairwise_distances(a.geometry()));
    if (phi_out) *phi_out = ent::entangling_phase(phases);
    auto state = ent::assemble_state(phases);
    const double g1 = parse_flag(a.gamma1, units::rate, "--gamma1");
    const double g2 = parse_flag(a.gamma2, units::rate, "--gamma2");
    return ent::apply_dephasing(state, {g1, g2, tau});
}

int cmd_entangle_state(const EntangleArgs& a, const OutputOptions& out) {
    double phi = 0.0;
    const auto state = state_from(a, &phi);
    json j = io::state_to_json(state);
    j["entangling_phase"] = phi;
    j["negativity"] = ent::negativity(state);
    j["witness"] = ent::witness_value(state, true);
    emit(out, json_payload(j));
    return kExitOk;
}

int cmd_entangle_witness(const EntangleArgs& a, bool no_optimize, const OutputOptions& out) {
    double phi = 0.0;
    const auto state = state_from(a, &phi);
    const double w = ent::witness_value(state, !no_optimize);
    json j;
    j["schema"] = 1;
    j["entangling_phase"] = phi;
    j["witness"] = w;
    j["frame_optimized"] = !no_optimize;
    j["negativity"] = ent::negativity(state);
    j["confidence_z"] = a.confidence_z;
    if (w > 1.0) {
        j["runs_required"] = ent::runs_required(w, a.confidence_z);
    } else {
        j["runs_required"] = nullptr;
        j["note"] = "witness does not exceed 1: entanglement not certifiable at this point";
    }
    emit(out, json_payload(j));
    return w > 1.0 ? kExitOk : kExitInfeasible;
}

struct BackgroundDipoleArgs {
    std::string mass = "10 pg";
    std::string d = "100 um";
    std::string p = "1e-4 e*cm";
    double kappa = 1.0;
};

int cmd_background_dipole(const BackgroundDipoleArgs& a, const OutputOptions& out) {
    const double m = parse_flag(a.mass, units::mass, "--mass");
    const double d = parse_flag(a.d, units::length, "--d");
    const double p = parse_flag(a.p, units::dipole_moment, "--p");
    const bg::DipoleSpec dip{p, a.kappa};
    const double anchored = bg::dipole_gravity_ratio_anchored(m, d, p);
    const double first_principles = bg::dipole_gravity_ratio(m, d, dip);
    if (out.format == "csv") {
        std::string payload = "ratio_anchored,ratio_first_principles,kappa\r\n";
        payload += io::format_double(anchored) + ',' + io::format_double(first_principles) + ',' +
                   io::format_double(a.kappa) + "\r\n";
        emit(out, payload);
    } else {
        json j;
        j["schema"] = 1;
        j["ratio_anchored"] = anchored;
        j["ratio_first_principles"] = first_principles;
        j["ratio"] = anchored; // headline number follows the published scaling law
        j["kappa"] = a.kappa;
        emit(out, json_payload(j));
    }
    return kExitOk;
}

struct CasimirArgs {
    std::string a_radius = "1 um";
    std::string z = "";          // point evaluation when set
    std::string z_lo = "";       // sweep bounds (default from radius)
    std::string z_hi = "";
    int points = 200;
    double eta = 1.0;
    double epsilon = 5.7;
    std::string volume = "";     // default: sphere of the given radius
    // oscillator
    std::string omega0 = "6.283185307179586e5 rad/s";
    std::string k = "";          // default: osc_mass * omega0^2
    std::string osc_mass = "5.7e-18 kg";
    double Q = 1e8;
    std::string T_cm = "1e-6 K";
    std::string bandwidth = "1 Hz";
    std::string z_rms = "10 nm";
};

bg::SurfaceSpec surface_from(const CasimirArgs& a, double z) {
    bg::SurfaceSpec s;
    s.a = parse_flag(a.a_radius, units::length, "--a");
    s.z = z;
    s.eta = a.eta;
    s.epsilon = a.epsilon;
    s.V = a.volume.empty() ? 4.0 / 3.0 * M_PI * s.a * s.a * s.a
                           : parse_flag(a.volume, units::dim_pow(units::length, 3), "--volume");
    return s;
}

bg::OscillatorSpec oscillator_from(const CasimirArgs& a) {
    bg::OscillatorSpec osc;
    osc.omega0 = parse_flag(a.omega0, units::rate, "--omega0");
    const double m = parse_flag(a.osc_mass, units::mass, "--osc-mass");
    osc.k = a.k.empty() ? m * osc.omega0 * osc.omega0
                        : parse_flag(a.k, units::spring_constant, "--k");
    osc.Q = a.Q;
    osc.T_cm = parse_flag(a.T_cm, units::temperature, "--T-cm");
    osc.bandwidth = parse_flag(a.bandwidth, units::rate, "--bandwidth");
    osc.z_rms = parse_flag(a.z_rms, units::length, "--z-rms");
    return osc;
}

const char* regime_name(bg::CasimirRegime r) {
    switch (r) {
    case bg::CasimirRegime::pfa: return "pfa";
    case bg::CasimirRegime::casimir_polder: return "casimir_polder";
    case bg::CasimirRegime::transition: return "transition";
    }
    return "pfa";
}

int cmd_background_casimir(const CasimirArgs& a, const OutputOptions& out) {
    const auto osc = oscillator_from(a);
    const double floor = bg::min_detectable_shift(osc);

    if (!a.z.empty()) {
        const auto s = surface_from(a, parse_flag(a.z, units::length, "--z"));
        const auto est = bg::casimir_auto(s);
        const double shift = bg::frequency_shift(bg::casimir_force_gradient(s), osc.k);
        json j;
        j["schema"] = 1;
        j["z"] = s.z;
        j["regime"] = regime_name(est.regime);
        j["force"] = est.force;
        j["force_pfa"] = est.force_pfa;
        j["force_cp"] = est.force_cp;
        j["freq_shift"] = shift;
        j["min_detectable"] = floor;
        j["pfa_valid"] = bg::pfa_valid(s);
        j["cp_valid"] = bg::cp_valid(s);
        j["oscillator"] = oscillator_to_json(osc);
        emit(out, json_payload(j));
        return kExitOk;
    }

    const double a_m = parse_flag(a.a_radius, units::length, "--a");
    const double lo = a.z_lo.empty() ? 1.05 * a_m : parse_flag(a.z_lo, units::length, "--z-lo");
    const double hi = a.z_hi.empty() ? 20.0 * a_m : parse_flag(a.z_hi, units::length, "--z-hi");
    if (!(lo > a_m) || !(hi > lo)) throw config_error("sweep needs a < z-lo < z-hi");
    if (a.points < 2) throw config_error("sweep needs at least 2 points");

    std::string payload = "z,force,regime,freq_shift,min_detectable\r\n";
    for (int i = 0; i < a.points; ++i) {
        const double f = static_cast<double>(i) / (a.points - 1);
        const auto s = surface_from(a, lo * std::pow(hi / lo, f));
        const auto est = bg::casimir_auto(s);
        const double shift = bg::frequency_shift(bg::casimir_force_gradient(s), osc.k);
        payload += io::format_double(s.z) + ',' + io::format_double(est.force) + ',' +
                   regime_name(est.regime) + ',' + io::format_double(shift) + ',' +
                   io::format_double(floor) + "\r\n";
    }
    emit(out, payload);
    return kExitOk;
}

int cmd_background_shield(const std::string& p_text, const std::string& z_text,
                          const OutputOptions& out) {
    const double p = parse_flag(p_text, units::dipole_moment, "--p");
    const double z = parse_flag(z_text, units::length, "--z");
    json j;
    j["schema"] = 1;
    j["p"] = p;
    j["z"] = z;
    j["image_force"] = bg::image_dipole_force(p, z);
    j["kappa_img"] = 2.0;
    emit(out, json_payload(j));
    return kExitOk;
}

int cmd_background_detect(const CasimirArgs& a, const OutputOptions& out) {
    bg::DetectSweep sweep;
    sweep.surface = surface_from(a, 2.0 * parse_flag(a.a_radius, units::length, "--a"));
    if (!a.z_lo.empty()) sweep.z_lo = parse_flag(a.z_lo, units::length, "--z-lo");
    if (!a.z_hi.empty()) sweep.z_hi = parse_flag(a.z_hi, units::length, "--z-hi");
    sweep.points = a.points;
    const auto osc = oscillator_from(a);
    const double range = bg::casimir_detect_range(sweep, osc);
    json j;
    j["schema"] = 1;
    j["detect_range"] = range;
    j["min_detectable"] = bg::min_detectable_shift(osc);
    j["oscillator"] = oscillator_to_json(osc);
    j["assumptions"] = {
        "oscillator defaults: omega0 = 2*pi*100 kHz, spring constant from the probe mass, "
        "Q = 1e8, T_cm = 1 uK, bandwidth = 1 Hz, z_rms = 10 nm",
        "sweep grid is logarithmic; the range is the largest grid point with "
        "frequency shift above the thermal floor"};
    emit(out, json_payload(j));
    return kExitOk;
}

int cmd_budget_check(const ConfigArgs& cfg, const OutputOptions& out) {
    const auto loaded = cfg.load();
    const auto report = budget::evaluate(loaded.config);
    if (out.format == "csv") {
        std::string payload =
            "phi_grav,phi_dip,negativity,witness,runs,ratio,pass\r\n";
        payload += io::format_double(report.phi_grav) + ',' + io::format_double(report.phi_dip) +
                   ',' + io::format_double(report.negativity) + ',' +
                   io::format_double(report.witness) + ',' + std::to_string(report.runs) + ',' +
                   io::format_double(report.background_ratio) + ',' +
                   (report.feasible ? "1" : "0") + "\r\n";
        emit(out, payload);
    } else {
        json j = io::report_to_json(report);
        j["config"] = io::config_to_json(loaded.config);
        emit(out, json_payload(j));
    }
    return report.feasible ? kExitOk : kExitInfeasible;
}

struct ScanArgs {
    std::vector<std::string> axis_flags;
    std::string objective;
    std::optional<std::uint64_t> seed;
    int workers = 1;
};

budget::ScanSpec scan_spec_from(const io::LoadedConfig& loaded, const ScanArgs& args) {
    budget::ScanSpec spec;
    if (loaded.scan) spec = *loaded.scan;
    if (!args.axis_flags.empty()) {
        spec.axes.clear();
        for (const auto& text : args.axis_flags) spec.axes.push_back(axis_from_flag(text));
    }
    if (!args.objective.empty()) spec.objective = budget::objective_from_string(args.objective);
    if (args.seed) spec.seed = *args.seed;
    if (spec.axes.empty())
        throw config_error("no scan axes: provide --axis flags or a 'scan' block in the config");
    return spec;
}

int cmd_scan(const ConfigArgs& cfg, const ScanArgs& args, const OutputOptions& out) {
    const auto loaded = cfg.load();
    const auto spec = scan_spec_from(loaded, args);
    const auto rows = budget::scan(spec, loaded.config, args.workers);
    if (out.format == "json")
        emit(out, json_payload(io::scan_to_json(spec, rows)));
    else
        emit(out, io::scan_to_csv(spec, rows));
    return kExitOk;
}

int cmd_optimize(const ConfigArgs& cfg, const ScanArgs& args, const OutputOptions& out) {
    const auto loaded = cfg.load();
    const auto spec = scan_spec_from(loaded, args);
    const auto result = budget::optimize(spec, loaded.config, args.workers);
    json j;
    j["schema"] = 1;
    j["objective"] = budget::to_string(spec.objective);
    j["objective_value"] = result.objective_value;
    j["seed"] = spec.seed;
    json coords = json::object();
    for (size_t a = 0; a < spec.axes.size(); ++a) coords[spec.axes[a].path] = result.coords[a];
    j["coords"] = coords;
    j["config"] = io::config_to_json(result.config);
    j["report"] = io::report_to_json(result.report);
    emit(out, json_payload(j));
    return result.report.feasible ? kExitOk : kExitInfeasible;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feasibility simulator for gravitationally entangled matter-wave interferometry"};
    app.require_subcommand(1);

    OutputOptions out;
    // constants ------------------------------------------------------------
    auto* constants_cmd = app.add_subcommand("constants", "Dump physical constants (CODATA 2018)");
    add_output_flags(constants_cmd, out);

    // sg --------------------------------------------------------------------
    auto* sg_cmd = app.add_subcommand("sg", "Single Stern-Gerlach interferometer kinematics");
    sg_cmd->require_subcommand(1);
    SgArgs sg_args;
    auto add_sg_flags = [&](CLI::App* cmd) {
        cmd->add_option("--mass", sg_args.mass, "Particle mass, e.g. \"2e-15 kg\"");
        cmd->add_option("--gradient", sg_args.gradient, "Field gradient, e.g. \"1e4 T/m\"");
        cmd->add_option("--t1", sg_args.t1, "Quarter period, e.g. \"0.25 ms\"");
        cmd->add_option("--pair", sg_args.pair, "Spin projections, e.g. 0,-1");
        cmd->add_option("--g-factor", sg_args.g_factor, "Electron g-factor (dimensionless)");
        cmd->add_option("--samples", sg_args.samples, "Trajectory sample count")
            ->check(CLI::Range(5, 1000000));
        add_output_flags(cmd, out);
    };
    auto* sg_trace = sg_cmd->add_subcommand("trace", "Branch trajectory table (CSV default)");
    add_sg_flags(sg_trace);
    auto* sg_fringe =
        sg_cmd->add_subcommand("fringe", "Gravitational tilt-fringe summary (JSON)");
    add_sg_flags(sg_fringe);
    sg_fringe->add_option("--theta", sg_args.theta, "Tilt to evaluate, e.g. \"3.5 mrad\"");
    sg_fringe->add_option("--g-local", sg_args.g_local, "Local gravity, e.g. \"9.81 m/s^2\"");
    sg_fringe->add_option("--reference-tilt", sg_args.reference_tilt,
                          "Quoted one-fringe tilt to compare against");

    // entangle ---------------------------------------------------------------
    auto* ent_cmd = app.add_subcommand("entangle", "Two-interferometer entanglement signal");
    ent_cmd->require_subcommand(1);
    EntangleArgs ent_args;
    bool no_optimize = false;
    auto add_ent_flags = [&](CLI::App* cmd) {
        cmd->add_option("--mass", ent_args.mass, "Particle mass, e.g. \"1e-14 kg\"");
        cmd->add_option("--d", ent_args.d, "Interferometer separation, e.g. \"400 um\"");
        cmd->add_option("--dx", ent_args.dx, "Superposition distance, e.g. \"100 um\"");
        cmd->add_option("--tau", ent_args.tau, "Interaction time, e.g. \"1 s\"");
        cmd->add_option("--arrangement", ent_args.arrangement, "linear or parallel")
            ->check(CLI::IsMember({"linear", "parallel"}));
        add_output_flags(cmd, out);
    };
    auto* ent_phases = ent_cmd->add_subcommand("phases", "Four branch phases and the entangling phase");
    add_ent_flags(ent_phases);
    auto* ent_state = ent_cmd->add_subcommand("state", "Two-qubit density matrix (JSON)");
    add_ent_flags(ent_state);
    ent_state->add_option("--gamma1", ent_args.gamma1, "Dephasing rate, interferometer 1");
    ent_state->add_option("--gamma2", ent_args.gamma2, "Dephasing rate, interferometer 2");
    auto* ent_witness = ent_cmd->add_subcommand("witness", "Witness value and run count");
    add_ent_flags(ent_witness);
    ent_witness->add_option("--gamma1", ent_args.gamma1, "Dephasing rate, interferometer 1");
    ent_witness->add_option("--gamma2", ent_args.gamma2, "Dephasing rate, interferometer 2");
    ent_witness->add_option("--confidence-z", ent_args.confidence_z, "z-score for the run count");
    ent_witness->add_flag("--no-optimize-frames", no_optimize,
                          "Evaluate in canonical frames instead of optimizing");

    // background ---------------------------------------------------------------
    auto* bg_cmd = app.add_subcommand("background", "Electromagnetic background forces");
    bg_cmd->require_subcommand(1);
    BackgroundDipoleArgs dip_args;
    auto* bg_dipole = bg_cmd->add_subcommand("dipole", "Dipole-dipole vs gravity energy ratio");
    bg_dipole->add_option("--mass", dip_args.mass, "Particle mass, e.g. \"10 pg\"");
    bg_dipole->add_option("--d", dip_args.d, "Separation, e.g. \"100 um\"");
    bg_dipole->add_option("--p", dip_args.p, "Dipole moment, e.g. \"1e-4 e*cm\"");
    bg_dipole->add_option("--kappa", dip_args.kappa, "Orientation factor (0, 4]");
    add_output_flags(bg_dipole, out);

    CasimirArgs cas_args;
    auto add_casimir_flags = [&](CLI::App* cmd, bool with_point) {
        cmd->add_option("--a", cas_args.a_radius, "Particle radius, e.g. \"1 um\"");
        if (with_point) cmd->add_option("--z", cas_args.z, "Evaluate a single distance");
        cmd->add_option("--z-lo", cas_args.z_lo, "Sweep start (default 1.05a)");
        cmd->add_option("--z-hi", cas_args.z_hi, "Sweep end (default 20a)");
        cmd->add_option("--points", cas_args.points, "Sweep point count")
            ->check(CLI::Range(2, 100000));
        cmd->add_option("--eta", cas_args.eta, "Conductivity reduction factor (0, 1]");
        cmd->add_option("--epsilon", cas_args.epsilon, "Relative permittivity");
        cmd->add_option("--volume", cas_args.volume, "Particle volume (default: sphere)");
        cmd->add_option("--omega0", cas_args.omega0, "Oscillator resonance, rad/s");
        cmd->add_option("--k", cas_args.k, "Spring constant (default osc-mass * omega0^2)");
        cmd->add_option("--osc-mass", cas_args.osc_mass, "Oscillator mass");
        cmd->add_option("--Q", cas_args.Q, "Quality factor");
        cmd->add_option("--T-cm", cas_args.T_cm, "Center-of-mass temperature");
        cmd->add_option("--bandwidth", cas_args.bandwidth, "Measurement bandwidth");
        cmd->add_option("--z-rms", cas_args.z_rms, "Drive amplitude");
        add_output_flags(cmd, out);
    };
    auto* bg_casimir =
        bg_cmd->add_subcommand("casimir", "Casimir force sweep or point (CSV sweep default)");
    add_casimir_flags(bg_casimir, true);
    auto* bg_detect =
        bg_cmd->add_subcommand("detect", "Largest distance with a detectable Casimir shift");
    add_casimir_flags(bg_detect, false);

    std::string shield_p = "1e-4 e*cm", shield_z = "50 um";
    auto* bg_shield = bg_cmd->add_subcommand("shield", "Image-dipole force from a conducting shield");
    bg_shield->add_option("--p", shield_p, "Dipole moment, e.g. \"1e-4 e*cm\"");
    bg_shield->add_option("--z", shield_z, "Particle-to-shield distance, e.g. \"50 um\"");
    add_output_flags(bg_shield, out);

    // budget / scan / optimize ---------------------------------------------
    ConfigArgs cfg_args;
    auto* budget_cmd = app.add_subcommand("budget", "Feasibility verdict for a config");
    budget_cmd->require_subcommand(1);
    auto* budget_check = budget_cmd->add_subcommand("check", "Evaluate all constraints (JSON)");
    add_config_flags(budget_check, cfg_args);
    add_output_flags(budget_check, out);

    ScanArgs scan_args;
    auto add_scan_flags = [&](CLI::App* cmd) {
        add_config_flags(cmd, cfg_args);
        cmd->add_option("--axis", scan_args.axis_flags,
                        "Scan axis path=lo:hi:n[:log] (repeatable; units per path)");
        cmd->add_option("--objective", scan_args.objective,
                        "witness_margin, negativity, or runs_required")
            ->check(CLI::IsMember({"witness_margin", "negativity", "runs_required"}));
        cmd->add_option("--workers", scan_args.workers, "Evaluation threads")
            ->check(CLI::Range(1, 256));
        add_output_flags(cmd, out);
    };
    auto* scan_cmd = app.add_subcommand("scan", "Grid scan over parameter axes (CSV default)");
    add_scan_flags(scan_cmd);
    std::uint64_t seed_value = 0;
    auto* scan_seed =
        scan_cmd->add_option("--seed", seed_value, "Seed recorded in JSON output");
    auto* opt_cmd = app.add_subcommand("optimize", "Grid seed + simplex refinement (JSON)");
    add_scan_flags(opt_cmd);
    auto* opt_seed = opt_cmd->add_option("--seed", seed_value, "Seed recorded in JSON output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scan_seed->count() || opt_seed->count()) scan_args.seed = seed_value;
        if (constants_cmd->parsed()) return cmd_constants(out);
        if (sg_cmd->parsed()) {
            if (sg_trace->parsed()) return cmd_sg_trace(sg_args, out);
            return cmd_sg_fringe(sg_args, out);
        }
        if (ent_cmd->parsed()) {
            if (ent_phases->parsed()) return cmd_entangle_phases(ent_args, out);
            if (ent_state->parsed()) return cmd_entangle_state(ent_args, out);
            return cmd_entangle_witness(ent_args, no_optimize, out);
        }
        if (bg_cmd->parsed()) {
            if (bg_dipole->parsed()) return cmd_background_dipole(dip_args, out);
            if (bg_casimir->parsed()) return cmd_background_casimir(cas_args, out);
            if (bg_detect->parsed()) return cmd_background_detect(cas_args, out);
            return cmd_background_shield(shield_p, shield_z, out);
        }
        if (budget_cmd->parsed()) return cmd_budget_check(cfg_args, out);
        if (scan_cmd->parsed()) return cmd_scan(cfg_args, scan_args, out);
        if (opt_cmd->parsed()) return cmd_optimize(cfg_args, scan_args, out);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const value_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
