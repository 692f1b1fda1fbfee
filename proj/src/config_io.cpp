#include "qgem/config_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "qgem/units.hpp"

namespace qgem::io {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

namespace {

constexpr const char* kCrlf = "\r\n";

[[noreturn]] void fail(const std::string& msg) { throw config_error(msg); }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) fail(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) fail("unknown key '" + key + "' in " + where);
}

// Quantity field: JSON number = raw SI, string = "value unit".
double quantity_field(const json& v, const units::dim7& dims, const std::string& name) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return units::parse_si(v.get<std::string>(), dims, name);
        } catch (const unit_error& e) {
            fail(std::string("bad value for '") + name + "': " + e.what());
        }
    }
    fail("'" + name + "' must be a number (SI) or a \"value unit\" string");
}

double plain_number(const json& v, const std::string& name) {
    return quantity_field(v, units::dimensionless, name);
}

std::string quantity_string(double value_si, const units::dim7& dims) {
    return units::format_quantity({value_si, dims});
}

budget::ScanAxis axis_from_json(const json& j) {
    check_keys(j, {"path", "values", "range", "log_range"}, "scan axis");
    budget::ScanAxis axis;
    if (!j.contains("path") || !j.at("path").is_string()) fail("scan axis needs a string 'path'");
    axis.path = j.at("path").get<std::string>();
    const units::dim7 dims = budget::parameter_dims(axis.path);

    const int sources = j.contains("values") + j.contains("range") + j.contains("log_range");
    if (sources != 1) fail("scan axis '" + axis.path + "' needs exactly one of values/range/log_range");

    if (j.contains("values")) {
        if (!j.at("values").is_array() || j.at("values").empty())
            fail("scan axis '" + axis.path + "' values must be a non-empty array");
        for (const auto& v : j.at("values"))
            axis.values.push_back(quantity_field(v, dims, axis.path));
        return axis;
    }
    const bool logspace = j.contains("log_range");
    const json& r = logspace ? j.at("log_range") : j.at("range");
    check_keys(r, {"lo", "hi", "n"}, "scan axis '" + axis.path + "' range");
    for (const char* k : {"lo", "hi", "n"})
        if (!r.contains(k)) fail("scan axis '" + axis.path + "' range needs lo, hi, n");
    const double lo = quantity_field(r.at("lo"), dims, axis.path);
    const double hi = quantity_field(r.at("hi"), dims, axis.path);
    const long n = r.at("n").is_number_integer() ? r.at("n").get<long>() : -1;
    if (n < 2) fail("scan axis '" + axis.path + "' range needs integer n >= 2");
    if (logspace && !(lo > 0.0 && hi > 0.0))
        fail("scan axis '" + axis.path + "' log_range needs positive endpoints");
    for (long i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n - 1);
        axis.values.push_back(logspace ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    return axis;
}

budget::ScanSpec scan_from_json(const json& j) {
    check_keys(j, {"axes", "objective", "seed"}, "scan block");
    budget::ScanSpec spec;
    if (!j.contains("axes") || !j.at("axes").is_array() || j.at("axes").empty())
        fail("scan block needs a non-empty 'axes' array");
    for (const auto& a : j.at("axes")) spec.axes.push_back(axis_from_json(a));
    if (j.contains("objective"))
        spec.objective = budget::objective_from_string(j.at("objective").get<std::string>());
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) fail("scan seed must be a non-negative integer");
        spec.seed = j.at("seed").get<std::uint64_t>();
    }
    return spec;
}

json constraints_to_json(const std::vector<budget::ConstraintResult>& constraints) {
    json arr = json::array();
    for (const auto& c : constraints)
        arr.push_back({{"name", c.name},
                       {"gating", c.gating},
                       {"pass", c.pass},
                       {"measured", c.measured},
                       {"bound", c.bound}});
    return arr;
}

} // namespace

LoadedConfig config_from_json(const json& j) {
    static const std::set<std::string> top_keys = {
        "schema",   "mass",           "arrangement",  "d",
        "dx",       "tau",            "t1",           "gradient",
        "coherence_time", "spin_pair", "g_factor",    "dipole",
        "mitigations", "dephasing",   "ratio_threshold", "confidence_z",
        "shield",   "scan"};
    check_keys(j, top_keys, "config");

    if (!j.contains("schema")) fail("config is missing 'schema'");
    if (!j.at("schema").is_number_integer() || j.at("schema").get<long>() != 1)
        fail("unsupported config schema (expected 1)");
    if (!j.contains("mass")) fail("config is missing required key 'mass'");

    LoadedConfig loaded;
    budget::ExperimentConfig& c = loaded.config;
    using namespace units;

    c.mass = quantity_field(j.at("mass"), mass, "mass");
    if (j.contains("arrangement"))
        c.geometry.arrangement =
            ent::arrangement_from_string(j.at("arrangement").get<std::string>());
    if (j.contains("d")) c.geometry.d = quantity_field(j.at("d"), length, "d");
    if (j.contains("dx")) c.geometry.dx = quantity_field(j.at("dx"), length, "dx");
    if (j.contains("tau")) c.tau = quantity_field(j.at("tau"), time_dim, "tau");
    if (j.contains("t1")) c.t1 = quantity_field(j.at("t1"), time_dim, "t1");
    if (j.contains("gradient"))
        c.gradient = quantity_field(j.at("gradient"), field_gradient, "gradient");
    if (j.contains("coherence_time"))
        c.coherence_time = quantity_field(j.at("coherence_time"), time_dim, "coherence_time");
    if (j.contains("spin_pair")) {
        const json& p = j.at("spin_pair");
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
            !p[1].is_number_integer())
            fail("spin_pair must be an array of two integers");
        c.ms_left = p[0].get<int>();
        c.ms_right = p[1].get<int>();
    }
    if (j.contains("g_factor")) c.g_factor = plain_number(j.at("g_factor"), "g_factor");
    if (j.contains("dipole")) {
        check_keys(j.at("dipole"), {"p", "kappa"}, "dipole");
        if (j.at("dipole").contains("p"))
            c.dipole.p = quantity_field(j.at("dipole").at("p"), dipole_moment, "dipole.p");
        if (j.at("dipole").contains("kappa"))
            c.dipole.kappa = plain_number(j.at("dipole").at("kappa"), "dipole.kappa");
    }
    if (j.contains("mitigations")) {
        if (!j.at("mitigations").is_object()) fail("mitigations must be an object of name: factor");
        for (const auto& [name, v] : j.at("mitigations").items())
            c.mitigations.push_back({name, plain_number(v, "mitigations." + name)});
    }
    if (j.contains("dephasing")) {
        if (!j.at("dephasing").is_object()) fail("dephasing must be an object of name: rate");
        for (const auto& [name, v] : j.at("dephasing").items())
            c.dephasing.push_back({name, quantity_field(v, rate, "dephasing." + name)});
    }
    if (j.contains("ratio_threshold"))
        c.ratio_threshold = plain_number(j.at("ratio_threshold"), "ratio_threshold");
    if (j.contains("confidence_z"))
        c.confidence_z = plain_number(j.at("confidence_z"), "confidence_z");
    if (j.contains("shield")) {
        check_keys(j.at("shield"), {"enabled", "z"}, "shield");
        if (j.at("shield").contains("enabled")) {
            if (!j.at("shield").at("enabled").is_boolean()) fail("shield.enabled must be a boolean");
            c.shield.enabled = j.at("shield").at("enabled").get<bool>();
        }
        if (j.at("shield").contains("z"))
            c.shield.z = quantity_field(j.at("shield").at("z"), length, "shield.z");
    }
    if (j.contains("scan")) loaded.scan = scan_from_json(j.at("scan"));

    try {
        c.validate();
    } catch (const value_error& e) {
        fail(std::string("invalid config: ") + e.what());
    }
    return loaded;
}

LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        fail("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const budget::ExperimentConfig& c) {
    using namespace units;
    json j;
    j["schema"] = 1;
    j["mass"] = quantity_string(c.mass, mass);
    j["arrangement"] = ent::to_string(c.geometry.arrangement);
    j["d"] = quantity_string(c.geometry.d, length);
    j["dx"] = quantity_string(c.geometry.dx, length);
    j["tau"] = quantity_string(c.tau, time_dim);
    j["t1"] = quantity_string(c.t1, time_dim);
    j["gradient"] = quantity_string(c.gradient, field_gradient);
    j["coherence_time"] = quantity_string(c.coherence_time, time_dim);
    j["spin_pair"] = {c.ms_left, c.ms_right};
    j["g_factor"] = c.g_factor;
    j["dipole"] = {{"p", quantity_string(c.dipole.p, dipole_moment)}, {"kappa", c.dipole.kappa}};
    json mit = json::object();
    for (const auto& m : c.mitigations) mit[m.name] = m.suppression;
    j["mitigations"] = mit;
    json rates = json::object();
    for (const auto& r : c.dephasing) rates[r.name] = quantity_string(r.rate, rate);
    j["dephasing"] = rates;
    j["ratio_threshold"] = c.ratio_threshold;
    j["confidence_z"] = c.confidence_z;
    j["shield"] = {{"enabled", c.shield.enabled}, {"z", quantity_string(c.shield.z, length)}};
    return j;
}

json report_to_json(const budget::FeasibilityReport& r) {
    json j;
    j["schema"] = 1;
    j["phi_grav"] = r.phi_grav;
    j["phi_dip"] = r.phi_dip;
    j["negativity"] = r.negativity;
    j["witness"] = r.witness;
    j["runs_required"] = r.runs;
    j["background_ratio_after_mitigation"] = r.background_ratio;
    j["superposition_achieved"] = r.superposition_achieved;
    j["dp_rate"] = r.dp_rate;
    j["shield_enabled"] = r.shield_enabled;
    if (r.shield_enabled)
        j["shield_image_force"] = r.shield_image_force;
    else
        j["shield_image_force"] = nullptr;
    j["constraints"] = constraints_to_json(r.constraints);
    j["assumptions"] = r.assumptions;
    j["feasible"] = r.feasible;
    return j;
}

std::string scan_to_csv(const budget::ScanSpec& spec, const std::vector<budget::ScanRow>& rows) {
    std::string out;
    for (const auto& axis : spec.axes) {
        out += csv_field(axis.path);
        out += ',';
    }
    out += "phi_grav,phi_dip,negativity,witness,runs,ratio,pass";
    out += kCrlf;
    for (const auto& row : rows) {
        for (double c : row.coords) {
            out += format_double(c);
            out += ',';
        }
        const auto& r = row.report;
        out += format_double(r.phi_grav);
        out += ',';
        out += format_double(r.phi_dip);
        out += ',';
        out += format_double(r.negativity);
        out += ',';
        out += format_double(r.witness);
        out += ',';
        out += std::to_string(r.runs);
        out += ',';
        out += format_double(r.background_ratio);
        out += ',';
        out += r.feasible ? '1' : '0';
        out += kCrlf;
    }
    return out;
}

json scan_to_json(const budget::ScanSpec& spec, const std::vector<budget::ScanRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json coords = json::object();
        for (size_t a = 0; a < spec.axes.size(); ++a) coords[spec.axes[a].path] = row.coords[a];
        arr.push_back({{"coords", coords}, {"report", report_to_json(row.report)}});
    }
    return {{"schema", 1},
            {"objective", budget::to_string(spec.objective)},
            {"seed", spec.seed},
            {"rows", arr}};
}

std::string trajectory_to_csv(const sg::BranchTrajectory& traj) {
    std::string out = "t,x_left,x_right,v_left,v_right";
    out += kCrlf;
    for (const auto& s : traj.samples) {
        out += format_double(s.t);
        out += ',';
        out += format_double(s.x_left);
        out += ',';
        out += format_double(s.x_right);
        out += ',';
        out += format_double(s.v_left);
        out += ',';
        out += format_double(s.v_right);
        out += kCrlf;
    }
    return out;
}

json state_to_json(const ent::TwoQubitState& state) {
    json rho = json::array();
    for (int i = 0; i < 4; ++i) {
        json row = json::array();
        for (int j = 0; j < 4; ++j)
            row.push_back({state.rho(i, j).real(), state.rho(i, j).imag()});
        rho.push_back(row);
    }
    return {{"schema", 1}, {"basis", {"LL", "LR", "RL", "RR"}}, {"rho", rho}};
}

json phases_to_json(const ent::BranchPhases& p) {
    return {{"ll", p.ll}, {"lr", p.lr}, {"rl", p.rl}, {"rr", p.rr}};
}

} // namespace qgem::io
