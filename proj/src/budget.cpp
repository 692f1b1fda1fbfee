#include "qgem/budget.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace qgem::budget {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

void ExperimentConfig::validate() const {
    if (!(mass > 0.0)) throw value_error("mass must be > 0");
    geometry.validate();
    if (!(tau >= 0.0)) throw value_error("tau must be >= 0");
    if (!(t1 > 0.0)) throw value_error("t1 must be > 0");
    if (!(gradient >= 0.0)) throw value_error("gradient must be >= 0");
    if (!(coherence_time > 0.0)) throw value_error("coherence_time must be > 0");
    sg::SplittingSpec{ms_left, ms_right, gradient, mass, g_factor}.validate();
    dipole.validate();
    for (const auto& r : dephasing)
        if (!(r.rate >= 0.0)) throw value_error("dephasing rate '" + r.name + "' must be >= 0");
    for (const auto& m : mitigations)
        if (!(m.suppression > 0.0) || !(m.suppression <= 1.0))
            throw value_error("mitigation suppression '" + m.name + "' must be in (0, 1]");
    if (!(ratio_threshold > 0.0)) throw value_error("ratio_threshold must be > 0");
    if (!(confidence_z > 0.0)) throw value_error("confidence_z must be > 0");
    if (!(shield.z > 0.0)) throw value_error("shield.z must be > 0");
}

double total_dephasing(std::span<const NamedRate> rates) {
    double total = 0.0;
    for (const auto& r : rates) {
        if (!(r.rate >= 0.0)) throw value_error("dephasing rate '" + r.name + "' must be >= 0");
        total += r.rate;
    }
    return total;
}

FeasibilityReport evaluate(const ExperimentConfig& config) {
    config.validate();
    FeasibilityReport rep;

    const auto dist = ent::pairwise_distances(config.geometry);
    const auto phases_grav = ent::gravitational_phases(config.mass, config.tau, dist);
    const auto phases_dip = bg::dipole_phases(config.dipole, dist, config.tau);
    rep.phi_grav = ent::entangling_phase(phases_grav);
    rep.phi_dip = ent::entangling_phase(phases_dip);

    const ent::BranchPhases phases_total{
        phases_grav.ll + phases_dip.ll, phases_grav.lr + phases_dip.lr,
        phases_grav.rl + phases_dip.rl, phases_grav.rr + phases_dip.rr};
    auto state = ent::assemble_state(phases_total);
    const double gamma = total_dephasing(config.dephasing);
    state = ent::apply_dephasing(state, {gamma, gamma, config.tau});

    rep.negativity = ent::negativity(state);
    rep.witness = ent::witness_value(state, true);
    rep.runs = rep.witness > 1.0 ? ent::runs_required(rep.witness, config.confidence_z) : 0;

    rep.background_ratio = bg::mitigation_apply(
        bg::dipole_gravity_ratio(config.mass, config.geometry.d, config.dipole),
        config.mitigations);

    const sg::SplittingSpec split{config.ms_left, config.ms_right, config.gradient, config.mass,
                                  config.g_factor};
    const auto [a_left, a_right] = sg::branch_acceleration(split);
    const double window = config.coherence_time / 4.0;
    rep.superposition_achieved = std::abs(a_left - a_right) * window * window;

    rep.dp_rate = bg::dp_collapse_rate(config.mass);
    rep.shield_enabled = config.shield.enabled;
    rep.shield_image_force =
        config.shield.enabled ? bg::image_dipole_force(config.dipole.p, config.shield.z) : 0.0;

    const double four_t1 = 4.0 * config.t1;
    rep.constraints = {
        {"pulse_window", true, four_t1 <= config.coherence_time, four_t1, config.coherence_time},
        {"background_ratio", true, rep.background_ratio < config.ratio_threshold,
         rep.background_ratio, config.ratio_threshold},
        {"superposition_reach", true, rep.superposition_achieved >= config.geometry.dx,
         rep.superposition_achieved, config.geometry.dx},
        {"witness_margin", true, rep.witness > 1.0, rep.witness, 1.0},
        {"collapse_survival", false, rep.dp_rate * config.tau < 1.0, rep.dp_rate * config.tau,
         1.0},
    };

    rep.assumptions = {
        "collapse-rate mass scaling uses exponent 5/3 (constant-density gravitational "
        "self-energy) through the single 5.7e-16 kg / 1 s calibration point",
        "background ratio threshold " + fmt(config.ratio_threshold) +
            " is a configuration choice, not a published bound",
        "dipole orientation factor kappa = " + fmt(config.dipole.kappa) +
            " (1 = collinear head-to-tail)",
        "superposition reach evaluated at quarter-window t1 = coherence_time/4 = " +
            fmt(window) + " s",
        "both interferometers share the aggregate dephasing rate " + fmt(gamma) + " 1/s",
    };

    rep.feasible = true;
    for (const auto& c : rep.constraints)
        if (c.gating && !c.pass) rep.feasible = false;
    return rep;
}

// --- parameter paths -------------------------------------------------------

namespace {

struct PathEntry {
    const char* path;
    units::dim7 dims;
    double (*get)(const ExperimentConfig&);
    void (*set)(ExperimentConfig&, double);
};

int spin_from_double(double v) {
    const int ms = static_cast<int>(std::lround(v));
    if (std::abs(v - ms) > 1e-9 || ms < -1 || ms > 1)
        throw value_error("spin projection must be -1, 0, or +1");
    return ms;
}

const PathEntry kPaths[] = {
    {"mass", units::mass, [](const ExperimentConfig& c) { return c.mass; },
     [](ExperimentConfig& c, double v) { c.mass = v; }},
    {"d", units::length, [](const ExperimentConfig& c) { return c.geometry.d; },
     [](ExperimentConfig& c, double v) { c.geometry.d = v; }},
    {"dx", units::length, [](const ExperimentConfig& c) { return c.geometry.dx; },
     [](ExperimentConfig& c, double v) { c.geometry.dx = v; }},
    {"tau", units::time_dim, [](const ExperimentConfig& c) { return c.tau; },
     [](ExperimentConfig& c, double v) { c.tau = v; }},
    {"t1", units::time_dim, [](const ExperimentConfig& c) { return c.t1; },
     [](ExperimentConfig& c, double v) { c.t1 = v; }},
    {"gradient", units::field_gradient, [](const ExperimentConfig& c) { return c.gradient; },
     [](ExperimentConfig& c, double v) { c.gradient = v; }},
    {"coherence_time", units::time_dim,
     [](const ExperimentConfig& c) { return c.coherence_time; },
     [](ExperimentConfig& c, double v) { c.coherence_time = v; }},
    {"g_factor", units::dimensionless, [](const ExperimentConfig& c) { return c.g_factor; },
     [](ExperimentConfig& c, double v) { c.g_factor = v; }},
    {"ms_left", units::dimensionless,
     [](const ExperimentConfig& c) { return static_cast<double>(c.ms_left); },
     [](ExperimentConfig& c, double v) { c.ms_left = spin_from_double(v); }},
    {"ms_right", units::dimensionless,
     [](const ExperimentConfig& c) { return static_cast<double>(c.ms_right); },
     [](ExperimentConfig& c, double v) { c.ms_right = spin_from_double(v); }},
    {"dipole.p", units::dipole_moment, [](const ExperimentConfig& c) { return c.dipole.p; },
     [](ExperimentConfig& c, double v) { c.dipole.p = v; }},
    {"dipole.kappa", units::dimensionless,
     [](const ExperimentConfig& c) { return c.dipole.kappa; },
     [](ExperimentConfig& c, double v) { c.dipole.kappa = v; }},
    {"ratio_threshold", units::dimensionless,
     [](const ExperimentConfig& c) { return c.ratio_threshold; },
     [](ExperimentConfig& c, double v) { c.ratio_threshold = v; }},
    {"confidence_z", units::dimensionless,
     [](const ExperimentConfig& c) { return c.confidence_z; },
     [](ExperimentConfig& c, double v) { c.confidence_z = v; }},
    {"shield.z", units::length, [](const ExperimentConfig& c) { return c.shield.z; },
     [](ExperimentConfig& c, double v) { c.shield.z = v; }},
};

std::vector<bg::MitigationFactor>::iterator find_mitigation(ExperimentConfig& c,
                                                            const std::string& name) {
    return std::find_if(c.mitigations.begin(), c.mitigations.end(),
                        [&](const auto& m) { return m.name == name; });
}

std::vector<NamedRate>::iterator find_rate(ExperimentConfig& c, const std::string& name) {
    return std::find_if(c.dephasing.begin(), c.dephasing.end(),
                        [&](const auto& r) { return r.name == name; });
}

} // namespace

std::vector<std::string> parameter_paths(const ExperimentConfig& config) {
    std::vector<std::string> out;
    for (const auto& e : kPaths) out.push_back(e.path);
    for (const auto& r : config.dephasing) out.push_back("dephasing." + r.name);
    for (const auto& m : config.mitigations) out.push_back("mitigations." + m.name);
    return out;
}

units::dim7 parameter_dims(const std::string& path) {
    for (const auto& e : kPaths)
        if (path == e.path) return e.dims;
    if (path.starts_with("dephasing.") && path.size() > 10) return units::rate;
    if (path.starts_with("mitigations.") && path.size() > 12) return units::dimensionless;
    throw config_error("unknown parameter path '" + path + "'");
}

void set_parameter(ExperimentConfig& config, const std::string& path, double value_si) {
    for (const auto& e : kPaths)
        if (path == e.path) {
            e.set(config, value_si);
            return;
        }
    if (path.starts_with("dephasing.") && path.size() > 10) {
        const std::string name = path.substr(10);
        if (auto it = find_rate(config, name); it != config.dephasing.end())
            it->rate = value_si;
        else
            config.dephasing.push_back({name, value_si});
        return;
    }
    if (path.starts_with("mitigations.") && path.size() > 12) {
        const std::string name = path.substr(12);
        if (auto it = find_mitigation(config, name); it != config.mitigations.end())
            it->suppression = value_si;
        else
            config.mitigations.push_back({name, value_si});
        return;
    }
    throw config_error("unknown parameter path '" + path + "'");
}

double get_parameter(const ExperimentConfig& config, const std::string& path) {
    for (const auto& e : kPaths)
        if (path == e.path) return e.get(config);
    if (path.starts_with("dephasing.") && path.size() > 10) {
        const std::string name = path.substr(10);
        for (const auto& r : config.dephasing)
            if (r.name == name) return r.rate;
        return 0.0;
    }
    if (path.starts_with("mitigations.") && path.size() > 12) {
        const std::string name = path.substr(12);
        for (const auto& m : config.mitigations)
            if (m.name == name) return m.suppression;
        return 1.0;
    }
    throw config_error("unknown parameter path '" + path + "'");
}

// --- scan / optimize --------------------------------------------------------

std::string to_string(Objective o) {
    switch (o) {
    case Objective::witness_margin: return "witness_margin";
    case Objective::negativity: return "negativity";
    case Objective::runs_required: return "runs_required";
    }
    return "witness_margin";
}

Objective objective_from_string(const std::string& name) {
    if (name == "witness_margin") return Objective::witness_margin;
    if (name == "negativity") return Objective::negativity;
    if (name == "runs_required") return Objective::runs_required;
    throw config_error("unknown objective '" + name +
                       "' (expected witness_margin, negativity, or runs_required)");
}

namespace {

void validate_scan(const ScanSpec& spec) {
    if (spec.axes.empty()) throw config_error("scan needs at least one axis");
    for (const auto& axis : spec.axes) {
        parameter_dims(axis.path); // throws on unknown path
        if (axis.values.empty())
            throw config_error("scan axis '" + axis.path + "' has an empty grid");
        for (double v : axis.values)
            if (!std::isfinite(v))
                throw config_error("scan axis '" + axis.path + "' has a non-finite value");
    }
}

std::vector<double> coords_for_index(const ScanSpec& spec, size_t idx) {
    std::vector<double> coords(spec.axes.size());
    for (size_t a = spec.axes.size(); a-- > 0;) {
        const auto& vals = spec.axes[a].values;
        coords[a] = vals[idx % vals.size()];
        idx /= vals.size();
    }
    return coords;
}

ExperimentConfig config_at(const ScanSpec& spec, const ExperimentConfig& base,
                           std::span<const double> coords) {
    ExperimentConfig c = base;
    for (size_t a = 0; a < spec.axes.size(); ++a) set_parameter(c, spec.axes[a].path, coords[a]);
    return c;
}

} // namespace

std::vector<ScanRow> scan(const ScanSpec& spec, const ExperimentConfig& base, int workers) {
    validate_scan(spec);
    size_t total = 1;
    for (const auto& axis : spec.axes) total *= axis.values.size();

    std::vector<ScanRow> rows(total);
    auto run_range = [&](size_t begin, size_t stride) {
        for (size_t i = begin; i < total; i += stride) {
            rows[i].coords = coords_for_index(spec, i);
            rows[i].report = evaluate(config_at(spec, base, rows[i].coords));
        }
    };

    const int n = std::max(1, workers);
    if (n == 1 || total < 2) {
        run_range(0, 1);
        return rows;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
    for (int w = 0; w < n; ++w)
        pool.emplace_back([&, w] {
            try {
                run_range(static_cast<size_t>(w), static_cast<size_t>(n));
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

double objective_score(const FeasibilityReport& report, Objective objective) {
    if (!report.feasible) {
        // Keep infeasible points ordered by how badly they fail so the
        // simplex can walk toward feasibility, but never above a feasible one.
        double violation = 0.0;
        int failed = 0;
        for (const auto& c : report.constraints) {
            if (!c.gating || c.pass) continue;
            ++failed;
            const double scale = std::max(std::abs(c.bound), 1e-300);
            violation += std::min(std::abs(c.measured - c.bound) / scale, 1e6);
        }
        return -1e6 * (1.0 + failed) - violation;
    }
    switch (objective) {
    case Objective::witness_margin: return report.witness - 1.0;
    case Objective::negativity: return report.negativity;
    case Objective::runs_required:
        // fewer runs is better; log keeps the score bounded
        return -std::log10(static_cast<double>(std::max(report.runs, 1L)));
    }
    return 0.0;
}

std::pair<std::vector<double>, double>
simplex_maximize(const std::function<double(std::span<const double>)>& f,
                 std::span<const double> x0, std::span<const double> lo,
                 std::span<const double> hi, const SimplexOptions& opt) {
    const size_t n = x0.size();
    if (lo.size() != n || hi.size() != n) throw value_error("simplex bounds must match x0 size");
    for (size_t i = 0; i < n; ++i)
        if (!(lo[i] <= hi[i])) throw value_error("simplex bounds must satisfy lo <= hi");

    auto clamp = [&](std::vector<double>& x) {
        for (size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    };

    // Dimensions with a zero-width box are fixed.
    std::vector<size_t> free_dims;
    double box_diag = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double w = hi[i] - lo[i];
        if (w > 0.0) {
            free_dims.push_back(i);
            box_diag += w * w;
        }
    }
    box_diag = std::sqrt(box_diag);

    std::vector<double> start(x0.begin(), x0.end());
    clamp(start);
    if (free_dims.empty()) return {start, f(start)};

    struct Vertex {
        std::vector<double> x;
        double fx;
    };
    std::vector<Vertex> simplex;
    simplex.push_back({start, f(start)});
    for (size_t d : free_dims) {
        std::vector<double> x = start;
        const double step = 0.25 * (hi[d] - lo[d]);
        x[d] = (x[d] + step <= hi[d]) ? x[d] + step : x[d] - step;
        simplex.push_back({x, f(x)});
    }
    const size_t m = simplex.size(); // free_dims.size() + 1

    auto order = [&] {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.fx > b.fx; });
    };
    auto diameter = [&] {
        double worst = 0.0;
        for (size_t i = 1; i < m; ++i) {
            double d2 = 0.0;
            for (size_t k = 0; k < n; ++k) {
                const double dk = simplex[i].x[k] - simplex[0].x[k];
                d2 += dk * dk;
            }
            worst = std::max(worst, std::sqrt(d2));
        }
        return worst;
    };

    order();
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        if (box_diag == 0.0 || diameter() < opt.rel_tol * box_diag) break;

        std::vector<double> centroid(n, 0.0);
        for (size_t i = 0; i + 1 < m; ++i)
            for (size_t k = 0; k < n; ++k) centroid[k] += simplex[i].x[k];
        for (size_t k = 0; k < n; ++k) centroid[k] /= static_cast<double>(m - 1);

        const Vertex& worst = simplex[m - 1];
        auto blend = [&](double coef) {
            std::vector<double> x(n);
            for (size_t k = 0; k < n; ++k) x[k] = centroid[k] + coef * (centroid[k] - worst.x[k]);
            clamp(x);
            return x;
        };

        auto reflected = blend(1.0);
        const double fr = f(reflected);
        if (fr > simplex[0].fx) {
            auto expanded = blend(2.0);
            const double fe = f(expanded);
            simplex[m - 1] = fe > fr ? Vertex{std::move(expanded), fe}
                                     : Vertex{std::move(reflected), fr};
        } else if (fr > simplex[m - 2].fx) {
            simplex[m - 1] = {std::move(reflected), fr};
        } else {
            auto contracted = blend(-0.5);
            const double fc = f(contracted);
            if (fc > worst.fx) {
                simplex[m - 1] = {std::move(contracted), fc};
            } else {
                for (size_t i = 1; i < m; ++i) {
                    for (size_t k = 0; k < n; ++k)
                        simplex[i].x[k] = simplex[0].x[k] + 0.5 * (simplex[i].x[k] - simplex[0].x[k]);
                    clamp(simplex[i].x);
                    simplex[i].fx = f(simplex[i].x);
                }
            }
        }
        order();
    }
    return {simplex[0].x, simplex[0].fx};
}

OptimizeResult optimize(const ScanSpec& spec, const ExperimentConfig& base, int workers) {
    const auto rows = scan(spec, base, workers);

    size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rows.size(); ++i) {
        const double s = objective_score(rows[i].report, spec.objective);
        if (s > best_score) {
            best_score = s;
            best = i;
        }
    }

    const size_t n = spec.axes.size();
    std::vector<double> lo(n), hi(n);
    for (size_t a = 0; a < n; ++a) {
        const auto& vals = spec.axes[a].values;
        lo[a] = *std::min_element(vals.begin(), vals.end());
        hi[a] = *std::max_element(vals.begin(), vals.end());
    }

    auto score_at = [&](std::span<const double> coords) {
        return objective_score(evaluate(config_at(spec, base, coords)), spec.objective);
    };
    auto [coords, refined_score] = simplex_maximize(score_at, rows[best].coords, lo, hi);

    // The simplex starts at the grid optimum, so this only guards against
    // pathological objective surfaces.
    if (refined_score < best_score) coords = rows[best].coords;

    OptimizeResult out;
    out.coords = coords;
    out.config = config_at(spec, base, coords);
    out.report = evaluate(out.config);
    switch (spec.objective) {
    case Objective::witness_margin: out.objective_value = out.report.witness - 1.0; break;
    case Objective::negativity: out.objective_value = out.report.negativity; break;
    case Objective::runs_required:
        out.objective_value = static_cast<double>(out.report.runs);
        break;
    }
    return out;
}

} // namespace qgem::budget
