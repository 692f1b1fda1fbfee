#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qgem/backgrounds.hpp"
#include "qgem/entangle.hpp"
#include "qgem/errors.hpp"
#include "qgem/interferometer.hpp"
#include "qgem/units.hpp"

namespace qgem::budget {

struct NamedRate {
    std::string name;
    double rate; // s^-1, >= 0
};

struct ShieldSpec {
    bool enabled = false;
    double z = 50e-6; // m, particle-to-shield distance
};

// Full description of one experiment design point. Everything is SI.
struct ExperimentConfig {
    double mass = 0.0; // kg; required, no default
    ent::TwoInterferometerGeometry geometry;
    double tau = 1.0;            // s, entangling interaction time
    double t1 = 0.25;            // s, quarter period of the pulse sequence
    double gradient = 1e4;       // T/m
    double coherence_time = 1.0; // s
    int ms_left = +1;
    int ms_right = -1;
    double g_factor = Constants::g_e_default;
    bg::DipoleSpec dipole;                        // p = 0: no EM contamination
    std::vector<bg::MitigationFactor> mitigations;
    std::vector<NamedRate> dephasing;
    double ratio_threshold = 0.1; // EM/gravity ratio allowed after mitigation
    double confidence_z = 3.0;    // z-score for runs_required
    ShieldSpec shield;

    void validate() const; // throws value_error
};

struct ConstraintResult {
    std::string name;
    bool gating; // informational constraints never fail the design
    bool pass;
    double measured;
    double bound;
};

struct FeasibilityReport {
    double phi_grav = 0.0;    // rad
    double phi_dip = 0.0;     // rad
    double negativity = 0.0;
    double witness = 0.0;
    long runs = 0;            // repetitions per correlator; 0 = not certifiable
    double background_ratio = 0.0; // after mitigation
    double superposition_achieved = 0.0; // m, at t1 = coherence_time/4
    double dp_rate = 0.0;     // s^-1
    bool shield_enabled = false;
    double shield_image_force = 0.0; // N, 0 when shield disabled
    std::vector<ConstraintResult> constraints;
    std::vector<std::string> assumptions;
    bool feasible = false; // all gating constraints pass
};

// Sum of the named rates; throws on a negative rate.
double total_dephasing(std::span<const NamedRate> rates);

// The full pipeline: pair distances -> gravitational + dipole branch phases
// -> two-qubit state -> dephasing -> negativity / witness / runs, plus the
// background-ratio, reach, pulse-window and collapse-rate checks.
FeasibilityReport evaluate(const ExperimentConfig& config);

// --- parameter paths (used by scans, the optimizer, and CLI overrides) ----

// Dotted paths addressing numeric config fields: mass, d, dx, tau, t1,
// gradient, coherence_time, g_factor, ms_left, ms_right, dipole.p,
// dipole.kappa, ratio_threshold, confidence_z, shield.z, dephasing.<name>,
// mitigations.<name>.
std::vector<std::string> parameter_paths(const ExperimentConfig& config);

// SI dimensions expected for a path (throws config_error for unknown ones).
units::dim7 parameter_dims(const std::string& path);

// Set a numeric field by path; unknown path -> config_error.
void set_parameter(ExperimentConfig& config, const std::string& path, double value_si);
double get_parameter(const ExperimentConfig& config, const std::string& path);

// --- scan / optimize ------------------------------------------------------

enum class Objective { witness_margin, negativity, runs_required };
std::string to_string(Objective o);
Objective objective_from_string(const std::string& name); // throws config_error

struct ScanAxis {
    std::string path;
    std::vector<double> values; // SI, evaluated in order
};

struct ScanSpec {
    std::vector<ScanAxis> axes;
    Objective objective = Objective::witness_margin;
    std::uint64_t seed = 0; // recorded in outputs; evaluation is deterministic
};

struct ScanRow {
    std::vector<double> coords; // one value per axis
    FeasibilityReport report;
};

// Dense grid evaluation, lexicographic over the axes (first axis slowest).
// Row order and content are independent of the worker count.
std::vector<ScanRow> scan(const ScanSpec& spec, const ExperimentConfig& base, int workers = 1);

struct OptimizeResult {
    ExperimentConfig config;
    FeasibilityReport report;
    std::vector<double> coords;
    double objective_value; // natural units: W-1, N, or runs
};

// Grid seeding over spec.axes followed by bounded Nelder-Mead refinement
// inside the axis bounding box. Deterministic; the refined point never
// scores below the best grid point.
OptimizeResult optimize(const ScanSpec& spec, const ExperimentConfig& base, int workers = 1);

// Scalar ordering used by scan/optimize: higher is better, infeasible
// points always score below feasible ones.
double objective_score(const FeasibilityReport& report, Objective objective);

struct SimplexOptions {
    int max_iter = 400;
    double rel_tol = 1e-6; // simplex diameter relative to the box diagonal
};

// Bounded derivative-free maximizer (reflection 1, expansion 2,
// contraction 0.5, shrink 0.5, box clamping). Deterministic.
std::pair<std::vector<double>, double>
simplex_maximize(const std::function<double(std::span<const double>)>& f,
                 std::span<const double> x0, std::span<const double> lo,
                 std::span<const double> hi, const SimplexOptions& opt = {});

} // namespace qgem::budget
