#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qgem/backgrounds.hpp"
#include "qgem/budget.hpp"
#include "qgem/entangle.hpp"
#include "qgem/interferometer.hpp"
#include "qgem/units.hpp"

using namespace qgem;
using namespace qgem::budget;

namespace {

// The headline design point: 10 pg particles, 400/100 um linear geometry,
// one second of interaction, no dipoles, no dephasing.
ExperimentConfig nominal() {
    ExperimentConfig c;
    c.mass = 1e-14;
    return c;
}

// A mathematically feasible pocket: micron-scale separations where the
// quarter-window reach covers the requested superposition distance.
ExperimentConfig feasible_point() {
    ExperimentConfig c;
    c.mass = 1e-14;
    c.geometry.d = 8e-6;
    c.geometry.dx = 2e-6;
    return c;
}

const ConstraintResult& find_constraint(const FeasibilityReport& rep, const std::string& name) {
    for (const auto& c : rep.constraints)
        if (c.name == name) return c;
    REQUIRE(false);
    return rep.constraints.front(); // unreachable
}

} // namespace

TEST_CASE("evaluate composes the module pipeline verbatim") {
    ExperimentConfig c = nominal();
    c.dipole.p = 1e-28; // small but nonzero so the dipole path is exercised
    c.dephasing = {{"gas", 0.05}, {"vibration", 0.02}};
    const auto rep = evaluate(c);

    // hand-composed pipeline from the public module functions
    const auto dist = ent::pairwise_distances(c.geometry);
    const auto pg = ent::gravitational_phases(c.mass, c.tau, dist);
    const auto pd = bg::dipole_phases(c.dipole, dist, c.tau);
    auto state = ent::assemble_state(
        {pg.ll + pd.ll, pg.lr + pd.lr, pg.rl + pd.rl, pg.rr + pd.rr});
    const double gamma = 0.07;
    state = ent::apply_dephasing(state, {gamma, gamma, c.tau});

    CHECK(rep.phi_grav == ent::entangling_phase(pg));
    CHECK(rep.phi_dip == ent::entangling_phase(pd));
    CHECK(rep.negativity == ent::negativity(state));
    CHECK(rep.witness == ent::witness_value(state, true));
    if (rep.witness > 1.0)
        CHECK(rep.runs == ent::runs_required(rep.witness, c.confidence_z));
    CHECK(rep.background_ratio ==
          bg::dipole_gravity_ratio(c.mass, c.geometry.d, c.dipole));
    CHECK(rep.dp_rate == bg::dp_collapse_rate(c.mass));

    const auto [al, ar] = sg::branch_acceleration(
        {c.ms_left, c.ms_right, c.gradient, c.mass, c.g_factor});
    CHECK(rep.superposition_achieved ==
          std::abs(al - ar) * (c.coherence_time / 4.0) * (c.coherence_time / 4.0));
}

TEST_CASE("nominal design point: entangled but out of reach") {
    const auto rep = evaluate(nominal());

    CHECK(rep.phi_grav == doctest::Approx(0.02109639790105129).epsilon(1e-12));
    CHECK(rep.phi_dip == 0.0);
    CHECK(rep.negativity == doctest::Approx(0.005274001672465778).epsilon(1e-10));
    CHECK(rep.witness == doctest::Approx(1.0105480033449314).epsilon(1e-10));
    CHECK(rep.runs > 0); // certifiable in principle
    CHECK(rep.background_ratio == 0.0);
    CHECK(rep.superposition_achieved == doctest::Approx(2.3219802733543638e-06).epsilon(1e-12));
    CHECK(rep.dp_rate == doctest::Approx(118.45).epsilon(1e-3));

    CHECK(find_constraint(rep, "pulse_window").pass);
    CHECK(find_constraint(rep, "background_ratio").pass);
    CHECK_FALSE(find_constraint(rep, "superposition_reach").pass); // 2.3 um << 100 um
    CHECK(find_constraint(rep, "witness_margin").pass);
    CHECK_FALSE(find_constraint(rep, "collapse_survival").pass);

    CHECK_FALSE(rep.feasible); // the reach constraint gates
    CHECK(rep.constraints.size() == 5);
    CHECK(rep.assumptions.size() >= 4);
}

TEST_CASE("informational constraints do not gate feasibility") {
    const auto rep = evaluate(feasible_point());
    CHECK(rep.feasible);
    const auto& collapse = find_constraint(rep, "collapse_survival");
    CHECK_FALSE(collapse.pass); // the model predicts collapse well before 1 s
    CHECK_FALSE(collapse.gating);
    CHECK(find_constraint(rep, "superposition_reach").pass);
    CHECK(rep.witness > 1.4); // micron-scale gap gives a strong signal
    CHECK(rep.runs > 0);
    CHECK(rep.runs < 200);
    CHECK(rep.runs == ent::runs_required(rep.witness, 3.0));
}

TEST_CASE("pulse window, witness margin, and background gates") {
    ExperimentConfig c = feasible_point();
    c.t1 = 0.3; // 4 t1 = 1.2 s exceeds the 1 s coherence window
    auto rep = evaluate(c);
    CHECK_FALSE(find_constraint(rep, "pulse_window").pass);
    CHECK_FALSE(rep.feasible);

    c = feasible_point();
    c.dephasing = {{"everything", 50.0}};
    rep = evaluate(c);
    CHECK(rep.witness < 1.0);
    CHECK_FALSE(find_constraint(rep, "witness_margin").pass);
    CHECK(rep.runs == 0); // sentinel: not certifiable at this point
    CHECK_FALSE(rep.feasible);

    // an unmitigated 1e-4 e cm dipole swamps gravity at the nominal spacing
    c = nominal();
    c.dipole.p = Constants::e * 1e-6;
    rep = evaluate(c);
    CHECK(rep.background_ratio > 1e5);
    CHECK_FALSE(find_constraint(rep, "background_ratio").pass);

    // seven orders of suppression brings it under the default 0.1 threshold
    c.mitigations = {{"discharge", 1e-3}, {"shield", 1e-4}};
    rep = evaluate(c);
    CHECK(rep.background_ratio ==
          doctest::Approx(3.456658454582108e6 * (0.0625) * 1e-7).epsilon(1e-10));
    CHECK(find_constraint(rep, "background_ratio").pass);
}

TEST_CASE("dephasing monotonically erodes the witness") {
    ExperimentConfig c = feasible_point();
    double last_witness = 2.1;
    for (double rate : {0.0, 0.1, 0.3, 0.6, 1.0, 2.0}) {
        c.dephasing = {{"aggregate", rate}};
        const auto rep = evaluate(c);
        CHECK(rep.witness < last_witness);
        last_witness = rep.witness;
    }
    CHECK(last_witness < 1.0); // strong enough dephasing kills certification
}

TEST_CASE("shield reporting") {
    ExperimentConfig c = feasible_point();
    c.dipole.p = 1e-26;
    auto rep = evaluate(c);
    CHECK_FALSE(rep.shield_enabled);
    CHECK(rep.shield_image_force == 0.0);

    c.shield.enabled = true;
    c.shield.z = 50e-6;
    rep = evaluate(c);
    CHECK(rep.shield_enabled);
    CHECK(rep.shield_image_force == bg::image_dipole_force(1e-26, 50e-6));
}

TEST_CASE("total dephasing sums named rates") {
    const std::vector<NamedRate> rates = {{"gas", 0.3}, {"blackbody", 0.2}, {"seismic", 0.01}};
    CHECK(total_dephasing(rates) == doctest::Approx(0.51).epsilon(1e-14));
    CHECK(total_dephasing({}) == 0.0);
    const std::vector<NamedRate> bad = {{"negative", -0.1}};
    CHECK_THROWS_AS(total_dephasing(bad), value_error);
}

TEST_CASE("config validation") {
    ExperimentConfig c; // mass unset
    CHECK_THROWS_AS(evaluate(c), value_error);

    c = nominal();
    c.geometry.dx = c.geometry.d; // touching branches in the linear layout
    CHECK_THROWS_AS(evaluate(c), value_error);

    c = nominal();
    c.t1 = 0.0;
    CHECK_THROWS_AS(evaluate(c), value_error);

    c = nominal();
    c.coherence_time = 0.0;
    CHECK_THROWS_AS(evaluate(c), value_error);

    c = nominal();
    c.ms_left = c.ms_right;
    CHECK_THROWS_AS(evaluate(c), value_error);

    c = nominal();
    c.ratio_threshold = 0.0;
    CHECK_THROWS_AS(evaluate(c), value_error);

    c = nominal();
    c.confidence_z = -1.0;
    CHECK_THROWS_AS(evaluate(c), value_error);

    c = nominal();
    c.dipole.kappa = 5.0;
    CHECK_THROWS_AS(evaluate(c), value_error);

    c = nominal();
    c.dephasing = {{"bad", -1.0}};
    CHECK_THROWS_AS(evaluate(c), value_error);

    c = nominal();
    c.mitigations = {{"too strong", 0.0}};
    CHECK_THROWS_AS(evaluate(c), value_error);
}

TEST_CASE("evaluate is referentially transparent") {
    const ExperimentConfig c = feasible_point();
    const auto a = evaluate(c);
    const auto b = evaluate(c);
    CHECK(a.phi_grav == b.phi_grav);
    CHECK(a.witness == b.witness);
    CHECK(a.negativity == b.negativity);
    CHECK(a.runs == b.runs);
    CHECK(a.background_ratio == b.background_ratio);
    CHECK(a.feasible == b.feasible);
}

TEST_CASE("parameter paths cover the numeric surface") {
    ExperimentConfig c = nominal();
    c.dephasing = {{"gas", 0.1}};
    c.mitigations = {{"shield", 0.5}};

    const auto paths = parameter_paths(c);
    for (const char* expected :
         {"mass", "d", "dx", "tau", "t1", "gradient", "coherence_time", "g_factor", "ms_left",
          "ms_right", "dipole.p", "dipole.kappa", "ratio_threshold", "confidence_z", "shield.z",
          "dephasing.gas", "mitigations.shield"})
        CHECK(std::find(paths.begin(), paths.end(), expected) != paths.end());

    // every advertised path can be read and round-trips through set
    for (const auto& path : paths) {
        const double v = get_parameter(c, path);
        CHECK_NOTHROW(set_parameter(c, path, v));
        CHECK(get_parameter(c, path) == v);
    }
}

TEST_CASE("parameter set/get semantics") {
    ExperimentConfig c = nominal();

    set_parameter(c, "mass", 2e-14);
    CHECK(c.mass == 2e-14);
    CHECK(get_parameter(c, "mass") == 2e-14);

    set_parameter(c, "d", 3e-4);
    CHECK(c.geometry.d == 3e-4);

    set_parameter(c, "ms_left", 0.0);
    CHECK(c.ms_left == 0);
    CHECK_THROWS_AS(set_parameter(c, "ms_left", 0.5), value_error);
    CHECK_THROWS_AS(set_parameter(c, "ms_right", -2.0), value_error);

    // absent named rates read as zero and appear on first write
    CHECK(get_parameter(c, "dephasing.gas") == 0.0);
    set_parameter(c, "dephasing.gas", 0.25);
    CHECK(get_parameter(c, "dephasing.gas") == 0.25);
    set_parameter(c, "dephasing.gas", 0.5); // update, not duplicate
    CHECK(c.dephasing.size() == 1);
    CHECK(c.dephasing[0].rate == 0.5);

    // absent mitigations read as the identity suppression
    CHECK(get_parameter(c, "mitigations.shield") == 1.0);
    set_parameter(c, "mitigations.shield", 0.01);
    CHECK(get_parameter(c, "mitigations.shield") == 0.01);

    CHECK_THROWS_AS(set_parameter(c, "no_such_field", 1.0), config_error);
    CHECK_THROWS_AS(get_parameter(c, "geometry.q"), config_error);
    CHECK_THROWS_AS(parameter_dims("bogus"), config_error);

    CHECK(parameter_dims("mass") == units::mass);
    CHECK(parameter_dims("gradient") == units::field_gradient);
    CHECK(parameter_dims("dephasing.anything") == units::rate);
    CHECK(parameter_dims("g_factor") == units::dimensionless);
}

TEST_CASE("scan runs the grid in lexicographic order, first axis slowest") {
    ScanSpec spec;
    spec.axes = {{"mass", {1e-14, 2e-14, 4e-14}}, {"d", {3e-4, 4e-4}}};
    const auto rows = scan(spec, nominal());

    REQUIRE(rows.size() == 6);
    const std::vector<std::vector<double>> expected = {
        {1e-14, 3e-4}, {1e-14, 4e-4}, {2e-14, 3e-4},
        {2e-14, 4e-4}, {4e-14, 3e-4}, {4e-14, 4e-4}};
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].coords == expected[i]);

        // each row is exactly an evaluate() of the modified base config
        ExperimentConfig c = nominal();
        c.mass = rows[i].coords[0];
        c.geometry.d = rows[i].coords[1];
        const auto rep = evaluate(c);
        CHECK(rows[i].report.phi_grav == rep.phi_grav);
        CHECK(rows[i].report.witness == rep.witness);
        CHECK(rows[i].report.feasible == rep.feasible);
    }

    // the entangling phase scales as m^2 along the mass axis
    CHECK(rows[2].report.phi_grav ==
          doctest::Approx(4.0 * rows[0].report.phi_grav).epsilon(1e-12));
    CHECK(rows[4].report.phi_grav ==
          doctest::Approx(16.0 * rows[0].report.phi_grav).epsilon(1e-12));
}

TEST_CASE("scan results are identical across worker counts") {
    ScanSpec spec;
    spec.axes = {{"mass", {1e-14, 2e-14, 3e-14, 5e-14, 8e-14}},
                 {"tau", {0.25, 0.5, 1.0, 2.0}}};
    const auto serial = scan(spec, nominal(), 1);
    const auto parallel = scan(spec, nominal(), 4);
    const auto oversubscribed = scan(spec, nominal(), 16);

    REQUIRE(serial.size() == 20);
    REQUIRE(parallel.size() == 20);
    for (size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].coords == parallel[i].coords);
        CHECK(serial[i].report.witness == parallel[i].report.witness);
        CHECK(serial[i].report.runs == parallel[i].report.runs);
        CHECK(serial[i].report.phi_grav == oversubscribed[i].report.phi_grav);
        CHECK(serial[i].report.feasible == oversubscribed[i].report.feasible);
    }
}

TEST_CASE("scan validation") {
    ScanSpec spec; // no axes
    CHECK_THROWS_AS(scan(spec, nominal()), config_error);
    spec.axes = {{"mass", {}}};
    CHECK_THROWS_AS(scan(spec, nominal()), config_error);
    spec.axes = {{"unknown.path", {1.0}}};
    CHECK_THROWS_AS(scan(spec, nominal()), config_error);
    spec.axes = {{"mass", {std::numeric_limits<double>::infinity()}}};
    CHECK_THROWS_AS(scan(spec, nominal()), config_error);
}

TEST_CASE("objective scores order design points sensibly") {
    const auto good = evaluate(feasible_point());
    const auto bad = evaluate(nominal()); // infeasible: reach fails

    for (auto obj : {Objective::witness_margin, Objective::negativity, Objective::runs_required})
        CHECK(objective_score(good, obj) > objective_score(bad, obj));

    CHECK(objective_score(good, Objective::witness_margin) ==
          doctest::Approx(good.witness - 1.0).epsilon(1e-14));
    CHECK(objective_score(good, Objective::negativity) ==
          doctest::Approx(good.negativity).epsilon(1e-14));
    CHECK(objective_score(good, Objective::runs_required) ==
          doctest::Approx(-std::log10(static_cast<double>(good.runs))).epsilon(1e-12));
    CHECK(objective_score(bad, Objective::witness_margin) < -1e6);

    // an infeasible point failing two gates scores below one failing one
    ExperimentConfig c = nominal();
    c.t1 = 0.3; // also break the pulse window
    const auto worse = evaluate(c);
    CHECK(objective_score(worse, Objective::witness_margin) <
          objective_score(bad, Objective::witness_margin));
}

TEST_CASE("objective name round-trip") {
    for (auto obj : {Objective::witness_margin, Objective::negativity, Objective::runs_required})
        CHECK(objective_from_string(to_string(obj)) == obj);
    CHECK_THROWS_AS(objective_from_string("profit"), config_error);
}

TEST_CASE("simplex maximizer on smooth test functions") {
    // concave quadratic with an interior optimum
    auto bowl = [](std::span<const double> x) {
        const double a = x[0] - 0.3, b = x[1] + 0.2;
        return -(a * a) - (b * b);
    };
    const std::vector<double> x0 = {-0.5, 0.9}, lo = {-1.0, -1.0}, hi = {1.0, 1.0};
    const auto [x, fx] = simplex_maximize(bowl, x0, lo, hi);
    CHECK(std::abs(x[0] - 0.3) < 1e-3);
    CHECK(std::abs(x[1] + 0.2) < 1e-3);
    CHECK(fx > -1e-6);

    // linear objective pushes to the box corner and stays clamped
    auto ramp = [](std::span<const double> x) { return x[0] + 0.5 * x[1]; };
    const auto [xc, fc] = simplex_maximize(ramp, x0, lo, hi);
    CHECK(xc[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(xc[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fc == doctest::Approx(1.5).epsilon(1e-6));

    // zero-width box: the input point is the answer
    const std::vector<double> fixed = {0.7, -0.1};
    const auto [xf, ff] = simplex_maximize(bowl, fixed, fixed, fixed);
    CHECK(xf == fixed);
    CHECK(ff == bowl(fixed));

    // determinism
    const auto second = simplex_maximize(bowl, x0, lo, hi);
    CHECK(second.first == x);
    CHECK(second.second == fx);

    CHECK_THROWS_AS(simplex_maximize(bowl, x0, lo, std::vector<double>{1.0}), value_error);
    CHECK_THROWS_AS(
        simplex_maximize(bowl, x0, std::vector<double>{2.0, 0.0}, std::vector<double>{1.0, 1.0}),
        value_error);
}

TEST_CASE("optimizer refines the best grid point and never regresses") {
    ExperimentConfig base = feasible_point();
    ScanSpec spec;
    spec.objective = Objective::witness_margin;
    spec.axes = {{"d", {8e-6, 2e-5, 5e-5, 1e-4}}, {"tau", {0.5, 1.0}}};

    const auto rows = scan(spec, base);
    double best_grid = -std::numeric_limits<double>::infinity();
    for (const auto& row : rows)
        best_grid = std::max(best_grid, objective_score(row.report, spec.objective));

    const auto result = optimize(spec, base);
    CHECK(objective_score(result.report, spec.objective) >= best_grid);
    CHECK(result.objective_value == doctest::Approx(result.report.witness - 1.0).epsilon(1e-14));

    // the refined point stays inside the axis box
    CHECK(result.coords[0] >= 8e-6);
    CHECK(result.coords[0] <= 1e-4);
    CHECK(result.coords[1] >= 0.5);
    CHECK(result.coords[1] <= 1.0);

    // the reported config carries the refined coordinates
    CHECK(get_parameter(result.config, "d") == result.coords[0]);
    CHECK(get_parameter(result.config, "tau") == result.coords[1]);
    // and the report is exactly evaluate() of that config
    const auto replay = evaluate(result.config);
    CHECK(result.report.witness == replay.witness);
    CHECK(result.report.feasible == replay.feasible);
}

TEST_CASE("optimizer with single-point axes reproduces evaluate") {
    ScanSpec spec;
    spec.objective = Objective::negativity;
    spec.axes = {{"mass", {1e-14}}, {"d", {8e-6}}};
    ExperimentConfig base = feasible_point();

    const auto result = optimize(spec, base);
    CHECK(result.coords == std::vector<double>{1e-14, 8e-6});
    const auto direct = evaluate(feasible_point());
    CHECK(result.report.negativity == direct.negativity);
    CHECK(result.objective_value == direct.negativity);
}

TEST_CASE("optimizer minimizes runs when asked") {
    ScanSpec spec;
    spec.objective = Objective::runs_required;
    spec.axes = {{"d", {8e-6, 9e-6}}};
    const auto result = optimize(spec, feasible_point());

    // within the box the signal strengthens toward smaller separations
    CHECK(result.coords[0] == doctest::Approx(8e-6).epsilon(1e-9));
    CHECK(result.report.feasible);
    CHECK(result.objective_value == static_cast<double>(result.report.runs));

    const auto at_lo = evaluate(feasible_point());
    CHECK(result.report.runs <= at_lo.runs);
}
