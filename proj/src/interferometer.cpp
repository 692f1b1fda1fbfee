#include "qgem/interferometer.hpp"

#include <algorithm>
#include <cmath>

namespace qgem::sg {

namespace {

bool valid_ms(int ms) { return ms == -1 || ms == 0 || ms == 1; }

// Relative displacement x_left - x_right for the 1:2:1 sequence with
// relative acceleration (da, -da, da). The last phase is evaluated in
// vertex form 0.5*da*(4t1 - t)^2 so the value at t = 4t1 is exactly zero.
double rel_position(double da, double t1, double t) {
    if (t <= t1) return 0.5 * da * t * t;
    if (t <= 3.0 * t1) {
        const double u = t - t1;
        return 0.5 * da * t1 * t1 + da * t1 * u - 0.5 * da * u * u;
    }
    const double u = 4.0 * t1 - t;
    return 0.5 * da * u * u;
}

double rel_velocity(double da, double t1, double t) {
    if (t <= t1) return da * t;
    if (t <= 3.0 * t1) return da * (t1 - (t - t1));
    return -da * (4.0 * t1 - t);
}

void check_standard_sequence(const PulseSequence& seq) {
    if (seq.t1 <= 0.0) throw value_error("pulse sequence has non-positive t1");
    if (seq.events.size() != 4 || seq.events[0].kind != PulseKind::pi_half ||
        seq.events[1].kind != PulseKind::pi || seq.events[2].kind != PulseKind::pi ||
        seq.events[3].kind != PulseKind::readout || seq.events[0].t != 0.0 ||
        seq.events[1].t != seq.t1 || seq.events[2].t != 3.0 * seq.t1 ||
        seq.events[3].t != 4.0 * seq.t1)
        throw value_error("unsupported pulse sequence: expected pi/2, pi, pi, readout at 0, t1, 3t1, 4t1");
}

// Uniform n-point grid over [0, 4t1] merged with the pulse times.
std::vector<double> sample_times(double t1, int n_samples) {
    std::vector<double> ts;
    ts.reserve(static_cast<size_t>(n_samples) + 3);
    const double total = 4.0 * t1;
    for (int k = 0; k < n_samples; ++k)
        ts.push_back(total * (static_cast<double>(k) / (n_samples - 1)));
    ts.push_back(t1);
    ts.push_back(2.0 * t1);
    ts.push_back(3.0 * t1);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

} // namespace

void SplittingSpec::validate() const {
    if (!valid_ms(ms_left) || !valid_ms(ms_right))
        throw value_error("spin projections must be in {-1, 0, +1}");
    if (ms_left == ms_right) throw value_error("branch spin projections must differ");
    if (!(gradient >= 0.0)) throw value_error("gradient must be >= 0");
    if (!(mass > 0.0)) throw value_error("mass must be > 0");
    if (!(g_factor > 0.0) || !std::isfinite(g_factor))
        throw value_error("g_factor must be positive and finite");
}

PulseSequence free_flight_sequence(double t1) {
    if (!(t1 > 0.0)) throw value_error("t1 must be > 0 for a free-flight sequence");
    PulseSequence seq;
    seq.t1 = t1;
    seq.events = {{0.0, PulseKind::pi_half},
                  {t1, PulseKind::pi},
                  {3.0 * t1, PulseKind::pi},
                  {4.0 * t1, PulseKind::readout}};
    return seq;
}

std::pair<double, double> branch_acceleration(const SplittingSpec& spec) {
    spec.validate();
    const double scale = spec.g_factor * Constants::mu_B * spec.gradient / spec.mass;
    return {-spec.ms_left * scale, -spec.ms_right * scale};
}

BranchTrajectory simulate_branches(const SplittingSpec& spec, const PulseSequence& seq,
                                   int n_samples) {
    check_standard_sequence(seq);
    if (n_samples < 5) throw value_error("n_samples must be >= 5");
    const auto [a_left, a_right] = branch_acceleration(spec);

    BranchTrajectory traj;
    traj.t1 = seq.t1;
    traj.delta_a = a_left - a_right;
    traj.mean_a = 0.5 * (a_left + a_right);
    traj.analytic = true;

    // Center of mass: the pi pulses exchange spin labels between the
    // branches, so the mean acceleration is constant and the center moves
    // ballistically. Branch positions are center +- half the relative
    // displacement.
    for (double t : sample_times(seq.t1, n_samples)) {
        const double xc = 0.5 * traj.mean_a * t * t;
        const double vc = traj.mean_a * t;
        const double dx = rel_position(traj.delta_a, seq.t1, t);
        const double dv = rel_velocity(traj.delta_a, seq.t1, t);
        traj.samples.push_back({t, xc + 0.5 * dx, xc - 0.5 * dx, vc + 0.5 * dv, vc - 0.5 * dv});
    }
    const double t_end = 4.0 * seq.t1;
    traj.closure_position = rel_position(traj.delta_a, seq.t1, t_end);
    traj.closure_velocity = rel_velocity(traj.delta_a, seq.t1, t_end);
    return traj;
}

BranchTrajectory simulate_branches_numeric(const SplittingSpec& spec, const PulseSequence& seq,
                                           int n_steps, int n_samples,
                                           const GradientProfile& profile) {
    check_standard_sequence(seq);
    if (n_steps < 4) throw value_error("n_steps must be >= 4");
    if (n_samples < 5) throw value_error("n_samples must be >= 5");
    spec.validate();

    const double mu = Constants::mu_B * spec.g_factor;
    auto accel = [&](int ms, double z, double t) {
        const double grad = profile ? profile(z, t) : spec.gradient;
        return -static_cast<double>(ms) * mu * grad / spec.mass;
    };

    // Spin labels exchanged by each pi pulse.
    int ms_l = spec.ms_left, ms_r = spec.ms_right;
    const double total = 4.0 * seq.t1;
    const double dt = total / n_steps;
    double xl = 0.0, xr = 0.0, vl = 0.0, vr = 0.0;
    double al = accel(ms_l, xl, 0.0), ar = accel(ms_r, xr, 0.0);

    BranchTrajectory traj;
    traj.t1 = seq.t1;
    {
        const auto [a0l, a0r] = branch_acceleration(spec);
        traj.delta_a = a0l - a0r;
        traj.mean_a = 0.5 * (a0l + a0r);
    }
    traj.analytic = false;

    const int stride = std::max(1, n_steps / (n_samples - 1));
    traj.samples.push_back({0.0, xl, xr, vl, vr});
    int next_flip = 1; // pulse events [1] and [2] are the pi pulses
    for (int i = 0; i < n_steps; ++i) {
        const double t = i * dt;
        // velocity Verlet; exact for piecewise-constant acceleration as
        // long as steps do not straddle a pulse, so flip on the nearest step
        while (next_flip < 3 && t >= seq.events[next_flip].t - 0.5 * dt) {
            std::swap(ms_l, ms_r);
            al = accel(ms_l, xl, t);
            ar = accel(ms_r, xr, t);
            ++next_flip;
        }
        xl += vl * dt + 0.5 * al * dt * dt;
        xr += vr * dt + 0.5 * ar * dt * dt;
        const double al2 = accel(ms_l, xl, t + dt), ar2 = accel(ms_r, xr, t + dt);
        vl += 0.5 * (al + al2) * dt;
        vr += 0.5 * (ar + ar2) * dt;
        al = al2;
        ar = ar2;
        if ((i + 1) % stride == 0 || i + 1 == n_steps)
            traj.samples.push_back({(i + 1) * dt, xl, xr, vl, vr});
    }
    traj.closure_position = xl - xr;
    traj.closure_velocity = vl - vr;
    return traj;
}

double max_separation(const BranchTrajectory& traj) {
    double best = 0.0;
    for (const auto& s : traj.samples) best = std::max(best, std::abs(s.x_right - s.x_left));
    return best;
}

double integrated_separation(const BranchTrajectory& traj) {
    if (traj.analytic) {
        const double t1 = traj.t1;
        return 2.0 * std::abs(traj.delta_a) * t1 * t1 * t1;
    }
    double acc = 0.0;
    for (size_t i = 1; i < traj.samples.size(); ++i) {
        const auto& a = traj.samples[i - 1];
        const auto& b = traj.samples[i];
        acc += 0.5 * (std::abs(a.x_right - a.x_left) + std::abs(b.x_right - b.x_left)) * (b.t - a.t);
    }
    return acc;
}

double tilt_phase(const BranchTrajectory& traj, double theta, double mass, double g_local) {
    if (!(std::abs(theta) < M_PI / 2.0)) throw value_error("tilt angle must satisfy |theta| < pi/2");
    if (!(mass > 0.0)) throw value_error("mass must be > 0");
    return mass * g_local * std::sin(theta) / Constants::hbar * integrated_separation(traj);
}

double fringe_tilt(const BranchTrajectory& traj, double mass, double g_local) {
    if (!(mass > 0.0)) throw value_error("mass must be > 0");
    if (!(g_local > 0.0)) throw value_error("g_local must be > 0");
    const double integral = integrated_separation(traj);
    if (!(integral > 0.0)) throw value_error("zero branch separation: no fringe exists at any tilt");
    const double s = 2.0 * M_PI * Constants::hbar / (mass * g_local * integral);
    if (s > 1.0) throw value_error("one full fringe is unreachable below pi/2 tilt");
    return std::asin(s);
}

double interference_contrast(double closure_position, double closure_velocity, double sigma_x,
                             double sigma_v) {
    if (!(sigma_x > 0.0) || !(sigma_v > 0.0))
        throw value_error("wavepacket widths must be > 0");
    const double dx = closure_position, dv = closure_velocity;
    return std::exp(-dx * dx / (8.0 * sigma_x * sigma_x) - dv * dv / (8.0 * sigma_v * sigma_v));
}

double surface_spin_count(double diameter, double areal_density) {
    if (!(diameter > 0.0)) throw value_error("diameter must be > 0");
    if (!(areal_density >= 0.0)) throw value_error("areal density must be >= 0");
    return M_PI * diameter * diameter * areal_density;
}

double boltzmann_polarization(double B, double T, double g) {
    if (!(T > 0.0)) throw value_error("temperature must be > 0");
    if (!(B >= 0.0)) throw value_error("field must be >= 0");
    return std::tanh(g * Constants::mu_B * B / (2.0 * Constants::k_B * T));
}

} // namespace qgem::sg
