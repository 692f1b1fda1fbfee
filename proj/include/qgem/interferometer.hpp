#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "qgem/errors.hpp"
#include "qgem/units.hpp"

namespace qgem::sg {

// One free-flight Stern-Gerlach interferometer: a spin-dependent force
// mu * dB/dz splits the matter wave, microwave pi pulses exchange the two
// spin labels, and the arms close after 4*t1.

struct SplittingSpec {
    int ms_left = +1;       // spin projection carried by the left branch
    int ms_right = -1;      // spin projection carried by the right branch
    double gradient = 1e4;  // dB/dz, T/m
    double mass = 1e-14;    // kg
    double g_factor = Constants::g_e_default;

    void validate() const; // throws value_error on bad fields
};

enum class PulseKind { pi_half, pi, readout };

struct PulseEvent {
    double t;
    PulseKind kind;
};

struct PulseSequence {
    double t1 = 0.0; // quarter period, s
    std::vector<PulseEvent> events;
};

// pi/2 at 0, pi at t1, pi at 3*t1, readout at 4*t1.
PulseSequence free_flight_sequence(double t1);

struct TrajectorySample {
    double t;
    double x_left, x_right;
    double v_left, v_right;
};

struct BranchTrajectory {
    std::vector<TrajectorySample> samples; // t monotone, 0 .. 4*t1
    double closure_position = 0.0;         // (x_left - x_right) at 4*t1
    double closure_velocity = 0.0;         // (v_left - v_right) at 4*t1
    double t1 = 0.0;
    double delta_a = 0.0; // a_left - a_right during the opening phase
    double mean_a = 0.0;  // (a_left + a_right) / 2, constant across pi pulses
    bool analytic = true; // closed-form kinematics (false for the numeric hook)
};

// a = -ms * g_factor * mu_B * gradient / mass. Positive ms accelerates
// toward -z; an ms = 0 branch feels no force.
std::pair<double, double> branch_acceleration(const SplittingSpec& spec);

// Closed-form piecewise constant-acceleration kinematics for the standard
// 1:2:1 sequence. Each pi pulse exchanges the branch spin labels, so the
// relative acceleration runs (da, -da, da) and the arms close exactly:
// the returned closure residuals are floating-point zero. Samples are a
// uniform grid joined with the pulse times, so the t=2*t1 peak is sampled
// exactly. n_samples >= 5.
BranchTrajectory simulate_branches(const SplittingSpec& spec, const PulseSequence& seq,
                                   int n_samples);

// Hook for position/time-dependent gradients: velocity-Verlet integration
// of both branches with dB/dz = profile(z, t). A default-constructed
// profile means the uniform spec.gradient. Closure residuals here are
// numerical, not exact.
using GradientProfile = std::function<double(double z, double t)>;
BranchTrajectory simulate_branches_numeric(const SplittingSpec& spec, const PulseSequence& seq,
                                           int n_steps, int n_samples,
                                           const GradientProfile& profile = {});

// max over samples of |x_right - x_left|; |da|*t1^2 for the standard
// sequence, reached at t = 2*t1.
double max_separation(const BranchTrajectory& traj);

// Integral of |x_right - x_left| over the full sequence; 2*|da|*t1^3 for
// the standard sequence (exact piecewise integration for analytic
// trajectories, trapezoid over samples otherwise).
double integrated_separation(const BranchTrajectory& traj);

// Phase between the arms from a table tilt theta against local gravity:
// phi = (mass * g_local * sin(theta) / hbar) * integrated_separation.
double tilt_phase(const BranchTrajectory& traj, double theta, double mass, double g_local);

// Smallest theta > 0 producing one full fringe (tilt_phase = 2*pi).
double fringe_tilt(const BranchTrajectory& traj, double mass, double g_local);

// Gaussian-wavepacket overlap contrast for imperfect closure residuals:
// exp(-dx^2/(8 sigma_x^2) - dv^2/(8 sigma_v^2)).
double interference_contrast(double closure_position, double closure_velocity, double sigma_x,
                             double sigma_v);

// pi * diameter^2 * areal_density: unpaired-spin count on a sphere's
// surface. SI inputs (m, m^-2); 0.01 spins/nm^2 is 1e16 m^-2.
double surface_spin_count(double diameter, double areal_density);

// Thermal spin polarization tanh(g * mu_B * B / (2 k_B T)).
double boltzmann_polarization(double B, double T, double g = Constants::g_e_default);

} // namespace qgem::sg
