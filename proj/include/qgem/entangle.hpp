#pragma once

#include <string>

#include <Eigen/Dense>

#include "qgem/errors.hpp"

namespace qgem::ent {

enum class Arrangement { linear, parallel };

std::string to_string(Arrangement a);
Arrangement arrangement_from_string(const std::string& name); // throws value_error

// Two adjacent interferometers a distance d apart, each opened to a
// superposition distance dx. In the linear arrangement the branches lie on
// the line joining the particles (closest approach d - dx); in the parallel
// arrangement the splitting is perpendicular to that line.
struct TwoInterferometerGeometry {
    Arrangement arrangement = Arrangement::linear;
    double d = 400e-6;  // m
    double dx = 100e-6; // m

    void validate() const; // throws value_error
};

struct PairDistances {
    double r_ll, r_lr, r_rl, r_rr; // m
};

struct BranchPhases {
    double ll = 0.0, lr = 0.0, rl = 0.0, rr = 0.0; // rad
};

// linear: (d, d+dx, d-dx, d); parallel: (d, hyp, hyp, d) with
// hyp = sqrt(d^2 + dx^2).
PairDistances pairwise_distances(const TwoInterferometerGeometry& geom);

// Newtonian interaction phases phi_ij = G m^2 tau / (hbar r_ij).
BranchPhases gravitational_phases(double mass, double tau, const PairDistances& r);

// Phi = phi_lr + phi_rl - phi_ll - phi_rr: the only phase combination that
// survives local operations on either interferometer.
double entangling_phase(const BranchPhases& phases);

struct TwoQubitState {
    Eigen::Matrix4cd rho; // basis |LL>, |LR>, |RL>, |RR>

    // Hermiticity/trace/positivity are enforced on construction paths that
    // accept external matrices.
    static TwoQubitState validated(const Eigen::Matrix4cd& rho);
};

// |psi> = 1/2 sum_ij e^{i phi_ij} |ij>, returned as the pure density matrix.
TwoQubitState assemble_state(const BranchPhases& phases);

struct DephasingModel {
    double gamma1 = 0.0; // s^-1, interferometer 1
    double gamma2 = 0.0; // s^-1, interferometer 2
    double tau = 0.0;    // s

    void validate() const;
};

// Branch-basis dephasing: rho_(ij),(kl) *= exp(-gamma1 tau [i!=k]) *
// exp(-gamma2 tau [j!=l]). Completely positive and trace preserving.
TwoQubitState apply_dephasing(const TwoQubitState& state, const DephasingModel& model);

// Sum of |negative eigenvalues| of the partial transpose; in [0, 0.5] and
// nonzero exactly when the two-qubit state is entangled.
double negativity(const TwoQubitState& state);

// 3x3 correlation matrix T_ij = <sigma_i x sigma_j>.
Eigen::Matrix3d correlation_matrix(const TwoQubitState& state);

// W = |<sigma_x x sigma_z> + <sigma_y x sigma_y>|; with optimize_frames the
// same two-correlator certificate maximized over local frame rotations on
// each side, which equals the sum of the two largest singular values of the
// correlation matrix. W > 1 certifies entanglement either way.
double witness_value(const TwoQubitState& state, bool optimize_frames);

// Measurement repetitions per correlator for a z-sigma detection of the
// margin W - 1, using the binomial variance bound (per-shot variance <= 1):
// ceil(2 z^2 / (W-1)^2). Throws value_error when W <= 1.
long runs_required(double witness, double confidence_z);

} // namespace qgem::ent
