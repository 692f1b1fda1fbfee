#pragma once

#include <span>
#include <string>
#include <utility>

#include "qgem/entangle.hpp"
#include "qgem/errors.hpp"

namespace qgem::bg {

// Permanent electric dipole on each particle. kappa absorbs the relative
// orientation (1 = collinear head-to-tail; up to 4 for worst-case
// configurations of the r^-3 coupling).
struct DipoleSpec {
    double p = 0.0;     // C m
    double kappa = 1.0; // dimensionless, (0, 4]

    void validate() const;
};

// Sphere of radius a with its center a distance z from a conducting
// surface. eta derates the perfect-conductor Casimir force; epsilon and V
// feed the polarizability used in the far-field formula.
struct SurfaceSpec {
    double a = 1e-6;      // m
    double z = 1.1e-6;    // m (center-to-surface)
    double eta = 1.0;     // (0, 1]
    double epsilon = 5.7; // relative permittivity, >= 1
    double V = 0.0;       // m^3

    void validate() const;
};

// Driven mechanical oscillator reading out a force gradient as a frequency
// shift against its thermal noise floor.
struct OscillatorSpec {
    double omega0 = 2.0 * 3.14159265358979323846 * 1e5; // rad/s
    double k = 2.2502698034483732e-06;                  // N/m
    double Q = 1e8;
    double T_cm = 1e-6;    // K
    double bandwidth = 1.0; // Hz
    double z_rms = 1e-8;    // m

    void validate() const;
};

// Anchored power-law estimate of the dipole-dipole to gravitational energy
// ratio: 3e6 * (1e-14 kg / m)^2 * (1e-4 m / d)^2 * (p / (e * 1 um))^2,
// anchored at a 10 pg particle pair 100 um apart carrying 1e-4 e cm each.
double dipole_gravity_ratio_anchored(double m, double d, double p);

// First-principles energy ratio [kappa p^2 / (4 pi eps0 d^3)] / [G m^2 / d].
double dipole_gravity_ratio(double m, double d, const DipoleSpec& dipole);

// Near-surface Casimir force F = -eta pi^3 a hbar c / (360 (z-a)^3),
// valid for gap << a. Negative = attraction toward the surface.
double casimir_pfa(const SurfaceSpec& s);
bool pfa_valid(const SurfaceSpec& s); // gap <= a/5

// alpha_V = 3 eps0 V (eps-1)/(eps+2).
double polarizability(double V, double epsilon);

// Far-field force F = -3 hbar c alpha_V / (8 pi^2 eps0 z^5), valid z >> a.
double casimir_polder(double alpha_V, double z);
bool cp_valid(const SurfaceSpec& s); // z >= 5a

enum class CasimirRegime { pfa, casimir_polder, transition };

struct CasimirEstimate {
    CasimirRegime regime;
    double force;     // the in-regime value; in transition, the stronger bound
    double force_pfa; // both formulas always evaluated
    double force_cp;
};

// Dispatch on gap <= a/5 (near) / z >= 5a (far); between the two validity
// windows both formulas bracket the answer and no interpolation is done.
CasimirEstimate casimir_auto(const SurfaceSpec& s);

// |dF/dz| of the in-regime Casimir force: 3|F|/(z-a) near, 5|F|/z far,
// the larger of the two bounds in the transition band.
double casimir_force_gradient(const SurfaceSpec& s);

// Attraction between a dipole p and its image in a conducting shield a
// distance z away: F = 3 p^2 kappa_img / (4 pi eps0 (2z)^4), kappa_img = 2
// (dipole perpendicular to the plane). Returned as a magnitude.
double image_dipole_force(double p, double z);

// |delta omega0 / omega0| = |dF/dz| / (2k).
double frequency_shift(double dF_dz, double k);

// Thermal-noise floor sqrt(k_B T_cm b / (k omega0 Q z_rms^2)).
double min_detectable_shift(const OscillatorSpec& osc);

struct DetectSweep {
    SurfaceSpec surface; // z ignored; swept
    double z_lo = 0.0;   // m; defaults derived from surface.a when <= 0
    double z_hi = 0.0;
    int points = 400;
};

// Largest swept z (log grid) where the Casimir frequency shift exceeds the
// oscillator's minimum detectable shift; 0 when undetectable everywhere.
double casimir_detect_range(const DetectSweep& sweep, const OscillatorSpec& osc);

// Branch phases from the dipole-dipole coupling U = kappa p^2/(4 pi eps0 r^3):
// phi_ij = -U(r_ij) tau / hbar (repulsive potential, so phases are negative
// where the gravitational ones are positive).
ent::BranchPhases dipole_phases(const DipoleSpec& dipole, const ent::PairDistances& r, double tau);

// Entangling-phase contamination from the dipole coupling, combined with
// the same four-branch combination as the gravitational signal.
double dipole_phase_contamination(const DipoleSpec& dipole,
                                  const ent::TwoInterferometerGeometry& geom, double tau);

struct MitigationFactor {
    std::string name;
    double suppression; // (0, 1]
};

// ratio * product of suppressions; each factor must lie in (0, 1].
double mitigation_apply(double ratio, std::span<const MitigationFactor> factors);

// Gravitationally-induced collapse-rate benchmark: (m / 5.7e-16 kg)^(5/3)
// per second. The 5/3 exponent is the constant-density self-energy scaling
// through the single published calibration point.
double dp_collapse_rate(double m);

} // namespace qgem::bg
