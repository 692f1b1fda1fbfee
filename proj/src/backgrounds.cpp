#include "qgem/backgrounds.hpp"

#include <algorithm>
#include <cmath>

#include "qgem/units.hpp"

namespace qgem::bg {

namespace {
constexpr double four_pi_eps0 = 4.0 * M_PI * Constants::eps0;
}

void DipoleSpec::validate() const {
    if (!(p >= 0.0)) throw value_error("dipole moment must be >= 0");
    if (!(kappa > 0.0) || !(kappa <= 4.0))
        throw value_error("dipole orientation factor must be in (0, 4]");
}

void SurfaceSpec::validate() const {
    if (!(a > 0.0)) throw value_error("particle radius must be > 0");
    if (!(z > a)) throw value_error("center-to-surface distance must exceed the radius");
    if (!(eta > 0.0) || !(eta <= 1.0)) throw value_error("eta must be in (0, 1]");
    if (!(epsilon >= 1.0)) throw value_error("relative permittivity must be >= 1");
    if (!(V >= 0.0)) throw value_error("volume must be >= 0");
}

void OscillatorSpec::validate() const {
    if (!(omega0 > 0.0) || !(k > 0.0) || !(Q > 0.0) || !(T_cm > 0.0) || !(bandwidth > 0.0) ||
        !(z_rms > 0.0))
        throw value_error("all oscillator parameters must be > 0");
}

double dipole_gravity_ratio_anchored(double m, double d, double p) {
    if (!(m > 0.0) || !(d > 0.0)) throw value_error("mass and separation must be > 0");
    const double m0 = 1e-14;                 // kg (10 pg)
    const double d0 = 1e-4;                  // m
    const double p0 = Constants::e * 1e-6;   // C m (1e-4 e cm)
    const double fm = m0 / m, fd = d0 / d, fp = p / p0;
    return 3e6 * fm * fm * fd * fd * fp * fp;
}

double dipole_gravity_ratio(double m, double d, const DipoleSpec& dipole) {
    if (!(m > 0.0) || !(d > 0.0)) throw value_error("mass and separation must be > 0");
    dipole.validate();
    const double u_dd = dipole.kappa * dipole.p * dipole.p / (four_pi_eps0 * d * d * d);
    const double u_grav = Constants::G * m * m / d;
    return u_dd / u_grav;
}

double casimir_pfa(const SurfaceSpec& s) {
    s.validate();
    const double gap = s.z - s.a;
    const double pi3 = M_PI * M_PI * M_PI;
    return -s.eta * pi3 * s.a * Constants::hbar * Constants::c / (360.0 * gap * gap * gap);
}

bool pfa_valid(const SurfaceSpec& s) { return (s.z - s.a) <= s.a / 5.0; }

double polarizability(double V, double epsilon) {
    if (!(V > 0.0)) throw value_error("volume must be > 0");
    if (!(epsilon >= 1.0)) throw value_error("relative permittivity must be >= 1");
    return 3.0 * Constants::eps0 * V * (epsilon - 1.0) / (epsilon + 2.0);
}

double casimir_polder(double alpha_V, double z) {
    if (!(alpha_V >= 0.0)) throw value_error("polarizability must be >= 0");
    if (!(z > 0.0)) throw value_error("distance must be > 0");
    const double z5 = z * z * z * z * z;
    return -3.0 * Constants::hbar * Constants::c * alpha_V /
           (8.0 * M_PI * M_PI * Constants::eps0 * z5);
}

bool cp_valid(const SurfaceSpec& s) { return s.z >= 5.0 * s.a; }

CasimirEstimate casimir_auto(const SurfaceSpec& s) {
    s.validate();
    CasimirEstimate est;
    est.force_pfa = casimir_pfa(s);
    est.force_cp = casimir_polder(polarizability(s.V, s.epsilon), s.z);
    if (pfa_valid(s)) {
        est.regime = CasimirRegime::pfa;
        est.force = est.force_pfa;
    } else if (cp_valid(s)) {
        est.regime = CasimirRegime::casimir_polder;
        est.force = est.force_cp;
    } else {
        est.regime = CasimirRegime::transition;
        // bracket only; report the stronger attraction as the cautious bound
        est.force = std::min(est.force_pfa, est.force_cp);
    }
    return est;
}

double casimir_force_gradient(const SurfaceSpec& s) {
    const CasimirEstimate est = casimir_auto(s);
    const double grad_pfa = 3.0 * std::abs(est.force_pfa) / (s.z - s.a);
    const double grad_cp = 5.0 * std::abs(est.force_cp) / s.z;
    switch (est.regime) {
    case CasimirRegime::pfa: return grad_pfa;
    case CasimirRegime::casimir_polder: return grad_cp;
    case CasimirRegime::transition: return std::max(grad_pfa, grad_cp);
    }
    return grad_pfa; // unreachable
}

double image_dipole_force(double p, double z) {
    if (!(p >= 0.0)) throw value_error("dipole moment must be >= 0");
    if (!(z > 0.0)) throw value_error("shield distance must be > 0");
    constexpr double kappa_img = 2.0;
    const double two_z = 2.0 * z;
    const double r4 = two_z * two_z * two_z * two_z;
    return 3.0 * p * p * kappa_img / (four_pi_eps0 * r4);
}

double frequency_shift(double dF_dz, double k) {
    if (!(k > 0.0)) throw value_error("spring constant must be > 0");
    return std::abs(dF_dz) / (2.0 * k);
}

double min_detectable_shift(const OscillatorSpec& osc) {
    osc.validate();
    return std::sqrt(Constants::k_B * osc.T_cm * osc.bandwidth /
                     (osc.k * osc.omega0 * osc.Q * osc.z_rms * osc.z_rms));
}

double casimir_detect_range(const DetectSweep& sweep, const OscillatorSpec& osc) {
    SurfaceSpec s = sweep.surface;
    const double z_lo = sweep.z_lo > 0.0 ? sweep.z_lo : 1.2 * s.a;
    const double z_hi = sweep.z_hi > 0.0 ? sweep.z_hi : 50.0 * std::max(s.a, 1e-6);
    if (!(z_lo > s.a) || !(z_hi > z_lo)) throw value_error("sweep window must satisfy a < z_lo < z_hi");
    if (sweep.points < 2) throw value_error("sweep needs at least 2 points");
    const double floor = min_detectable_shift(osc);
    const double ratio = z_hi / z_lo;
    double best = 0.0;
    for (int i = 0; i < sweep.points; ++i) {
        s.z = z_lo * std::pow(ratio, static_cast<double>(i) / (sweep.points - 1));
        const double shift = frequency_shift(casimir_force_gradient(s), osc.k);
        if (shift > floor) best = s.z;
    }
    return best;
}

ent::BranchPhases dipole_phases(const DipoleSpec& dipole, const ent::PairDistances& r,
                                double tau) {
    dipole.validate();
    if (!(tau >= 0.0)) throw value_error("tau must be >= 0");
    if (!(r.r_ll > 0.0) || !(r.r_lr > 0.0) || !(r.r_rl > 0.0) || !(r.r_rr > 0.0))
        throw value_error("pair distances must be > 0");
    const double k = -dipole.kappa * dipole.p * dipole.p * tau / (four_pi_eps0 * Constants::hbar);
    auto phi = [&](double rr) { return k / (rr * rr * rr); };
    return {phi(r.r_ll), phi(r.r_lr), phi(r.r_rl), phi(r.r_rr)};
}

double dipole_phase_contamination(const DipoleSpec& dipole,
                                  const ent::TwoInterferometerGeometry& geom, double tau) {
    return ent::entangling_phase(dipole_phases(dipole, ent::pairwise_distances(geom), tau));
}

double mitigation_apply(double ratio, std::span<const MitigationFactor> factors) {
    if (!(ratio >= 0.0)) throw value_error("ratio must be >= 0");
    double out = ratio;
    for (const auto& f : factors) {
        if (!(f.suppression > 0.0) || !(f.suppression <= 1.0))
            throw value_error("mitigation suppression '" + f.name + "' must be in (0, 1]");
        out *= f.suppression;
    }
    return out;
}

double dp_collapse_rate(double m) {
    if (!(m >= 0.0)) throw value_error("mass must be >= 0");
    return std::pow(m / 5.7e-16, 5.0 / 3.0);
}

} // namespace qgem::bg
