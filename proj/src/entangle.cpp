#include "qgem/entangle.hpp"

#include <cmath>
#include <complex>

#include "qgem/units.hpp"

namespace qgem::ent {

namespace {

using Eigen::Matrix2cd;
using Eigen::Matrix4cd;
using std::complex;

constexpr complex<double> I{0.0, 1.0};

const Matrix2cd& pauli(int i) {
    static const Matrix2cd sx = (Matrix2cd() << 0, 1, 1, 0).finished();
    static const Matrix2cd sy = (Matrix2cd() << 0, -I, I, 0).finished();
    static const Matrix2cd sz = (Matrix2cd() << 1, 0, 0, -1).finished();
    static const Matrix2cd s[3] = {sx, sy, sz};
    return s[i];
}

Matrix4cd kron2(const Matrix2cd& a, const Matrix2cd& b) {
    Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

// Partial transpose over the second qubit.
Matrix4cd partial_transpose(const Matrix4cd& rho) {
    Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            out.block<2, 2>(2 * i, 2 * k) = rho.block<2, 2>(2 * i, 2 * k).transpose();
    return out;
}

} // namespace

std::string to_string(Arrangement a) {
    return a == Arrangement::linear ? "linear" : "parallel";
}

Arrangement arrangement_from_string(const std::string& name) {
    if (name == "linear") return Arrangement::linear;
    if (name == "parallel") return Arrangement::parallel;
    throw value_error("arrangement must be 'linear' or 'parallel', got '" + name + "'");
}

void TwoInterferometerGeometry::validate() const {
    if (!(d > 0.0)) throw value_error("separation d must be > 0");
    if (!(dx > 0.0)) throw value_error("superposition distance dx must be > 0");
    if (arrangement == Arrangement::linear && !(dx < d))
        throw value_error("linear arrangement requires dx < d (branches must not touch)");
}

PairDistances pairwise_distances(const TwoInterferometerGeometry& geom) {
    geom.validate();
    if (geom.arrangement == Arrangement::linear)
        return {geom.d, geom.d + geom.dx, geom.d - geom.dx, geom.d};
    const double hyp = std::hypot(geom.d, geom.dx);
    return {geom.d, hyp, hyp, geom.d};
}

BranchPhases gravitational_phases(double mass, double tau, const PairDistances& r) {
    if (!(mass > 0.0)) throw value_error("mass must be > 0");
    if (!(tau >= 0.0)) throw value_error("tau must be >= 0");
    if (!(r.r_ll > 0.0) || !(r.r_lr > 0.0) || !(r.r_rl > 0.0) || !(r.r_rr > 0.0))
        throw value_error("pair distances must be > 0");
    const double k = Constants::G * mass * mass * tau / Constants::hbar;
    return {k / r.r_ll, k / r.r_lr, k / r.r_rl, k / r.r_rr};
}

double entangling_phase(const BranchPhases& p) {
    if (!std::isfinite(p.ll) || !std::isfinite(p.lr) || !std::isfinite(p.rl) ||
        !std::isfinite(p.rr))
        throw value_error("branch phases must be finite");
    return p.lr + p.rl - p.ll - p.rr;
}

TwoQubitState TwoQubitState::validated(const Eigen::Matrix4cd& rho) {
    if (!rho.allFinite()) throw value_error("density matrix must be finite");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw value_error("density matrix must be Hermitian (tolerance 1e-12)");
    if (std::abs(rho.trace().real() - 1.0) > 1e-12 || std::abs(rho.trace().imag()) > 1e-12)
        throw value_error("density matrix must have unit trace (tolerance 1e-12)");
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw value_error("density matrix must be positive semidefinite (tolerance 1e-10)");
    return {rho};
}

TwoQubitState assemble_state(const BranchPhases& p) {
    (void)entangling_phase(p); // finiteness check
    Eigen::Vector4cd psi;
    psi << std::exp(I * p.ll), std::exp(I * p.lr), std::exp(I * p.rl), std::exp(I * p.rr);
    psi *= 0.5;
    return {psi * psi.adjoint()};
}

void DephasingModel::validate() const {
    if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) throw value_error("dephasing rates must be >= 0");
    if (!(tau >= 0.0)) throw value_error("tau must be >= 0");
}

TwoQubitState apply_dephasing(const TwoQubitState& state, const DephasingModel& model) {
    model.validate();
    const double f1 = std::exp(-model.gamma1 * model.tau);
    const double f2 = std::exp(-model.gamma2 * model.tau);
    Matrix4cd rho = state.rho;
    for (int row = 0; row < 4; ++row) {
        for (int col = 0; col < 4; ++col) {
            const int i = row >> 1, j = row & 1, k = col >> 1, l = col & 1;
            double damp = 1.0;
            if (i != k) damp *= f1;
            if (j != l) damp *= f2;
            rho(row, col) *= damp;
        }
    }
    return {rho};
}

double negativity(const TwoQubitState& state) {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(partial_transpose(state.rho),
                                                Eigen::EigenvaluesOnly);
    double neg = 0.0;
    for (int i = 0; i < 4; ++i)
        if (es.eigenvalues()[i] < 0.0) neg -= es.eigenvalues()[i];
    return neg;
}

Eigen::Matrix3d correlation_matrix(const TwoQubitState& state) {
    Eigen::Matrix3d t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            t(i, j) = (state.rho * kron2(pauli(i), pauli(j))).trace().real();
    return t;
}

double witness_value(const TwoQubitState& state, bool optimize_frames) {
    const Eigen::Matrix3d t = correlation_matrix(state);
    if (!optimize_frames) {
        // <sigma_x sigma_z> + <sigma_y sigma_y>
        return std::abs(t(0, 2) + t(1, 1));
    }
    // Over local rotations the two-correlator sum becomes
    // a.T b + c.T d with orthonormal pairs (a,c), (b,d); its maximum is the
    // sum of the two largest singular values of T.
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(t);
    return svd.singularValues()[0] + svd.singularValues()[1];
}

long runs_required(double witness, double confidence_z) {
    if (!(confidence_z > 0.0)) throw value_error("confidence_z must be > 0");
    if (!(witness > 1.0))
        throw value_error("witness does not certify entanglement (W <= 1): no finite run count");
    const double margin = witness - 1.0;
    return static_cast<long>(std::ceil(2.0 * confidence_z * confidence_z / (margin * margin)));
}

} // namespace qgem::ent
