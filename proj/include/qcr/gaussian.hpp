#pragma once

#include <iosfwd>
#include <vector>

#include "qcr/classical.hpp"
#include "qcr/grid.hpp"

namespace qcr {

// Gaussian coherent state e^{i phase} U(alpha) Gamma^M with
//   Gamma^M(x) = pi^{-n/4} (det B)^{-1/2} exp(-x.M x / 2),  M = B^{-1} A.
// The square root follows a continuous branch of arg det B (det_b_arg); for
// real positive B it is the principal root.
struct GaussianPacket {
    PhasePoint alpha;
    CMat M;
    CMat A;
    CMat B;
    double phase = 0.0;
    double det_b_arg = 0.0;

    int dim() const { return alpha.dim(); }
    // pi^{-n/4} |det B|^{-1/2}
    double norm_factor() const;
    // Closed-form squared L2 norm |det B|^{-1} det(Re M)^{-1/2}.
    double closed_form_norm_squared() const;
    cplx operator()(const Vec& x) const;
    // Position covariance of |Gamma^M|^2: (Re M)^{-1} / 2.
    Mat position_covariance() const;
    // Asserts symmetry of M, M = B^{-1} A and Re M positive definite.
    void check_invariants(double tol = 1e-10) const;
};

// Vacuum Gamma(0): M = A = B = identity, centred at the origin.
GaussianPacket vacuum(int n);
// U(alpha) Gamma^{M0}; A0 = S + i S^{-1} Im M0, B0 = S^{-1} with S = (Re M0)^{1/2}.
GaussianPacket coherent_packet(const PhasePoint& alpha, const CMat& M0);
// Isotropic width M0 = d I (d > 1 narrows the position distribution).
GaussianPacket squeezed_packet(const PhasePoint& alpha, double d);

GridWavefunction sample_on_grid(const GaussianPacket& packet, const GridSpec& grid, double norm_tolerance = 1e-8);

struct ABSample {
    double t = 0.0;
    CMat A, B, M;
    double det_b_arg = 0.0;
};

// Integrates A' = i B h_xixi - A h_xipi,  B' = B h_pixi + i A h_pipi along the
// trajectory with RK4 (step <= dt) and recovers M = B^{-1} A at every
// trajectory sample. Throws CausticError if B becomes singular.
std::vector<ABSample> evolve_AB(const HamiltonianSpec& spec, const ClassicalTrajectory& traj, const CMat& A0,
                                const CMat& B0, double dt);

// X_phase(t) = int_0^t [h(alpha) - <h^(1)(alpha), alpha>/2] ds at every trajectory
// sample (composite trapezoid). X(t,0) = exp(-i X_phase(t)).
std::vector<double> phase_X(const HamiltonianSpec& spec, const ClassicalTrajectory& traj);

// W(t,0) applied to the packet series: W(t,0) U(alpha(0)) Gamma^{M0} = X U(alpha(t)) Gamma^{M(t)}.
struct PacketSeries {
    std::vector<double> times;
    std::vector<GaussianPacket> packets;

    const GaussianPacket& at(double t) const;
};

PacketSeries evolve_packet(const HamiltonianSpec& spec, const ClassicalTrajectory& traj,
                           const GaussianPacket& packet0, double dt);
GaussianPacket apply_W(const HamiltonianSpec& spec, const ClassicalTrajectory& traj, const GaussianPacket& packet0,
                       double t);

// Riccati right-hand side i h_xixi - (M h_xipi + h_pixi M) - i M h_pipi M.
CMat riccati_rhs(const Mat& hessian, const CMat& M);

// CSV columns: t, xi.., pi.., then re_M_ij, im_M_ij (row-major), phase
void write_packet_series_csv(const PacketSeries& series, std::ostream& out);

// E[x^p] for x ~ N(0, cov), exact (Isserlis recursion).
double gaussian_moment(const Powers& p, const Mat& cov);

}  // namespace qcr
