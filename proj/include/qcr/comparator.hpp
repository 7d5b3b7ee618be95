#pragma once

#include "qcr/grid.hpp"

namespace qcr {

// Comparator Omega~_s = sigma_s exp(-s A*A) in the harmonic-oscillator number
// basis h_0..h_N (per axis; tensor product for n = 2). The normalized comparator
// Omega_s = Omega~_s / sigma_s^n has eigenvalues exp(-s k), k the total quanta.
struct ComparatorSpec {
    double s = 1.0;
    int N = 128;
    int n = 1;
    PhasePoint center;  // empty means the origin

    ComparatorSpec() = default;
    ComparatorSpec(double s_, int N_ = 128, int n_ = 1);

    void validate() const;
    double sigma() const { return 1.0 - std::exp(-s); }
    double lambda() const { return std::exp(s) - 1.0; }
    // sigma_s e^{-s N}: largest eigenvalue dropped by the truncation.
    double tail_bound() const { return sigma() * std::exp(-s * N); }
    PhasePoint centre() const { return center.dim() == n ? center : PhasePoint::origin(n); }
    bool centred_at_origin() const;
};

// Hermite functions h_0..h_K on one grid axis. Rows beyond the classical turning
// point plus a safety margin are left at zero.
struct HermiteBasis {
    Mat values;  // N x (K+1)
    double dx = 0.0;
    Eigen::Index begin = 0, end = 0;  // rows where the functions are not cut to zero

    HermiteBasis(const GridSpec& grid, int K);
    int order() const { return static_cast<int>(values.cols()) - 1; }
};

// Hermite function h_k(x) by the stable three-term recurrence.
double hermite_function(int k, double x);

// Number-basis coefficients; for n = 2 the index is k1 * (K+1) + k2.
struct NumberState {
    int n = 1;
    int K = 0;
    CVec c;

    int quanta(Eigen::Index idx) const;
    double norm_squared() const { return c.squaredNorm(); }
};

// Coefficients of psi in the frame of the comparator centre (U(centre)* psi).
NumberState project(const ComparatorSpec& spec, const GridWavefunction& psi);
// Inverse of project: sum_k c_k U(centre) h_k on the grid.
GridWavefunction synthesize(const ComparatorSpec& spec, const GridSpec& grid, const NumberState& state);

// Omega~_s psi (or Omega_s psi when normalized). Throws DomainError when the
// projection loses more than mass_tolerance of the squared norm.
GridWavefunction apply_comparator(const ComparatorSpec& spec, const GridWavefunction& psi, bool normalized = false,
                                  double mass_tolerance = 1e-8);

// <psi, Omega psi> without a mass check (mass outside the basis sees weight 0).
double comparator_expectation(const ComparatorSpec& spec, const GridWavefunction& psi, bool normalized = true);

struct ComparatorScalars {
    double sigma = 0.0;
    double lambda = 0.0;
    double norm = 0.0;             // ||Omega~_s|| = sigma^n
    double trace = 0.0;            // truncated sum plus analytic tail
    double tail_bound = 0.0;
    double one_minus_norm = 0.0;   // ||1 - Omega_s|| on the truncated spectrum
    double aomega_sq = 0.0;        // ||q Omega~_s||^2, power iteration (per axis, n = 1 factor)
    double aomega_sq_bound = 0.0;  // (1/s) sigma^2 e^{s-1}
    double aomega_normalized = 0.0;  // ||q Omega_s||, the factor entering the bound
    double prefactor_closed = 0.0;   // (e^s / (s e))^{1/2}
    int power_iterations = 0;
};

ComparatorScalars comparator_scalars(const ComparatorSpec& spec);

// Largest eigenvalue of the positive semidefinite matrix by power iteration.
double power_iteration(const Mat& G, int* iterations = nullptr, double tol = 1e-15, int max_iter = 100000);

struct CoherentElements {
    double alpha_sq = 0.0;  // |alpha|^2 = (|xi|^2 + |pi|^2) / 2, relative to the centre
    double diag = 0.0;      // sigma^n e^{-sigma |alpha|^2}
    double inv_norm_sq = 0.0;  // sigma^{-2n} e^{lambda_{2s} |alpha|^2}
    double one_minus_bound = 0.0;       // 1 - sigma^n e^{-sigma |alpha|^2} (printed form)
    double one_minus_sqrt_bound = 0.0;  // sqrt(1 - diag), valid upper bound
    double measured_diag = 0.0;
    double measured_inv_norm_sq = 0.0;
    double measured_one_minus = 0.0;
    bool inv_divergent = false;
};

// Closed forms and their counterparts measured on the grid-sampled coherent state.
CoherentElements coherent_matrix_elements(const ComparatorSpec& spec, const PhasePoint& alpha, const GridSpec& grid);

struct MagnitudeResult {
    bool member = false;      // in Ran(Omega) with ||Omega^{-1} psi|| <= E
    bool divergent = false;   // not in Ran(Omega) at this truncation
    double inv_norm = 0.0;    // ||Omega_s^{-1} psi|| (normalized comparator), +inf if divergent
    double residual = 0.0;    // ||psi||^2 - sum |c_k|^2
    int support = 0;          // largest total quanta above the noise floor
};

struct MagnitudeOptions {
    double amplitude_floor = 1e-11;
    int tail_window = 8;  // trailing shells used for the decay fit
    double residual_tolerance = 1e-8;
};

MagnitudeResult within_magnitude(const ComparatorSpec& spec, double E, const GridWavefunction& psi,
                                 const MagnitudeOptions& options = {});
MagnitudeResult within_magnitude(const ComparatorSpec& spec, double E, const NumberState& state, double residual,
                                 const MagnitudeOptions& options = {});

}  // namespace qcr
