#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qcr/comparator.hpp"
#include "qcr/grid.hpp"

namespace qcr {

// U_t = exp(-i H t) for a Hermitian matrix, diagonalised once. Eigenvalues closer
// than group_tolerance (relative) share one eigenprojector P_n.
class FiniteEvolution {
public:
    explicit FiniteEvolution(const CMat& H, double group_tolerance = 1e-10);

    int dim() const { return static_cast<int>(a_.size()); }
    const Vec& eigenvalues() const { return a_; }
    const CMat& eigenvectors() const { return V_; }
    // Eigenvalue groups as [begin, end) column ranges of eigenvectors().
    const std::vector<std::pair<int, int>>& groups() const { return groups_; }
    CMat projector(std::size_t group) const;
    // Largest angular frequency a_max - a_min (at least 1e-12).
    double max_frequency() const;

    CVec evolve(const CVec& psi, double t) const;
    // Coefficients of psi in the eigenbasis.
    CVec coefficients(const CVec& psi) const { return V_.adjoint() * psi; }
    // rho = sum_n P_n |psi><psi| P_n
    CMat ergodic_state(const CVec& psi) const;

private:
    Vec a_;
    CMat V_;
    std::vector<std::pair<int, int>> groups_;
};

enum class TimeSide { both, forward, backward };

struct ErgodicResult {
    double predicted = 0.0;  // Tr[F rho]
    double measured = 0.0;   // time mean over [-T, T] (or one side)
    double T = 0.0;
    double step = 0.0;
};

// Time mean of <U_t psi, F U_t psi> by composite Simpson quadrature with step
// about (2 pi / max_frequency) / 32.
ErgodicResult ergodic_average(const FiniteEvolution& evo, const CVec& psi, const CMat& F, double T,
                              TimeSide side = TimeSide::both);

// Envelope max_{T' in [T, 2T]} |measured(T') - predicted| at each T of the list and
// the least-squares log-log slope through them.
struct ErgodicConvergence {
    std::vector<double> T;
    std::vector<double> envelope;
    double slope = 0.0;
};
ErgodicConvergence ergodic_convergence(const FiniteEvolution& evo, const CVec& psi, const CMat& F,
                                       const std::vector<double>& horizons);

struct StayResult {
    double T = 0.0;
    double mu = 0.0;         // tau / 2T
    double tau = 0.0;        // int_{-T}^{T} <U_t psi, Omega U_t psi> dt
    double predicted = 0.0;  // Tr[Omega rho] (finite dimension only)
    bool divergent = false;  // transit-time increment over the trailing half above threshold
    double trailing_increment = 0.0;
};

StayResult average_stay(const FiniteEvolution& evo, const CVec& psi, const CMat& Omega, double T,
                        TimeSide side = TimeSide::both);
StayResult transit_time(const FiniteEvolution& evo, const CVec& psi, const CMat& Omega, double T,
                        double divergence_threshold = 1e-4, TimeSide side = TimeSide::both);

struct RecurrenceResult {
    bool found = false;
    double T_eps = 0.0;
    double distance = 0.0;  // ||U_T psi - psi|| at T_eps
    double step = 0.0;
};

// First T >= T_min with ||U_T psi - psi|| < eps, scanning with refinement near minima.
RecurrenceResult recurrence_time(const FiniteEvolution& evo, const CVec& psi, double eps, double T_min,
                                 double T_max);

// Grid Hamiltonian p^2/2m + V as a dense Hermitian matrix on the (1D) grid, acting
// on amplitudes scaled by sqrt(dx) (Euclidean inner product).
CMat grid_hamiltonian_matrix(const HamiltonianSpec& spec, const GridSpec& grid);
// Comparator as a dense matrix in the same scaled representation.
CMat comparator_matrix(const ComparatorSpec& comp, const GridSpec& grid, bool normalized = true);
CVec to_euclidean(const GridWavefunction& psi);
GridWavefunction from_euclidean(const GridSpec& grid, const CVec& u);

enum class QuantumLabel { pp_like, ac_like, exceptional_candidate };
std::string to_string(QuantumLabel label);

struct ClassifyOptions {
    double mu_min = 1e-2;
    double tau_increment = 1e-4;
    double grid_step = 0.05;  // quadrature step for grid evolutions
    TimeSide side = TimeSide::both;
};

struct QuantumClassification {
    QuantumLabel label = QuantumLabel::exceptional_candidate;
    std::vector<StayResult> curve;  // one entry per horizon
    double mu_min = 0.0;
    double tau_increment = 0.0;
    ClassifyOptions options;
};

// Finite-horizon proxies: pp-like if mu stays >= mu_min at every horizon, ac-like if
// the transit time converges at the largest horizon, exceptional-candidate otherwise.
QuantumClassification classify_quantum(const FiniteEvolution& evo, const CVec& psi, const CMat& Omega,
                                       std::vector<double> horizons, const ClassifyOptions& options = {});
// Grid version: evolution by exact free propagation (V = 0) or Strang splitting;
// backward times use time reversal (conjugated state and comparator).
QuantumClassification classify_quantum(const HamiltonianSpec& spec, const GridWavefunction& psi,
                                       const ComparatorSpec& comp, std::vector<double> horizons,
                                       const ClassifyOptions& options = {}, double dt = 1e-3);

// CSV columns: T, mu, tau
void write_stay_csv(const std::vector<StayResult>& curve, std::ostream& out);

}  // namespace qcr
