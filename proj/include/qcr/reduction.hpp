#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcr/classical.hpp"
#include "qcr/comparator.hpp"
#include "qcr/gaussian.hpp"
#include "qcr/grid.hpp"

namespace qcr {

// ||r Gamma^M|| with r the cubic-and-higher Taylor remainder of V about the packet
// centre; the kinetic part of the remainder vanishes for p^2/2m + V.
// Moment form: E[r(y)^2] under the |Gamma^M|^2 density (covariance (Re M)^{-1}/2).
double remainder_norm(const HamiltonianSpec& spec, const GaussianPacket& packet);
// Same quantity by quadrature on a grid.
double remainder_norm_grid(const HamiltonianSpec& spec, const GaussianPacket& packet, const GridSpec& grid);

// Running integral int_0^t ||R(s) Z(s,0) Gamma|| ds at every packet sample (trapezoid).
std::vector<double> duhamel_curve(const HamiltonianSpec& spec, const PacketSeries& series);
double duhamel_bound(const HamiltonianSpec& spec, const PacketSeries& series, double t);

// Componentwise |alpha(t) - <a>(t)| for every stored state of the run.
std::vector<Vec> measured_error(const GridRun& run, const ClassicalTrajectory& traj);

struct TheoremBound {
    double omega = 0.0;  // ||a Omega||
    double m1 = 0.0;     // 2||Omega|| + (E+1)||1 - Omega||
    double m2 = 0.0;     // 2(E+1)
    double general = 0.0;   // omega (m1 d1 + m2 d2), measured comparator norms
    double closed = 0.0;    // (e^s / s e)^{1/2} ((E+3) d1 + 2(E+1) d2)
};

TheoremBound theorem_bound(const ComparatorScalars& scalars, double E, double delta1, double delta2);

struct ReductionProblem {
    HamiltonianSpec spec;
    PhasePoint alpha0;
    std::optional<PhaseRegion> omega0;  // sampled initial-condition set; alpha0 alone when absent
    int lattice = 3;                     // points per phase-space axis when sampling omega0
    double T = 1.0;
    double dt = 1e-3;
    int sample_stride = 10;              // record every sample_stride-th step
    Vec epsilon;                         // 2n tolerances (max-norm comparison)
    ComparatorSpec comparator;
    std::optional<double> E;             // magnitude threshold; auto when absent
    double E_factor = 1.5;
    GridSpec grid;
    CMat M0;
    MagnitudeOptions magnitude;
    // Reduced additionally requires every membership flag (bound-certified reduction).
    bool require_hypotheses = false;

    void validate() const;
    double sample_dt() const { return dt * sample_stride; }
};

enum class Verdict { reduced, not_reduced, hypothesis_failed };
std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

// One pipeline run from a single initial point.
struct RunReport {
    PhasePoint alpha0;
    std::vector<double> times;
    std::vector<Vec> error;             // |alpha - <a>| componentwise
    std::vector<double> error_max;      // max over components
    std::vector<double> delta1;         // measured ||(W - U) psi||
    std::vector<double> duhamel;        // Duhamel bound on delta1
    std::vector<double> delta2;         // ||(1 - Omega) W psi||
    std::vector<double> inv_norm_U;     // ||Omega^{-1} U psi||
    std::vector<double> inv_norm_W;     // ||Omega^{-1} W psi||
    std::vector<int> member_U;
    std::vector<int> member_W;
    std::vector<double> bound_general;  // theorem bound with measured delta1
    std::vector<double> bound_closed;   // closed-prefactor form, measured delta1
    std::vector<double> bound_duhamel;  // closed-prefactor form, Duhamel delta1
    double max_error = 0.0;
    double energy_drift = 0.0;
    double max_boundary_mass = 0.0;
    bool hypotheses_hold = false;
    bool bound_dominates = false;       // only meaningful when hypotheses hold
    int domination_violations = 0;
};

struct ReductionReport {
    std::vector<RunReport> runs;
    Verdict verdict = Verdict::not_reduced;
    double max_error = 0.0;
    double E = 0.0;
    bool E_auto = true;
    bool require_hypotheses = false;
    ComparatorScalars scalars;
    TheoremBound constants;  // omega, m1, m2 at the chosen E
    Vec epsilon;
    // provenance
    GridSpec grid;
    double dt = 0.0;
    double sample_dt = 0.0;
    int comparator_N = 0;
    double comparator_s = 0.0;
    double amplitude_floor = 0.0;
    std::string stepper;
    bool sampled_region = false;
    int threads = 1;
};

// Runs the pipeline for alpha0 (or every lattice point of omega0) and issues the verdict:
// not-reduced if the measured error reaches epsilon anywhere, otherwise reduced, or
// hypothesis-failed when require_hypotheses is set and some membership flag is false.
ReductionReport verdict(const ReductionProblem& problem);
// Single pipeline run with E fixed (no verdict). Used by verdict and the sweeps.
RunReport run_pipeline(const ReductionProblem& problem, const PhasePoint& alpha0);
// Lattice of initial points covering omega0 (cube inscribed in a ball region).
std::vector<PhasePoint> sample_region(const PhaseRegion& region, int lattice);
// Re-evaluates the verdict for a different tolerance on the same run data.
Verdict reverdict(const ReductionReport& report, const Vec& epsilon);

struct EhrenfestCurves {
    std::vector<double> times;
    std::vector<double> identity_residual;  // |d<p>/dt + <grad V(q)>|, max component
    std::vector<double> classicality_gap;   // |<grad V(q)> - grad V(<q>)|, max component
    double max_identity_residual = 0.0;
    double max_classicality_gap = 0.0;
};

// Uses the run's states, which must be equally spaced in time.
EhrenfestCurves ehrenfest_residuals(const GridRun& run, const HamiltonianSpec& spec);
// Propagates psi0 and samples every step.
EhrenfestCurves ehrenfest_residuals(const HamiltonianSpec& spec, const GridWavefunction& psi0, double T, double dt);
// <grad V(q)> on the grid.
Vec expectation_grad_V(const HamiltonianSpec& spec, const GridWavefunction& psi);

struct SqueezeRow {
    double d = 0.0;
    double duhamel_term = 0.0;     // Duhamel bound at T
    double comparator_term = 0.0;  // max_t ||(1 - Omega) W psi||
    double total_bound = 0.0;      // max_t closed-prefactor bound with Duhamel delta1
};

struct SqueezeTable {
    std::vector<SqueezeRow> rows;
    double E = 0.0;
    std::size_t argmin = 0;
    bool interior_minimum = false;
};

// Sweeps M0 = d I. Delta1 is the Duhamel bound, so no grid propagation is run;
// one E (auto: E_factor x max ||Omega^{-1} W psi|| over the sweep) is shared by all rows.
SqueezeTable squeeze_sweep(const ReductionProblem& problem, const std::vector<double>& dilations);

// Worker count: REDUCE_THREADS if set, else hardware concurrency.
int worker_count();

}  // namespace qcr
