#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "qcr/hamiltonian.hpp"

namespace qcr {

struct ClassicalTrajectory {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    HamiltonianSpec spec;
    double dt = 0.0;
    double energy_drift = 0.0;  // max_t |h(alpha(t)) - h(alpha(0))|
    bool symplectic = false;
    bool stopped_early = false;  // escape radius reached before T

    std::size_t size() const { return times.size(); }
    double t_begin() const { return times.front(); }
    double t_end() const { return times.back(); }
    // Cubic Hermite interpolation between samples using the Hamiltonian field.
    PhasePoint at(double t) const;
    // Sample index k with times[k] == t (to 1e-9 dt), or throws RangeError.
    std::size_t index_of(double t) const;
};

struct FlowOptions {
    // Stop integrating once ||alpha||_S exceeds this radius.
    double escape_radius = std::numeric_limits<double>::infinity();
    // Fail if the energy drift exceeds this (symplectic stepper only).
    double energy_tolerance = std::numeric_limits<double>::infinity();
};

// Integrates Hamilton's equations alpha' = J h^(1)(alpha) on [0, T], sampled at
// k dt. Separable Hamiltonians use velocity Verlet (kick-drift-kick); a vector
// potential forces classical RK4.
ClassicalTrajectory integrate_flow(const HamiltonianSpec& spec, const PhasePoint& alpha0, double T, double dt,
                                   const FlowOptions& options = {});

// Compact phase-space region: a ball in the phase-space norm or a box.
// Box half-widths may be infinite (e.g. "all momenta").
struct PhaseRegion {
    enum class Kind { ball, box };
    Kind kind = Kind::ball;
    PhasePoint center;
    double radius = 1.0;
    Vec half_widths;  // 2n entries, box only

    static PhaseRegion ball(PhasePoint c, double r);
    static PhaseRegion box(PhasePoint c, Vec half_widths);
    bool contains(const PhasePoint& a) const;
};

struct TimeWindow {
    double t0 = 0.0;
    double t1 = 0.0;
    double length() const { return t1 - t0; }
};

// Time spent in the region over the window; indicator crossings are located by
// bisection on the interpolated trajectory to 1e-10 dt.
double classical_transit_time(const ClassicalTrajectory& traj, const PhaseRegion& region, TimeWindow window);
double classical_average_stay(const ClassicalTrajectory& traj, const PhaseRegion& region, TimeWindow window);

enum class ClassicalLabel { bound, scattering, exceptional, undecided };
std::string to_string(ClassicalLabel label);

struct ClassicalClassification {
    ClassicalLabel label = ClassicalLabel::undecided;
    double horizon = 0.0;       // horizon actually covered
    double requested_horizon = 0.0;
    double sup_norm = 0.0;      // sup_t ||alpha(t)||_S
    double final_norm = 0.0;
    double containing_radius = std::numeric_limits<double>::infinity();  // smallest tested R with sup <= R
    bool escaped = false;       // stopped at the escape radius or blew up
    bool trailing_increasing = false;
};

// Finite-horizon bound/scattering proxy. Exceptional states are never claimed;
// anything not clearly bound or scattering is reported undecided.
ClassicalClassification classify_classical(const HamiltonianSpec& spec, const PhasePoint& alpha0, double T,
                                           const std::vector<double>& radii, double dt = 1e-3);

// CSV columns: t, xi_1..xi_n, pi_1..pi_n, energy
void write_trajectory_csv(const ClassicalTrajectory& traj, std::ostream& out);

}  // namespace qcr
