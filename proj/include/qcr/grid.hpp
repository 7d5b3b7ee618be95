#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "qcr/hamiltonian.hpp"

namespace qcr {

// Uniform periodic grid on [-L, L)^n with N points per axis (N a power of two).
// Amplitudes are stored row-major: index = i0 * N + i1 for n = 2.
struct GridSpec {
    int n = 1;
    int N = 1024;
    double L = 20.0;

    GridSpec() = default;
    GridSpec(int dim, int points, double half_width);

    void validate() const;
    double dx() const { return 2.0 * L / N; }
    double dk() const { return std::numbers::pi / L; }
    double k_max() const { return std::numbers::pi / dx(); }
    Eigen::Index size() const { return n == 1 ? N : static_cast<Eigen::Index>(N) * N; }
    double cell_volume() const { return n == 1 ? dx() : dx() * dx(); }
    Vec axis() const;         // x_j = -L + j dx
    Vec frequencies() const;  // FFT ordering, k_j = j dk for j < N/2, (j - N) dk otherwise
    // Coordinates of flat grid index idx.
    Vec point(Eigen::Index idx) const;
    Vec wavevector(Eigen::Index idx) const;
    bool operator==(const GridSpec& o) const { return n == o.n && N == o.N && L == o.L; }
};

struct GridWavefunction {
    GridSpec grid;
    CVec amp;

    GridWavefunction() = default;
    GridWavefunction(GridSpec g, CVec a);
    static GridWavefunction from_function(const GridSpec& g, const std::function<cplx(const Vec&)>& f);

    double norm_squared() const;
    double norm() const { return std::sqrt(norm_squared()); }
    bool is_normalized(double tol = 1e-12) const { return std::abs(norm() - 1.0) <= tol; }
    GridWavefunction normalized() const;
    // Squared norm computed in momentum space (Parseval counterpart).
    double momentum_norm_squared() const;
    // Mass in the outer 1/16 of each axis on both sides.
    double boundary_mass() const;
    // Mass outside the position box |x_i| <= r for every axis (r per-axis radius).
    double mass_outside_radius(double r) const;
};

cplx inner(const GridWavefunction& a, const GridWavefunction& b);
double distance(const GridWavefunction& a, const GridWavefunction& b);
GridWavefunction operator+(const GridWavefunction& a, const GridWavefunction& b);
GridWavefunction operator-(const GridWavefunction& a, const GridWavefunction& b);
GridWavefunction operator*(cplx c, const GridWavefunction& a);

// Forward/inverse DFT over all axes of a grid. Inverse carries the 1/N^n factor.
class GridFFT {
public:
    explicit GridFFT(const GridSpec& g);
    ~GridFFT();
    GridFFT(GridFFT&&) noexcept;
    GridFFT& operator=(GridFFT&&) noexcept;
    void forward(const CVec& in, CVec& out);
    void inverse(const CVec& in, CVec& out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Momentum-space amplitudes in FFT ordering (unnormalised DFT).
CVec to_momentum(const GridWavefunction& psi);
GridWavefunction from_momentum(const GridSpec& g, const CVec& spectrum);

// V evaluated on every grid point.
Vec potential_on_grid(const HamiltonianSpec& spec, const GridSpec& grid);

struct PropagateOptions {
    int stride = 1;                  // keep every stride-th step
    double boundary_tolerance = 1e-10;
    bool check_boundary = true;
    bool keep_states = true;         // false: only the final state is stored
};

struct GridRun {
    std::vector<double> times;
    std::vector<GridWavefunction> states;
    double dt = 0.0;
    double max_boundary_mass = 0.0;
    double max_norm_drift = 0.0;
};

// exp(-i h t) by Strang splitting exp(-iV dt/2) exp(-i p^2 dt / 2m) exp(-iV dt/2).
// Throws WraparoundError when the boundary mass exceeds the tolerance.
using GridObserver = std::function<void(double t, const GridWavefunction& psi)>;
GridRun propagate(const HamiltonianSpec& spec, const GridWavefunction& psi0, double T, double dt,
                  const PropagateOptions& options = {}, const GridObserver& observer = {});

// Exact free evolution exp(-i p^2 t / 2m) (single spectral multiply).
GridWavefunction free_evolve(const GridWavefunction& psi, double mass, double t);

// (<q>, <p>) stacked; momentum part computed spectrally. Requires unit norm.
Vec expectation_a(const GridWavefunction& psi);
// Second moments <q_i q_j> - <q_i><q_j> (position covariance).
Mat position_covariance(const GridWavefunction& psi);

// (U(alpha) psi)(x) = exp(i pi (x - xi/2)) psi(x - xi); the shift is a Fourier phase ramp.
GridWavefunction weyl_displace(const GridWavefunction& psi, const PhasePoint& alpha,
                               double boundary_tolerance = 1e-10);

// (D(hbar) psi)(x) = hbar^{n/4} psi(hbar^{1/2} x), by trigonometric resampling.
GridWavefunction dilate(const GridWavefunction& psi, double hbar, double boundary_tolerance = 1e-10);

struct LocalizationEntry {
    double norm_squared = 0.0;
    double position_form = 0.0;  // <psi, F(Q) psi>
    double momentum_form = 0.0;  // <psi, G(P) psi>
    bool pass = false;
};

// Membership in {psi : <psi,psi> <= 1, <psi,F(Q)psi> <= 1, <psi,G(P)psi> <= 1}.
// F is sampled on the position grid, G on the FFT-ordered momentum grid; both may
// contain +infinity.
std::vector<LocalizationEntry> localization_check(const std::vector<GridWavefunction>& psi_set, const Vec& F,
                                                  const Vec& G, double tolerance = 1e-10);

struct Localizer {
    Vec F;                      // step function on the grid
    std::vector<double> radii;  // K_n = {|x| <= radii[n-1]}
};

// Step function F = 2^{m-2}, m = min{n : x in K_n}, with tail mass outside K_n
// at most 4^{-n} for every member; then <psi, F(Q) psi> <= 1 for the whole set.
Localizer construct_localizer(const std::vector<GridWavefunction>& psi_set);

// Snapshot formats. CSV: "# qcr-wavefunction n=<n> N=<N> L=<L>" header, then
// columns x[,y],re,im. Binary: "QCRW" magic, u32 version=1, u32 n, u32 N, f64 L,
// then N^n (re, im) f64 pairs, little-endian.
void write_snapshot_csv(const GridWavefunction& psi, std::ostream& out);
GridWavefunction read_snapshot_csv(std::istream& in);
void write_snapshot_binary(const GridWavefunction& psi, std::ostream& out);
GridWavefunction read_snapshot_binary(std::istream& in);

}  // namespace qcr
