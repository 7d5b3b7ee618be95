#include "qcr/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace qcr {

using std::numbers::pi;

// ------------------------------------------------------------------ GridSpec

GridSpec::GridSpec(int dim, int points, double half_width) : n(dim), N(points), L(half_width) { validate(); }

void GridSpec::validate() const {
    if (n != 1 && n != 2) throw InvalidArgument("GridSpec: dimension must be 1 or 2");
    if (N < 4 || !std::has_single_bit(static_cast<unsigned>(N)))
        throw InvalidArgument("GridSpec: N must be a power of two >= 4");
    if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("GridSpec: L must be positive");
}

Vec GridSpec::axis() const { return Vec::LinSpaced(N, -L, -L + (N - 1) * dx()); }

Vec GridSpec::frequencies() const {
    Vec k(N);
    for (int j = 0; j < N; ++j) k(j) = (j < N / 2 ? j : j - N) * dk();
    return k;
}

Vec GridSpec::point(Eigen::Index idx) const {
    Vec p(n);
    if (n == 1) {
        p(0) = -L + static_cast<double>(idx) * dx();
    } else {
        p(0) = -L + static_cast<double>(idx / N) * dx();
        p(1) = -L + static_cast<double>(idx % N) * dx();
    }
    return p;
}

Vec GridSpec::wavevector(Eigen::Index idx) const {
    auto freq = [this](Eigen::Index j) { return static_cast<double>(j < N / 2 ? j : j - N) * dk(); };
    Vec k(n);
    if (n == 1) {
        k(0) = freq(idx);
    } else {
        k(0) = freq(idx / N);
        k(1) = freq(idx % N);
    }
    return k;
}

// ----------------------------------------------------------- GridWavefunction

GridWavefunction::GridWavefunction(GridSpec g, CVec a) : grid(g), amp(std::move(a)) {
    grid.validate();
    if (amp.size() != grid.size()) throw InvalidArgument("GridWavefunction: amplitude size does not match grid");
}

GridWavefunction GridWavefunction::from_function(const GridSpec& g, const std::function<cplx(const Vec&)>& f) {
    g.validate();
    CVec a(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) a(i) = f(g.point(i));
    return {g, std::move(a)};
}

double GridWavefunction::norm_squared() const { return amp.squaredNorm() * grid.cell_volume(); }

GridWavefunction GridWavefunction::normalized() const {
    const double nrm = norm();
    if (!(nrm > 0.0)) throw DomainError("GridWavefunction: cannot normalise the zero vector");
    return {grid, amp / nrm};
}

double GridWavefunction::momentum_norm_squared() const {
    return to_momentum(*this).squaredNorm() * grid.cell_volume() / static_cast<double>(grid.size());
}

double GridWavefunction::boundary_mass() const {
    const int band = std::max(1, grid.N / 16);
    double m = 0.0;
    for (Eigen::Index idx = 0; idx < amp.size(); ++idx) {
        bool edge;
        if (grid.n == 1) {
            const auto i = idx;
            edge = i < band || i >= grid.N - band;
        } else {
            const auto i = idx / grid.N, j = idx % grid.N;
            edge = i < band || i >= grid.N - band || j < band || j >= grid.N - band;
        }
        if (edge) m += std::norm(amp(idx));
    }
    return m * grid.cell_volume();
}

double GridWavefunction::mass_outside_radius(double r) const {
    double m = 0.0;
    for (Eigen::Index idx = 0; idx < amp.size(); ++idx)
        if (grid.point(idx).norm() > r) m += std::norm(amp(idx));
    return m * grid.cell_volume();
}

namespace {

void require_same_grid(const GridWavefunction& a, const GridWavefunction& b) {
    if (!(a.grid == b.grid)) throw InvalidArgument("wavefunctions live on different grids");
}

}  // namespace

cplx inner(const GridWavefunction& a, const GridWavefunction& b) {
    require_same_grid(a, b);
    return a.amp.dot(b.amp) * a.grid.cell_volume();  // dot() conjugates the first argument
}

double distance(const GridWavefunction& a, const GridWavefunction& b) {
    require_same_grid(a, b);
    return std::sqrt((a.amp - b.amp).squaredNorm() * a.grid.cell_volume());
}

GridWavefunction operator+(const GridWavefunction& a, const GridWavefunction& b) {
    require_same_grid(a, b);
    return {a.grid, a.amp + b.amp};
}

GridWavefunction operator-(const GridWavefunction& a, const GridWavefunction& b) {
    require_same_grid(a, b);
    return {a.grid, a.amp - b.amp};
}

GridWavefunction operator*(cplx c, const GridWavefunction& a) { return {a.grid, c * a.amp}; }

// --------------------------------------------------------------------- FFT

struct GridFFT::Impl {
    GridSpec grid;
    Eigen::FFT<double> fft;
    std::vector<cplx> line_in, line_out;

    explicit Impl(const GridSpec& g) : grid(g), line_in(g.N), line_out(g.N) {}

    template <bool Forward>
    void run(const CVec& in, CVec& out) {
        const int N = grid.N;
        out.resize(in.size());
        if (grid.n == 1) {
            std::copy(in.data(), in.data() + N, line_in.begin());
            if constexpr (Forward) fft.fwd(line_out, line_in);
            else fft.inv(line_out, line_in);
            std::copy(line_out.begin(), line_out.end(), out.data());
            return;
        }
        // rows (contiguous, axis 1) then columns (axis 0)
        for (int i = 0; i < N; ++i) {
            std::copy(in.data() + static_cast<Eigen::Index>(i) * N, in.data() + static_cast<Eigen::Index>(i + 1) * N,
                      line_in.begin());
            if constexpr (Forward) fft.fwd(line_out, line_in);
            else fft.inv(line_out, line_in);
            std::copy(line_out.begin(), line_out.end(), out.data() + static_cast<Eigen::Index>(i) * N);
        }
        for (int j = 0; j < N; ++j) {
            for (int i = 0; i < N; ++i) line_in[i] = out(static_cast<Eigen::Index>(i) * N + j);
            if constexpr (Forward) fft.fwd(line_out, line_in);
            else fft.inv(line_out, line_in);
            for (int i = 0; i < N; ++i) out(static_cast<Eigen::Index>(i) * N + j) = line_out[i];
        }
    }
};

GridFFT::GridFFT(const GridSpec& g) : impl_(std::make_unique<Impl>(g)) {}
GridFFT::~GridFFT() = default;
GridFFT::GridFFT(GridFFT&&) noexcept = default;
GridFFT& GridFFT::operator=(GridFFT&&) noexcept = default;
void GridFFT::forward(const CVec& in, CVec& out) { impl_->run<true>(in, out); }
void GridFFT::inverse(const CVec& in, CVec& out) { impl_->run<false>(in, out); }

CVec to_momentum(const GridWavefunction& psi) {
    GridFFT fft(psi.grid);
    CVec out;
    fft.forward(psi.amp, out);
    return out;
}

GridWavefunction from_momentum(const GridSpec& g, const CVec& spectrum) {
    GridFFT fft(g);
    CVec out;
    fft.inverse(spectrum, out);
    return {g, std::move(out)};
}

Vec potential_on_grid(const HamiltonianSpec& spec, const GridSpec& grid) {
    if (spec.dimension != grid.n) throw InvalidArgument("potential_on_grid: dimension mismatch");
    Vec v(grid.size());
    if (grid.n == 1) {
        const Vec x = grid.axis();
        for (int i = 0; i < grid.N; ++i) v(i) = spec.potential.value_1d(x(i));
    } else {
        for (Eigen::Index i = 0; i < grid.size(); ++i) v(i) = spec.potential.value(grid.point(i));
    }
    return v;
}

// --------------------------------------------------------------- propagation

namespace {

Vec kinetic_on_grid(const GridSpec& grid, double mass) {
    Vec t(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) t(i) = grid.wavevector(i).squaredNorm() / (2.0 * mass);
    return t;
}

CVec phase_factors(const Vec& energy, double tau) {
    CVec f(energy.size());
    for (Eigen::Index i = 0; i < energy.size(); ++i) f(i) = std::polar(1.0, -energy(i) * tau);
    return f;
}

}  // namespace

GridRun propagate(const HamiltonianSpec& spec, const GridWavefunction& psi0, double T, double dt,
                  const PropagateOptions& options, const GridObserver& observer) {
    spec.validate();
    spec.require_quantum();
    if (!(T >= 0.0) || !(dt > 0.0)) throw InvalidArgument("propagate: need T >= 0 and dt > 0");
    if (options.stride < 1) throw InvalidArgument("propagate: stride must be >= 1");
    const GridSpec& g = psi0.grid;

    const double ratio = T / dt;
    long steps = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
        throw InvalidArgument("propagate: T must be an integer multiple of dt");

    const Vec V = potential_on_grid(spec, g);
    const Vec K = kinetic_on_grid(g, spec.mass);
    const CVec half_v = phase_factors(V, 0.5 * dt);
    const CVec kin = phase_factors(K, dt);

    GridFFT fft(g);
    GridRun run;
    run.dt = dt;
    const double n0 = psi0.norm();

    GridWavefunction psi = psi0;
    CVec spec_buf;
    auto record = [&](double t) {
        const double bm = psi.boundary_mass();
        run.max_boundary_mass = std::max(run.max_boundary_mass, bm);
        run.max_norm_drift = std::max(run.max_norm_drift, std::abs(psi.norm() - n0));
        if (options.check_boundary && bm > options.boundary_tolerance)
            throw WraparoundError("propagate: boundary mass above tolerance (grid too small)", t, bm);
        if (observer) observer(t, psi);
        if (options.keep_states) {
            run.times.push_back(t);
            run.states.push_back(psi);
        }
    };
    record(0.0);

    for (long k = 1; k <= steps; ++k) {
        psi.amp.array() *= half_v.array();
        fft.forward(psi.amp, spec_buf);
        spec_buf.array() *= kin.array();
        fft.inverse(spec_buf, psi.amp);
        psi.amp.array() *= half_v.array();
        if (k % options.stride == 0 || k == steps) {
            record(static_cast<double>(k) * dt);
        } else if (options.check_boundary && k % 100 == 0) {
            const double bm = psi.boundary_mass();
            run.max_boundary_mass = std::max(run.max_boundary_mass, bm);
            if (bm > options.boundary_tolerance)
                throw WraparoundError("propagate: boundary mass above tolerance (grid too small)",
                                      static_cast<double>(k) * dt, bm);
        }
    }
    if (!options.keep_states) {
        run.times.push_back(static_cast<double>(steps) * dt);
        run.states.push_back(psi);
    }
    return run;
}

GridWavefunction free_evolve(const GridWavefunction& psi, double mass, double t) {
    if (!(mass > 0.0)) throw InvalidArgument("free_evolve: mass must be positive");
    CVec s = to_momentum(psi);
    s.array() *= phase_factors(kinetic_on_grid(psi.grid, mass), t).array();
    return from_momentum(psi.grid, s);
}

// -------------------------------------------------------------- expectations

Vec expectation_a(const GridWavefunction& psi) {
    if (!psi.is_normalized(1e-8)) throw DomainError("expectation_a: state is not normalised");
    const GridSpec& g = psi.grid;
    const int n = g.n;
    Vec out = Vec::Zero(2 * n);
    const double w = g.cell_volume();
    for (Eigen::Index i = 0; i < psi.amp.size(); ++i) out.head(n) += std::norm(psi.amp(i)) * w * g.point(i);

    const CVec s = to_momentum(psi);
    const double total = s.squaredNorm();
    for (Eigen::Index i = 0; i < s.size(); ++i) out.tail(n) += std::norm(s(i)) / total * g.wavevector(i);
    return out;
}

Mat position_covariance(const GridWavefunction& psi) {
    const GridSpec& g = psi.grid;
    const int n = g.n;
    const double w = g.cell_volume();
    Vec mean = Vec::Zero(n);
    Mat second = Mat::Zero(n, n);
    const double nrm = psi.norm_squared();
    for (Eigen::Index i = 0; i < psi.amp.size(); ++i) {
        const Vec x = g.point(i);
        const double p = std::norm(psi.amp(i)) * w / nrm;
        mean += p * x;
        second += p * x * x.transpose();
    }
    return second - mean * mean.transpose();
}

// ----------------------------------------------------------- Weyl, dilation

GridWavefunction weyl_displace(const GridWavefunction& psi, const PhasePoint& alpha, double boundary_tolerance) {
    const GridSpec& g = psi.grid;
    if (alpha.dim() != g.n) throw InvalidArgument("weyl_displace: dimension mismatch");
    if (!alpha.finite()) throw DomainError("weyl_displace: non-finite displacement");

    CVec s = to_momentum(psi);
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) *= std::polar(1.0, -g.wavevector(i).dot(alpha.xi));
    GridWavefunction out = from_momentum(g, s);
    const double half = 0.5 * alpha.pi.dot(alpha.xi);
    for (Eigen::Index i = 0; i < out.amp.size(); ++i)
        out.amp(i) *= std::polar(1.0, alpha.pi.dot(g.point(i)) - half);

    const double bm = out.boundary_mass();
    if (bm > boundary_tolerance) throw WraparoundError("weyl_displace: displaced state leaves the grid", 0.0, bm);
    return out;
}

GridWavefunction dilate(const GridWavefunction& psi, double hbar, double boundary_tolerance) {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("dilate: hbar must be positive");
    const GridSpec& g = psi.grid;
    if (hbar == 1.0) return psi;

    // Interpolation matrix E(i, k) = exp(i k_k (y_i + L)) / N with y_i = sqrt(hbar) x_i;
    // points with |y| >= L lie outside the periodic cell and are set to zero.
    const int N = g.N;
    const Vec x = g.axis();
    const Vec k = g.frequencies();
    const double c = std::sqrt(hbar);
    CMat E = CMat::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        const double y = c * x(i);
        if (std::abs(y) >= g.L) continue;
        for (int j = 0; j < N; ++j) {
            if (j == N / 2) {
                // split Nyquist mode symmetrically so a real input stays real
                E(i, j) = std::cos(k(j) * (y + g.L)) / static_cast<double>(N);
            } else {
                E(i, j) = std::polar(1.0 / static_cast<double>(N), k(j) * (y + g.L));
            }
        }
    }
    const CVec s = to_momentum(psi);
    CVec out;
    if (g.n == 1) {
        out = E * s;
    } else {
        Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(s.data(), N, N);
        Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = E * S * E.transpose();
        out = Eigen::Map<CVec>(R.data(), R.size());
    }
    out *= std::pow(hbar, g.n / 4.0);
    GridWavefunction res(g, std::move(out));
    const double bm = res.boundary_mass();
    if (bm > boundary_tolerance) throw WraparoundError("dilate: dilated state leaves the grid", 0.0, bm);
    return res;
}

// --------------------------------------------------------------- localization

namespace {

double weighted_form(const Vec& weight, const Vec& density) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < weight.size(); ++i) {
        if (density(i) == 0.0) continue;
        if (std::isinf(weight(i))) return std::numeric_limits<double>::infinity();
        acc += weight(i) * density(i);
    }
    return acc;
}

// F -> infinity on the grid: the minimum of F outside radius r must grow with r
// and end above its value near the origin.
bool grows_outward(const Vec& values, const std::vector<double>& radius) {
    std::vector<Eigen::Index> order(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return radius[a] < radius[b]; });
    std::vector<double> suffix_min(order.size());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = order.size(); k-- > 0;) {
        m = std::min(m, values(order[k]));
        suffix_min[k] = m;
    }
    const std::size_t outer = order.size() - std::max<std::size_t>(1, order.size() / 16);
    return suffix_min[outer] > suffix_min[0];
}

}  // namespace

std::vector<LocalizationEntry> localization_check(const std::vector<GridWavefunction>& psi_set, const Vec& F,
                                                  const Vec& G, double tolerance) {
    if (psi_set.empty()) return {};
    const GridSpec& g = psi_set.front().grid;
    if (F.size() != g.size() || G.size() != g.size())
        throw InvalidArgument("localization_check: F and G must be sampled on the grid");
    if ((F.array() < 0.0).any() || (G.array() < 0.0).any() || F.hasNaN() || G.hasNaN())
        throw InvalidArgument("localization_check: F and G must be non-negative");

    std::vector<double> rx(g.size()), rk(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        rx[i] = g.point(i).norm();
        rk[i] = g.wavevector(i).norm();
    }
    if (!grows_outward(F, rx)) throw InvalidArgument("localization_check: F does not grow to infinity");
    if (!grows_outward(G, rk)) throw InvalidArgument("localization_check: G does not grow to infinity");

    std::vector<LocalizationEntry> out;
    out.reserve(psi_set.size());
    for (const auto& psi : psi_set) {
        if (!(psi.grid == g)) throw InvalidArgument("localization_check: mixed grids");
        LocalizationEntry e;
        const double w = g.cell_volume();
        e.norm_squared = psi.norm_squared();
        e.position_form = weighted_form(F, psi.amp.cwiseAbs2() * w);
        const CVec s = to_momentum(psi);
        e.momentum_form = weighted_form(G, s.cwiseAbs2() * (w / static_cast<double>(g.size())));
        e.pass = e.norm_squared <= 1.0 + tolerance && e.position_form <= 1.0 + tolerance &&
                 e.momentum_form <= 1.0 + tolerance;
        out.push_back(e);
    }
    return out;
}

Localizer construct_localizer(const std::vector<GridWavefunction>& psi_set) {
    if (psi_set.empty()) throw InvalidArgument("construct_localizer: empty state set");
    const GridSpec& g = psi_set.front().grid;
    for (const auto& psi : psi_set) {
        if (!(psi.grid == g)) throw InvalidArgument("construct_localizer: mixed grids");
        if (!psi.is_normalized(1e-8)) throw DomainError("construct_localizer: member is not normalised");
    }

    // Distinct grid radii, ascending, and the worst-case tail mass beyond each.
    std::vector<double> r(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) r[i] = g.point(i).norm();
    std::vector<double> shells = r;
    std::sort(shells.begin(), shells.end());
    shells.erase(std::unique(shells.begin(), shells.end(),
                             [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, b); }),
                 shells.end());

    auto tail_mass = [&](double radius) {
        double worst = 0.0;
        for (const auto& psi : psi_set) worst = std::max(worst, psi.mass_outside_radius(radius));
        return worst;
    };

    Localizer loc;
    std::size_t s = 0;
    for (int level = 1; level <= 60; ++level) {
        const double eps2 = std::ldexp(1.0, -2 * level);  // 4^{-n}
        while (s < shells.size() && tail_mass(shells[s]) > eps2) ++s;
        if (s == shells.size()) break;
        loc.radii.push_back(shells[s]);
        if (shells[s] >= shells.back()) break;  // K_n covers the whole grid
    }
    if (loc.radii.empty()) throw DomainError("construct_localizer: states not localised on this grid");

    loc.F.resize(g.size());
    const int levels = static_cast<int>(loc.radii.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        int m = levels + 1;
        for (int lv = 0; lv < levels; ++lv)
            if (r[i] <= loc.radii[lv] * (1.0 + 1e-12)) {
                m = lv + 1;
                break;
            }
        loc.F(i) = std::ldexp(1.0, m - 2);
    }
    return loc;
}

// ------------------------------------------------------------------ snapshots

void write_snapshot_csv(const GridWavefunction& psi, std::ostream& out) {
    const GridSpec& g = psi.grid;
    out << std::setprecision(17);
    out << "# qcr-wavefunction n=" << g.n << " N=" << g.N << " L=" << g.L << '\n';
    out << (g.n == 1 ? "x,re,im\n" : "x,y,re,im\n");
    for (Eigen::Index i = 0; i < psi.amp.size(); ++i) {
        const Vec p = g.point(i);
        for (int d = 0; d < g.n; ++d) out << p(d) << ',';
        out << psi.amp(i).real() << ',' << psi.amp(i).imag() << '\n';
    }
}

GridWavefunction read_snapshot_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# qcr-wavefunction", 0) != 0)
        throw InvalidArgument("read_snapshot_csv: missing header");
    GridSpec g;
    if (std::sscanf(line.c_str(), "# qcr-wavefunction n=%d N=%d L=%lf", &g.n, &g.N, &g.L) != 3)
        throw InvalidArgument("read_snapshot_csv: malformed header");
    g.validate();
    std::getline(in, line);  // column names
    CVec a(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (!std::getline(in, line)) throw InvalidArgument("read_snapshot_csv: truncated file");
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cols;
        while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
        if (static_cast<int>(cols.size()) != g.n + 2) throw InvalidArgument("read_snapshot_csv: bad row");
        a(i) = cplx(cols[g.n], cols[g.n + 1]);
    }
    return {g, std::move(a)};
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    static_assert(std::endian::native == std::endian::little, "snapshot format is little-endian");
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw InvalidArgument("read_snapshot_binary: truncated");
    return v;
}

}  // namespace

void write_snapshot_binary(const GridWavefunction& psi, std::ostream& out) {
    out.write("QCRW", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(psi.grid.n));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(psi.grid.N));
    put<double>(out, psi.grid.L);
    for (Eigen::Index i = 0; i < psi.amp.size(); ++i) {
        put<double>(out, psi.amp(i).real());
        put<double>(out, psi.amp(i).imag());
    }
}

GridWavefunction read_snapshot_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "QCRW", 4) != 0)
        throw InvalidArgument("read_snapshot_binary: bad magic");
    if (get<std::uint32_t>(in) != 1) throw InvalidArgument("read_snapshot_binary: unsupported version");
    GridSpec g;
    g.n = static_cast<int>(get<std::uint32_t>(in));
    g.N = static_cast<int>(get<std::uint32_t>(in));
    g.L = get<double>(in);
    g.validate();
    CVec a(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double re = get<double>(in);
        const double im = get<double>(in);
        a(i) = cplx(re, im);
    }
    return {g, std::move(a)};
}

}  // namespace qcr
