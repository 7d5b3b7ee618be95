#include "qcr/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace qcr {

using std::numbers::pi;

namespace {

// Eigen-components carrying weight; the rest do not affect any time average.
struct Reduced {
    Vec a;
    CVec c;
    std::vector<int> index;
};

Reduced reduce(const FiniteEvolution& evo, const CVec& psi) {
    const CVec c = evo.coefficients(psi);
    const double cut = 1e-13 * std::max(c.norm(), 1e-300);
    Reduced r;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (std::abs(c(i)) > cut) r.index.push_back(static_cast<int>(i));
    const int m = static_cast<int>(r.index.size());
    r.a.resize(m);
    r.c.resize(m);
    for (int j = 0; j < m; ++j) {
        r.a(j) = evo.eigenvalues()(r.index[j]);
        r.c(j) = c(r.index[j]);
    }
    return r;
}

CMat reduced_operator(const FiniteEvolution& evo, const Reduced& r, const CMat& F) {
    const int m = static_cast<int>(r.index.size());
    CMat Vr(evo.dim(), m);
    for (int j = 0; j < m; ++j) Vr.col(j) = evo.eigenvectors().col(r.index[j]);
    return Vr.adjoint() * F * Vr;
}

double spread(const Vec& a) { return a.size() ? std::max(a.maxCoeff() - a.minCoeff(), 1e-12) : 1e-12; }

// Samples g(t) = [f(t) + f(-t)] (or one side) at t_j = j h, j = 0..n.
std::vector<double> sample_expectation(const Reduced& r, const CMat& Fr, double h, long n, TimeSide side) {
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    CVec u(r.c.size());
    auto f = [&](double t) {
        for (Eigen::Index j = 0; j < r.c.size(); ++j) u(j) = r.c(j) * std::polar(1.0, -r.a(j) * t);
        return u.dot(Fr * u).real();
    };
    for (long j = 0; j <= n; ++j) {
        const double t = j * h;
        double v = 0.0;
        if (side != TimeSide::backward) v += f(t);
        if (side != TimeSide::forward) v += f(-t);
        g[static_cast<std::size_t>(j)] = v;
    }
    return g;
}

// Cumulative composite Simpson integral at even nodes: out[i] = int_0^{2 i h}.
std::vector<double> cumulative_simpson(const std::vector<double>& g, double h) {
    const std::size_t pairs = (g.size() - 1) / 2;
    std::vector<double> out(pairs + 1, 0.0);
    for (std::size_t i = 1; i <= pairs; ++i)
        out[i] = out[i - 1] + h / 3.0 * (g[2 * i - 2] + 4.0 * g[2 * i - 1] + g[2 * i]);
    return out;
}

double side_length(double T, TimeSide side) { return side == TimeSide::both ? 2.0 * T : T; }

// Even number of Simpson intervals on [0, T] with step at most h_max.
long intervals(double T, double h_max) {
    long n = static_cast<long>(std::ceil(T / h_max));
    if (n % 2) ++n;
    return std::max(n, 2L);
}

void check_hermitian(const CMat& F, const char* who) {
    if (F.rows() != F.cols()) throw InvalidArgument(std::string(who) + ": operator must be square");
    if ((F - F.adjoint()).norm() > 1e-10 * std::max(1.0, F.norm()))
        throw InvalidArgument(std::string(who) + ": operator is not Hermitian");
}

double predicted_value(const FiniteEvolution& evo, const CVec& psi, const CMat& F) {
    return (F * evo.ergodic_state(psi)).trace().real();
}

StayResult stay_from_samples(const std::vector<double>& cum, double h, long n_half, long n_full, TimeSide side) {
    StayResult s;
    s.T = n_full * h;
    s.tau = cum[static_cast<std::size_t>(n_full / 2)];
    s.mu = s.tau / side_length(s.T, side);
    s.trailing_increment = s.tau - cum[static_cast<std::size_t>(n_half / 2)];
    return s;
}

}  // namespace

// ------------------------------------------------------------------ FiniteEvolution

FiniteEvolution::FiniteEvolution(const CMat& H, double group_tolerance) {
    if (H.rows() != H.cols() || H.rows() == 0) throw InvalidArgument("FiniteEvolution: H must be square");
    if (H.rows() > 4096) throw InvalidArgument("FiniteEvolution: dimension above 4096");
    check_hermitian(H, "FiniteEvolution");
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (H + H.adjoint()));
    if (es.info() != Eigen::Success) throw DomainError("FiniteEvolution: eigensolver failed");
    a_ = es.eigenvalues();
    V_ = es.eigenvectors();
    int begin = 0;
    for (int i = 1; i <= a_.size(); ++i) {
        if (i == a_.size() ||
            std::abs(a_(i) - a_(i - 1)) > group_tolerance * std::max(1.0, std::abs(a_(i)))) {
            groups_.emplace_back(begin, i);
            begin = i;
        }
    }
}

CMat FiniteEvolution::projector(std::size_t g) const {
    const auto [b, e] = groups_.at(g);
    const CMat Vg = V_.middleCols(b, e - b);
    return Vg * Vg.adjoint();
}

double FiniteEvolution::max_frequency() const { return spread(a_); }

CVec FiniteEvolution::evolve(const CVec& psi, double t) const {
    CVec c = coefficients(psi);
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) *= std::polar(1.0, -a_(j) * t);
    return V_ * c;
}

CMat FiniteEvolution::ergodic_state(const CVec& psi) const {
    CMat rho = CMat::Zero(dim(), dim());
    const CVec c = coefficients(psi);
    for (const auto& [b, e] : groups_) {
        const CVec p = V_.middleCols(b, e - b) * c.segment(b, e - b);
        rho += p * p.adjoint();
    }
    return rho;
}

// ------------------------------------------------------------------ averages

ErgodicResult ergodic_average(const FiniteEvolution& evo, const CVec& psi, const CMat& F, double T, TimeSide side) {
    check_hermitian(F, "ergodic_average");
    if (!(T > 0.0)) throw InvalidArgument("ergodic_average: T must be positive");
    if (std::abs(psi.norm() - 1.0) > 1e-10) throw InvalidArgument("ergodic_average: psi must be a unit vector");
    const Reduced r = reduce(evo, psi);
    const CMat Fr = reduced_operator(evo, r, F);
    const long n = intervals(T, 2.0 * pi / spread(r.a) / 32.0);
    const double h = T / n;
    const auto g = sample_expectation(r, Fr, h, n, side);
    ErgodicResult out;
    out.T = T;
    out.step = h;
    out.predicted = predicted_value(evo, psi, F);
    out.measured = cumulative_simpson(g, h).back() / side_length(T, side);
    return out;
}

ErgodicConvergence ergodic_convergence(const FiniteEvolution& evo, const CVec& psi, const CMat& F,
                                       const std::vector<double>& horizons) {
    if (horizons.size() < 2) throw InvalidArgument("ergodic_convergence: need at least two horizons");
    check_hermitian(F, "ergodic_convergence");
    const Reduced r = reduce(evo, psi);
    const CMat Fr = reduced_operator(evo, r, F);
    const double T_top = 2.0 * *std::max_element(horizons.begin(), horizons.end());
    const long n = intervals(T_top, 2.0 * pi / spread(r.a) / 32.0);
    const double h = T_top / n;
    const auto cum = cumulative_simpson(sample_expectation(r, Fr, h, n, TimeSide::both), h);
    const double predicted = predicted_value(evo, psi, F);

    ErgodicConvergence out;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double T : horizons) {
        double env = 0.0;
        for (std::size_t i = 1; i < cum.size(); ++i) {
            const double t = 2.0 * h * static_cast<double>(i);
            if (t < T || t > 2.0 * T) continue;
            env = std::max(env, std::abs(cum[i] / (2.0 * t) - predicted));
        }
        out.T.push_back(T);
        out.envelope.push_back(env);
        const double x = std::log(T), y = std::log(std::max(env, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(horizons.size());
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

StayResult transit_time(const FiniteEvolution& evo, const CVec& psi, const CMat& Omega, double T,
                        double divergence_threshold, TimeSide side) {
    check_hermitian(Omega, "transit_time");
    if (!(T > 0.0)) throw InvalidArgument("transit_time: T must be positive");
    const Reduced r = reduce(evo, psi);
    const CMat Or = reduced_operator(evo, r, Omega);
    long n = intervals(T, 2.0 * pi / spread(r.a) / 32.0);
    if (n % 4) n += 4 - n % 4;  // T/2 must fall on an even node
    const double h = T / n;
    const auto cum = cumulative_simpson(sample_expectation(r, Or, h, n, side), h);
    StayResult s = stay_from_samples(cum, h, n / 2, n, side);
    s.predicted = predicted_value(evo, psi, Omega);
    s.divergent = s.trailing_increment > divergence_threshold;
    return s;
}

StayResult average_stay(const FiniteEvolution& evo, const CVec& psi, const CMat& Omega, double T, TimeSide side) {
    return transit_time(evo, psi, Omega, T, 1e-4, side);
}

RecurrenceResult recurrence_time(const FiniteEvolution& evo, const CVec& psi, double eps, double T_min,
                                 double T_max) {
    if (!(eps > 0.0) || !(T_max >= T_min) || T_min < 0.0) throw InvalidArgument("recurrence_time: bad arguments");
    RecurrenceResult out;
    const Reduced r = reduce(evo, psi);
    auto dist = [&](double t) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < r.c.size(); ++j) {
            const double s = std::sin(0.5 * r.a(j) * t);
            acc += std::norm(r.c(j)) * 4.0 * s * s;
        }
        return std::sqrt(acc);
    };
    // ||U_t psi - psi|| <= 2 for unit psi.
    if (eps >= 2.0 * psi.norm() || dist(T_min) < eps) {
        out.found = true;
        out.T_eps = T_min;
        out.distance = dist(T_min);
        return out;
    }
    const double amax = std::max(r.a.cwiseAbs().maxCoeff(), 1e-12);
    const double h = 2.0 * pi / amax / 64.0;
    out.step = h;
    const double lip = std::sqrt((r.c.cwiseAbs2().array() * r.a.array().square()).sum());

    auto crossing = [&](double lo, double hi) {
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (dist(mid) < eps) hi = mid;
            else lo = mid;
        }
        return hi;
    };

    double prev = T_min;
    for (double t = T_min + h; t <= T_max + 0.5 * h; t += h) {
        const double tt = std::min(t, T_max);
        const double d = dist(tt);
        if (d < eps) {
            out.found = true;
            out.T_eps = crossing(prev, tt);
            out.distance = dist(out.T_eps);
            return out;
        }
        if (d < eps + lip * h) {
            // A dip narrower than the scan step may hide between samples.
            const double fine = h / 64.0;
            double p = prev;
            for (double u = prev + fine; u < tt + 0.5 * fine; u += fine) {
                if (dist(u) < eps) {
                    out.found = true;
                    out.T_eps = crossing(p, u);
                    out.distance = dist(out.T_eps);
                    return out;
                }
                p = u;
            }
        }
        prev = tt;
    }
    return out;
}

// ------------------------------------------------------------------ grid matrices

CMat grid_hamiltonian_matrix(const HamiltonianSpec& spec, const GridSpec& grid) {
    spec.require_quantum();
    if (grid.n != 1) throw Unsupported("grid_hamiltonian_matrix: one-dimensional grids only");
    const int N = grid.N;
    const Vec k = grid.frequencies();
    GridFFT fft(grid);
    CMat H(N, N);
    CVec e = CVec::Zero(N), s, col;
    for (int j = 0; j < N; ++j) {
        e.setZero();
        e(j) = 1.0;
        fft.forward(e, s);
        s.array() *= (k.array().square() / (2.0 * spec.mass)).cast<cplx>();
        fft.inverse(s, col);
        H.col(j) = col;
    }
    const Vec V = potential_on_grid(spec, grid);
    H.diagonal() += V.cast<cplx>();
    return 0.5 * (H + H.adjoint());
}

CMat comparator_matrix(const ComparatorSpec& comp, const GridSpec& grid, bool normalized) {
    comp.validate();
    if (grid.n != 1 || comp.n != 1) throw Unsupported("comparator_matrix: one-dimensional grids only");
    const HermiteBasis basis(grid, comp.N);
    CMat B = basis.values.cast<cplx>() * std::sqrt(grid.dx());
    if (!comp.centred_at_origin()) {
        for (int k = 0; k <= comp.N; ++k) {
            GridWavefunction col(grid, B.col(k));
            B.col(k) = weyl_displace(col, comp.centre(), std::numeric_limits<double>::infinity()).amp;
        }
    }
    Vec w(comp.N + 1);
    const double scale = normalized ? 1.0 : comp.sigma();
    for (int k = 0; k <= comp.N; ++k) w(k) = scale * std::exp(-comp.s * k);
    return B * w.cast<cplx>().asDiagonal() * B.adjoint();
}

CVec to_euclidean(const GridWavefunction& psi) { return psi.amp * std::sqrt(psi.grid.cell_volume()); }

GridWavefunction from_euclidean(const GridSpec& grid, const CVec& u) {
    return GridWavefunction(grid, u / std::sqrt(grid.cell_volume()));
}

// ------------------------------------------------------------------ classification

std::string to_string(QuantumLabel label) {
    switch (label) {
        case QuantumLabel::pp_like: return "pp-like";
        case QuantumLabel::ac_like: return "ac-like";
        case QuantumLabel::exceptional_candidate: return "exceptional-candidate";
    }
    return "exceptional-candidate";
}

namespace {

QuantumClassification label_curve(std::vector<StayResult> curve, const ClassifyOptions& options) {
    QuantumClassification out;
    out.options = options;
    out.curve = std::move(curve);
    out.mu_min = out.curve.front().mu;
    for (const auto& s : out.curve) out.mu_min = std::min(out.mu_min, s.mu);
    out.tau_increment = out.curve.back().trailing_increment;
    if (out.mu_min >= options.mu_min) out.label = QuantumLabel::pp_like;
    else if (out.tau_increment < options.tau_increment) out.label = QuantumLabel::ac_like;
    else out.label = QuantumLabel::exceptional_candidate;
    return out;
}

void check_horizons(std::vector<double>& horizons) {
    if (horizons.empty()) throw InvalidArgument("classify_quantum: no horizons");
    std::sort(horizons.begin(), horizons.end());
    if (!(horizons.front() > 0.0)) throw InvalidArgument("classify_quantum: horizons must be positive");
}

}  // namespace

QuantumClassification classify_quantum(const FiniteEvolution& evo, const CVec& psi, const CMat& Omega,
                                       std::vector<double> horizons, const ClassifyOptions& options) {
    check_horizons(horizons);
    std::vector<StayResult> curve;
    for (double T : horizons) curve.push_back(transit_time(evo, psi, Omega, T, options.tau_increment, options.side));
    return label_curve(std::move(curve), options);
}

QuantumClassification classify_quantum(const HamiltonianSpec& spec, const GridWavefunction& psi,
                                       const ComparatorSpec& comp, std::vector<double> horizons,
                                       const ClassifyOptions& options, double dt) {
    check_horizons(horizons);
    spec.require_quantum();
    const double h = options.grid_step;
    if (!(h > 0.0)) throw InvalidArgument("classify_quantum: grid_step must be positive");
    // Every horizon and its half must land on an even Simpson node.
    for (double& T : horizons) T = 4.0 * h * std::max(1.0, std::round(T / (4.0 * h)));
    const long n = std::lround(horizons.back() / h);
    const bool free = spec.potential.is_polynomial() && spec.potential.poly().is_zero();

    auto expectation_curve = [&](const GridWavefunction& start, const ComparatorSpec& c) {
        std::vector<double> f(static_cast<std::size_t>(n) + 1);
        if (free) {
            for (long j = 0; j <= n; ++j) {
                const GridWavefunction s = free_evolve(start, spec.mass, j * h);
                const double bm = s.boundary_mass();
                if (bm > 1e-10) throw WraparoundError("classify_quantum: packet reaches the boundary", j * h, bm);
                f[static_cast<std::size_t>(j)] = comparator_expectation(c, s, true);
            }
        } else {
            const long stride = std::lround(h / dt);
            if (stride < 1 || std::abs(stride * dt - h) > 1e-9 * h)
                throw InvalidArgument("classify_quantum: grid_step must be a multiple of dt");
            PropagateOptions opt;
            opt.stride = static_cast<int>(stride);
            opt.keep_states = false;
            long j = 0;
            propagate(spec, start, n * h, dt, opt, [&](double, const GridWavefunction& s) {
                f[static_cast<std::size_t>(j++)] = comparator_expectation(c, s, true);
            });
        }
        return f;
    };

    std::vector<double> g(static_cast<std::size_t>(n) + 1, 0.0);
    if (options.side != TimeSide::backward) {
        const auto f = expectation_curve(psi, comp);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += f[j];
    }
    if (options.side != TimeSide::forward) {
        // U_{-t} psi = conj(U_t conj(psi)) for real potentials; the comparator centre flips momentum.
        GridWavefunction rev(psi.grid, psi.amp.conjugate());
        ComparatorSpec crev = comp;
        if (!comp.centred_at_origin()) crev.center = PhasePoint(comp.centre().xi, -comp.centre().pi);
        const auto f = expectation_curve(rev, crev);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += f[j];
    }
    const auto cum = cumulative_simpson(g, h);

    std::vector<StayResult> curve;
    for (double T : horizons) {
        const long nT = std::lround(T / h);
        StayResult s = stay_from_samples(cum, h, nT / 2, nT, options.side);
        s.divergent = s.trailing_increment > options.tau_increment;
        curve.push_back(s);
    }
    return label_curve(std::move(curve), options);
}

void write_stay_csv(const std::vector<StayResult>& curve, std::ostream& out) {
    out << "T,mu,tau\n" << std::setprecision(17);
    for (const auto& s : curve) out << s.T << ',' << s.mu << ',' << s.tau << '\n';
}

}  // namespace qcr
