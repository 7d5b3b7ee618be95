#include "qcr/comparator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <tuple>
#include <numbers>

namespace qcr {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_grid(const ComparatorSpec& spec, const GridSpec& grid) {
    if (grid.n != spec.n) throw InvalidArgument("comparator: grid dimension differs from comparator dimension");
}

GridWavefunction to_frame(const ComparatorSpec& spec, const GridWavefunction& psi) {
    if (spec.centred_at_origin()) return psi;
    const PhasePoint c = spec.centre();
    return weyl_displace(psi, -1.0 * c, std::numeric_limits<double>::infinity());
}

GridWavefunction from_frame(const ComparatorSpec& spec, const GridWavefunction& psi) {
    if (spec.centred_at_origin()) return psi;
    return weyl_displace(psi, spec.centre(), std::numeric_limits<double>::infinity());
}

// Eigenvalue of the normalized comparator on total quanta k.
double weight(const ComparatorSpec& spec, int k) { return std::exp(-spec.s * k); }

}  // namespace

ComparatorSpec::ComparatorSpec(double s_, int N_, int n_) : s(s_), N(N_), n(n_) { validate(); }

void ComparatorSpec::validate() const {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("ComparatorSpec: s must be positive");
    if (N < 16) throw InvalidArgument("ComparatorSpec: truncation N must be at least 16");
    if (n < 1 || n > 2) throw InvalidArgument("ComparatorSpec: dimension must be 1 or 2");
    if (center.dim() != 0 && center.dim() != n) throw InvalidArgument("ComparatorSpec: centre dimension mismatch");
}

bool ComparatorSpec::centred_at_origin() const {
    return center.dim() == 0 || (center.xi.isZero(0.0) && center.pi.isZero(0.0));
}

double hermite_function(int k, double x) {
    double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (k == 0) return h0;
    double h1 = std::sqrt(2.0) * x * h0;
    for (int j = 1; j < k; ++j) {
        const double h2 = std::sqrt(2.0 / (j + 1)) * x * h1 - std::sqrt(static_cast<double>(j) / (j + 1)) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

HermiteBasis::HermiteBasis(const GridSpec& grid, int K) : values(Mat::Zero(grid.N, K + 1)), dx(grid.dx()) {
    const Vec x = grid.axis();
    const double reach = std::sqrt(2.0 * K + 1.0) + 12.0;
    begin = grid.N;
    for (int i = 0; i < grid.N; ++i) {
        if (std::abs(x(i)) > reach) continue;
        begin = std::min<Eigen::Index>(begin, i);
        end = i + 1;
        double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x(i) * x(i));
        values(i, 0) = h0;
        if (K == 0) continue;
        double h1 = std::sqrt(2.0) * x(i) * h0;
        values(i, 1) = h1;
        for (int j = 1; j < K; ++j) {
            const double h2 = std::sqrt(2.0 / (j + 1)) * x(i) * h1 - std::sqrt(static_cast<double>(j) / (j + 1)) * h0;
            values(i, j + 1) = h2;
            h0 = h1;
            h1 = h2;
        }
    }
}

int NumberState::quanta(Eigen::Index idx) const {
    if (n == 1) return static_cast<int>(idx);
    return static_cast<int>(idx / (K + 1) + idx % (K + 1));
}

namespace {

// Per-thread cache: sweeps project thousands of states on one grid.
std::shared_ptr<const HermiteBasis> cached_basis(const GridSpec& grid, int K) {
    thread_local std::map<std::tuple<int, double, int>, std::shared_ptr<const HermiteBasis>> cache;
    const auto key = std::make_tuple(grid.N, grid.L, K);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (cache.size() >= 8) cache.clear();
    auto b = std::make_shared<const HermiteBasis>(grid, K);
    cache.emplace(key, b);
    return b;
}

}  // namespace

NumberState project(const ComparatorSpec& spec, const GridWavefunction& psi) {
    spec.validate();
    check_grid(spec, psi.grid);
    const GridWavefunction phi = to_frame(spec, psi);
    const auto basis_ptr = cached_basis(psi.grid, spec.N);
    const HermiteBasis& basis = *basis_ptr;
    NumberState out;
    out.n = spec.n;
    out.K = spec.N;
    if (spec.n == 1) {
        const Eigen::Index rows = basis.end - basis.begin;
        const auto Hb = basis.values.middleRows(basis.begin, rows);
        const CVec seg = phi.amp.segment(basis.begin, rows);
        const Vec re = Hb.transpose() * seg.real() * basis.dx;
        const Vec im = Hb.transpose() * seg.imag() * basis.dx;
        out.c.resize(re.size());
        out.c.real() = re;
        out.c.imag() = im;
    } else {
        const CMat H = basis.values.cast<cplx>();
        const int N = psi.grid.N;
        const Eigen::Map<const RowMat> P(phi.amp.data(), N, N);
        const RowMat C = H.transpose() * P * H * (basis.dx * basis.dx);
        out.c = Eigen::Map<const CVec>(C.data(), C.size());
    }
    return out;
}

GridWavefunction synthesize(const ComparatorSpec& spec, const GridSpec& grid, const NumberState& state) {
    check_grid(spec, grid);
    if (state.K != spec.N || state.n != spec.n) throw InvalidArgument("synthesize: coefficient layout mismatch");
    const HermiteBasis basis(grid, spec.N);
    const CMat H = basis.values.cast<cplx>();
    GridWavefunction out;
    out.grid = grid;
    if (spec.n == 1) {
        out.amp = H * state.c;
    } else {
        const Eigen::Map<const RowMat> C(state.c.data(), spec.N + 1, spec.N + 1);
        const RowMat P = H * C * H.transpose();
        out.amp = Eigen::Map<const CVec>(P.data(), P.size());
    }
    return from_frame(spec, out);
}

GridWavefunction apply_comparator(const ComparatorSpec& spec, const GridWavefunction& psi, bool normalized,
                                  double mass_tolerance) {
    NumberState st = project(spec, psi);
    const double lost = psi.norm_squared() - st.norm_squared();
    if (lost > mass_tolerance)
        throw DomainError("apply_comparator: Hermite projection loses mass " + std::to_string(lost));
    const double scale = normalized ? 1.0 : std::pow(spec.sigma(), spec.n);
    for (Eigen::Index i = 0; i < st.c.size(); ++i) st.c(i) *= scale * weight(spec, st.quanta(i));
    return synthesize(spec, psi.grid, st);
}

double comparator_expectation(const ComparatorSpec& spec, const GridWavefunction& psi, bool normalized) {
    const NumberState st = project(spec, psi);
    const double scale = normalized ? 1.0 : std::pow(spec.sigma(), spec.n);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < st.c.size(); ++i) acc += std::norm(st.c(i)) * weight(spec, st.quanta(i));
    return scale * acc;
}

double power_iteration(const Mat& G, int* iterations, double tol, int max_iter) {
    Vec v = Vec::Ones(G.rows()).normalized();
    double lambda = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        Vec w = G * v;
        const double next = v.dot(w);
        const double nw = w.norm();
        if (nw == 0.0) {
            lambda = 0.0;
            break;
        }
        v = w / nw;
        if (std::abs(next - lambda) <= tol * std::max(1e-300, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    if (iterations) *iterations = it + 1;
    return lambda;
}

ComparatorScalars comparator_scalars(const ComparatorSpec& spec) {
    spec.validate();
    ComparatorScalars out;
    const double s = spec.s, sigma = spec.sigma();
    out.sigma = sigma;
    out.lambda = spec.lambda();
    out.norm = std::pow(sigma, spec.n);
    out.tail_bound = spec.tail_bound();
    out.one_minus_norm = 1.0 - std::exp(-s * spec.N);

    // Per-axis trace, summed smallest term first, then the geometric tail.
    double tr1 = sigma * std::exp(-s * (spec.N + 1)) / (1.0 - std::exp(-s));
    for (int k = spec.N; k >= 0; --k) tr1 += sigma * std::exp(-s * k);
    out.trace = std::pow(tr1, spec.n);

    // ||q Omega~||^2 = ||Omega~ Q^2 Omega~|| with Q on N+2 levels (q lifts h_N to h_{N+1}).
    const int K = spec.N;
    Mat Q = Mat::Zero(K + 2, K + 2);
    for (int k = 0; k + 1 < K + 2; ++k) Q(k, k + 1) = Q(k + 1, k) = std::sqrt((k + 1) / 2.0);
    const Mat Q2 = (Q * Q).topLeftCorner(K + 1, K + 1);
    Vec d(K + 1);
    for (int k = 0; k <= K; ++k) d(k) = sigma * std::exp(-s * k);
    const Mat G = d.asDiagonal() * Q2 * d.asDiagonal();
    out.aomega_sq = power_iteration(G, &out.power_iterations);
    out.aomega_sq_bound = sigma * sigma * std::exp(s - 1.0) / s;
    out.aomega_normalized = std::sqrt(out.aomega_sq) / sigma;
    out.prefactor_closed = std::sqrt(std::exp(s) / (s * std::numbers::e));
    return out;
}

CoherentElements coherent_matrix_elements(const ComparatorSpec& spec, const PhasePoint& alpha, const GridSpec& grid) {
    spec.validate();
    if (alpha.dim() != spec.n) throw InvalidArgument("coherent_matrix_elements: dimension mismatch");
    const PhasePoint rel = alpha - spec.centre();
    CoherentElements out;
    out.alpha_sq = 0.5 * (rel.xi.squaredNorm() + rel.pi.squaredNorm());
    const double sigma = spec.sigma(), lam2 = std::exp(2.0 * spec.s) - 1.0;
    const double sn = std::pow(sigma, spec.n);
    out.diag = sn * std::exp(-sigma * out.alpha_sq);
    if (lam2 * out.alpha_sq > 700.0) throw RangeError("coherent_matrix_elements: e^{lambda_2s |alpha|^2} overflows");
    out.inv_norm_sq = std::exp(lam2 * out.alpha_sq) / (sn * sn);
    out.one_minus_bound = 1.0 - out.diag;
    out.one_minus_sqrt_bound = std::sqrt(1.0 - out.diag);

    // Measured on the grid: coherent state Gamma(alpha) = U(alpha) Gamma(0).
    GridWavefunction g = GridWavefunction::from_function(grid, [&](const Vec& x) {
        const Vec y = x - alpha.xi;
        const double amp = std::pow(std::numbers::pi, -spec.n / 4.0) * std::exp(-0.5 * y.squaredNorm());
        return std::polar(amp, alpha.pi.dot(x) - 0.5 * alpha.pi.dot(alpha.xi));
    });
    const NumberState st = project(spec, g);
    double diag = 0.0, om = 0.0;
    for (Eigen::Index i = 0; i < st.c.size(); ++i) {
        const double w = sn * weight(spec, st.quanta(i));
        diag += std::norm(st.c(i)) * w;
        om += std::norm(st.c(i)) * (1.0 - w) * (1.0 - w);
    }
    out.measured_diag = diag;
    out.measured_one_minus = std::sqrt(om);
    const MagnitudeResult mag =
        within_magnitude(spec, std::numeric_limits<double>::infinity(), st, g.norm_squared() - st.norm_squared());
    out.inv_divergent = mag.divergent;
    out.measured_inv_norm_sq = mag.inv_norm * mag.inv_norm / (sn * sn);
    return out;
}

MagnitudeResult within_magnitude(const ComparatorSpec& spec, double E, const NumberState& st, double residual,
                                 const MagnitudeOptions& options) {
    if (!(E > 0.0)) throw InvalidArgument("within_magnitude: E must be positive");
    MagnitudeResult out;
    out.residual = residual;
    if (residual > options.residual_tolerance)
        throw DomainError("within_magnitude: state not representable in the truncated basis (residual " +
                          std::to_string(residual) + ")");
    const double total = std::sqrt(std::max(st.norm_squared(), 1e-300));
    const double floor = options.amplitude_floor * total;

    int support = 0;
    for (Eigen::Index i = 0; i < st.c.size(); ++i)
        if (std::abs(st.c(i)) > floor) support = std::max(support, st.quanta(i));
    out.support = support;

    // Sub-floor coefficients are round-off; they stay out of the shells so that the
    // fit below does not see them (parity-empty shells would otherwise look like noise).
    std::vector<double> shell(static_cast<std::size_t>(support) + 1, 0.0);
    for (Eigen::Index i = 0; i < st.c.size(); ++i) {
        const int k = st.quanta(i);
        if (k <= support && std::abs(st.c(i)) > floor)
            shell[static_cast<std::size_t>(k)] += std::norm(st.c(i)) * std::exp(2.0 * spec.s * k);
    }
    double sum = 0.0;
    for (double w : shell) sum += w;

    // Log-linear fit of the weighted shells over the trailing window. A non-negative
    // slope means the coefficients decay no faster than e^{-sk}: not in Ran(Omega).
    // Otherwise the part below the floor is extrapolated as a geometric tail.
    bool growing = false;
    if (support >= options.tail_window) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (int k = support - options.tail_window + 1; k <= support; ++k) {
            const double w = shell[static_cast<std::size_t>(k)];
            if (!(w > 0.0)) continue;
            const double y = std::log(w);
            sx += k; sy += y; sxx += double(k) * k; sxy += k * y;
            ++m;
        }
        if (m >= 3) {
            const double g = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            growing = g >= 0.0;
            if (!growing) sum += shell.back() * std::exp(g) / (1.0 - std::exp(g));
        }
    }
    out.divergent = support >= spec.N - 1 || growing;
    out.inv_norm = out.divergent ? std::numeric_limits<double>::infinity() : std::sqrt(sum);
    out.member = !out.divergent && out.inv_norm <= E;
    return out;
}

MagnitudeResult within_magnitude(const ComparatorSpec& spec, double E, const GridWavefunction& psi,
                                 const MagnitudeOptions& options) {
    const NumberState st = project(spec, psi);
    return within_magnitude(spec, E, st, psi.norm_squared() - st.norm_squared(), options);
}

}  // namespace qcr
