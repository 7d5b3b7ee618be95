#include "qcr/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>

namespace qcr {

using std::numbers::pi;

namespace {

double unwrap(double previous, double raw) {
    double a = raw;
    while (a - previous > pi) a -= 2.0 * pi;
    while (a - previous < -pi) a += 2.0 * pi;
    return a;
}

Mat real_sqrt_spd(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    if (es.eigenvalues().minCoeff() <= 0.0) throw DomainError("width matrix: Re M is not positive definite");
    return es.operatorSqrt();
}

}  // namespace

double GaussianPacket::norm_factor() const {
    return std::pow(pi, -dim() / 4.0) / std::sqrt(std::abs(B.determinant()));
}

double GaussianPacket::closed_form_norm_squared() const {
    const Mat re = M.real();
    return 1.0 / (std::abs(B.determinant()) * std::sqrt(re.determinant()));
}

cplx GaussianPacket::operator()(const Vec& x) const {
    const Vec y = x - alpha.xi;
    const CVec yc = y.cast<cplx>();
    const cplx quad = yc.dot(M * yc);  // y real, so no conjugation issue
    const double weyl = alpha.pi.dot(x) - 0.5 * alpha.pi.dot(alpha.xi);
    return norm_factor() * std::exp(-0.5 * quad) * std::polar(1.0, phase + weyl - 0.5 * det_b_arg);
}

Mat GaussianPacket::position_covariance() const { return 0.5 * M.real().inverse(); }

void GaussianPacket::check_invariants(double tol) const {
    const double scale = std::max(1.0, M.norm());
    if ((M - M.transpose()).norm() > tol * scale) throw DomainError("GaussianPacket: M is not symmetric");
    if ((B * M - A).norm() > tol * std::max(1.0, A.norm())) throw DomainError("GaussianPacket: M != B^{-1} A");
    Eigen::LLT<Mat> llt(M.real());
    if (llt.info() != Eigen::Success) throw DomainError("GaussianPacket: Re M is not positive definite");
}

GaussianPacket vacuum(int n) {
    if (n < 1 || n > 3) throw InvalidArgument("vacuum: dimension must be 1, 2 or 3");
    GaussianPacket g;
    g.alpha = PhasePoint::origin(n);
    g.M = CMat::Identity(n, n);
    g.A = CMat::Identity(n, n);
    g.B = CMat::Identity(n, n);
    return g;
}

GaussianPacket coherent_packet(const PhasePoint& alpha, const CMat& M0) {
    const int n = alpha.dim();
    if (M0.rows() != n || M0.cols() != n) throw InvalidArgument("coherent_packet: width matrix dimension mismatch");
    if ((M0 - M0.transpose()).norm() > 1e-12 * std::max(1.0, M0.norm()))
        throw InvalidArgument("coherent_packet: width matrix must be symmetric");
    const Mat S = real_sqrt_spd(0.5 * (M0.real() + M0.real().transpose()));
    const Mat Sinv = S.inverse();
    GaussianPacket g;
    g.alpha = alpha;
    g.M = M0;
    g.B = Sinv.cast<cplx>();
    g.A = S.cast<cplx>() + cplx(0, 1) * (Sinv * M0.imag()).cast<cplx>();
    g.det_b_arg = 0.0;
    return g;
}

GaussianPacket squeezed_packet(const PhasePoint& alpha, double d) {
    if (!(d > 0.0)) throw InvalidArgument("squeezed_packet: dilation must be positive");
    const int n = alpha.dim();
    return coherent_packet(alpha, CMat::Identity(n, n) * d);
}

GridWavefunction sample_on_grid(const GaussianPacket& packet, const GridSpec& grid, double norm_tolerance) {
    if (packet.dim() != grid.n) throw InvalidArgument("sample_on_grid: dimension mismatch");
    GridWavefunction psi = GridWavefunction::from_function(grid, [&](const Vec& x) { return packet(x); });
    const double nrm = psi.norm_squared();
    if (std::abs(nrm - 1.0) > norm_tolerance)
        throw WraparoundError("sample_on_grid: packet does not fit the grid", 0.0, std::abs(nrm - 1.0));
    return psi;
}

CMat riccati_rhs(const Mat& hessian, const CMat& M) {
    const int n = static_cast<int>(M.rows());
    const CMat hxx = hessian.topLeftCorner(n, n).cast<cplx>();
    const CMat hxp = hessian.topRightCorner(n, n).cast<cplx>();
    const CMat hpx = hessian.bottomLeftCorner(n, n).cast<cplx>();
    const CMat hpp = hessian.bottomRightCorner(n, n).cast<cplx>();
    const cplx I(0, 1);
    return I * hxx - (M * hxp + hpx * M) - I * M * hpp * M;
}

std::vector<ABSample> evolve_AB(const HamiltonianSpec& spec, const ClassicalTrajectory& traj, const CMat& A0,
                                const CMat& B0, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("evolve_AB: dt must be positive");
    const int n = spec.dimension;
    if (A0.rows() != n || B0.rows() != n) throw InvalidArgument("evolve_AB: factor dimension mismatch");
    const cplx I(0, 1);

    auto rhs = [&](double t, const CMat& A, const CMat& B, CMat& dA, CMat& dB) {
        const Mat h = hessian_h(spec, traj.at(t));
        const CMat hxx = h.topLeftCorner(n, n).cast<cplx>();
        const CMat hxp = h.topRightCorner(n, n).cast<cplx>();
        const CMat hpx = h.bottomLeftCorner(n, n).cast<cplx>();
        const CMat hpp = h.bottomRightCorner(n, n).cast<cplx>();
        dA = I * B * hxx - A * hxp;
        dB = B * hpx + I * A * hpp;
    };

    auto sample = [&](double t, const CMat& A, const CMat& B, double arg) {
        Eigen::JacobiSVD<CMat> svd(B);
        const auto& sv = svd.singularValues();
        if (!(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0))))
            throw CausticError("evolve_AB: B is singular (caustic)", t);
        ABSample s;
        s.t = t;
        s.A = A;
        s.B = B;
        s.M = B.partialPivLu().solve(A);
        s.M = 0.5 * (s.M + s.M.transpose()).eval();
        s.det_b_arg = arg;
        Eigen::LLT<Mat> llt(s.M.real());
        if (llt.info() != Eigen::Success) throw DomainError("evolve_AB: Re M lost positive definiteness");
        return s;
    };

    std::vector<ABSample> out;
    out.reserve(traj.size());
    CMat A = A0, B = B0;
    double arg = std::arg(B.determinant());
    out.push_back(sample(traj.times[0], A, B, arg));

    CMat k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const double t0 = traj.times[k], t1 = traj.times[k + 1];
        const int sub = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt - 1e-9)));
        const double h = (t1 - t0) / sub;
        for (int s = 0; s < sub; ++s) {
            const double t = t0 + s * h;
            rhs(t, A, B, k1a, k1b);
            rhs(t + 0.5 * h, A + 0.5 * h * k1a, B + 0.5 * h * k1b, k2a, k2b);
            rhs(t + 0.5 * h, A + 0.5 * h * k2a, B + 0.5 * h * k2b, k3a, k3b);
            rhs(t + h, A + h * k3a, B + h * k3b, k4a, k4b);
            A += (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            B += (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
            arg = unwrap(arg, std::arg(B.determinant()));
        }
        out.push_back(sample(t1, A, B, arg));
    }
    return out;
}

std::vector<double> phase_X(const HamiltonianSpec& spec, const ClassicalTrajectory& traj) {
    std::vector<double> f(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const PhasePoint& a = traj.points[k];
        f[k] = eval_h(spec, a) - 0.5 * gradient_h(spec, a).dot(a.stacked());
    }
    std::vector<double> X(traj.size(), 0.0);
    for (std::size_t k = 1; k < traj.size(); ++k)
        X[k] = X[k - 1] + 0.5 * (traj.times[k] - traj.times[k - 1]) * (f[k] + f[k - 1]);
    return X;
}

const GaussianPacket& PacketSeries::at(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
    if (it == times.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, std::abs(t)))
        throw RangeError("PacketSeries: no packet at requested time");
    return packets[static_cast<std::size_t>(it - times.begin())];
}

PacketSeries evolve_packet(const HamiltonianSpec& spec, const ClassicalTrajectory& traj,
                           const GaussianPacket& packet0, double dt) {
    spec.require_quantum();
    const PhasePoint& a0 = traj.points.front();
    if ((packet0.alpha.stacked() - a0.stacked()).norm() > 1e-12 * std::max(1.0, a0.phase_norm()))
        throw InvalidArgument("evolve_packet: packet must be centred at alpha(0)");
    const auto ab = evolve_AB(spec, traj, packet0.A, packet0.B, dt);
    const auto X = phase_X(spec, traj);

    PacketSeries series;
    series.times = traj.times;
    series.packets.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        GaussianPacket g;
        g.alpha = traj.points[k];
        g.A = ab[k].A;
        g.B = ab[k].B;
        g.M = ab[k].M;
        // continuous branch relative to the initial packet's own branch
        g.det_b_arg = packet0.det_b_arg + (ab[k].det_b_arg - ab[0].det_b_arg);
        g.phase = packet0.phase - X[k];
        g.check_invariants(1e-8);
        series.packets.push_back(std::move(g));
    }
    return series;
}

GaussianPacket apply_W(const HamiltonianSpec& spec, const ClassicalTrajectory& traj, const GaussianPacket& packet0,
                       double t) {
    const std::size_t k = traj.index_of(t);
    ClassicalTrajectory head = traj;
    head.times.resize(k + 1);
    head.points.resize(k + 1);
    return evolve_packet(spec, head, packet0, traj.dt).packets.back();
}

void write_packet_series_csv(const PacketSeries& series, std::ostream& out) {
    if (series.packets.empty()) return;
    const int n = series.packets.front().dim();
    out << "t";
    for (int i = 0; i < n; ++i) out << ",xi" << (i + 1);
    for (int i = 0; i < n; ++i) out << ",pi" << (i + 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out << ",re_M" << (i + 1) << (j + 1) << ",im_M" << (i + 1) << (j + 1);
    out << ",phase\n" << std::setprecision(17);
    for (std::size_t k = 0; k < series.packets.size(); ++k) {
        const auto& g = series.packets[k];
        out << series.times[k];
        for (int i = 0; i < n; ++i) out << ',' << g.alpha.xi(i);
        for (int i = 0; i < n; ++i) out << ',' << g.alpha.pi(i);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out << ',' << g.M(i, j).real() << ',' << g.M(i, j).imag();
        out << ',' << g.phase - 0.5 * g.det_b_arg << '\n';
    }
}

double gaussian_moment(const Powers& p, const Mat& cov) {
    std::map<Powers, double> memo;
    const int n = static_cast<int>(cov.rows());
    auto rec = [&](auto&& self, const Powers& q) -> double {
        const int deg = total_degree(q);
        if (deg == 0) return 1.0;
        if (deg % 2 == 1) return 0.0;
        if (auto it = memo.find(q); it != memo.end()) return it->second;
        int i = 0;
        while (q[i] == 0) ++i;
        Powers b = q;
        b[i] -= 1;
        // E[x_i x^b] = sum_j cov_ij b_j E[x^{b - e_j}]
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            if (b[j] == 0) continue;
            Powers c = b;
            c[j] -= 1;
            acc += cov(i, j) * b[j] * self(self, c);
        }
        memo[q] = acc;
        return acc;
    };
    return rec(rec, p);
}

}  // namespace qcr
