#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qcr/gaussian.hpp"

using namespace qcr;

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0, 1);

PhasePoint pt(double x, double p) { return {Vec::Constant(1, x), Vec::Constant(1, p)}; }
HamiltonianSpec poly(double m, std::vector<double> c) { return {m, PotentialModel::polynomial_1d(c)}; }
CMat scalar(cplx z) { return CMat::Constant(1, 1, z); }

const HamiltonianSpec harmonic = poly(1, {0, 0, 0.5});
const HamiltonianSpec cubic = poly(1, {0, 0, 0.5, 0.1 / 6});

// Riccati flow integrated with a fine fixed-step RK4, independent of evolve_AB.
cplx riccati_fine(double hxx, double hpp, cplx M, double T, int steps) {
    auto f = [&](cplx m) { return I * hxx - I * m * m * hpp; };
    const double h = T / steps;
    for (int k = 0; k < steps; ++k) {
        const cplx k1 = f(M), k2 = f(M + 0.5 * h * k1), k3 = f(M + 0.5 * h * k2), k4 = f(M + h * k3);
        M += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return M;
}

}  // namespace

TEST_CASE("vacuum moments and annihilation") {
    const GridSpec g(1, 1024, 20.0);
    const GridWavefunction v = sample_on_grid(vacuum(1), g);
    CHECK(v.norm_squared() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(position_covariance(v)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    // <p^2> spectrally
    const CVec s = to_momentum(v);
    const Vec k = g.frequencies();
    double p2 = 0;
    for (int i = 0; i < g.N; ++i) p2 += k(i) * k(i) * std::norm(s(i));
    p2 *= g.dx() / g.N;
    CHECK(p2 == doctest::Approx(0.5).epsilon(1e-12));
    // (Q + iP) Gamma = x psi + psi'
    CVec ds = s;
    for (int i = 0; i < g.N; ++i) ds(i) *= I * k(i);
    const GridWavefunction d = from_momentum(g, ds);
    double worst = 0;
    for (int i = 0; i < g.N; ++i) worst = std::max(worst, std::abs(g.axis()(i) * v.amp(i) + d.amp(i)));
    CHECK(worst < 1e-8);
}

TEST_CASE("sampled vacuum equals the analytic function") {
    const GridSpec g(1, 1024, 20.0);
    const GridWavefunction v = sample_on_grid(vacuum(1), g);
    double worst = 0;
    for (int i = 0; i < g.N; ++i) {
        const double x = g.axis()(i);
        worst = std::max(worst, std::abs(v.amp(i) - std::pow(pi, -0.25) * std::exp(-x * x / 2)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("complex width broadens the density as (Re M)^{-1}/2") {
    const GridSpec g(1, 2048, 30.0);
    const GaussianPacket p = coherent_packet(pt(0, 0), scalar(1.0 / (1.0 + I)));
    p.check_invariants();
    CHECK(p.position_covariance()(0, 0) == doctest::Approx(1.0));
    const GridWavefunction w = sample_on_grid(p, g);
    // direct quadrature of x^2 |psi|^2
    double m2 = 0;
    for (int i = 0; i < g.N; ++i) m2 += g.axis()(i) * g.axis()(i) * std::norm(w.amp(i)) * g.dx();
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(p.closed_form_norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("displaced packet expectations") {
    const GridSpec g(1, 1024, 20.0);
    const Vec a = expectation_a(sample_on_grid(coherent_packet(pt(1, 3), scalar(1.0)), g));
    CHECK(std::abs(a(0) - 1) < 1e-10);
    CHECK(std::abs(a(1) - 3) < 1e-10);
}

TEST_CASE("harmonic width is stationary") {
    const ClassicalTrajectory t = integrate_flow(harmonic, pt(1, 0), 2 * pi, 1e-3);
    const auto ab = evolve_AB(harmonic, t, scalar(1), scalar(1), 1e-3);
    double worst_M = 0, worst_A = 0;
    for (const auto& s : ab) {
        worst_M = std::max(worst_M, std::abs(s.M(0, 0) - 1.0));
        worst_A = std::max({worst_A, std::abs(s.A(0, 0) - std::exp(I * s.t)), std::abs(s.B(0, 0) - std::exp(I * s.t))});
    }
    CHECK(worst_M < 1e-10);
    CHECK(worst_A < 1e-9);
}

TEST_CASE("free width follows 1/(1+it)") {
    const ClassicalTrajectory t = integrate_flow(poly(1, {0}), pt(0, 0), 1.0, 1e-3);
    const auto ab = evolve_AB(poly(1, {0}), t, scalar(1), scalar(1), 1e-3);
    CHECK(std::abs(ab.back().M(0, 0) - (1.0 - I) / 2.0) < 1e-8);
    for (const auto& s : ab) CHECK(std::abs(s.M(0, 0) - 1.0 / (1.0 + I * s.t)) < 1e-8);
}

TEST_CASE("inverted oscillator width") {
    // M' = -i (1 + M^2), M(0) = 1 has the solution tan(pi/4 - i t)
    const HamiltonianSpec inv = poly(1, {0, 0, -0.5});
    const ClassicalTrajectory t = integrate_flow(inv, pt(0, 0), 2.0, 1e-3);
    const auto ab = evolve_AB(inv, t, scalar(1), scalar(1), 1e-3);
    for (const auto& s : ab) {
        CHECK(s.M(0, 0).real() > 0);
        CHECK(std::abs(s.M(0, 0) - std::tan(pi / 4 - I * s.t)) < 1e-7);
    }
    CHECK(std::abs(ab.back().M(0, 0) - riccati_fine(-1, 1, 1.0, 2.0, 200000)) < 1e-7);
}

TEST_CASE("Riccati right-hand side") {
    const Mat h = Mat::Identity(2, 2);
    CHECK(std::abs(riccati_rhs(h, scalar(1))(0, 0)) < 1e-15);
    CHECK(std::abs(riccati_rhs(Mat::Zero(2, 2), scalar(0.5))(0, 0)) < 1e-15);
}

TEST_CASE("phase integral") {
    const ClassicalTrajectory rest = integrate_flow(harmonic, pt(0, 0), 1.0, 1e-3);
    for (double x : phase_X(harmonic, rest)) CHECK(x == 0.0);
    const ClassicalTrajectory orbit = integrate_flow(harmonic, pt(1, 0), 5.0, 1e-3);
    for (double x : phase_X(harmonic, orbit)) CHECK(std::abs(x) < 1e-10);
}

TEST_CASE("packet evolution reproduces free propagation including the phase") {
    const GridSpec g(1, 2048, 40.0);
    const HamiltonianSpec free = poly(1, {0});
    const GaussianPacket p0 = coherent_packet(pt(0, 2), scalar(1));
    const ClassicalTrajectory t = integrate_flow(free, p0.alpha, 2.0, 1e-3);
    const GaussianPacket w = apply_W(free, t, p0, 2.0);
    const GridWavefunction exact = free_evolve(sample_on_grid(p0, g), 1.0, 2.0);
    CHECK(distance(sample_on_grid(w, g), exact) < 1e-6);
}

TEST_CASE("packet evolution under a quadratic potential") {
    const GaussianPacket p0 = coherent_packet(pt(1, 0), scalar(1));
    const ClassicalTrajectory t = integrate_flow(harmonic, p0.alpha, pi, pi / 2000);
    const GaussianPacket w = apply_W(harmonic, t, p0, pi / 2);
    CHECK(std::abs(w.alpha.xi(0)) < 1e-6);
    CHECK(std::abs(w.alpha.pi(0) + 1) < 1e-6);
    CHECK(std::abs(w.M(0, 0) - 1.0) < 1e-10);

    // against the grid propagator with a shifted centre and complex width
    const GridSpec g(1, 1024, 20.0);
    const HamiltonianSpec h = poly(1.0, {0.3, 0.2, 0.4});
    const GaussianPacket q0 = coherent_packet(pt(0.5, -0.5), scalar(cplx(1.5, 0.3)));
    const double T = 3.0;
    const ClassicalTrajectory tq = integrate_flow(h, q0.alpha, T, 1e-3);
    PropagateOptions opt;
    opt.keep_states = false;
    const GridRun run = propagate(h, sample_on_grid(q0, g), T, 1e-3, opt);
    const GridWavefunction wq = sample_on_grid(apply_W(h, tq, q0, T), g);
    CHECK(std::abs(inner(wq, run.states.back())) > 1 - 1e-6);
}

TEST_CASE("evolved packets stay centred on the classical orbit") {
    const GridSpec g(1, 1024, 20.0);
    const GaussianPacket p0 = coherent_packet(pt(1, 0), scalar(1));
    const ClassicalTrajectory t = integrate_flow(cubic, p0.alpha, 1.0, 1e-3);
    const GaussianPacket w = apply_W(cubic, t, p0, 1.0);
    const Vec a = expectation_a(sample_on_grid(w, g));
    CHECK((a - w.alpha.stacked()).norm() < 1e-9);
    CHECK((w.alpha.stacked() - t.points.back().stacked()).norm() == 0.0);
}

TEST_CASE("Gaussian moments") {
    const Mat c = Mat::Constant(1, 1, 0.5);
    CHECK(gaussian_moment({2, 0, 0}, c) == doctest::Approx(0.5));
    CHECK(gaussian_moment({3, 0, 0}, c) == 0.0);
    CHECK(gaussian_moment({6, 0, 0}, c) == doctest::Approx(15.0 / 8));
    CHECK(gaussian_moment({8, 0, 0}, c) == doctest::Approx(105.0 / 16));
    Mat c2(2, 2);
    c2 << 1.0, 0.3, 0.3, 2.0;
    // E[x^2 y^2] = s11 s22 + 2 s12^2
    CHECK(gaussian_moment({2, 2, 0}, c2) == doctest::Approx(2.0 + 2 * 0.09));
}

TEST_CASE("invalid widths are rejected") {
    CHECK_THROWS(coherent_packet(pt(0, 0), scalar(cplx(-1, 0))));
    CHECK_THROWS(squeezed_packet(pt(0, 0), 0.0));
}

TEST_CASE("packet series CSV header") {
    const GaussianPacket p0 = coherent_packet(pt(1, 0), scalar(1));
    const ClassicalTrajectory t = integrate_flow(harmonic, p0.alpha, 0.01, 1e-3);
    std::ostringstream os;
    write_packet_series_csv(evolve_packet(harmonic, t, p0, 1e-3), os);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,xi1,pi1,re_M11,im_M11,phase");
}
