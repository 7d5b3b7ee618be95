#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qcr/comparator.hpp"
#include "qcr/gaussian.hpp"

using namespace qcr;

namespace {

constexpr double pi = std::numbers::pi;
const double ln2 = std::log(2.0);

PhasePoint pt(double x, double p) { return {Vec::Constant(1, x), Vec::Constant(1, p)}; }

// Hermite functions from the explicit polynomials, independent of the library recurrence.
double h0(double x) { return std::pow(pi, -0.25) * std::exp(-x * x / 2); }
double h1(double x) { return std::sqrt(2.0) * x * h0(x); }
double h3(double x) { return (2 * x * x * x - 3 * x) / std::sqrt(3.0) * h0(x); }

GridWavefunction sampled(const GridSpec& g, double (*f)(double)) {
    return GridWavefunction::from_function(g, [f](const Vec& x) { return cplx(f(x(0))); });
}

// Overlap of the vacuum-centred number state k with a coherent state: Poisson weights.
double poisson(double a2, int k) { return std::exp(-a2 + k * std::log(a2) - std::lgamma(k + 1.0)); }

}  // namespace

TEST_CASE("Hermite functions") {
    for (double x : {-2.5, -0.3, 0.0, 1.1, 4.0}) {
        CHECK(hermite_function(0, x) == doctest::Approx(h0(x)).epsilon(1e-14));
        CHECK(hermite_function(1, x) == doctest::Approx(h1(x)).epsilon(1e-14));
        CHECK(hermite_function(3, x) == doctest::Approx(h3(x)).epsilon(1e-13));
    }
}

TEST_CASE("comparator acts diagonally on number states") {
    const GridSpec g(1, 1024, 20.0);
    const ComparatorSpec c(ln2);
    const GridWavefunction v = sampled(g, h0);
    CHECK(distance(apply_comparator(c, v), c.sigma() * v) < 1e-12);
    const GridWavefunction three = sampled(g, h3);
    const GridWavefunction out = apply_comparator(c, three);
    CHECK(inner(three, out).real() == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(distance(out, 0.0625 * three) < 1e-12);
    // normalized form: eigenvalue e^{-3s}
    CHECK(inner(three, apply_comparator(c, three, true)).real() == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("comparator is linear") {
    const GridSpec g(1, 1024, 20.0);
    const ComparatorSpec c(0.7);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 5; ++trial) {
        const cplx a(n(rng), n(rng)), b(n(rng), n(rng));
        const GridWavefunction p = sample_on_grid(coherent_packet(pt(n(rng), n(rng)), CMat::Identity(1, 1)), g);
        const GridWavefunction q = sample_on_grid(coherent_packet(pt(n(rng), n(rng)), CMat::Identity(1, 1)), g);
        const GridWavefunction lhs = apply_comparator(c, a * p + b * q);
        const GridWavefunction rhs = a * apply_comparator(c, p) + b * apply_comparator(c, q);
        CHECK(distance(lhs, rhs) < 1e-12);
    }
}

TEST_CASE("projection and synthesis invert each other") {
    const GridSpec g(1, 1024, 20.0);
    ComparatorSpec c(1.0);
    c.center = pt(1.0, -0.5);
    const GridWavefunction psi = sample_on_grid(coherent_packet(pt(1.5, 0), CMat::Constant(1, 1, cplx(1.2, 0.1))), g);
    CHECK(distance(synthesize(c, g, project(c, psi)), psi) < 1e-10);
}

TEST_CASE("comparator scalars") {
    const ComparatorScalars a = comparator_scalars(ComparatorSpec(ln2));
    CHECK(a.sigma == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(a.norm - 0.5) < 1e-10);
    CHECK(std::abs(a.trace - 1.0) < 1e-10);
    const ComparatorScalars b = comparator_scalars(ComparatorSpec(1.0));
    const double bound = std::pow(1 - std::exp(-1.0), 2);
    CHECK(b.aomega_sq_bound == doctest::Approx(bound).epsilon(1e-14));
    CHECK(b.aomega_sq <= bound);
    CHECK(b.aomega_sq > 0.5 * bound);
    CHECK(b.prefactor_closed == doctest::Approx(1.0).epsilon(1e-15));
    for (double s : {0.1, 3.0, 12.0}) CHECK(std::abs(comparator_scalars(ComparatorSpec(s)).trace - 1.0) < 1e-10);
}

TEST_CASE("power iteration on a known matrix") {
    Mat G(3, 3);
    G << 4, 1, 0, 1, 3, 0, 0, 0, 1;
    Eigen::SelfAdjointEigenSolver<Mat> es(G);
    CHECK(power_iteration(G) == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-12));
}

TEST_CASE("coherent matrix elements") {
    const GridSpec g(1, 1024, 20.0);
    const ComparatorSpec c(ln2);
    const CoherentElements z = coherent_matrix_elements(c, pt(0, 0), g);
    CHECK(z.diag == doctest::Approx(0.5));
    CHECK(z.inv_norm_sq == doctest::Approx(4.0));
    // |alpha|^2 = (xi^2 + pi^2)/2 = 2
    const CoherentElements e = coherent_matrix_elements(c, pt(2, 0), g);
    CHECK(e.alpha_sq == doctest::Approx(2.0));
    CHECK(e.diag == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
    // Poisson series sum_k p_k sigma e^{-sk}
    double series = 0;
    for (int k = 0; k < 100; ++k) series += poisson(2.0, k) * 0.5 * std::pow(0.5, k);
    CHECK(e.measured_diag == doctest::Approx(series).epsilon(1e-10));
    CHECK(std::abs(e.measured_diag - e.diag) < 1e-8);
}

TEST_CASE("one minus comparator on coherent states") {
    const GridSpec g(1, 1024, 20.0);
    const ComparatorSpec c(1.0);
    for (double x : {0.5, 1.0, 2.0}) {
        const CoherentElements e = coherent_matrix_elements(c, pt(x, 0.5), g);
        CHECK(e.measured_one_minus <= e.one_minus_sqrt_bound + 1e-12);
        // the printed form 1 - diag sits below the measured value away from the origin
        CHECK(e.measured_one_minus >= e.one_minus_bound - 1e-12);
    }
}

TEST_CASE("inverse comparator norm") {
    const GridSpec g(1, 1024, 20.0);
    const ComparatorSpec c(ln2);
    const MagnitudeResult v = within_magnitude(c, 1.0, sampled(g, h0));
    CHECK(v.inv_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.member);
    CHECK_FALSE(within_magnitude(c, 0.99, sampled(g, h0)).member);

    // sum_k p_k e^{2sk} = exp(|alpha|^2 (e^{2s} - 1)) = e^6 for the normalized comparator
    const GridWavefunction coh = sample_on_grid(coherent_packet(pt(2, 0), CMat::Identity(1, 1)), g);
    const MagnitudeResult m = within_magnitude(c, 1e9, coh);
    CHECK_FALSE(m.divergent);
    CHECK(m.inv_norm * m.inv_norm == doctest::Approx(std::exp(6.0)).epsilon(1e-8));
    const CoherentElements e = coherent_matrix_elements(c, pt(2, 0), g);
    CHECK(e.inv_norm_sq == doctest::Approx(4 * std::exp(6.0)).epsilon(1e-12));
    CHECK(e.measured_inv_norm_sq == doctest::Approx(e.inv_norm_sq).epsilon(1e-8));
}

TEST_CASE("squeezing raises the inverse norm") {
    const GridSpec g(1, 1024, 20.0);
    const ComparatorSpec c(0.1);
    const auto at = [&](double d) { return sample_on_grid(coherent_packet(pt(0.5, 0), CMat::Identity(1, 1) * d), g); };
    const MagnitudeResult m1 = within_magnitude(c, 1e9, at(1.0)), m4 = within_magnitude(c, 1e9, at(4.0));
    CHECK_FALSE(m4.divergent);
    CHECK(m4.inv_norm > m1.inv_norm);
    // at s = ln 2 the M = 10 packet is outside the range altogether
    const MagnitudeResult hard = within_magnitude(ComparatorSpec(ln2), 1e9,
        sample_on_grid(coherent_packet(pt(0.5, 0), CMat::Identity(1, 1) * 10.0), g));
    CHECK(hard.divergent);
    CHECK(std::isinf(hard.inv_norm));
}

TEST_CASE("two-dimensional comparator is a tensor product") {
    const GridSpec g(2, 64, 8.0);
    const ComparatorSpec c(ln2, 32, 2);
    const ComparatorScalars s = comparator_scalars(c);
    CHECK(s.norm == doctest::Approx(0.25));
    CHECK(s.trace == doctest::Approx(1.0).epsilon(1e-10));
    const GridWavefunction v = GridWavefunction::from_function(g, [](const Vec& x) { return cplx(h0(x(0)) * h0(x(1))); });
    CHECK(comparator_expectation(c, v, false) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("invalid comparator specs") {
    CHECK_THROWS(ComparatorSpec(0.0));
    CHECK_THROWS(ComparatorSpec(1.0, 4));
    CHECK_THROWS(within_magnitude(ComparatorSpec(1.0), 0.0, GridWavefunction::from_function(GridSpec(1, 256, 10), [](const Vec& x) { return cplx(h0(x(0))); })));
}
