#include <doctest.h>

#include <cmath>

#include "qcr/hamiltonian.hpp"

using namespace qcr;

namespace {

PhasePoint pt(double x, double p) { return {Vec::Constant(1, x), Vec::Constant(1, p)}; }
HamiltonianSpec poly(double m, std::vector<double> c) { return {m, PotentialModel::polynomial_1d(c)}; }

}  // namespace

TEST_CASE("energy of simple systems") {
    CHECK(eval_h(poly(1, {0, 0, 0.5}), pt(1, 0)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(eval_h(poly(2, {0}), pt(0, 4)) == doctest::Approx(4.0).epsilon(1e-15));
    // p^2/2 + x^3/6 evaluated by hand
    const double x = 2, p = 1;
    CHECK(eval_h(poly(1, {0, 0, 0, 1.0 / 6}), pt(x, p)) == doctest::Approx(p * p / 2 + x * x * x / 6).epsilon(1e-14));
}

TEST_CASE("gradient of h") {
    Vec g = gradient_h(poly(1, {0, 0, 0.5}), pt(1, 0));
    CHECK(g(0) == doctest::Approx(1.0));
    CHECK(g(1) == doctest::Approx(0.0));
    g = gradient_h(poly(2, {0}), pt(0, 4));
    CHECK(g(0) == doctest::Approx(0.0));
    CHECK(g(1) == doctest::Approx(2.0));
    g = gradient_h(poly(1, {0, 0, 0, 1.0 / 6}), pt(2, 1));
    CHECK(g(0) == doctest::Approx(2.0));
    CHECK(g(1) == doctest::Approx(1.0));
}

TEST_CASE("gradient agrees with central differences") {
    const HamiltonianSpec h = poly(1.3, {0.2, -0.1, 0.7, 0.05, 0.01});
    const PhasePoint a = pt(0.8, -1.1);
    const Vec g = gradient_h(h, a);
    const double e = 1e-6;
    CHECK(g(0) == doctest::Approx((eval_h(h, pt(0.8 + e, -1.1)) - eval_h(h, pt(0.8 - e, -1.1))) / (2 * e)).epsilon(1e-8));
    CHECK(g(1) == doctest::Approx((eval_h(h, pt(0.8, -1.1 + e)) - eval_h(h, pt(0.8, -1.1 - e))) / (2 * e)).epsilon(1e-8));
}

TEST_CASE("hessian of h") {
    Mat H = hessian_h(poly(1, {0, 0, 0.5}), pt(0.3, 0.2));
    CHECK((H - Mat::Identity(2, 2)).norm() < 1e-14);
    H = hessian_h(poly(2, {0}), pt(0, 4));
    CHECK(H(0, 0) == 0.0);
    CHECK(H(1, 1) == doctest::Approx(0.5));
    H = hessian_h(poly(1, {0, 0, 0, 0, 0.25}), pt(2, 0));
    CHECK(H(0, 0) == doctest::Approx(12.0));
}

TEST_CASE("Taylor remainder of the potential") {
    const HamiltonianSpec quad = poly(1, {0, 0, 0.5});
    CHECK(std::abs(taylor_remainder_V(quad, Vec::Constant(1, 1.7), Vec::Constant(1, 0.7))) < 1e-14);
    CHECK(taylor_remainder_V(poly(1, {0, 0, 0, 1.0 / 6}), Vec::Zero(1), Vec::Constant(1, 2)) ==
          doctest::Approx(8.0 / 6));
    // V(2) - V(1) - V'(1) - V''(1)/2 with V = x^4/4
    CHECK(taylor_remainder_V(poly(1, {0, 0, 0, 0, 0.25}), Vec::Constant(1, 1), Vec::Constant(1, 1)) ==
          doctest::Approx(4.0 - 0.25 - 1.0 - 1.5));
}

TEST_CASE("remainder polynomial matches pointwise remainder") {
    const PotentialModel v = PotentialModel::polynomial_1d({0.1, 0.2, 0.3, 0.4, 0.5});
    const Vec c = Vec::Constant(1, -0.6);
    const Polynomial r = v.remainder_polynomial(c);
    for (double x : {-1.0, -0.2, 0.4, 1.3}) {
        const Vec y = Vec::Constant(1, x);
        CHECK(r(y) == doctest::Approx(v.taylor_remainder(c, y)).epsilon(1e-12));
    }
}

TEST_CASE("two-dimensional polynomial with a cross term") {
    Polynomial p(2);
    p.add_term({2, 0, 0}, 0.5);
    p.add_term({0, 2, 0}, 0.5);
    p.add_term({1, 1, 0}, 0.3);
    const HamiltonianSpec h(1.0, PotentialModel::polynomial(p));
    PhasePoint a(Vec::Constant(2, 1.0), Vec::Zero(2));
    CHECK(eval_h(h, a) == doctest::Approx(1.3));
    const Mat H = hessian_h(h, a);
    CHECK(H(0, 1) == doctest::Approx(0.3));
    CHECK(H(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("tabulated potential reproduces a parabola between knots") {
    std::vector<double> x, v;
    for (int i = -40; i <= 40; ++i) {
        x.push_back(0.1 * i);
        v.push_back(0.5 * 0.01 * i * i);
    }
    const PotentialModel t = PotentialModel::tabulated(x, v);
    CHECK(t.value(Vec::Constant(1, 0.55)) == doctest::Approx(0.5 * 0.55 * 0.55).epsilon(1e-4));
    CHECK(t.gradient(Vec::Constant(1, 0.55))(0) == doctest::Approx(0.55).epsilon(1e-3));
    CHECK_THROWS_AS(t.third_derivative(Vec::Constant(1, 0.0)), Unsupported);
    CHECK_THROWS_AS(t.value_1d(5.0), DomainError);
}

TEST_CASE("vector potential enters the kinetic term") {
    // A(x) = (0, x) in 2D: h = (p1^2 + (p2 - x1)^2)/2
    std::vector<PotentialModel> A;
    Polynomial a1(2), a2(2);
    a2.add_term({1, 0, 0}, 1.0);
    A.push_back(PotentialModel::polynomial(a1));
    A.push_back(PotentialModel::polynomial(a2));
    HamiltonianSpec h(1.0, PotentialModel::zero(2), A);
    h.classical_only = true;
    PhasePoint a(Vec::Constant(2, 1.0), Vec::Constant(2, 2.0));
    CHECK(eval_h(h, a) == doctest::Approx((4.0 + 1.0) / 2));
    CHECK_THROWS(h.require_quantum());
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS(HamiltonianSpec(0.0, PotentialModel::zero(1)).validate());
    CHECK_THROWS(HamiltonianSpec(-1.0, PotentialModel::zero(1)).validate());
}
