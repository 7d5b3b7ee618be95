#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qcr/classical.hpp"

using namespace qcr;

namespace {

constexpr double pi = std::numbers::pi;

PhasePoint pt(double x, double p) { return {Vec::Constant(1, x), Vec::Constant(1, p)}; }
HamiltonianSpec poly(double m, std::vector<double> c) { return {m, PotentialModel::polynomial_1d(c)}; }
const HamiltonianSpec harmonic = poly(1, {0, 0, 0.5});
const HamiltonianSpec quartic = poly(1, {0, 0, 0, 0, 0.25});

PhaseRegion box(double cx, double hx, double hp) {
    Vec hw(2);
    hw << hx, hp;
    return PhaseRegion::box(pt(cx, 0), hw);
}

}  // namespace

TEST_CASE("harmonic flow returns to the antipode after half a period") {
    const ClassicalTrajectory t = integrate_flow(harmonic, pt(1, 0), pi, 1e-3);
    CHECK(std::abs(t.points.back().xi(0) + 1.0) < 1e-6);
    CHECK(std::abs(t.points.back().pi(0)) < 1e-6);
    CHECK(t.symplectic);
    // exact orbit (cos t, -sin t) at every sample
    double err = 0;
    for (std::size_t k = 0; k < t.size(); ++k)
        err = std::max(err, std::hypot(t.points[k].xi(0) - std::cos(t.times[k]), t.points[k].pi(0) + std::sin(t.times[k])));
    CHECK(err < 1e-6);
}

TEST_CASE("free flow is a straight line") {
    const ClassicalTrajectory t = integrate_flow(poly(2, {0}), pt(0, 4), 3.0, 1e-3);
    CHECK(t.points.back().xi(0) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(t.points.back().pi(0) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("quartic flow converges under step refinement") {
    const ClassicalTrajectory a = integrate_flow(quartic, pt(1, 0), 1.0, 1e-3);
    const ClassicalTrajectory b = integrate_flow(quartic, pt(1, 0), 1.0, 1e-5);
    CHECK((a.points.back().stacked() - b.points.back().stacked()).norm() < 1e-6);
    CHECK(a.energy_drift < 1e-6);
}

TEST_CASE("vector potential uses RK4 and conserves energy") {
    // uniform magnetic field: A = (0, x1); circular cyclotron orbits
    Polynomial a1(2), a2(2);
    a2.add_term({1, 0, 0}, 1.0);
    HamiltonianSpec h(1.0, PotentialModel::zero(2), {PotentialModel::polynomial(a1), PotentialModel::polynomial(a2)});
    h.classical_only = true;
    Vec xi(2), p(2);
    xi << 0, 0;
    p << 1, 0;
    const ClassicalTrajectory t = integrate_flow(h, {xi, p}, 2 * pi, 1e-3);
    CHECK_FALSE(t.symplectic);
    CHECK(t.energy_drift < 1e-9);
    // cyclotron period 2 pi (m = 1, unit field)
    CHECK((t.points.back().xi - xi).norm() < 1e-8);
}

TEST_CASE("interpolated trajectory matches the exact orbit between samples") {
    const ClassicalTrajectory t = integrate_flow(harmonic, pt(1, 0), 1.0, 1e-2);
    const PhasePoint a = t.at(0.333);
    // Verlet at dt = 1e-2 is good to a few 1e-6 here
    CHECK(std::abs(a.xi(0) - std::cos(0.333)) < 1e-5);
    CHECK(std::abs(a.pi(0) + std::sin(0.333)) < 1e-5);
    CHECK_THROWS_AS(t.index_of(0.005), RangeError);
}

TEST_CASE("transit time of a free particle through a box is chord over speed") {
    const double dt = 1e-3;
    const ClassicalTrajectory t = integrate_flow(poly(1, {0}), pt(-3, 2), 4.0, dt);
    const PhaseRegion r = box(0, 1, std::numeric_limits<double>::infinity());
    CHECK(std::abs(classical_transit_time(t, r, {0, 4}) - 1.0) <= dt);
}

TEST_CASE("bound harmonic orbit stays in a ball for the whole window") {
    const double dt = 1e-3;
    const ClassicalTrajectory t = integrate_flow(harmonic, pt(1, 0), 2 * pi, dt);
    const PhaseRegion ball = PhaseRegion::ball(pt(0, 0), 2.0);
    CHECK(std::abs(classical_transit_time(t, ball, {0, 2 * pi}) - 2 * pi) <= dt);
    CHECK(classical_average_stay(t, ball, {0, 2 * pi}) == doctest::Approx(1.0));
}

TEST_CASE("quartic transit time agrees with a fine-step indicator sum") {
    const double dt = 1e-3;
    const PhaseRegion r = box(0.5, 0.4, 0.5);
    const ClassicalTrajectory coarse = integrate_flow(quartic, pt(1, 0), 10.0, dt);
    const double fine_dt = 1e-5;
    const ClassicalTrajectory fine = integrate_flow(quartic, pt(1, 0), 10.0, fine_dt);
    double brute = 0;
    for (std::size_t k = 0; k + 1 < fine.size(); ++k)
        if (r.contains(fine.points[k])) brute += fine_dt;
    const double tau = classical_transit_time(coarse, r, {0, 10});
    CHECK(tau > 0.1);
    CHECK(std::abs(tau - brute) < 2 * dt);
}

TEST_CASE("average stay over half a period is one half") {
    const double dt = 1e-3;
    const ClassicalTrajectory t = integrate_flow(harmonic, pt(1, 0), 2 * pi, dt);
    // x = cos t is positive for half the period
    const PhaseRegion r = box(1.5, 1.5, std::numeric_limits<double>::infinity());
    CHECK(std::abs(classical_average_stay(t, r, {0, 2 * pi}) - 0.5) <= dt);
}

TEST_CASE("free average stay decreases with the window") {
    const ClassicalTrajectory t = integrate_flow(poly(1, {0}), pt(0, 1), 160.0, 1e-2);
    const PhaseRegion ball = PhaseRegion::ball(pt(0, 0), 2.0);
    double prev = 2.0;
    for (double T : {10.0, 40.0, 160.0}) {
        const double mu = classical_average_stay(t, ball, {0, T});
        CHECK(mu < prev);
        prev = mu;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("classification of simple orbits") {
    const std::vector<double> radii{1, 2, 5, 10};
    CHECK(classify_classical(harmonic, pt(3, 1), 50, radii).label == ClassicalLabel::bound);
    CHECK(classify_classical(poly(1, {0}), pt(0, 1), 50, radii).label == ClassicalLabel::scattering);
}

TEST_CASE("energy threshold of an inverted quartic barrier") {
    // V = x^2/2 - x^4/20 has barrier height V(sqrt 5) = 1.25
    const HamiltonianSpec h = poly(1, {0, 0, 0.5, 0, -0.05});
    const std::vector<double> radii{1, 2, 5, 10};
    const double above = std::sqrt(2 * 1.3), below = std::sqrt(2 * 1.2);
    CHECK(classify_classical(h, pt(0, above), 60, radii).label == ClassicalLabel::scattering);
    CHECK(classify_classical(h, pt(0, below), 60, radii).label == ClassicalLabel::bound);
}

TEST_CASE("trajectory CSV has one row per sample") {
    const ClassicalTrajectory t = integrate_flow(harmonic, pt(1, 0), 0.1, 1e-2);
    std::ostringstream os;
    write_trajectory_csv(t, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,xi1,pi1,energy");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == static_cast<int>(t.size()));
}

TEST_CASE("bad flow arguments") {
    CHECK_THROWS(integrate_flow(harmonic, pt(1, 0), 1.0, 0.0));
    CHECK_THROWS(integrate_flow(harmonic, pt(1, 0), -1.0, 1e-3));
    CHECK_THROWS(classify_classical(harmonic, pt(1, 0), 1.0, {}));
}
