// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Every tolerance is pinned below; nothing is read from the environment.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qcr/runner.hpp"

using namespace qcr;

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0, 1);

namespace tol {
constexpr double harmonic_error = 1e-6;
constexpr double harmonic_delta1 = 1e-6;
constexpr double harmonic_seconds = 30.0;
constexpr double duhamel_rate = 0.022822;
constexpr double duhamel_slack = 1e-4;
constexpr double prefactor = 1e-15;
constexpr double audit_scalar = 1e-10;
constexpr double audit_diag = 1e-8;
constexpr double audit_seconds = 5.0;
constexpr double free_width = 1e-8;
constexpr double harmonic_width = 1e-10;
constexpr double width_invariants = 1e-10;
constexpr double weyl_composition = 1e-9;
constexpr double weyl_shift = 1e-10;
constexpr double ergodic = 1e-3;
constexpr double ergodic_slope = 0.2;
constexpr double recurrence_eps_two = 1e-3;
constexpr double recurrence_eps_three = 0.1;
constexpr double recurrence_T_max = 1e5;
constexpr double round_trip = 1e-14;
constexpr double ehrenfest_identity = 5e-5;
constexpr double ehrenfest_gap = 1e-3;
constexpr double localizer = 1e-12;
}  // namespace tol

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s %2d  %s  [%s]\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

// Runs a criterion body, turning exceptions into a failure line.
void criterion(int id, const std::string& what, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [pass, detail] = body();
        report(id, pass, what, detail);
    } catch (const std::exception& e) {
        report(id, false, what, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PhasePoint pt(double x, double p) { return {Vec::Constant(1, x), Vec::Constant(1, p)}; }
HamiltonianSpec poly(double m, std::vector<double> c) { return {m, PotentialModel::polynomial_1d(c)}; }

ReductionProblem corpus(const std::string& mode, const std::string& preset) {
    return parse_config({{"mode", mode}, {"preset", preset}}).problem;
}

double max_of(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, x);
    return m;
}

GridWavefunction vacuum_on(const GridSpec& g) {
    return GridWavefunction::from_function(g, [](const Vec& x) { return cplx(std::pow(pi, -0.25) * std::exp(-0.5 * x.squaredNorm())); });
}

}  // namespace

int main() {
    criterion(1, "quadratic exactness over one period", [] {
        const auto t0 = std::chrono::steady_clock::now();
        ReductionProblem p;
        p.spec = poly(1, {0, 0, 0.5});
        p.alpha0 = pt(1, 0);
        p.dt = 1e-3;
        p.T = 6.284;  // first multiple of dt past 2 pi
        p.sample_stride = 1;
        p.epsilon = Vec::Constant(2, 1e-5);
        p.grid = GridSpec(1, 1024, 20.0);
        p.M0 = CMat::Identity(1, 1);
        const RunReport r = run_pipeline(p, p.alpha0);
        const double secs = seconds_since(t0);
        const double d1 = max_of(r.delta1);
        const bool ok = r.max_error <= tol::harmonic_error && d1 <= tol::harmonic_delta1 && secs < tol::harmonic_seconds;
        return std::pair{ok, fmt("max |a - <a>| = %.2e, max ||(W-U)psi|| = %.2e, %.1f s", r.max_error, d1, secs)};
    });

    criterion(2, "Duhamel bound dominates ||(W-U)psi|| for the cubic corpus", [] {
        ReductionProblem p = corpus("reduce", "cubic-perturbed");
        p.sample_stride = 1;
        const RunReport r = run_pipeline(p, p.alpha0);
        bool dominated = true, linear = true;
        double worst_fit = 0;
        for (std::size_t k = 0; k < r.times.size(); ++k) {
            dominated = dominated && r.delta1[k] <= r.duhamel[k];
            worst_fit = std::max(worst_fit, std::abs(r.duhamel[k] - tol::duhamel_rate * r.times[k]));
        }
        linear = worst_fit <= tol::duhamel_slack;
        return std::pair{dominated && linear,
                         fmt("delta1(1) = %.5f <= duhamel(1) = %.6f at all %zu samples: %s; |duhamel - 0.022822 t| <= %.1e",
                             r.delta1.back(), r.duhamel.back(), r.times.size(), dominated ? "yes" : "no", worst_fit)};
    });

    criterion(3, "theorem bound dominates with hypotheses satisfied (cubic corpus, s = 1, E auto)", [] {
        const ReductionProblem p = corpus("reduce", "cubic-perturbed");
        const ReductionReport rep = verdict(p);
        const RunReport& r = rep.runs.front();
        bool dominates = true, members = true;
        double first_out = -1;
        for (std::size_t k = 0; k < r.times.size(); ++k) {
            dominates = dominates && r.bound_closed[k] >= r.error_max[k];
            const bool m = r.member_U[k] && r.member_W[k];
            if (!m && first_out < 0) first_out = r.times[k];
            members = members && m;
        }
        const double pref = std::abs(rep.scalars.prefactor_closed - 1.0);
        const bool ok = dominates && members && pref <= tol::prefactor && p.comparator.s == 1.0;
        return std::pair{ok, fmt("bound >= error at every sample: %s (%.3f vs %.3f at T); membership all true: %s%s; "
                                 "prefactor - 1 = %.1e; E = %.3f",
                                 dominates ? "yes" : "no", r.bound_closed.back(), r.error_max.back(),
                                 members ? "yes" : "no",
                                 members ? "" : fmt(" (U(t)psi leaves Ran(Omega) from t = %.2f)", first_out).c_str(),
                                 pref, rep.E)};
    });

    criterion(4, "comparator audit at s = ln 2", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const ComparatorSpec c(std::log(2.0));
        const ComparatorScalars s = comparator_scalars(c);
        const GridSpec g(1, 1024, 20.0);
        double worst = 0;
        // complex modulus |alpha|^2 = (xi^2 + pi^2)/2 up to 9, several directions
        for (double r : {0.0, 1.0, 2.0, 3.0})
            for (double th : {0.0, 0.7, 1.9, 3.5}) {
                const double rho = std::sqrt(2.0) * r;
                const CoherentElements e = coherent_matrix_elements(c, pt(rho * std::cos(th), rho * std::sin(th)), g);
                const double oracle = 0.5 * std::exp(-0.5 * r * r);
                worst = std::max({worst, std::abs(e.measured_diag - oracle), std::abs(e.diag - oracle)});
            }
        const ComparatorScalars s1 = comparator_scalars(ComparatorSpec(1.0));
        const double bound = std::pow(1 - std::exp(-1.0), 2);
        const double secs = seconds_since(t0);
        const bool ok = std::abs(s.norm - 0.5) <= tol::audit_scalar && std::abs(s.trace - 1.0) <= tol::audit_scalar &&
                        worst <= tol::audit_diag && s1.aomega_sq <= bound && secs < tol::audit_seconds;
        return std::pair{ok, fmt("norm = %.12f, trace = %.12f, coherent diag error %.1e, ||q Omega_1||^2 = %.5f <= %.5f, %.2f s",
                                 s.norm, s.trace, worst, s1.aomega_sq, bound, secs)};
    });

    criterion(5, "Riccati width evolution", [] {
        const CMat one = CMat::Identity(1, 1);
        const HamiltonianSpec free = poly(1, {0});
        const auto fa = evolve_AB(free, integrate_flow(free, pt(0, 0), 1.0, 1e-3), one, one, 1e-3);
        const double free_err = std::abs(fa.back().M(0, 0) - 1.0 / (1.0 + I));
        const HamiltonianSpec osc = poly(1, {0, 0, 0.5});
        const ClassicalTrajectory traj = integrate_flow(osc, pt(1, 0), 2 * pi, 1e-3);
        const GaussianPacket p0 = coherent_packet(pt(1, 0), one);
        const PacketSeries ser = evolve_packet(osc, traj, p0, 1e-3);
        double osc_err = 0;
        bool invariants = true;
        for (const auto& g : ser.packets) {
            osc_err = std::max(osc_err, std::abs(g.M(0, 0) - 1.0));
            try {
                g.check_invariants(tol::width_invariants);
            } catch (const Error&) {
                invariants = false;
            }
        }
        // a full-rank two-dimensional case exercises symmetry off the diagonal
        Polynomial v(2);
        v.add_term({2, 0, 0}, 0.5);
        v.add_term({0, 2, 0}, 1.0);
        v.add_term({1, 1, 0}, 0.3);
        v.add_term({3, 0, 0}, 0.05);
        const HamiltonianSpec h2(1.0, PotentialModel::polynomial(v));
        CMat M0(2, 2);
        M0 << cplx(1.2, 0.1), cplx(0.2, -0.1), cplx(0.2, -0.1), cplx(0.9, 0.3);
        const PhasePoint a2(Vec::Constant(2, 0.5), Vec::Constant(2, -0.2));
        const PacketSeries s2 = evolve_packet(h2, integrate_flow(h2, a2, 3.0, 1e-3), coherent_packet(a2, M0), 1e-3);
        for (const auto& g : s2.packets) {
            try {
                g.check_invariants(tol::width_invariants);
            } catch (const Error&) {
                invariants = false;
            }
        }
        const bool ok = free_err <= tol::free_width && osc_err <= tol::harmonic_width && invariants;
        return std::pair{ok, fmt("|M(1) - 1/(1+i)| = %.1e, max |M - 1| over a period = %.1e, Re M > 0 and M = M^T at every step: %s",
                                 free_err, osc_err, invariants ? "yes" : "no")};
    });

    criterion(6, "Weyl composition law and displacement of expectations", [] {
        const GridSpec g(1, 1024, 20.0);
        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        double comp = 0, shift = 0;
        for (int trial = 0; trial < 50; ++trial) {
            const PhasePoint a = pt(u(rng), u(rng)), b = pt(u(rng), u(rng)), c = pt(u(rng), u(rng));
            const GridWavefunction psi = sample_on_grid(coherent_packet(c, CMat::Constant(1, 1, cplx(1.0 + 0.3 * u(rng), 0.2 * u(rng)))), g);
            const GridWavefunction lhs = weyl_displace(weyl_displace(psi, b), a);
            const GridWavefunction rhs = std::exp(-I * symplectic_form(a, b) / 2.0) * weyl_displace(psi, a + b);
            comp = std::max(comp, distance(lhs, rhs));
            const Vec before = expectation_a(psi), after = expectation_a(weyl_displace(psi, a));
            shift = std::max(shift, (after - before - a.stacked()).cwiseAbs().maxCoeff());
        }
        return std::pair{comp <= tol::weyl_composition && shift <= tol::weyl_shift,
                         fmt("50 random triples: composition error %.1e, expectation shift error %.1e", comp, shift)};
    });

    criterion(7, "ergodic time average of random 8-level systems", [] {
        double worst = 0, slope_dev = 0, mean_slope = 0;
        for (int seed = 1; seed <= 20; ++seed) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> n;
            auto herm = [&] {
                CMat a(8, 8);
                for (int i = 0; i < 8; ++i)
                    for (int j = 0; j < 8; ++j) a(i, j) = cplx(n(rng), n(rng));
                return CMat((a + a.adjoint()) / 2.0);
            };
            const CMat H = herm(), F = herm();
            CVec psi(8);
            for (int i = 0; i < 8; ++i) psi(i) = cplx(n(rng), n(rng));
            psi.normalize();
            const FiniteEvolution e(H);
            // Tr[F rho] from an independent eigendecomposition
            Eigen::SelfAdjointEigenSolver<CMat> es(H);
            double oracle = 0;
            for (int k = 0; k < 8; ++k) {
                const CVec v = es.eigenvectors().col(k);
                oracle += std::norm(v.dot(psi)) * v.dot(F * v).real();
            }
            const ErgodicResult r = ergodic_average(e, psi, F, 1e4);
            worst = std::max(worst, std::abs(r.measured - oracle));
            const ErgodicConvergence c = ergodic_convergence(e, psi, F, {100, 300, 1000, 3000, 10000});
            slope_dev = std::max(slope_dev, std::abs(c.slope + 1.0));
            mean_slope += c.slope / 20;
        }
        return std::pair{worst < tol::ergodic && slope_dev <= tol::ergodic_slope,
                         fmt("20 seeds: max |measured - Tr[F rho]| = %.1e, log-log slopes within %.3f of -1 (mean %.3f)",
                             worst, slope_dev, mean_slope)};
    });

    criterion(8, "recurrence times", [] {
        Vec d2(2), d3(3);
        d2 << 0, 1;
        d3 << 0, 1, std::sqrt(2.0);
        const FiniteEvolution two(d2.cast<cplx>().asDiagonal().toDenseMatrix());
        const FiniteEvolution three(d3.cast<cplx>().asDiagonal().toDenseMatrix());
        const RecurrenceResult r2 = recurrence_time(two, CVec::Constant(2, 1 / std::sqrt(2.0)), tol::recurrence_eps_two, 1.0, 100.0);
        const RecurrenceResult r3 = recurrence_time(three, CVec::Constant(3, 1 / std::sqrt(3.0)), tol::recurrence_eps_three, 1.0, tol::recurrence_T_max);
        const bool ok = r2.found && std::abs(r2.T_eps - 2 * pi) <= r2.step && r3.found && r3.T_eps <= tol::recurrence_T_max;
        return std::pair{ok, fmt("two-level T_eps = %.6f (2 pi +- %.1e), three-level T_eps = %.2f (distance %.3f)",
                                 r2.T_eps, r2.step, r3.T_eps, r3.distance)};
    });

    criterion(9, "Hepp family: error decreases with lambda; scaling laws round-trip", [] {
        const ReductionProblem p = corpus("scale", "cubic-perturbed");
        const HeppTable t = hepp_experiment(p, {1.0, 0.25, 0.0625});
        double rt = 0;
        for (auto k : {QuantityKind::position, QuantityKind::momentum, QuantityKind::time, QuantityKind::mass,
                       QuantityKind::energy, QuantityKind::planck})
            for (double l : {1.0, 0.25, 0.0625, 7.3})
                for (double v : {1.0, -0.37, 42.0}) rt = std::max(rt, std::abs(scale_value(k, scale_value(k, v, l), 1 / l) - v) / std::abs(v));
        std::ostringstream errs;
        for (const auto& r : t.rows) errs << (errs.tellp() ? ", " : "") << fmt("%.4e", r.max_error);
        return std::pair{t.error_decreasing && rt <= tol::round_trip,
                         fmt("max error over lambda {1, 1/4, 1/16}: %s; round-trip error %.1e", errs.str().c_str(), rt)};
    });

    criterion(10, "squeeze sweep: Duhamel decreasing, interior minimum of the total bound", [] {
        const ReductionProblem p = corpus("squeeze", "cubic-perturbed");
        const SqueezeTable t = squeeze_sweep(p, {0.25, 0.5, 1.0, 2.0, 4.0});
        bool decreasing = true;
        for (std::size_t i = 1; i < t.rows.size(); ++i) decreasing = decreasing && t.rows[i].duhamel_term < t.rows[i - 1].duhamel_term;
        const bool interior = t.argmin > 0 && t.argmin + 1 < t.rows.size();
        return std::pair{decreasing && interior,
                         fmt("Duhamel %.4f -> %.4f strictly decreasing: %s; argmin d = %.2f (total %.4f vs ends %.4f, %.4f)",
                             t.rows.front().duhamel_term, t.rows.back().duhamel_term, decreasing ? "yes" : "no",
                             t.rows[t.argmin].d, t.rows[t.argmin].total_bound, t.rows.front().total_bound, t.rows.back().total_bound)};
    });

    criterion(11, "Ehrenfest identity on the corpus; quartic classicality gap", [] {
        double worst = 0;
        std::string where;
        for (const auto& name : preset_names()) {
            const ReductionProblem p = corpus("ehrenfest", name);
            const GridWavefunction psi0 = sample_on_grid(coherent_packet(p.alpha0, p.M0), p.grid);
            const EhrenfestCurves c = ehrenfest_residuals(p.spec, psi0, p.T, p.dt);
            if (c.max_identity_residual > worst) {
                worst = c.max_identity_residual;
                where = name;
            }
        }
        const GridSpec g(1, 1024, 20.0);
        const EhrenfestCurves q = ehrenfest_residuals(poly(1, {0, 0, 0, 0, 0.25}),
                                                      sample_on_grid(coherent_packet(pt(1, 0), CMat::Identity(1, 1)), g), 0.01, 1e-3);
        const double gap = q.classicality_gap.front();
        return std::pair{worst <= tol::ehrenfest_identity && std::abs(gap - 1.5) <= tol::ehrenfest_gap,
                         fmt("max identity residual %.1e (%s), quartic gap at <q> = 1: %.6f", worst, where.c_str(), gap)};
    });

    criterion(12, "localization functional and loss of compact support", [] {
        const GridSpec g(1, 1024, 20.0);
        const GridWavefunction v = vacuum_on(g), d = weyl_displace(v, pt(3, 0));
        const Localizer loc = construct_localizer({v, d});
        double worst = 0;
        for (const auto& psi : {v, d}) {
            double form = 0;
            for (int i = 0; i < g.N; ++i) form += loc.F(i) * std::norm(psi.amp(i)) * g.dx();
            worst = std::max(worst, form);
        }
        // packet cut to |x| <= 3, one Strang step of the oscillator
        GridWavefunction cut = v;
        for (int i = 0; i < g.N; ++i)
            if (std::abs(g.axis()(i)) > 3.0) cut.amp(i) = 0;
        cut = cut.normalized();
        const GridRun run = propagate(poly(1, {0, 0, 0.5}), cut, 1e-3, 1e-3);
        const double leaked = run.states.back().mass_outside_radius(3.0);
        return std::pair{worst <= 1.0 + tol::localizer && leaked > 0.0,
                         fmt("max <psi, F(Q) psi> = %.4f over {Gamma(0), U(3,0) Gamma(0)} (%zu levels); mass outside support after one step %.2e",
                             worst, loc.radii.size(), leaked)};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
