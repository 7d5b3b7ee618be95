#include "qcr/reduction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace qcr {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Projection {
    double inv_norm = inf;
    bool divergent = true;
    double one_minus = 0.0;  // ||(1 - Omega) psi||, unresolved mass counted with weight 1
};

Projection project_state(const ComparatorSpec& comp, const GridWavefunction& psi, const MagnitudeOptions& mopt) {
    const NumberState st = project(comp, psi);
    const double residual = psi.norm_squared() - st.norm_squared();
    Projection out;
    double om = std::max(residual, 0.0);
    for (Eigen::Index i = 0; i < st.c.size(); ++i) {
        const double w = 1.0 - std::exp(-comp.s * st.quanta(i));
        om += std::norm(st.c(i)) * w * w;
    }
    out.one_minus = std::sqrt(om);
    if (residual > mopt.residual_tolerance) return out;
    const MagnitudeResult m = within_magnitude(comp, inf, st, residual, mopt);
    out.inv_norm = m.inv_norm;
    out.divergent = m.divergent;
    return out;
}

// Largest finite measurement; divergent samples fail membership at any E.
double max_inv_norm(const RunReport& r) {
    double m = 0.0;
    for (double v : r.inv_norm_U)
        if (std::isfinite(v)) m = std::max(m, v);
    for (double v : r.inv_norm_W)
        if (std::isfinite(v)) m = std::max(m, v);
    return m;
}

void finalize_run(RunReport& r, const ComparatorScalars& sc, double E) {
    const std::size_t n = r.times.size();
    r.member_U.assign(n, 0);
    r.member_W.assign(n, 0);
    r.bound_general.assign(n, 0.0);
    r.bound_closed.assign(n, 0.0);
    r.bound_duhamel.assign(n, 0.0);
    r.hypotheses_hold = true;
    r.domination_violations = 0;
    for (std::size_t k = 0; k < n; ++k) {
        r.member_U[k] = std::isfinite(r.inv_norm_U[k]) && r.inv_norm_U[k] <= E;
        r.member_W[k] = std::isfinite(r.inv_norm_W[k]) && r.inv_norm_W[k] <= E;
        if (!r.member_U[k] || !r.member_W[k]) r.hypotheses_hold = false;
        const TheoremBound b = theorem_bound(sc, E, r.delta1[k], r.delta2[k]);
        r.bound_general[k] = b.general;
        r.bound_closed[k] = b.closed;
        r.bound_duhamel[k] = theorem_bound(sc, E, r.duhamel[k], r.delta2[k]).closed;
        if (r.error_max[k] > std::min(b.general, b.closed) + 1e-8) ++r.domination_violations;
    }
    r.bound_dominates = r.domination_violations == 0;
}

bool within_epsilon(const RunReport& r, const Vec& eps) {
    for (const Vec& e : r.error)
        if (((e.array() - eps.array()) >= 0.0).any()) return false;
    return true;
}

// The criterion of identity decides; membership only matters when the caller asks
// for the reduction to be certified by the bound as well.
Verdict decide(const std::vector<RunReport>& runs, const Vec& eps, bool require_hypotheses) {
    for (const auto& r : runs)
        if (!within_epsilon(r, eps)) return Verdict::not_reduced;
    if (require_hypotheses)
        for (const auto& r : runs)
            if (!r.hypotheses_hold) return Verdict::hypothesis_failed;
    return Verdict::reduced;
}

}  // namespace

// ------------------------------------------------------------------ remainders

double remainder_norm(const HamiltonianSpec& spec, const GaussianPacket& packet) {
    spec.require_quantum();
    if (!spec.potential.is_polynomial()) throw Unsupported("remainder_norm: needs a polynomial potential");
    if (spec.potential.is_quadratic()) return 0.0;
    const Polynomial r = spec.potential.remainder_polynomial(packet.alpha.xi);
    if (r.is_zero()) return 0.0;
    const Polynomial r2 = r * r;
    const Mat cov = packet.position_covariance();
    double acc = 0.0;
    for (const auto& [p, c] : r2.terms()) acc += c * gaussian_moment(p, cov);
    return std::sqrt(std::max(acc, 0.0) * packet.closed_form_norm_squared());
}

double remainder_norm_grid(const HamiltonianSpec& spec, const GaussianPacket& packet, const GridSpec& grid) {
    spec.require_quantum();
    if (!spec.potential.is_polynomial()) throw Unsupported("remainder_norm_grid: needs a polynomial potential");
    const Polynomial r = spec.potential.remainder_polynomial(packet.alpha.xi);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Vec x = grid.point(i);
        const double v = r(x - packet.alpha.xi);
        acc += v * v * std::norm(packet(x));
    }
    return std::sqrt(acc * grid.cell_volume());
}

std::vector<double> duhamel_curve(const HamiltonianSpec& spec, const PacketSeries& series) {
    const std::size_t n = series.times.size();
    std::vector<double> out(n, 0.0);
    if (n == 0 || spec.potential.is_quadratic()) return out;
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = remainder_norm(spec, series.packets[k]);
    for (std::size_t k = 1; k < n; ++k)
        out[k] = out[k - 1] + 0.5 * (series.times[k] - series.times[k - 1]) * (f[k] + f[k - 1]);
    return out;
}

double duhamel_bound(const HamiltonianSpec& spec, const PacketSeries& series, double t) {
    auto it = std::lower_bound(series.times.begin(), series.times.end(), t - 1e-9);
    if (it == series.times.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, std::abs(t)))
        throw RangeError("duhamel_bound: no packet sample at requested time");
    const std::size_t k = static_cast<std::size_t>(it - series.times.begin());
    PacketSeries head;
    head.times.assign(series.times.begin(), series.times.begin() + k + 1);
    head.packets.assign(series.packets.begin(), series.packets.begin() + k + 1);
    return duhamel_curve(spec, head).back();
}

std::vector<Vec> measured_error(const GridRun& run, const ClassicalTrajectory& traj) {
    std::vector<Vec> out;
    out.reserve(run.states.size());
    for (std::size_t k = 0; k < run.states.size(); ++k) {
        const Vec a = traj.points[traj.index_of(run.times[k])].stacked();
        out.push_back((a - expectation_a(run.states[k])).cwiseAbs());
    }
    return out;
}

TheoremBound theorem_bound(const ComparatorScalars& sc, double E, double delta1, double delta2) {
    if (!(E > 0.0)) throw InvalidArgument("theorem_bound: E must be positive");
    TheoremBound b;
    b.omega = sc.aomega_normalized;
    b.m1 = 2.0 * 1.0 + (E + 1.0) * sc.one_minus_norm;
    b.m2 = 2.0 * (E + 1.0);
    b.general = b.omega * (b.m1 * delta1 + b.m2 * delta2);
    b.closed = sc.prefactor_closed * ((E + 3.0) * delta1 + 2.0 * (E + 1.0) * delta2);
    return b;
}

// ------------------------------------------------------------------ problem

void ReductionProblem::validate() const {
    spec.validate();
    spec.require_quantum();
    grid.validate();
    comparator.validate();
    const int n = spec.dimension;
    if (alpha0.dim() != n) throw InvalidArgument("ReductionProblem: alpha0 dimension mismatch");
    if (grid.n != n || comparator.n != n) throw InvalidArgument("ReductionProblem: grid/comparator dimension mismatch");
    if (!(T > 0.0) || !(dt > 0.0)) throw InvalidArgument("ReductionProblem: need T > 0 and dt > 0");
    if (sample_stride < 1) throw InvalidArgument("ReductionProblem: sample_stride must be >= 1");
    if (epsilon.size() != 2 * n || (epsilon.array() <= 0.0).any())
        throw InvalidArgument("ReductionProblem: epsilon must hold 2n positive entries");
    if (M0.rows() != n || M0.cols() != n) throw InvalidArgument("ReductionProblem: M0 dimension mismatch");
    if (E && !(*E > 0.0)) throw InvalidArgument("ReductionProblem: E must be positive");
    if (lattice < 1) throw InvalidArgument("ReductionProblem: lattice must be >= 1");
    const double ratio = T / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw InvalidArgument("ReductionProblem: T must be an integer multiple of dt");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::reduced: return "reduced";
        case Verdict::not_reduced: return "not-reduced";
        case Verdict::hypothesis_failed: return "hypothesis-failed";
    }
    return "not-reduced";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "reduced") return Verdict::reduced;
    if (s == "not-reduced") return Verdict::not_reduced;
    if (s == "hypothesis-failed") return Verdict::hypothesis_failed;
    throw InvalidArgument("unknown verdict '" + s + "'");
}

RunReport run_pipeline(const ReductionProblem& problem, const PhasePoint& alpha0) {
    problem.validate();
    const HamiltonianSpec& spec = problem.spec;
    const ClassicalTrajectory traj = integrate_flow(spec, alpha0, problem.T, problem.dt);
    const GaussianPacket packet0 = coherent_packet(alpha0, problem.M0);
    const PacketSeries series = evolve_packet(spec, traj, packet0, problem.dt);
    const std::vector<double> duh = duhamel_curve(spec, series);
    const GridWavefunction psi0 = sample_on_grid(packet0, problem.grid);

    RunReport r;
    r.alpha0 = alpha0;
    r.energy_drift = traj.energy_drift;

    PropagateOptions opt;
    opt.stride = problem.sample_stride;
    opt.keep_states = false;
    auto observe = [&](double t, const GridWavefunction& psi) {
        const std::size_t k = traj.index_of(t);
        const Vec a = traj.points[k].stacked();
        const Vec err = (a - expectation_a(psi)).cwiseAbs();
        const GridWavefunction w = sample_on_grid(series.packets[k], problem.grid);
        const Projection pu = project_state(problem.comparator, psi, problem.magnitude);
        const Projection pw = project_state(problem.comparator, w, problem.magnitude);
        r.times.push_back(t);
        r.error.push_back(err);
        r.error_max.push_back(err.maxCoeff());
        r.delta1.push_back(distance(w, psi));
        r.duhamel.push_back(duh[k]);
        r.delta2.push_back(pw.one_minus);
        r.inv_norm_U.push_back(pu.inv_norm);
        r.inv_norm_W.push_back(pw.inv_norm);
    };
    const GridRun run = propagate(spec, psi0, problem.T, problem.dt, opt, observe);
    r.max_boundary_mass = run.max_boundary_mass;
    r.max_error = *std::max_element(r.error_max.begin(), r.error_max.end());

    const ComparatorScalars sc = comparator_scalars(problem.comparator);
    const double E = problem.E ? *problem.E : std::max(problem.E_factor * max_inv_norm(r), 1.0);
    finalize_run(r, sc, E);
    return r;
}

std::vector<PhasePoint> sample_region(const PhaseRegion& region, int lattice) {
    if (lattice < 1) throw InvalidArgument("sample_region: lattice must be >= 1");
    const int n = region.center.dim();
    const int dim = 2 * n;
    Vec half(dim);
    if (region.kind == PhaseRegion::Kind::ball) {
        half.setConstant(region.radius / std::sqrt(static_cast<double>(dim)));
    } else {
        half = region.half_widths;
        if (!half.allFinite()) throw InvalidArgument("sample_region: cannot sample an unbounded box");
    }
    const Vec c = region.center.stacked();
    std::vector<PhasePoint> out;
    long total = 1;
    for (int d = 0; d < dim; ++d) total *= lattice;
    for (long idx = 0; idx < total; ++idx) {
        Vec p = c;
        long rem = idx;
        for (int d = 0; d < dim; ++d) {
            const int j = static_cast<int>(rem % lattice);
            rem /= lattice;
            const double u = lattice == 1 ? 0.0 : -1.0 + 2.0 * j / (lattice - 1);
            p(d) += u * half(d);
        }
        out.push_back(PhasePoint::from_stacked(p));
    }
    return out;
}

int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("REDUCE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) return std::min(cap, hw);
    }
    return hw;
}

ReductionReport verdict(const ReductionProblem& problem) {
    problem.validate();
    ReductionReport rep;
    std::vector<PhasePoint> starts{problem.alpha0};
    if (problem.omega0) {
        starts = sample_region(*problem.omega0, problem.lattice);
        rep.sampled_region = true;
    }

    // Runs are independent; E is fixed afterwards from all of them.
    ReductionProblem base = problem;
    if (!base.E) base.E = 1.0;
    rep.runs.resize(starts.size());
    rep.threads = std::min<int>(worker_count(), static_cast<int>(starts.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto work = [&] {
        for (std::size_t i = next++; i < starts.size(); i = next++) {
            try {
                rep.runs[i] = run_pipeline(base, starts[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < rep.threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    rep.scalars = comparator_scalars(problem.comparator);
    rep.E_auto = !problem.E.has_value();
    if (problem.E) {
        rep.E = *problem.E;
    } else {
        double m = 0.0;
        for (const auto& r : rep.runs) m = std::max(m, max_inv_norm(r));
        rep.E = std::max(problem.E_factor * m, 1.0);
    }
    for (auto& r : rep.runs) finalize_run(r, rep.scalars, rep.E);
    rep.constants = theorem_bound(rep.scalars, rep.E, 0.0, 0.0);

    rep.epsilon = problem.epsilon;
    rep.max_error = 0.0;
    for (const auto& r : rep.runs) rep.max_error = std::max(rep.max_error, r.max_error);
    rep.require_hypotheses = problem.require_hypotheses;
    rep.verdict = decide(rep.runs, problem.epsilon, problem.require_hypotheses);

    rep.grid = problem.grid;
    rep.dt = problem.dt;
    rep.sample_dt = problem.sample_dt();
    rep.comparator_N = problem.comparator.N;
    rep.comparator_s = problem.comparator.s;
    rep.amplitude_floor = problem.magnitude.amplitude_floor;
    rep.stepper = problem.spec.separable() ? "verlet+strang" : "rk4+strang";
    return rep;
}

Verdict reverdict(const ReductionReport& report, const Vec& epsilon) {
    return decide(report.runs, epsilon, report.require_hypotheses);
}

// ------------------------------------------------------------------ Ehrenfest

Vec expectation_grad_V(const HamiltonianSpec& spec, const GridWavefunction& psi) {
    const GridSpec& g = psi.grid;
    Vec out = Vec::Zero(g.n);
    const double w = g.cell_volume() / psi.norm_squared();
    for (Eigen::Index i = 0; i < psi.amp.size(); ++i) {
        const double p = std::norm(psi.amp(i));
        if (p == 0.0) continue;
        out += p * w * spec.potential.gradient(g.point(i));
    }
    return out;
}

EhrenfestCurves ehrenfest_residuals(const GridRun& run, const HamiltonianSpec& spec) {
    const std::size_t n = run.states.size();
    if (n < 3) throw InvalidArgument("ehrenfest_residuals: need at least three states");
    const double h = run.times[1] - run.times[0];
    for (std::size_t k = 1; k < n; ++k)
        if (std::abs(run.times[k] - run.times[k - 1] - h) > 1e-9 * h)
            throw InvalidArgument("ehrenfest_residuals: states must be equally spaced");
    const int dim = spec.dimension;
    std::vector<Vec> a(n), gv(n);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = expectation_a(run.states[k]);
        gv[k] = expectation_grad_V(spec, run.states[k]);
    }
    EhrenfestCurves out;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const Vec dp = (a[k + 1].tail(dim) - a[k - 1].tail(dim)) / (2.0 * h);
        const double id = (dp + gv[k]).cwiseAbs().maxCoeff();
        const double gap = (gv[k] - spec.potential.gradient(a[k].head(dim))).cwiseAbs().maxCoeff();
        out.times.push_back(run.times[k]);
        out.identity_residual.push_back(id);
        out.classicality_gap.push_back(gap);
        out.max_identity_residual = std::max(out.max_identity_residual, id);
        out.max_classicality_gap = std::max(out.max_classicality_gap, gap);
    }
    return out;
}

EhrenfestCurves ehrenfest_residuals(const HamiltonianSpec& spec, const GridWavefunction& psi0, double T, double dt) {
    const GridRun run = propagate(spec, psi0, T, dt);
    return ehrenfest_residuals(run, spec);
}

// ------------------------------------------------------------------ squeeze sweep

SqueezeTable squeeze_sweep(const ReductionProblem& problem, const std::vector<double>& dilations) {
    problem.validate();
    if (dilations.empty()) throw InvalidArgument("squeeze_sweep: empty dilation list");
    const int n = problem.spec.dimension;
    const HamiltonianSpec& spec = problem.spec;
    const ClassicalTrajectory traj = integrate_flow(spec, problem.alpha0, problem.T, problem.dt);

    struct Raw {
        std::vector<double> duh, delta2;
        double inv = 0.0;
    };
    std::vector<Raw> raw(dilations.size());
    for (std::size_t i = 0; i < dilations.size(); ++i) {
        const double d = dilations[i];
        if (!(d > 0.0)) throw InvalidArgument("squeeze_sweep: dilations must be positive");
        const PacketSeries series =
            evolve_packet(spec, traj, coherent_packet(problem.alpha0, CMat::Identity(n, n) * d), problem.dt);
        const std::vector<double> duh = duhamel_curve(spec, series);
        for (std::size_t k = 0; k < series.times.size(); k += problem.sample_stride) {
            const GridWavefunction w = sample_on_grid(series.packets[k], problem.grid);
            const Projection pw = project_state(problem.comparator, w, problem.magnitude);
            raw[i].duh.push_back(duh[k]);
            raw[i].delta2.push_back(pw.one_minus);
            raw[i].inv = std::max(raw[i].inv, pw.inv_norm);
        }
        raw[i].duh.push_back(duh.back());
        raw[i].delta2.push_back(raw[i].delta2.back());
    }

    SqueezeTable table;
    if (problem.E) {
        table.E = *problem.E;
    } else {
        double m = 0.0;
        for (const auto& r : raw) m = std::max(m, r.inv);
        table.E = std::isfinite(m) ? std::max(problem.E_factor * m, 1.0) : inf;
    }
    if (!std::isfinite(table.E))
        throw DomainError("squeeze_sweep: a swept packet is outside Ran(Omega); lower s or narrow the sweep");
    const ComparatorScalars sc = comparator_scalars(problem.comparator);
    for (std::size_t i = 0; i < dilations.size(); ++i) {
        SqueezeRow row;
        row.d = dilations[i];
        row.duhamel_term = raw[i].duh.back();
        for (std::size_t k = 0; k < raw[i].duh.size(); ++k) {
            row.comparator_term = std::max(row.comparator_term, raw[i].delta2[k]);
            row.total_bound =
                std::max(row.total_bound, theorem_bound(sc, table.E, raw[i].duh[k], raw[i].delta2[k]).closed);
        }
        table.rows.push_back(row);
    }
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        if (table.rows[i].total_bound < table.rows[table.argmin].total_bound) table.argmin = i;
    table.interior_minimum = table.rows.size() >= 3 && table.argmin > 0 && table.argmin + 1 < table.rows.size();
    return table;
}

}  // namespace qcr
