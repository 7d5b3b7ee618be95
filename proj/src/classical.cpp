#include "qcr/classical.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace qcr {

namespace {

PhasePoint verlet_step(const HamiltonianSpec& spec, const PhasePoint& a, double h) {
    Vec p = a.pi - 0.5 * h * spec.potential.gradient(a.xi);
    Vec x = a.xi + h * p / spec.mass;
    p -= 0.5 * h * spec.potential.gradient(x);
    return {std::move(x), std::move(p)};
}

PhasePoint rk4_step(const HamiltonianSpec& spec, const PhasePoint& a, double h) {
    const PhasePoint k1 = hamiltonian_field(spec, a);
    const PhasePoint k2 = hamiltonian_field(spec, a + (0.5 * h) * k1);
    const PhasePoint k3 = hamiltonian_field(spec, a + (0.5 * h) * k2);
    const PhasePoint k4 = hamiltonian_field(spec, a + h * k3);
    return a + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

ClassicalTrajectory integrate_flow(const HamiltonianSpec& spec, const PhasePoint& alpha0, double T, double dt,
                                   const FlowOptions& options) {
    spec.validate();
    if (!(T > 0.0) || !(dt > 0.0) || dt > T * (1.0 + 1e-12))
        throw InvalidArgument("integrate_flow: need T > 0, 0 < dt <= T");
    if (alpha0.dim() != spec.dimension) throw InvalidArgument("integrate_flow: dimension mismatch");
    if (!alpha0.finite()) throw DomainError("integrate_flow: non-finite initial point");

    const double ratio = T / dt;
    long steps = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
        steps = static_cast<long>(std::ceil(ratio));

    ClassicalTrajectory traj;
    traj.spec = spec;
    traj.dt = dt;
    traj.symplectic = spec.separable();
    traj.times.reserve(steps + 1);
    traj.points.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.points.push_back(alpha0);
    const double e0 = eval_h(spec, alpha0);

    PhasePoint a = alpha0;
    for (long k = 1; k <= steps; ++k) {
        const double t = (k == steps) ? T : k * dt;
        const double h = t - traj.times.back();
        a = traj.symplectic ? verlet_step(spec, a, h) : rk4_step(spec, a, h);
        if (!a.finite())
            throw DivergedError("integrate_flow: trajectory diverged", traj.times.back());
        traj.times.push_back(t);
        traj.points.push_back(a);
        traj.energy_drift = std::max(traj.energy_drift, std::abs(eval_h(spec, a) - e0));
        if (!std::isfinite(traj.energy_drift))
            throw DivergedError("integrate_flow: energy diverged", traj.times[traj.times.size() - 2]);
        if (a.phase_norm() > options.escape_radius) {
            traj.stopped_early = true;
            break;
        }
    }
    if (traj.symplectic && traj.energy_drift > options.energy_tolerance)
        throw DivergedError("integrate_flow: energy drift above tolerance", traj.times.back());
    return traj;
}

std::size_t ClassicalTrajectory::index_of(double t) const {
    const double tol = 1e-9 * std::max(dt, 1e-300);
    auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol) throw RangeError("trajectory has no sample at requested time");
    return static_cast<std::size_t>(it - times.begin());
}

PhasePoint ClassicalTrajectory::at(double t) const {
    if (t < times.front() - 1e-12 || t > times.back() + 1e-12) throw RangeError("trajectory: time outside span");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    if (k + 1 >= times.size()) return points.back();
    const double h = times[k + 1] - times[k];
    const double s = (t - times[k]) / h;
    if (s <= 0.0) return points[k];
    const Vec y0 = points[k].stacked(), y1 = points[k + 1].stacked();
    const Vec f0 = hamiltonian_field(spec, points[k]).stacked();
    const Vec f1 = hamiltonian_field(spec, points[k + 1]).stacked();
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return PhasePoint::from_stacked(h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1);
}

PhaseRegion PhaseRegion::ball(PhasePoint c, double r) {
    if (!(r > 0.0)) throw InvalidArgument("PhaseRegion: radius must be positive");
    PhaseRegion reg;
    reg.kind = Kind::ball;
    reg.center = std::move(c);
    reg.radius = r;
    return reg;
}

PhaseRegion PhaseRegion::box(PhasePoint c, Vec half_widths) {
    if (half_widths.size() != 2 * c.dim()) throw InvalidArgument("PhaseRegion: box needs 2n half-widths");
    if ((half_widths.array() <= 0.0).any()) throw InvalidArgument("PhaseRegion: half-widths must be positive");
    PhaseRegion reg;
    reg.kind = Kind::box;
    reg.center = std::move(c);
    reg.half_widths = std::move(half_widths);
    return reg;
}

bool PhaseRegion::contains(const PhasePoint& a) const {
    const Vec d = a.stacked() - center.stacked();
    if (kind == Kind::ball) return d.norm() <= radius;
    return (d.array().abs() <= half_widths.array()).all();
}

double classical_transit_time(const ClassicalTrajectory& traj, const PhaseRegion& region, TimeWindow w) {
    const double tol = 1e-12 * std::max(1.0, std::abs(traj.t_end()));
    if (w.t0 < traj.t_begin() - tol || w.t1 > traj.t_end() + tol || w.t1 < w.t0)
        throw RangeError("classical_transit_time: window outside trajectory span");
    w.t0 = std::max(w.t0, traj.t_begin());
    w.t1 = std::min(w.t1, traj.t_end());

    // Breakpoints: window ends plus interior samples.
    std::vector<double> ts{w.t0};
    for (double t : traj.times)
        if (t > w.t0 && t < w.t1) ts.push_back(t);
    ts.push_back(w.t1);

    const double crossing_tol = 1e-10 * traj.dt;
    double tau = 0.0;
    bool in_prev = region.contains(traj.at(ts[0]));
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double a = ts[k], b = ts[k + 1];
        const bool in_next = region.contains(traj.at(b));
        if (in_prev == in_next) {
            if (in_prev) tau += b - a;
        } else {
            double lo = a, hi = b;
            while (hi - lo > crossing_tol) {
                const double mid = 0.5 * (lo + hi);
                if (region.contains(traj.at(mid)) == in_prev) lo = mid;
                else hi = mid;
            }
            const double tc = 0.5 * (lo + hi);
            tau += in_prev ? (tc - a) : (b - tc);
        }
        in_prev = in_next;
    }
    return tau;
}

double classical_average_stay(const ClassicalTrajectory& traj, const PhaseRegion& region, TimeWindow window) {
    if (!(window.length() > 0.0)) throw InvalidArgument("classical_average_stay: zero-length window");
    return classical_transit_time(traj, region, window) / window.length();
}

std::string to_string(ClassicalLabel label) {
    switch (label) {
        case ClassicalLabel::bound: return "bound";
        case ClassicalLabel::scattering: return "scattering";
        case ClassicalLabel::exceptional: return "exceptional";
        case ClassicalLabel::undecided: return "undecided";
    }
    return "undecided";
}

ClassicalClassification classify_classical(const HamiltonianSpec& spec, const PhasePoint& alpha0, double T,
                                           const std::vector<double>& radii, double dt) {
    if (radii.empty()) throw InvalidArgument("classify_classical: empty radius schedule");
    std::vector<double> rs = radii;
    std::sort(rs.begin(), rs.end());
    const double r_max = rs.back();

    ClassicalClassification out;
    out.requested_horizon = T;

    FlowOptions opt;
    opt.escape_radius = 10.0 * r_max;
    ClassicalTrajectory traj;
    try {
        traj = integrate_flow(spec, alpha0, T, dt, opt);
    } catch (const DivergedError& e) {
        // Blow-up in finite time: re-run up to the last valid time.
        const double t_ok = e.last_valid_time;
        if (t_ok < dt) throw;
        traj = integrate_flow(spec, alpha0, t_ok, dt, opt);
        traj.stopped_early = true;
    }
    out.horizon = traj.t_end();
    out.escaped = traj.stopped_early;

    std::vector<double> norms(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) norms[k] = traj.points[k].phase_norm();
    out.sup_norm = *std::max_element(norms.begin(), norms.end());
    out.final_norm = norms.back();
    for (double r : rs)
        if (out.sup_norm <= r) {
            out.containing_radius = r;
            break;
        }

    if (out.sup_norm <= r_max) {
        out.label = ClassicalLabel::bound;
        return out;
    }

    // Trailing 20% of the covered window: norm increasing and outside every R.
    const std::size_t start = static_cast<std::size_t>(0.8 * static_cast<double>(norms.size() - 1));
    bool increasing = true;
    for (std::size_t k = start + 1; k < norms.size(); ++k)
        if (norms[k] < norms[k - 1]) {
            increasing = false;
            break;
        }
    out.trailing_increasing = increasing;
    const bool outside_at_end = out.final_norm > r_max;
    out.label = (increasing && outside_at_end) ? ClassicalLabel::scattering : ClassicalLabel::undecided;
    return out;
}

void write_trajectory_csv(const ClassicalTrajectory& traj, std::ostream& out) {
    const int n = traj.spec.dimension;
    out << "t";
    for (int i = 0; i < n; ++i) out << ",xi" << (i + 1);
    for (int i = 0; i < n; ++i) out << ",pi" << (i + 1);
    out << ",energy\n";
    out << std::setprecision(17);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& a = traj.points[k];
        out << traj.times[k];
        for (int i = 0; i < n; ++i) out << ',' << a.xi(i);
        for (int i = 0; i < n; ++i) out << ',' << a.pi(i);
        out << ',' << eval_h(traj.spec, a) << '\n';
    }
}

}  // namespace qcr
