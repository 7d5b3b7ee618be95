#include "qcr/report.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#ifndef QCR_VERSION
#define QCR_VERSION "0.0.0"
#endif

namespace qcr {

namespace {

json doubles(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(number_json(x));
    return out;
}

json doubles(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_json(v[i]));
    return out;
}

std::vector<double> doubles_from(const json& j) {
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number_from_json(x));
    return out;
}

Vec vec_from(const json& j) {
    const auto v = doubles_from(j);
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class Row>
void csv_row(std::ostream& out, const Row& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
}

}  // namespace

std::string tool_version() { return QCR_VERSION; }

std::string config_hash(const json& config) {
    const std::string s = config.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from_json(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

json to_json(const PhasePoint& a) { return {{"xi", doubles(a.xi)}, {"pi", doubles(a.pi)}}; }

PhasePoint phase_point_from_json(const json& j) { return {vec_from(j.at("xi")), vec_from(j.at("pi"))}; }

json to_json(const ComparatorScalars& s) {
    return {{"sigma", number_json(s.sigma)},
            {"lambda", number_json(s.lambda)},
            {"norm", number_json(s.norm)},
            {"trace", number_json(s.trace)},
            {"tail_bound", number_json(s.tail_bound)},
            {"one_minus_norm", number_json(s.one_minus_norm)},
            {"aomega_sq", number_json(s.aomega_sq)},
            {"aomega_sq_bound", number_json(s.aomega_sq_bound)},
            {"aomega_normalized", number_json(s.aomega_normalized)},
            {"prefactor_closed", number_json(s.prefactor_closed)},
            {"power_iterations", s.power_iterations}};
}

json to_json(const TheoremBound& b) {
    return {{"omega", number_json(b.omega)}, {"m1", number_json(b.m1)}, {"m2", number_json(b.m2)}};
}

json to_json(const RunReport& r) {
    json err = json::array();
    for (const auto& e : r.error) err.push_back(doubles(e));
    return {{"alpha0", to_json(r.alpha0)},
            {"times", doubles(r.times)},
            {"error", err},
            {"error_max", doubles(r.error_max)},
            {"delta1", doubles(r.delta1)},
            {"duhamel", doubles(r.duhamel)},
            {"delta2", doubles(r.delta2)},
            {"inv_norm_U", doubles(r.inv_norm_U)},
            {"inv_norm_W", doubles(r.inv_norm_W)},
            {"member_U", r.member_U},
            {"member_W", r.member_W},
            {"bound_general", doubles(r.bound_general)},
            {"bound_closed", doubles(r.bound_closed)},
            {"bound_duhamel", doubles(r.bound_duhamel)},
            {"max_error", number_json(r.max_error)},
            {"energy_drift", number_json(r.energy_drift)},
            {"max_boundary_mass", number_json(r.max_boundary_mass)},
            {"hypotheses_hold", r.hypotheses_hold},
            {"bound_dominates", r.bound_dominates},
            {"domination_violations", r.domination_violations}};
}

RunReport run_report_from_json(const json& j) {
    RunReport r;
    r.alpha0 = phase_point_from_json(j.at("alpha0"));
    r.times = doubles_from(j.at("times"));
    for (const auto& e : j.at("error")) r.error.push_back(vec_from(e));
    r.error_max = doubles_from(j.at("error_max"));
    r.delta1 = doubles_from(j.at("delta1"));
    r.duhamel = doubles_from(j.at("duhamel"));
    r.delta2 = doubles_from(j.at("delta2"));
    r.inv_norm_U = doubles_from(j.at("inv_norm_U"));
    r.inv_norm_W = doubles_from(j.at("inv_norm_W"));
    r.member_U = j.at("member_U").get<std::vector<int>>();
    r.member_W = j.at("member_W").get<std::vector<int>>();
    r.bound_general = doubles_from(j.at("bound_general"));
    r.bound_closed = doubles_from(j.at("bound_closed"));
    r.bound_duhamel = doubles_from(j.at("bound_duhamel"));
    r.max_error = number_from_json(j.at("max_error"));
    r.energy_drift = number_from_json(j.at("energy_drift"));
    r.max_boundary_mass = number_from_json(j.at("max_boundary_mass"));
    r.hypotheses_hold = j.at("hypotheses_hold").get<bool>();
    r.bound_dominates = j.at("bound_dominates").get<bool>();
    r.domination_violations = j.at("domination_violations").get<int>();
    return r;
}

json to_json(const ReductionReport& r) {
    json runs = json::array();
    for (const auto& run : r.runs) runs.push_back(to_json(run));
    return {{"verdict", to_string(r.verdict)},
            {"max_error", number_json(r.max_error)},
            {"E", number_json(r.E)},
            {"E_auto", r.E_auto},
            {"require_hypotheses", r.require_hypotheses},
            {"epsilon", doubles(r.epsilon)},
            {"scalars", to_json(r.scalars)},
            {"constants", to_json(r.constants)},
            {"provenance",
             {{"grid", {{"n", r.grid.n}, {"N", r.grid.N}, {"L", r.grid.L}}},
              {"dt", r.dt},
              {"sample_dt", r.sample_dt},
              {"comparator_N", r.comparator_N},
              {"comparator_s", r.comparator_s},
              {"amplitude_floor", r.amplitude_floor},
              {"stepper", r.stepper},
              {"sampled_region", r.sampled_region},
              {"threads", r.threads}}},
            {"runs", runs}};
}

ReductionReport reduction_report_from_json(const json& j) {
    ReductionReport r;
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    r.max_error = number_from_json(j.at("max_error"));
    r.E = number_from_json(j.at("E"));
    r.E_auto = j.at("E_auto").get<bool>();
    r.require_hypotheses = j.value("require_hypotheses", false);
    r.epsilon = vec_from(j.at("epsilon"));
    const json& s = j.at("scalars");
    r.scalars.sigma = number_from_json(s.at("sigma"));
    r.scalars.lambda = number_from_json(s.at("lambda"));
    r.scalars.norm = number_from_json(s.at("norm"));
    r.scalars.trace = number_from_json(s.at("trace"));
    r.scalars.tail_bound = number_from_json(s.at("tail_bound"));
    r.scalars.one_minus_norm = number_from_json(s.at("one_minus_norm"));
    r.scalars.aomega_sq = number_from_json(s.at("aomega_sq"));
    r.scalars.aomega_sq_bound = number_from_json(s.at("aomega_sq_bound"));
    r.scalars.aomega_normalized = number_from_json(s.at("aomega_normalized"));
    r.scalars.prefactor_closed = number_from_json(s.at("prefactor_closed"));
    r.scalars.power_iterations = s.at("power_iterations").get<int>();
    const json& c = j.at("constants");
    r.constants.omega = number_from_json(c.at("omega"));
    r.constants.m1 = number_from_json(c.at("m1"));
    r.constants.m2 = number_from_json(c.at("m2"));
    const json& p = j.at("provenance");
    r.grid = GridSpec(p.at("grid").at("n").get<int>(), p.at("grid").at("N").get<int>(), p.at("grid").at("L").get<double>());
    r.dt = p.at("dt").get<double>();
    r.sample_dt = p.at("sample_dt").get<double>();
    r.comparator_N = p.at("comparator_N").get<int>();
    r.comparator_s = p.at("comparator_s").get<double>();
    r.amplitude_floor = p.at("amplitude_floor").get<double>();
    r.stepper = p.at("stepper").get<std::string>();
    r.sampled_region = p.at("sampled_region").get<bool>();
    r.threads = p.at("threads").get<int>();
    for (const auto& run : j.at("runs")) r.runs.push_back(run_report_from_json(run));
    return r;
}

json to_json(const ClassicalClassification& c) {
    return {{"label", to_string(c.label)},
            {"horizon", number_json(c.horizon)},
            {"requested_horizon", number_json(c.requested_horizon)},
            {"sup_norm", number_json(c.sup_norm)},
            {"final_norm", number_json(c.final_norm)},
            {"containing_radius", number_json(c.containing_radius)},
            {"escaped", c.escaped},
            {"trailing_increasing", c.trailing_increasing}};
}

json to_json(const QuantumClassification& c) {
    json curve = json::array();
    for (const auto& s : c.curve)
        curve.push_back({{"T", s.T},
                         {"mu", number_json(s.mu)},
                         {"tau", number_json(s.tau)},
                         {"predicted", number_json(s.predicted)},
                         {"divergent", s.divergent},
                         {"trailing_increment", number_json(s.trailing_increment)}});
    const char* side = c.options.side == TimeSide::both ? "both" : (c.options.side == TimeSide::forward ? "forward" : "backward");
    return {{"label", to_string(c.label)},
            {"curve", curve},
            {"mu_min", number_json(c.mu_min)},
            {"tau_increment", number_json(c.tau_increment)},
            {"thresholds",
             {{"mu_min", c.options.mu_min},
              {"tau_increment", c.options.tau_increment},
              {"grid_step", c.options.grid_step},
              {"side", side}}}};
}

json to_json(const CoherentElements& e, const PhasePoint& alpha) {
    return {{"alpha", to_json(alpha)},
            {"alpha_sq", number_json(e.alpha_sq)},
            {"diag", number_json(e.diag)},
            {"measured_diag", number_json(e.measured_diag)},
            {"inv_norm_sq", number_json(e.inv_norm_sq)},
            {"measured_inv_norm_sq", number_json(e.measured_inv_norm_sq)},
            {"inv_divergent", e.inv_divergent},
            {"one_minus_bound", number_json(e.one_minus_bound)},
            {"one_minus_sqrt_bound", number_json(e.one_minus_sqrt_bound)},
            {"measured_one_minus", number_json(e.measured_one_minus)}};
}

json to_json(const SqueezeTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"d", r.d},
                        {"duhamel_term", number_json(r.duhamel_term)},
                        {"comparator_term", number_json(r.comparator_term)},
                        {"total_bound", number_json(r.total_bound)}});
    return {{"rows", rows},
            {"E", number_json(t.E)},
            {"argmin_d", t.rows.empty() ? json(nullptr) : json(t.rows[t.argmin].d)},
            {"interior_minimum", t.interior_minimum}};
}

json to_json(const HeppTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row = {{"lambda", r.lambda}, {"ok", r.ok}};
        if (r.ok) {
            row["max_error"] = number_json(r.max_error);
            row["max_duhamel"] = number_json(r.max_duhamel);
        } else {
            row["failure"] = r.failure;
        }
        rows.push_back(row);
    }
    return {{"rows", rows},
            {"reading", to_string(t.reading)},
            {"error_decreasing", t.error_decreasing},
            {"duhamel_decreasing", t.duhamel_decreasing}};
}

json to_json(const EhrenfestCurves& c) {
    return {{"times", doubles(c.times)},
            {"identity_residual", doubles(c.identity_residual)},
            {"classicality_gap", doubles(c.classicality_gap)},
            {"max_identity_residual", number_json(c.max_identity_residual)},
            {"max_classicality_gap", number_json(c.max_classicality_gap)}};
}

void write_csv_preamble(std::ostream& out, const std::string& hash) {
    out << "# reduce " << tool_version() << " config=" << hash << '\n';
}

std::vector<std::string> reduction_csv_columns(int n) {
    std::vector<std::string> cols{"run", "t", "error_max"};
    for (int i = 1; i <= 2 * n; ++i) cols.push_back("error_" + std::to_string(i));
    for (const char* c : {"delta1", "duhamel", "delta2", "inv_norm_U", "inv_norm_W", "member_U", "member_W",
                          "bound_general", "bound_closed", "bound_duhamel"})
        cols.emplace_back(c);
    return cols;
}

void write_reduction_csv(const ReductionReport& r, std::ostream& out, const std::string& hash) {
    write_csv_preamble(out, hash);
    const int n = r.grid.n;
    csv_row(out, reduction_csv_columns(n));
    for (std::size_t k = 0; k < r.runs.size(); ++k) {
        const RunReport& run = r.runs[k];
        for (std::size_t i = 0; i < run.times.size(); ++i) {
            std::vector<std::string> row{std::to_string(k), fmt(run.times[i]), fmt(run.error_max[i])};
            for (int c = 0; c < 2 * n; ++c) row.push_back(fmt(run.error[i][c]));
            for (double v : {run.delta1[i], run.duhamel[i], run.delta2[i], run.inv_norm_U[i], run.inv_norm_W[i]})
                row.push_back(fmt(v));
            row.push_back(std::to_string(run.member_U[i]));
            row.push_back(std::to_string(run.member_W[i]));
            for (double v : {run.bound_general[i], run.bound_closed[i], run.bound_duhamel[i]}) row.push_back(fmt(v));
            csv_row(out, row);
        }
    }
}

void write_squeeze_csv(const SqueezeTable& t, std::ostream& out, const std::string& hash) {
    write_csv_preamble(out, hash);
    out << "d,duhamel_term,comparator_term,total_bound\n";
    for (const auto& r : t.rows)
        csv_row(out, std::vector<std::string>{fmt(r.d), fmt(r.duhamel_term), fmt(r.comparator_term), fmt(r.total_bound)});
}

void write_hepp_csv(const HeppTable& t, std::ostream& out, const std::string& hash) {
    write_csv_preamble(out, hash);
    out << "lambda,error,bound\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : t.rows)
        csv_row(out, std::vector<std::string>{fmt(r.lambda), fmt(r.ok ? r.max_error : nan), fmt(r.ok ? r.max_duhamel : nan)});
}

void write_ehrenfest_csv(const EhrenfestCurves& c, std::ostream& out, const std::string& hash) {
    write_csv_preamble(out, hash);
    out << "t,identity_residual,classicality_gap\n";
    for (std::size_t i = 0; i < c.times.size(); ++i)
        csv_row(out, std::vector<std::string>{fmt(c.times[i]), fmt(c.identity_residual[i]), fmt(c.classicality_gap[i])});
}

void write_audit_csv(const std::vector<std::pair<PhasePoint, CoherentElements>>& rows, std::ostream& out,
                     const std::string& hash) {
    write_csv_preamble(out, hash);
    const int n = rows.empty() ? 1 : rows.front().first.dim();
    std::vector<std::string> header;
    for (int i = 1; i <= n; ++i) header.push_back("xi_" + std::to_string(i));
    for (int i = 1; i <= n; ++i) header.push_back("pi_" + std::to_string(i));
    for (const char* c : {"alpha_sq", "diag", "measured_diag", "inv_norm_sq", "measured_inv_norm_sq", "one_minus_bound",
                          "one_minus_sqrt_bound", "measured_one_minus"})
        header.emplace_back(c);
    csv_row(out, header);
    for (const auto& [a, e] : rows) {
        std::vector<std::string> row;
        for (int i = 0; i < n; ++i) row.push_back(fmt(a.xi[i]));
        for (int i = 0; i < n; ++i) row.push_back(fmt(a.pi[i]));
        for (double v : {e.alpha_sq, e.diag, e.measured_diag, e.inv_norm_sq, e.measured_inv_norm_sq, e.one_minus_bound,
                         e.one_minus_sqrt_bound, e.measured_one_minus})
            row.push_back(fmt(v));
        csv_row(out, row);
    }
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) t.header = split(line);
        else t.rows.push_back(split(line));
    }
    return t;
}

}  // namespace qcr
