#include "qcr/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qcr {

namespace {

struct ModeResult {
    json body;
    std::map<std::string, std::string> csv;
    bool reduced = true;
};

ModeResult run_reduce(const RunConfig& rc, const std::string& hash) {
    const ReductionReport r = verdict(rc.problem);
    ModeResult out;
    out.body = to_json(r);
    std::ostringstream csv;
    write_reduction_csv(r, csv, hash);
    out.csv["curves.csv"] = csv.str();
    out.reduced = r.verdict == Verdict::reduced;
    return out;
}

ModeResult run_classify_classical(const RunConfig& rc, const std::string& hash) {
    const ReductionProblem& p = rc.problem;
    std::vector<double> radii = rc.radii;
    if (radii.empty()) radii = {1.0, 2.0, 5.0, 10.0};
    const ClassicalClassification c = classify_classical(p.spec, p.alpha0, p.T, radii, rc.classical_dt);
    ModeResult out;
    out.body = to_json(c);
    out.body["radii"] = radii;
    const ClassicalTrajectory traj = integrate_flow(p.spec, p.alpha0, c.horizon > 0 ? c.horizon : p.T, rc.classical_dt);
    std::ostringstream csv;
    write_csv_preamble(csv, hash);
    write_trajectory_csv(traj, csv);
    out.csv["trajectory.csv"] = csv.str();
    return out;
}

CVec quantum_state(const RunConfig& rc, const FiniteEvolution& evo, const GridWavefunction& packet) {
    const CVec u = to_euclidean(packet);
    if (rc.state.kind == "packet") return u;
    CVec psi = CVec::Zero(evo.dim());
    for (std::size_t i = 0; i < rc.state.indices.size(); ++i) {
        const int k = rc.state.indices[i];
        if (k < 0 || k >= evo.dim()) throw RangeError("state.indices: eigenstate index out of range");
        CVec v = evo.eigenvectors().col(k);
        // Fix the eigenvector sign by its overlap with the packet at alpha0.
        const cplx o = v.dot(u);
        if (std::abs(o) > 1e-14) v *= o / std::abs(o);
        psi += rc.state.weights[i] * v;
    }
    const double nrm = psi.norm();
    if (!(nrm > 0.0)) throw DomainError("state: zero superposition");
    return psi / nrm;
}

ModeResult run_classify_quantum(const RunConfig& rc, const std::string& hash) {
    const ReductionProblem& p = rc.problem;
    std::vector<double> horizons = rc.horizons;
    if (horizons.empty()) horizons = {p.T};
    const GridWavefunction packet = sample_on_grid(coherent_packet(p.alpha0, p.M0), p.grid);
    ModeResult out;
    QuantumClassification c;
    if (rc.method == "matrix") {
        const FiniteEvolution evo(grid_hamiltonian_matrix(p.spec, p.grid));
        const CVec psi = quantum_state(rc, evo, packet);
        const CMat Omega = comparator_matrix(p.comparator, p.grid, true);
        c = classify_quantum(evo, psi, Omega, horizons, rc.classify);
    } else {
        if (rc.state.kind != "packet") throw Unsupported("classify-quantum: eigenstate inputs need method=matrix");
        c = classify_quantum(p.spec, packet, p.comparator, horizons, rc.classify, p.dt);
    }
    out.body = to_json(c);
    out.body["method"] = rc.method;
    out.body["provenance"] = {{"grid", {{"n", p.grid.n}, {"N", p.grid.N}, {"L", p.grid.L}}},
                              {"dt", p.dt},
                              {"comparator_N", p.comparator.N},
                              {"comparator_s", p.comparator.s}};
    std::ostringstream csv;
    write_csv_preamble(csv, hash);
    write_stay_csv(c.curve, csv);
    out.csv["stay.csv"] = csv.str();
    return out;
}

ModeResult run_audit(const RunConfig& rc, const std::string& hash) {
    const ReductionProblem& p = rc.problem;
    const ComparatorScalars s = comparator_scalars(p.comparator);
    std::vector<PhasePoint> points = rc.audit_points;
    if (points.empty()) points.push_back(PhasePoint::origin(p.comparator.n));
    ModeResult out;
    out.body = to_json(s);
    json elements = json::array();
    std::vector<std::pair<PhasePoint, CoherentElements>> rows;
    for (const auto& a : points) {
        const CoherentElements e = coherent_matrix_elements(p.comparator, a, p.grid);
        elements.push_back(to_json(e, a));
        rows.emplace_back(a, e);
    }
    out.body["coherent"] = elements;
    out.body["s"] = p.comparator.s;
    out.body["N"] = p.comparator.N;
    out.body["n"] = p.comparator.n;
    std::ostringstream csv;
    write_audit_csv(rows, csv, hash);
    out.csv["audit.csv"] = csv.str();
    return out;
}

ModeResult run_scale(const RunConfig& rc, const std::string& hash) {
    const ReductionProblem& p = rc.problem;
    std::vector<double> lambdas = rc.lambdas;
    if (lambdas.empty()) lambdas = {1.0, 0.25, 0.0625};
    ModeResult out;
    json quantities = json::array();
    for (const auto& [kind, value] : rc.quantities) {
        const QuantityKind k = quantity_kind_from_string(kind);
        for (double l : lambdas) {
            const double scaled = scale_value(k, value, l);
            quantities.push_back({{"kind", kind}, {"value", value}, {"lambda", l}, {"scaled", scaled}});
        }
    }
    out.body["quantities"] = quantities;
    json checks = json::array();
    for (double l : lambdas) {
        const CoherentScalingCheck c = coherent_scaling_check(p.alpha0, l, p.grid);
        checks.push_back({{"lambda", l},
                          {"residual", number_json(c.residual)},
                          {"var_q", c.var_q},
                          {"var_q_scaled", c.var_q_scaled},
                          {"var_q_dilated", c.var_q_dilated}});
    }
    out.body["coherent_checks"] = checks;
    out.body["planck_si"] = planck_si;
    if (rc.resolved.contains("hamiltonian")) {
        const HeppTable t = hepp_experiment(p, lambdas, rc.rejected_reading ? HeppReading::decreasing_planck
                                                                            : HeppReading::scaled_family);
        out.body["hepp"] = to_json(t);
        std::ostringstream csv;
        write_hepp_csv(t, csv, hash);
        out.csv["hepp.csv"] = csv.str();
    }
    return out;
}

ModeResult run_squeeze(const RunConfig& rc, const std::string& hash) {
    std::vector<double> d = rc.dilations;
    if (d.empty()) d = {0.25, 0.5, 1.0, 2.0, 4.0};
    const SqueezeTable t = squeeze_sweep(rc.problem, d);
    ModeResult out;
    out.body = to_json(t);
    std::ostringstream csv;
    write_squeeze_csv(t, csv, hash);
    out.csv["squeeze.csv"] = csv.str();
    return out;
}

ModeResult run_ehrenfest(const RunConfig& rc, const std::string& hash) {
    const ReductionProblem& p = rc.problem;
    const GridWavefunction psi0 = sample_on_grid(coherent_packet(p.alpha0, p.M0), p.grid);
    const EhrenfestCurves c = ehrenfest_residuals(p.spec, psi0, p.T, p.dt);
    ModeResult out;
    out.body = to_json(c);
    std::ostringstream csv;
    write_ehrenfest_csv(c, csv, hash);
    out.csv["ehrenfest.csv"] = csv.str();
    return out;
}

json diagnostic(const std::string& kind, const std::string& message) {
    return {{"error", {{"kind", kind}, {"message", message}}}, {"tool", {{"name", "reduce"}, {"version", tool_version()}}}};
}

void write_outputs(RunOutput& out, const std::string& dir, const std::vector<std::string>& formats) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& text) {
        const std::string path = (std::filesystem::path(dir) / name).string();
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path);
        f << text;
        out.written.push_back(path);
    };
    const bool json_out = std::find(formats.begin(), formats.end(), "json") != formats.end();
    const bool csv_out = std::find(formats.begin(), formats.end(), "csv") != formats.end();
    if (json_out || out.exit_code >= 2) write("report.json", out.report.dump(2) + "\n");
    if (csv_out && out.exit_code < 2)
        for (const auto& [name, text] : out.csv) write(name, text);
}

}  // namespace

RunOutput run_config(const json& config, const RunOptions& options) {
    RunOutput out;
    std::string dir = options.out_dir.value_or("out");
    std::vector<std::string> formats = options.formats.value_or(std::vector<std::string>{"json", "csv"});
    try {
        const RunConfig rc = parse_config(config);
        if (!options.out_dir) dir = rc.out_dir;
        if (!options.formats) formats = rc.formats;
        const std::string hash = config_hash(rc.resolved);
        ModeResult m;
        switch (rc.mode) {
            case Mode::reduce: m = run_reduce(rc, hash); break;
            case Mode::classify_classical: m = run_classify_classical(rc, hash); break;
            case Mode::classify_quantum: m = run_classify_quantum(rc, hash); break;
            case Mode::comparator_audit: m = run_audit(rc, hash); break;
            case Mode::scale: m = run_scale(rc, hash); break;
            case Mode::squeeze: m = run_squeeze(rc, hash); break;
            case Mode::ehrenfest: m = run_ehrenfest(rc, hash); break;
        }
        out.report = {{"mode", to_string(rc.mode)},
                      {"config", rc.resolved},
                      {"config_hash", hash},
                      {"seed", rc.seed},
                      {"tool", {{"name", "reduce"}, {"version", tool_version()}}},
                      {"result", m.body}};
        out.csv = std::move(m.csv);
        out.exit_code = (options.assert_reduced && rc.mode == Mode::reduce && !m.reduced) ? 1 : 0;
    } catch (const SchemaError& e) {
        out.exit_code = 2;
        out.report = diagnostic("schema", e.what());
        return out;  // nothing is written for an invalid config
    } catch (const Error& e) {
        out.exit_code = 3;
        out.report = diagnostic("numerical", e.what());
    } catch (const json::exception& e) {
        out.exit_code = 2;
        out.report = diagnostic("schema", e.what());
        return out;
    }
    if (options.write_files) write_outputs(out, dir, formats);
    return out;
}

RunOutput run_file(const std::string& path, const RunOptions& options) {
    std::ifstream in(path);
    if (!in) {
        RunOutput out;
        out.exit_code = 2;
        out.report = diagnostic("schema", "cannot read '" + path + "'");
        return out;
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        RunOutput out;
        out.exit_code = 2;
        out.report = diagnostic("schema", std::string("invalid JSON: ") + e.what());
        return out;
    }
    return run_config(j, options);
}

}  // namespace qcr
