#include "qcr/config.hpp"

#include "qcr/scaling.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <set>

namespace qcr {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

void allow_keys(const json& obj, const std::string& path, const std::set<std::string>& keys) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items())
        if (!keys.count(k)) fail(path, "unknown key '" + k + "'");
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

double positive(const json& j, const std::string& path) {
    const double v = number(j, path);
    if (!(v > 0.0)) fail(path, "must be positive");
    return v;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Vec vec(const json& j, const std::string& path) {
    const auto v = numbers(j, path);
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

PhasePoint phase_point(const json& j, const std::string& path, int n) {
    allow_keys(j, path, {"xi", "pi"});
    if (!j.contains("xi") || !j.contains("pi")) fail(path, "needs xi and pi");
    Vec xi = vec(j["xi"], path + ".xi"), p = vec(j["pi"], path + ".pi");
    if (xi.size() != n || p.size() != n) fail(path, "xi and pi must have " + std::to_string(n) + " entries");
    return {xi, p};
}

PotentialModel potential(const json& j, const std::string& path, int n) {
    allow_keys(j, path, {"kind", "coefficients", "terms", "x", "v"});
    const std::string kind = j.contains("kind") ? string(j["kind"], path + ".kind") : "polynomial";
    try {
        if (kind == "polynomial") {
            if (j.contains("coefficients")) {
                if (n != 1) fail(path, "dense coefficients are one-dimensional; use terms");
                return PotentialModel::polynomial_1d(numbers(j["coefficients"], path + ".coefficients"));
            }
            if (!j.contains("terms")) fail(path, "polynomial needs coefficients or terms");
            Polynomial p(n);
            const json& terms = j["terms"];
            if (!terms.is_array()) fail(path + ".terms", "expected an array");
            for (std::size_t i = 0; i < terms.size(); ++i) {
                const std::string tp = path + ".terms[" + std::to_string(i) + "]";
                allow_keys(terms[i], tp, {"powers", "coefficient"});
                const json& pw = terms[i].at("powers");
                if (!pw.is_array() || static_cast<int>(pw.size()) != n) fail(tp, "powers must have one entry per axis");
                Powers e{0, 0, 0};
                for (int a = 0; a < n; ++a) {
                    e[a] = integer(pw[a], tp + ".powers");
                    if (e[a] < 0) fail(tp, "powers must be non-negative");
                }
                p.add_term(e, number(terms[i].at("coefficient"), tp + ".coefficient"));
            }
            return PotentialModel::polynomial(p);
        }
        if (kind == "tabulated") {
            if (n != 1) fail(path, "tabulated potentials are one-dimensional");
            return PotentialModel::tabulated(numbers(j.at("x"), path + ".x"), numbers(j.at("v"), path + ".v"));
        }
    } catch (const Error& e) {
        fail(path, e.what());
    } catch (const json::exception& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "must be polynomial or tabulated");
}

HamiltonianSpec hamiltonian(const json& j, const std::string& path) {
    allow_keys(j, path, {"mass", "dimension", "potential", "vector_potential", "classical_only"});
    const int n = j.contains("dimension") ? integer(j["dimension"], path + ".dimension") : 1;
    if (n < 1 || n > 2) fail(path + ".dimension", "must be 1 or 2");
    const double m = j.contains("mass") ? positive(j["mass"], path + ".mass") : 1.0;
    if (!j.contains("potential")) fail(path, "missing potential");
    PotentialModel v = potential(j["potential"], path + ".potential", n);
    HamiltonianSpec spec;
    try {
        if (j.contains("vector_potential")) {
            const json& a = j["vector_potential"];
            if (!a.is_array() || static_cast<int>(a.size()) != n) fail(path + ".vector_potential", "needs n components");
            std::vector<PotentialModel> comps;
            for (int i = 0; i < n; ++i) comps.push_back(potential(a[i], path + ".vector_potential", n));
            spec = HamiltonianSpec(m, v, comps);
            spec.classical_only = true;
        } else {
            spec = HamiltonianSpec(m, v);
        }
        spec.dimension = n;
        if (j.contains("classical_only")) {
            if (!j["classical_only"].is_boolean()) fail(path + ".classical_only", "expected a boolean");
            spec.classical_only = spec.classical_only || j["classical_only"].get<bool>();
        }
        spec.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return spec;
}

CMat width_matrix(const json& j, const std::string& path, int n) {
    if (j.is_number()) return CMat::Identity(n, n) * positive(j, path);
    if (!j.is_array() || static_cast<int>(j.size()) != n) fail(path, "expected a positive number or an n x n matrix");
    CMat M(n, n);
    for (int r = 0; r < n; ++r) {
        const auto row = numbers(j[r], path);
        if (static_cast<int>(row.size()) != n) fail(path, "matrix rows must have n entries");
        for (int c = 0; c < n; ++c) M(r, c) = row[c];
    }
    return M;
}

json point(double xi, double p) { return {{"xi", {xi}}, {"pi", {p}}}; }

}  // namespace

Mode mode_from_string(const std::string& s) {
    if (s == "reduce") return Mode::reduce;
    if (s == "classify-classical") return Mode::classify_classical;
    if (s == "classify-quantum") return Mode::classify_quantum;
    if (s == "comparator-audit") return Mode::comparator_audit;
    if (s == "scale") return Mode::scale;
    if (s == "squeeze") return Mode::squeeze;
    if (s == "ehrenfest") return Mode::ehrenfest;
    throw SchemaError("mode: unknown mode '" + s + "'");
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::reduce: return "reduce";
        case Mode::classify_classical: return "classify-classical";
        case Mode::classify_quantum: return "classify-quantum";
        case Mode::comparator_audit: return "comparator-audit";
        case Mode::scale: return "scale";
        case Mode::squeeze: return "squeeze";
        case Mode::ehrenfest: return "ehrenfest";
    }
    return "reduce";
}

const std::vector<std::string>& mode_names() {
    static const std::vector<std::string> names{"reduce",  "classify-classical", "classify-quantum", "comparator-audit",
                                                "scale",   "squeeze",            "ehrenfest"};
    return names;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"harmonic", "free", "cubic-perturbed", "quartic", "double-well"};
    return names;
}

json preset_config(const std::string& name) {
    json base = {
        {"alpha0", point(1.0, 0.0)},
        {"T", 10.0},
        {"dt", 1e-3},
        {"sample_stride", 10},
        {"epsilon", 1e-5},
        {"comparator", {{"s", 1.0}, {"N", 128}}},
        {"grid", {{"N", 1024}, {"L", 20.0}}},
        {"M0", 1.0},
        {"radii", {1.0, 2.0, 5.0, 10.0}},
        {"horizons", {10.0, 40.0, 160.0}},
        {"dilations", {0.25, 0.5, 1.0, 2.0, 4.0}},
        {"lambdas", {1.0, 0.25, 0.0625}},
        {"audit_points", {point(0.0, 0.0), point(2.0, 0.0)}},
    };
    auto poly = [](std::vector<double> c) {
        return json{{"mass", 1.0}, {"potential", {{"kind", "polynomial"}, {"coefficients", c}}}};
    };
    if (name == "harmonic") {
        base["hamiltonian"] = poly({0.0, 0.0, 0.5});
    } else if (name == "free") {
        base["hamiltonian"] = poly({0.0});
        base["alpha0"] = point(0.0, 4.0);
        base["T"] = 5.0;
        base["grid"] = {{"N", 4096}, {"L", 60.0}};
        base["comparator"] = {{"s", 1.0}, {"N", 32}};
        // The packet spreads as fast as it travels, so long horizons need a wide box.
        base["mode_overrides"] = {{"classify-quantum", {{"grid", {{"N", 16384}, {"L", 1600.0}}}}}};
    } else if (name == "cubic-perturbed") {
        base["hamiltonian"] = poly({0.0, 0.0, 0.5, 0.1 / 6.0});
        base["alpha0"] = point(0.0, 0.0);
        base["T"] = 1.0;
        base["epsilon"] = 0.05;
        base["mode_overrides"] = {
            {"squeeze", {{"T", 0.25}, {"comparator", {{"s", 0.1}}}}},
            {"scale", {{"alpha0", point(1.0, 0.0)}, {"T", 2.0}}},
        };
    } else if (name == "quartic") {
        base["hamiltonian"] = poly({0.0, 0.0, 0.0, 0.0, 0.25});
        base["T"] = 5.0;
        base["epsilon"] = 1e-4;
    } else if (name == "double-well") {
        // (q^2 - 9)^2 / 72: wells at q = +-3 with unit curvature, tunnel splitting ~ 0.0135
        base["hamiltonian"] = poly({81.0 / 72.0, 0.0, -0.25, 0.0, 1.0 / 72.0});
        base["alpha0"] = point(-3.0, 0.0);
        base["grid"] = {{"N", 256}, {"L", 16.0}};
        base["comparator"] = {{"s", 2.0}, {"N", 64}, {"center", point(3.0, 0.0)}};
        base["horizons"] = {2.5, 5.0, 10.0};
        base["method"] = "matrix";
        base["state"] = {{"kind", "eigenstates"}, {"indices", {0, 1}}, {"weights", {1.0, 1.0}}};
        base["radii"] = {4.0, 6.0, 10.0};
    } else {
        throw SchemaError("preset: unknown preset '" + name + "'");
    }
    return base;
}

RunConfig parse_config(const json& config) {
    if (!config.is_object()) throw SchemaError("config: expected a JSON object");
    RunConfig rc;
    rc.source = config;

    if (!config.contains("mode")) throw SchemaError("mode: required");
    const std::string mode_name = string(config["mode"], "mode");
    rc.mode = mode_from_string(mode_name);

    json cfg = json::object();
    if (config.contains("preset")) {
        cfg = preset_config(string(config["preset"], "preset"));
        if (cfg.contains("mode_overrides") && cfg["mode_overrides"].contains(mode_name)) {
            const json patch = cfg["mode_overrides"][mode_name];
            cfg.merge_patch(patch);
        }
    }
    cfg.merge_patch(config);
    if (config.contains("mode_overrides") && config["mode_overrides"].contains(mode_name))
        cfg.merge_patch(config["mode_overrides"][mode_name]);
    cfg.erase("mode_overrides");
    rc.resolved = cfg;

    allow_keys(cfg, "config",
               {"mode", "preset", "hamiltonian", "alpha0", "region", "lattice", "T", "dt", "sample_stride",
                "epsilon", "comparator", "E", "E_factor", "grid", "M0", "tolerances", "radii", "horizons",
                "dilations", "lambdas", "quantities", "audit_points", "method", "state", "classify", "reading",
                "classical_dt", "seed", "output", "require_hypotheses"});

    ReductionProblem& p = rc.problem;
    if (!cfg.contains("hamiltonian") && rc.mode != Mode::comparator_audit && rc.mode != Mode::scale)
        throw SchemaError("hamiltonian: required for mode " + mode_name);
    if (cfg.contains("hamiltonian")) p.spec = hamiltonian(cfg["hamiltonian"], "hamiltonian");
    const int n = p.spec.dimension;

    p.alpha0 = cfg.contains("alpha0") ? phase_point(cfg["alpha0"], "alpha0", n) : PhasePoint::origin(n);
    if (cfg.contains("region")) {
        const json& r = cfg["region"];
        allow_keys(r, "region", {"kind", "center", "radius", "half_widths"});
        const std::string kind = r.contains("kind") ? string(r["kind"], "region.kind") : "ball";
        const PhasePoint c = r.contains("center") ? phase_point(r["center"], "region.center", n) : p.alpha0;
        try {
            if (kind == "ball") p.omega0 = PhaseRegion::ball(c, positive(r.at("radius"), "region.radius"));
            else if (kind == "box") p.omega0 = PhaseRegion::box(c, vec(r.at("half_widths"), "region.half_widths"));
            else throw SchemaError("region.kind: must be ball or box");
        } catch (const Error& e) {
            throw SchemaError(std::string("region: ") + e.what());
        } catch (const json::exception& e) {
            throw SchemaError(std::string("region: ") + e.what());
        }
    }
    if (cfg.contains("lattice")) {
        p.lattice = integer(cfg["lattice"], "lattice");
        if (p.lattice < 1) throw SchemaError("lattice: must be >= 1");
    }
    if (cfg.contains("T")) p.T = positive(cfg["T"], "T");
    if (cfg.contains("dt")) p.dt = positive(cfg["dt"], "dt");
    if (cfg.contains("sample_stride")) {
        p.sample_stride = integer(cfg["sample_stride"], "sample_stride");
        if (p.sample_stride < 1) throw SchemaError("sample_stride: must be >= 1");
    }
    if (std::abs(p.T / p.dt - std::round(p.T / p.dt)) > 1e-9 * std::max(1.0, p.T / p.dt))
        throw SchemaError("T: must be an integer multiple of dt");
    p.epsilon = Vec::Constant(2 * n, 1e-5);
    if (cfg.contains("epsilon")) {
        if (cfg["epsilon"].is_number()) {
            p.epsilon.setConstant(positive(cfg["epsilon"], "epsilon"));
        } else {
            p.epsilon = vec(cfg["epsilon"], "epsilon");
            if (p.epsilon.size() != 2 * n || (p.epsilon.array() <= 0.0).any())
                throw SchemaError("epsilon: needs 2n positive entries");
        }
    }

    p.comparator = ComparatorSpec();
    p.comparator.n = n;
    if (cfg.contains("comparator")) {
        const json& c = cfg["comparator"];
        allow_keys(c, "comparator", {"s", "N", "center"});
        if (c.contains("s")) p.comparator.s = positive(c["s"], "comparator.s");
        if (c.contains("N")) p.comparator.N = integer(c["N"], "comparator.N");
        if (c.contains("center")) p.comparator.center = phase_point(c["center"], "comparator.center", n);
    }
    try {
        p.comparator.validate();
    } catch (const Error& e) {
        throw SchemaError(std::string("comparator: ") + e.what());
    }
    if (cfg.contains("E") && !cfg["E"].is_null()) p.E = positive(cfg["E"], "E");
    if (cfg.contains("E_factor")) p.E_factor = positive(cfg["E_factor"], "E_factor");
    if (cfg.contains("require_hypotheses")) {
        if (!cfg["require_hypotheses"].is_boolean()) throw SchemaError("require_hypotheses: must be a boolean");
        p.require_hypotheses = cfg["require_hypotheses"].get<bool>();
    }

    p.grid = GridSpec(n, 1024, 20.0);
    if (cfg.contains("grid")) {
        const json& g = cfg["grid"];
        allow_keys(g, "grid", {"N", "L"});
        if (g.contains("N")) p.grid.N = integer(g["N"], "grid.N");
        if (g.contains("L")) p.grid.L = positive(g["L"], "grid.L");
        p.grid.n = n;
    }
    try {
        p.grid.validate();
    } catch (const Error& e) {
        throw SchemaError(std::string("grid: ") + e.what());
    }
    p.M0 = cfg.contains("M0") ? width_matrix(cfg["M0"], "M0", n) : CMat::Identity(n, n);

    if (cfg.contains("tolerances")) {
        const json& t = cfg["tolerances"];
        allow_keys(t, "tolerances", {"amplitude_floor", "tail_window", "residual_tolerance"});
        if (t.contains("amplitude_floor")) p.magnitude.amplitude_floor = positive(t["amplitude_floor"], "tolerances.amplitude_floor");
        if (t.contains("tail_window")) {
            p.magnitude.tail_window = integer(t["tail_window"], "tolerances.tail_window");
            if (p.magnitude.tail_window < 3) throw SchemaError("tolerances.tail_window: must be >= 3");
        }
        if (t.contains("residual_tolerance"))
            p.magnitude.residual_tolerance = positive(t["residual_tolerance"], "tolerances.residual_tolerance");
    }

    if (cfg.contains("radii")) rc.radii = numbers(cfg["radii"], "radii");
    if (cfg.contains("horizons")) rc.horizons = numbers(cfg["horizons"], "horizons");
    if (cfg.contains("dilations")) rc.dilations = numbers(cfg["dilations"], "dilations");
    if (cfg.contains("lambdas")) rc.lambdas = numbers(cfg["lambdas"], "lambdas");
    for (double v : rc.radii) if (!(v > 0)) throw SchemaError("radii: must be positive");
    for (double v : rc.horizons) if (!(v > 0)) throw SchemaError("horizons: must be positive");
    for (double v : rc.dilations) if (!(v > 0)) throw SchemaError("dilations: must be positive");
    for (double v : rc.lambdas) if (!(v > 0)) throw SchemaError("lambdas: must be positive");
    if (cfg.contains("quantities")) {
        const json& q = cfg["quantities"];
        if (!q.is_array()) throw SchemaError("quantities: expected an array");
        for (std::size_t i = 0; i < q.size(); ++i) {
            const std::string qp = "quantities[" + std::to_string(i) + "]";
            allow_keys(q[i], qp, {"kind", "value"});
            const std::string kind = string(q[i].at("kind"), qp + ".kind");
            try {
                (void)quantity_kind_from_string(kind);
            } catch (const Error& e) {
                fail(qp + ".kind", e.what());
            }
            rc.quantities.emplace_back(kind, number(q[i].at("value"), qp + ".value"));
        }
    }
    if (cfg.contains("audit_points")) {
        const json& a = cfg["audit_points"];
        if (!a.is_array()) throw SchemaError("audit_points: expected an array");
        for (std::size_t i = 0; i < a.size(); ++i)
            rc.audit_points.push_back(phase_point(a[i], "audit_points[" + std::to_string(i) + "]", n));
    }
    if (cfg.contains("method")) {
        rc.method = string(cfg["method"], "method");
        if (rc.method != "grid" && rc.method != "matrix") throw SchemaError("method: must be grid or matrix");
    }
    if (cfg.contains("state")) {
        const json& s = cfg["state"];
        allow_keys(s, "state", {"kind", "indices", "weights"});
        if (s.contains("kind")) rc.state.kind = string(s["kind"], "state.kind");
        if (rc.state.kind != "packet" && rc.state.kind != "eigenstates")
            throw SchemaError("state.kind: must be packet or eigenstates");
        if (s.contains("indices"))
            for (const auto& v : s["indices"]) rc.state.indices.push_back(integer(v, "state.indices"));
        if (s.contains("weights")) rc.state.weights = numbers(s["weights"], "state.weights");
        if (rc.state.kind == "eigenstates" &&
            (rc.state.indices.empty() || rc.state.indices.size() != rc.state.weights.size()))
            throw SchemaError("state: eigenstates need matching indices and weights");
    }
    if (cfg.contains("classify")) {
        const json& c = cfg["classify"];
        allow_keys(c, "classify", {"mu_min", "tau_increment", "grid_step", "side"});
        if (c.contains("mu_min")) rc.classify.mu_min = positive(c["mu_min"], "classify.mu_min");
        if (c.contains("tau_increment")) rc.classify.tau_increment = positive(c["tau_increment"], "classify.tau_increment");
        if (c.contains("grid_step")) rc.classify.grid_step = positive(c["grid_step"], "classify.grid_step");
        if (c.contains("side")) {
            const std::string side = string(c["side"], "classify.side");
            if (side == "both") rc.classify.side = TimeSide::both;
            else if (side == "forward") rc.classify.side = TimeSide::forward;
            else if (side == "backward") rc.classify.side = TimeSide::backward;
            else throw SchemaError("classify.side: must be both, forward or backward");
        }
    }
    if (cfg.contains("reading")) {
        const std::string r = string(cfg["reading"], "reading");
        if (r == "scaled-family") rc.rejected_reading = false;
        else if (r == "decreasing-planck") rc.rejected_reading = true;
        else throw SchemaError("reading: must be scaled-family or decreasing-planck");
    }
    if (cfg.contains("classical_dt")) rc.classical_dt = positive(cfg["classical_dt"], "classical_dt");
    if (cfg.contains("seed")) {
        if (!cfg["seed"].is_number_integer()) throw SchemaError("seed: expected an integer");
        rc.seed = cfg["seed"].get<std::int64_t>();
    }
    if (cfg.contains("output")) {
        const json& o = cfg["output"];
        allow_keys(o, "output", {"dir", "formats"});
        if (o.contains("dir")) rc.out_dir = string(o["dir"], "output.dir");
        if (o.contains("formats")) {
            rc.formats.clear();
            for (const auto& f : o["formats"]) {
                const std::string s = string(f, "output.formats");
                if (s != "json" && s != "csv") throw SchemaError("output.formats: only json and csv");
                rc.formats.push_back(s);
            }
        }
    }

    if (rc.mode == Mode::reduce || rc.mode == Mode::squeeze || rc.mode == Mode::ehrenfest) {
        try {
            p.validate();
        } catch (const Error& e) {
            throw SchemaError(std::string("problem: ") + e.what());
        }
    }
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("config: cannot read '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace qcr
