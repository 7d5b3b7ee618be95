#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcr/reduction.hpp"
#include "qcr/spectral.hpp"

namespace qcr {

using json = nlohmann::json;

// Malformed configuration (CLI exit code 2).
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { reduce, classify_classical, classify_quantum, comparator_audit, scale, squeeze, ehrenfest };
Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);
const std::vector<std::string>& mode_names();
const std::vector<std::string>& preset_names();

// Built-in corpus entry merged under the user's config (user keys win).
json preset_config(const std::string& name);

struct QuantumStateConfig {
    std::string kind = "packet";  // packet | eigenstates
    std::vector<int> indices;
    std::vector<double> weights;
};

struct RunConfig {
    Mode mode = Mode::reduce;
    json source;    // config as given (hash input)
    json resolved;  // after preset merge
    ReductionProblem problem;

    // mode-specific parameters
    std::vector<double> radii;
    std::vector<double> horizons;
    std::vector<double> dilations;
    std::vector<double> lambdas;
    std::vector<std::pair<std::string, double>> quantities;
    std::vector<PhasePoint> audit_points;
    std::string method = "grid";  // classify-quantum: grid | matrix
    QuantumStateConfig state;
    ClassifyOptions classify;
    bool rejected_reading = false;
    double classical_dt = 1e-3;
    std::int64_t seed = 0;

    std::string out_dir = "out";
    std::vector<std::string> formats{"json", "csv"};
};

// Validates against the schema and builds the problem. Throws SchemaError.
RunConfig parse_config(const json& config);
RunConfig load_config(const std::string& path);

}  // namespace qcr
