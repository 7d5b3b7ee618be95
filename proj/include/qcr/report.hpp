#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcr/config.hpp"
#include "qcr/scaling.hpp"

namespace qcr {

std::string tool_version();

// FNV-1a 64 over the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const json& config);

// Non-finite numbers are written as null and read back as +inf.
json number_json(double v);
double number_from_json(const json& j);

json to_json(const PhasePoint& a);
PhasePoint phase_point_from_json(const json& j);

json to_json(const ComparatorScalars& s);
json to_json(const TheoremBound& b);
json to_json(const RunReport& r);
RunReport run_report_from_json(const json& j);
json to_json(const ReductionReport& r);
ReductionReport reduction_report_from_json(const json& j);

json to_json(const ClassicalClassification& c);
json to_json(const QuantumClassification& c);
json to_json(const CoherentElements& e, const PhasePoint& alpha);
json to_json(const SqueezeTable& t);
json to_json(const HeppTable& t);
json to_json(const EhrenfestCurves& c);

// CSV writers. The first line is "# reduce <version> config=<hash>", the second the header.
void write_csv_preamble(std::ostream& out, const std::string& hash);
// run, t, error_max, error_1..error_2n, delta1, duhamel, delta2, inv_norm_U, inv_norm_W,
// member_U, member_W, bound_general, bound_closed, bound_duhamel
std::vector<std::string> reduction_csv_columns(int n);
void write_reduction_csv(const ReductionReport& r, std::ostream& out, const std::string& hash);
// d, duhamel_term, comparator_term, total_bound
void write_squeeze_csv(const SqueezeTable& t, std::ostream& out, const std::string& hash);
// lambda, error, bound
void write_hepp_csv(const HeppTable& t, std::ostream& out, const std::string& hash);
// t, identity_residual, classicality_gap
void write_ehrenfest_csv(const EhrenfestCurves& c, std::ostream& out, const std::string& hash);
// xi_1..xi_n, pi_1..pi_n, alpha_sq, diag, measured_diag, inv_norm_sq, measured_inv_norm_sq,
// one_minus_bound, one_minus_sqrt_bound, measured_one_minus
void write_audit_csv(const std::vector<std::pair<PhasePoint, CoherentElements>>& rows, std::ostream& out,
                     const std::string& hash);

// Reads a CSV written by the functions above: skips the preamble, returns header and rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(std::istream& in);

}  // namespace qcr
