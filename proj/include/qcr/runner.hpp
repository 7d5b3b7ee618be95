#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcr/report.hpp"

namespace qcr {

struct RunOptions {
    bool assert_reduced = false;
    std::optional<std::string> out_dir;               // overrides output.dir
    std::optional<std::vector<std::string>> formats;  // overrides output.formats
    bool write_files = true;
};

struct RunOutput {
    int exit_code = 0;  // 0 ok, 1 not reduced under assert_reduced, 2 schema, 3 numerical failure
    json report;        // report document, or a diagnostic on exit 2/3
    std::map<std::string, std::string> csv;  // file name -> contents
    std::vector<std::string> written;        // paths written
};

// Validates, runs the configured mode and (optionally) writes report.json and CSV files.
RunOutput run_config(const json& config, const RunOptions& options = {});
RunOutput run_file(const std::string& path, const RunOptions& options = {});

}  // namespace qcr
