#pragma once

#include "frontal/scene_file.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace frontal {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitVerdict = 1, kExitInput = 2, kExitAccuracy = 3 };

struct RunOptions {
    double tol = 1e-6;
    int grid = 256;
    int samples = 2000;
    std::uint64_t seed = 1;
    /// 0 uses every hardware thread. Not echoed: reports do not depend on it.
    int threads = 0;
    bool allow_second_kind = false;
    /// Directory for CSV plot data; empty disables.
    std::string emit_csv;
    ParameterMap parameters;
};

struct RunOutcome {
    nlohmann::ordered_json report;
    int exit_code = kExitOk;
};

/// Subcommands: singular, tau, morse, verify, all, catalog.
bool is_subcommand(const std::string& command);

/// Runs one subcommand on a scene file or catalog name. Errors become an
/// `error` entry in the report and the matching exit code.
RunOutcome run(const std::string& command, const std::string& scene, const RunOptions& options);

/// `all` over every built-in scene: an array of reports, worst exit code.
RunOutcome run_catalog(const std::string& command, const RunOptions& options);

/// `catalog`: built-in names, descriptions, parameters and expected values.
nlohmann::ordered_json catalog_listing();

/// JSON text with a fixed layout; floating-point numbers use 17 significant digits.
std::string format_json(const nlohmann::ordered_json& doc);

} // namespace frontal
