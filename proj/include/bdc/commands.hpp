#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace bdc {

// Everything a command run needs, filled from CLI flags.  The seed default is
// the documented reproducibility constant: identical config (including seed)
// must reproduce identical report bytes.
struct ExperimentConfig {
    std::string chain;           // path to a spec file, or inline JSON ("{...}")
    std::string format = "json";  // "json" | "csv"
    std::uint64_t seed = 42;
    std::string out_path;  // empty: stdout

    // analyze / criterion
    std::int64_t table_rows = 10;      // ratio-table prefix length to echo
    std::int64_t horizon = 100000;     // classification / partial-sum horizon

    // verify
    std::int64_t oracle_top = 1000;  // truncation level N for oracle solves
    double tolerance = 1e-9;         // float-mode comparison tolerance

    // simulate
    std::vector<std::int64_t> m_grid = {10, 100, 1000, 10000};
    std::uint64_t paths = 10000;
    std::string stopping = "truncation";  // "truncation" | "interval-exit"
    int workers = 1;                      // never echoed: must not affect output
};

struct CommandResult {
    nlohmann::ordered_json body;
    int exit_code = 0;  // 0 ok, 1 config, 2 verification failure, 3 inconclusive
};

CommandResult cmd_analyze(const ExperimentConfig& config);
CommandResult cmd_verify(const ExperimentConfig& config);
CommandResult cmd_simulate(const ExperimentConfig& config);
CommandResult cmd_criterion(const ExperimentConfig& config);

// Renders a report body as pretty JSON or flat CSV (sweep reports become
// (m, mean, ci_half_width, analytic_limit) rows; anything else flattens to
// key,value lines).
std::string render_report(const nlohmann::ordered_json& body, const std::string& format);

}  // namespace bdc
