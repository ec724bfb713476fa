#pragma once

#include "vaxdyn/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace vaxdyn {

struct RunOptions {
    std::filesystem::path out_dir; ///< empty: config output.dir, else out/<name>
    std::optional<int> grid_n;
    bool svg      = false;
    unsigned threads = 0; ///< 0: all cores
};

/// Executes one analysis and writes its artifacts, printing one summary line
/// per file to `out`. Module errors propagate as exceptions.
void run_scenario(const ScenarioConfig& cfg, Analysis analysis, const RunOptions& opt,
                  std::ostream& out);

/// Thread count from VAXDYN_THREADS (unset or 0: all cores).
/// Throws ConfigError for values that are not non-negative integers.
unsigned threads_from_env();

/// Whole command line: `<command> <config> [--out DIR] [--grid N] [--svg]`.
/// Returns 0 on success, 2 for usage or configuration errors, 1 for
/// analysis errors.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace vaxdyn
