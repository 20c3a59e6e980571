#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace repgars::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one subcommand: synth, ingest, render-preview, corrupt, train, eval,
/// ablate, sweep or report. Returns the process exit code.
int cmd_dispatch(int argc, char** argv);

/// Convenience overload for tests; argv[0] is supplied.
int cmd_dispatch(const std::vector<std::string>& args);

/// Consolidates metrics from run directories into `out_dir` (or stdout only
/// when out_dir is empty).
int cmd_report(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir,
               std::ostream& out);

}  // namespace repgars::cli
