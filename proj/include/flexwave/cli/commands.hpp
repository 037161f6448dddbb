#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "flexwave/cli/config.hpp"

namespace flexwave::cli {

// Each command creates cfg.out_dir, writes config.json (the resolved config)
// and its own files, logs to `log`, and returns an ExitCode.
int cmd_laminar(const RunConfig& cfg, std::ostream& log);
int cmd_bifurcate(const RunConfig& cfg, std::ostream& log);
int cmd_branch(const RunConfig& cfg, std::ostream& log);

// Re-checks whatever outputs are present in `dir`. Without `cfg` the
// config.json stored in `dir` is used.
int cmd_verify(const std::filesystem::path& dir, const RunConfig* cfg, std::ostream& out);

struct SweepAxis {
  std::string key;                  // dotted path
  std::vector<std::string> values;  // raw override texts
};

SweepAxis parse_axis(const std::string& text);  // "key=v1,v2,..."

// Cartesian product of the axes (last axis varies fastest), run_NNNN
// subdirectories under `out_dir`, `jobs` worker threads, sweep.csv in index order.
int cmd_sweep(const nlohmann::json& base, const std::string& command,
              const std::vector<SweepAxis>& axes, unsigned jobs,
              const std::filesystem::path& out_dir, const std::filesystem::path& base_dir,
              std::ostream& log);

// Full command-line front end; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flexwave::cli
