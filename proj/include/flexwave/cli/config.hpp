#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexwave/laminar.hpp"
#include "flexwave/vorticity.hpp"
#include "json.hpp"

namespace flexwave::cli {

enum ExitCode : int { kOk = 0, kConfig = 1, kCondition = 2, kNumerical = 3, kVerification = 4 };

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : std::runtime_error("config field '" + field + "': " + msg), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline constexpr const char* kOutEnv = "FLEXWAVE_OUT";
inline constexpr const char* kDefaultOutDir = "flexwave_out";

struct Numerics {
  std::size_t n_q = 64;
  std::size_t n_p = 129;
  std::size_t laminar_points = 257;
  double newton_tol = 1e-10;
  double s_max = 5e-3;
  int n_steps = 5;
};

struct RunConfig {
  PhysicalParams physical;
  VorticityProfile profile = VorticityProfile::zero(-1.0);
  Numerics numerics;
  std::filesystem::path out_dir;
  nlohmann::json resolved;  // normalised config, written next to the outputs
};

// "a.b.c=value": value is parsed as JSON when possible, otherwise kept as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

// Throws ConfigError naming the offending field. `out_flag` (may be empty)
// wins over output.dir, which wins over $FLEXWAVE_OUT, then kDefaultOutDir.
// Relative vorticity csv paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& j, const std::string& out_flag = "",
                       const std::filesystem::path& base_dir = {});

nlohmann::json load_config_file(const std::filesystem::path& path);

}  // namespace flexwave::cli
