#include "flexwave/cli/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "flexwave/errors.hpp"

namespace flexwave::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError(path, "empty path component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError(path, "cannot descend into a non-object");
      *node = json::object();
    }
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
}

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
  }
}

const json& section(const json& j, const std::string& name, bool required) {
  static const json empty = json::object();
  if (!j.contains(name)) {
    if (required) throw ConfigError(name, "missing");
    return empty;
  }
  const json& s = j.at(name);
  if (!s.is_object()) throw ConfigError(name, "must be an object");
  return s;
}

double number(const json& obj, const std::string& where, const std::string& key) {
  const std::string field = where + "." + key;
  if (!obj.contains(key)) throw ConfigError(field, "missing");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

double number_or(const json& obj, const std::string& where, const std::string& key,
                 double fallback) {
  return obj.contains(key) ? number(obj, where, key) : fallback;
}

long integer_or(const json& obj, const std::string& where, const std::string& key, long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key, "must be an integer");
  return v.get<long>();
}

VorticityProfile parse_vorticity(const json& v, double p0, const fs::path& base,
                                 json& resolved) {
  check_keys(v, "vorticity", {"kind", "gamma0", "samples", "csv"});
  std::string kind = "zero";
  if (v.contains("kind")) {
    if (!v.at("kind").is_string()) throw ConfigError("vorticity.kind", "must be a string");
    kind = v.at("kind").get<std::string>();
  }
  try {
    if (kind == "zero") {
      resolved = {{"kind", "zero"}};
      return VorticityProfile::zero(p0);
    }
    if (kind == "constant") {
      const double g0 = number(v, "vorticity", "gamma0");
      resolved = {{"kind", "constant"}, {"gamma0", g0}};
      return VorticityProfile::constant(g0, p0);
    }
    if (kind == "tabulated") {
      VorticityProfile prof = VorticityProfile::zero(p0);
      if (v.contains("samples")) {
        const json& s = v.at("samples");
        if (!s.is_array()) throw ConfigError("vorticity.samples", "must be an array of [p, gamma]");
        std::vector<std::pair<double, double>> pts;
        for (const auto& e : s) {
          if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            throw ConfigError("vorticity.samples", "entries must be [p, gamma] pairs");
          }
          pts.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
        prof = VorticityProfile::tabulated(std::move(pts));
      } else if (v.contains("csv")) {
        if (!v.at("csv").is_string()) throw ConfigError("vorticity.csv", "must be a path");
        fs::path path = v.at("csv").get<std::string>();
        if (path.is_relative() && !base.empty()) path = base / path;
        prof = VorticityProfile::from_csv(path);
      } else {
        throw ConfigError("vorticity.samples", "missing (or give vorticity.csv)");
      }
      if (prof.p0() != p0) {
        throw ConfigError("vorticity.samples", "first sample must sit at physical.p0");
      }
      json samples = json::array();
      for (const auto& [p, g] : prof.samples()) samples.push_back({p, g});
      resolved = {{"kind", "tabulated"}, {"samples", samples}};
      return prof;
    }
  } catch (const DomainError& e) {
    throw ConfigError("vorticity", e.what());
  }
  throw ConfigError("vorticity.kind", "expected zero, constant or tabulated, got '" + kind + "'");
}

}  // namespace

RunConfig parse_config(const json& j, const std::string& out_flag, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  check_keys(j, "", {"physical", "vorticity", "numerics", "output"});
  RunConfig c;

  const json& ph = section(j, "physical", true);
  check_keys(ph, "physical", {"g", "depth", "p0", "alpha"});
  c.physical.g = number(ph, "physical", "g");
  c.physical.d = number(ph, "physical", "depth");
  c.physical.p0 = number(ph, "physical", "p0");
  c.physical.alpha = number(ph, "physical", "alpha");
  if (!(c.physical.g > 0)) throw ConfigError("physical.g", "must be positive");
  if (!(c.physical.d > 0)) throw ConfigError("physical.depth", "must be positive");
  if (!(c.physical.p0 < 0)) throw ConfigError("physical.p0", "must be negative");
  if (!(c.physical.alpha > 0)) throw ConfigError("physical.alpha", "must be positive");
  validate(c.physical);

  json vres;
  c.profile = parse_vorticity(section(j, "vorticity", false), c.physical.p0, base_dir, vres);

  const json& nu = section(j, "numerics", false);
  check_keys(nu, "numerics", {"n_q", "n_p", "laminar_points", "newton_tol", "s_max", "n_steps"});
  Numerics& n = c.numerics;
  const long nq = integer_or(nu, "numerics", "n_q", static_cast<long>(n.n_q));
  const long np = integer_or(nu, "numerics", "n_p", static_cast<long>(n.n_p));
  const long nl = integer_or(nu, "numerics", "laminar_points", static_cast<long>(n.laminar_points));
  if (nq < 8 || (nq & (nq - 1)) != 0) throw ConfigError("numerics.n_q", "must be a power of two >= 8");
  if (np < 9 || np % 2 == 0) throw ConfigError("numerics.n_p", "must be odd and >= 9");
  if (nl < 9 || nl % 2 == 0) throw ConfigError("numerics.laminar_points", "must be odd and >= 9");
  n.n_q = static_cast<std::size_t>(nq);
  n.n_p = static_cast<std::size_t>(np);
  n.laminar_points = static_cast<std::size_t>(nl);
  n.newton_tol = number_or(nu, "numerics", "newton_tol", n.newton_tol);
  if (!(n.newton_tol > 0)) throw ConfigError("numerics.newton_tol", "must be positive");
  n.s_max = number_or(nu, "numerics", "s_max", n.s_max);
  if (!(n.s_max > 0)) throw ConfigError("numerics.s_max", "must be positive");
  const long steps = integer_or(nu, "numerics", "n_steps", n.n_steps);
  if (steps < 0 || steps > 10000) throw ConfigError("numerics.n_steps", "must be in [0, 10000]");
  n.n_steps = static_cast<int>(steps);

  const json& out = section(j, "output", false);
  check_keys(out, "output", {"dir"});
  if (!out_flag.empty()) {
    c.out_dir = out_flag;
  } else if (out.contains("dir")) {
    if (!out.at("dir").is_string()) throw ConfigError("output.dir", "must be a string");
    c.out_dir = out.at("dir").get<std::string>();
  } else if (const char* env = std::getenv(kOutEnv); env && *env) {
    c.out_dir = env;
  } else {
    c.out_dir = kDefaultOutDir;
  }

  c.resolved = {{"physical",
                 {{"g", c.physical.g},
                  {"depth", c.physical.d},
                  {"p0", c.physical.p0},
                  {"alpha", c.physical.alpha}}},
                {"vorticity", vres},
                {"numerics",
                 {{"n_q", n.n_q},
                  {"n_p", n.n_p},
                  {"laminar_points", n.laminar_points},
                  {"newton_tol", n.newton_tol},
                  {"s_max", n.s_max},
                  {"n_steps", n.n_steps}}}};
  return c;
}

json load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace flexwave::cli
