#include <cstdlib>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "flexwave/cli/commands.hpp"
#include "flexwave/io.hpp"

namespace flexwave::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFooter = R"(Exit codes: 0 ok, 1 config/input, 2 condition failed, 3 numerical, 4 verification.
Output dir: --out, then output.dir in the config, then $FLEXWAVE_OUT, then ./flexwave_out.
Files (all numbers printed with 17 significant digits, see FORMATS.md):
  laminar.csv          p,H,a            (# theta, depth, p0)
  conditions.json      cond1, limit, theta, cond2_value, cond2
  bifurcation.json     C0, lambda_star, transversality, ...
  wronskian_scan.csv   lambda,mu,W
  branch.csv           s,lambda,eta_crest,eta_trough,residual  (# lambda_star, complete, note)
  point_NNN_fields.csv i,j,p,x,y,u,v,P
  point_NNN_surface.csv x,eta
  point_NNN_report.json residual report of point NNN
  sweep.csv            index,<varied keys>,exit_code,theta,lambda_star)";

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config, "JSON config file");
  sub->add_option("--set", c.sets, "override a config field, e.g. --set physical.alpha=0.25")
      ->take_all();
  sub->add_option("-o,--out", c.out, "output directory");
}

json build_json(const Common& c) {
  json j = c.config.empty() ? json::object() : load_config_file(c.config);
  for (const auto& s : c.sets) apply_override(j, s);
  return j;
}

fs::path base_of(const Common& c) {
  return c.config.empty() ? fs::path{} : fs::path(c.config).parent_path();
}

fs::path default_out() {
  const char* env = std::getenv(kOutEnv);
  return (env && *env) ? fs::path(env) : fs::path(kDefaultOutDir);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"flexwave: steady periodic hydroelastic waves with vorticity"};
  app.footer(kFooter);
  app.require_subcommand(1);

  Common lam, bif, bra, ver, swp;
  auto* s_lam = app.add_subcommand("laminar", "laminar flow and bifurcation conditions");
  add_common(s_lam, lam);
  auto* s_bif = app.add_subcommand("bifurcate", "critical wavelength, kernel and transversality");
  add_common(s_bif, bif);
  auto* s_bra = app.add_subcommand("branch", "small-amplitude branch and physical fields");
  add_common(s_bra, bra);

  auto* s_ver = app.add_subcommand("verify", "re-check stored outputs against every residual");
  std::string vdir;
  s_ver->add_option("-d,--dir", vdir, "directory holding the outputs");
  s_ver->add_option("-c,--config", ver.config, "config (default: <dir>/config.json)");
  s_ver->add_option("--set", ver.sets, "override a config field")->take_all();

  auto* s_swp = app.add_subcommand("sweep", "grid of runs over config values");
  add_common(s_swp, swp);
  std::string command = "bifurcate";
  std::vector<std::string> vary;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  s_swp->add_option("--command", command, "laminar, bifurcate or branch")
      ->check(CLI::IsMember({"laminar", "bifurcate", "branch"}));
  s_swp->add_option("--vary", vary, "key=v1,v2,... (repeatable)")->required()->take_all();
  s_swp->add_option("-j,--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? int(kOk) : int(kConfig);
  }

  try {
    if (s_ver->parsed()) {
      fs::path dir = vdir.empty() ? default_out() : fs::path(vdir);
      if (ver.config.empty() && ver.sets.empty()) return cmd_verify(dir, nullptr, out);
      const auto cfg = parse_config(build_json(ver), dir.string(), base_of(ver));
      return cmd_verify(dir, &cfg, out);
    }
    if (s_swp->parsed()) {
      json j = build_json(swp);
      fs::path dir;
      if (!swp.out.empty()) {
        dir = swp.out;
      } else if (j.contains("output") && j["output"].contains("dir") && j["output"]["dir"].is_string()) {
        dir = j["output"]["dir"].get<std::string>();
      } else {
        dir = default_out();
      }
      std::vector<SweepAxis> axes;
      for (const auto& v : vary) axes.push_back(parse_axis(v));
      return cmd_sweep(j, command, axes, jobs, dir, base_of(swp), out);
    }
    const Common& c = s_lam->parsed() ? lam : s_bif->parsed() ? bif : bra;
    const auto cfg = parse_config(build_json(c), c.out, base_of(c));
    if (s_lam->parsed()) return cmd_laminar(cfg, out);
    if (s_bif->parsed()) return cmd_bifurcate(cfg, out);
    return cmd_branch(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << "\n";
    return kConfig;
  }
}

}  // namespace flexwave::cli
