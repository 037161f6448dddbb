#include "flexwave/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <regex>
#include <sstream>
#include <thread>

#include "flexwave/continuation.hpp"
#include "flexwave/errors.hpp"
#include "flexwave/io.hpp"
#include "flexwave/oracles.hpp"
#include "flexwave/reconstruct.hpp"
#include "flexwave/sturm.hpp"

namespace flexwave::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPbfTol = 1e-9;
constexpr double kLaminarTol = 1e-9;
constexpr double kWronskianTol = 1e-8;

void prepare_dir(const RunConfig& cfg, const std::vector<std::string>& stale) {
  fs::create_directories(cfg.out_dir);
  for (const auto& name : stale) fs::remove(cfg.out_dir / name);
  io::write_json(cfg.out_dir / "config.json", cfg.resolved);
}

void remove_point_files(const fs::path& dir) {
  static const std::regex pat(R"(point_\d{3}_(fields\.csv|surface\.csv|report\.json))");
  std::vector<fs::path> doomed;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (std::regex_match(e.path().filename().string(), pat)) doomed.push_back(e.path());
  }
  for (const auto& p : doomed) fs::remove(p);
}

std::string point_stem(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "point_%03zu", k);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Conditions {
  ExistenceCheck cond1;
  double theta = NAN;
  Cond2 cond2{NAN, false};
};

// COND1, then theta and COND2 when COND1 holds. Writes conditions.json.
Conditions evaluate_conditions(const RunConfig& cfg, const LaminarFlow* flow) {
  Conditions c;
  c.cond1 = check_existence(cfg.profile, cfg.physical.d);
  if (c.cond1.holds) {
    if (flow) {
      c.theta = flow->theta;
      c.cond2 = cond2_value(*flow, cfg.physical);
    } else {
      const auto f = build_laminar(cfg.profile, cfg.physical, cfg.numerics.laminar_points);
      c.theta = f.theta;
      c.cond2 = cond2_value(f, cfg.physical);
    }
  }
  json j = {{"cond1", c.cond1.holds},
            {"limit", number_or_null(c.cond1.limit)},
            {"theta", number_or_null(c.theta)},
            {"cond2_value", number_or_null(c.cond2.value)},
            {"cond2", c.cond1.holds && c.cond2.holds}};
  io::write_json(cfg.out_dir / "conditions.json", j);
  return c;
}

template <class Body>
int guarded(std::ostream& log, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const io::IoError& e) {
    log << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const ConditionFailed& e) {
    log << "condition failed: " << e.what() << "\n";
    return kCondition;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const DomainError& e) {
    log << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return kConfig;
  }
}

void write_laminar_csv(const fs::path& path, const LaminarFlow& flow, const PhysicalParams& ph) {
  io::CsvTable t;
  t.set_meta("theta", flow.theta);
  t.set_meta("depth", ph.d);
  t.set_meta("p0", ph.p0);
  t.columns = {"p", "H", "a"};
  for (std::size_t i = 0; i < flow.size(); ++i) t.rows.push_back({flow.p[i], flow.H[i], flow.a[i]});
  io::write_csv(path, t);
}

double wronskian_relative(const LaminarFlow& flow, const PhysicalParams& ph, double lambda,
                          double mu) {
  const auto f = shoot_f1(flow, lambda, mu);
  const double l4 = std::pow(lambda, 4), a0 = flow.a.back();
  const double A = (ph.g * l4 + ph.alpha * mu * mu) * f.f0, B = l4 * a0 * a0 * a0 * f.fp0;
  return std::abs(A - B) / (std::abs(A) + std::abs(B));
}

// verification table
struct Row {
  std::string name;
  double value;
  double tol;
  bool pass() const { return value <= tol; }
};

void flag_row(std::vector<Row>& rows, const std::string& name, bool ok) {
  rows.push_back({name, ok ? 0.0 : 1.0, 0.0});
}

void verify_laminar(const fs::path& dir, const RunConfig& cfg, std::vector<Row>& rows) {
  const auto t = io::read_csv(dir / "laminar.csv");
  const auto p = t.column_values("p"), H = t.column_values("H"), a = t.column_values("a");
  const double theta = t.meta_number("theta");
  const std::size_t n = p.size();
  if (n < 3) throw io::IoError("laminar.csv: too few rows");
  const double dp = (p.back() - p.front()) / static_cast<double>(n - 1);
  double grid = std::abs(p.front() - cfg.physical.p0) + std::abs(p.back());
  double bern = 0.0, slope = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    grid = std::max(grid, std::abs(p[i] - (p.front() + dp * static_cast<double>(i))));
    bern = std::max(bern, std::abs(a[i] * a[i] - (theta - 2.0 * eval_Gamma(cfg.profile, p[i]))));
    if (!(a[i] > 0)) bern = INFINITY;
  }
  // corrected trapezoid for H' = 1/a, H'' = gamma/a^3
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = p[i + 1] - p[i];
    const double s0 = eval_gamma(cfg.profile, p[i]) / std::pow(a[i], 3);
    const double s1 = eval_gamma(cfg.profile, p[i + 1]) / std::pow(a[i + 1], 3);
    const double pred = 0.5 * h * (1.0 / a[i] + 1.0 / a[i + 1]) - h * h * (s1 - s0) / 12.0;
    slope = std::max(slope, std::abs(H[i + 1] - H[i] - pred) / h);
  }
  rows.push_back({"laminar.grid", grid, 1e-12});
  rows.push_back({"laminar.bed", std::abs(H.front() + cfg.physical.d), 1e-12});
  rows.push_back({"laminar.surface", std::abs(H.back()), 1e-12});
  rows.push_back({"laminar.bernoulli", bern, kLaminarTol});
  rows.push_back({"laminar.slope", slope, kLaminarTol});
}

void verify_conditions(const fs::path& dir, const RunConfig& cfg, std::vector<Row>& rows) {
  const auto j = io::read_json(dir / "conditions.json");
  const auto c1 = check_existence(cfg.profile, cfg.physical.d);
  flag_row(rows, "conditions.cond1", j.at("cond1").get<bool>() == c1.holds);
  if (c1.holds && j.at("cond2_value").is_number()) {
    const auto flow = build_laminar(cfg.profile, cfg.physical, cfg.numerics.laminar_points);
    const auto c2 = cond2_value(flow, cfg.physical);
    const double stored = j.at("cond2_value").get<double>();
    rows.push_back({"conditions.cond2_value", std::abs(stored - c2.value) / std::abs(c2.value), 1e-10});
    flag_row(rows, "conditions.cond2", j.at("cond2").get<bool>() == c2.holds);
  }
}

void verify_bifurcation(const fs::path& dir, const RunConfig& cfg, std::vector<Row>& rows) {
  const auto j = io::read_json(dir / "bifurcation.json");
  const double C0 = j.at("C0").get<double>(), ls = j.at("lambda_star").get<double>();
  const double tr = j.at("transversality").get<double>();
  const auto flow = build_laminar(cfg.profile, cfg.physical, cfg.numerics.laminar_points);
  rows.push_back({"bifurcation.scaling", std::abs(C0 * ls * ls / (kTwoPi * kTwoPi) - 1.0), 1e-12});
  rows.push_back({"bifurcation.wronskian", wronskian_relative(flow, cfg.physical, ls, C0 * ls * ls),
                  kWronskianTol});
  rows.push_back({"bifurcation.transversality_sign", tr, 0.0});
  if (tr == 0.0) rows.back().tol = -1.0;
}

void verify_branch(const fs::path& dir, const RunConfig& cfg, std::vector<Row>& rows) {
  const auto t = io::read_csv(dir / "branch.csv");
  const auto lam = t.column_values("lambda"), crest = t.column_values("eta_crest");
  std::map<std::size_t, LaminarFlow> flows;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const std::string stem = point_stem(k);
    const auto s = io::read_solution(dir, stem);
    auto it = flows.find(s.n_p);
    if (it == flows.end()) {
      it = flows.emplace(s.n_p, build_laminar(cfg.profile, cfg.physical, s.n_p)).first;
    }
    const LaminarFlow& flow = it->second;
    if (s.n_q < 8 || s.n_q % 2 != 0 || s.n_p != flow.size()) {
      throw io::IoError(stem + ": unsupported grid");
    }
    rows.push_back({stem + ".lambda", std::abs(s.lambda - lam[k]) / lam[k], 1e-15});
    rows.push_back({stem + ".eta_crest", std::abs(s.eta[0] - crest[k]), 0.0});

    const auto rep = euler_residual(s, flow, cfg.physical);
    for (const auto& e : rep.entries) rows.push_back({stem + "." + e.name, e.value, e.tol});

    HeightField w = HeightField::zero(s.n_q, s.n_p, s.lambda);
    for (std::size_t i = 0; i < s.n_p; ++i) {
      for (std::size_t jj = 0; jj < w.cols(); ++jj) w(i, jj) = s.y[s.idx(i, jj)] - flow.H[i];
    }
    double pbf = INFINITY;
    try {
      pbf = residual_F(w, flow, cfg.physical).max_norm();
    } catch (const DomainError&) {
    }
    rows.push_back({stem + ".pbf", pbf, kPbfTol});

    const auto d = profile_diagnostics(s.eta, s.lambda);
    if (!d.degenerate) {
      rows.push_back({stem + ".crest_at_origin", d.crest_x, 0.0});
      flag_row(rows, stem + ".monotone", d.monotone);
      rows.push_back({stem + ".symmetry", d.symmetry_defect, 1e-10});
    }
  }
}

}  // namespace

int cmd_laminar(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    prepare_dir(cfg, {"laminar.csv", "conditions.json"});
    const auto c = evaluate_conditions(cfg, nullptr);
    if (!c.cond1.holds) {
      log << "COND1 fails: depth " << io::fmt(cfg.physical.d) << " >= limit "
          << io::fmt(c.cond1.limit) << "\n";
      return int(kCondition);
    }
    const auto flow = build_laminar(cfg.profile, cfg.physical, cfg.numerics.laminar_points);
    write_laminar_csv(cfg.out_dir / "laminar.csv", flow, cfg.physical);
    log << "theta = " << io::fmt(flow.theta) << ", cond2_value = " << io::fmt(c.cond2.value)
        << (c.cond2.holds ? "" : " (COND2 fails)") << "\n";
    return int(kOk);
  });
}

int cmd_bifurcate(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    prepare_dir(cfg, {"conditions.json", "bifurcation.json", "wronskian_scan.csv"});
    const auto c = evaluate_conditions(cfg, nullptr);
    if (!c.cond1.holds) {
      log << "COND1 fails: no laminar flow, nothing bifurcates\n";
      return int(kCondition);
    }
    if (!c.cond2.holds) {
      log << "COND2 fails: cond2_value = " << io::fmt(c.cond2.value)
          << " >= 1, no bifurcation from the laminar flow\n";
      return int(kCondition);
    }
    const auto flow = build_laminar(cfg.profile, cfg.physical, cfg.numerics.laminar_points);
    const auto bif = bifurcation_point(flow, cfg.physical);
    const auto tr = transversality(flow, cfg.physical, bif, cfg.numerics.n_q);

    json j = {{"C0", bif.C0},
              {"lambda_star", bif.lambda_star},
              {"mode_k", bif.mode_k},
              {"f1_surface", bif.f1_star.f0},
              {"f1_prime_surface", bif.f1_star.fp0},
              {"theta", flow.theta},
              {"cond2_value", c.cond2.value},
              {"transversality", tr.quadrature},
              {"transversality_closed_form", tr.closed_form},
              {"wronskian_relative",
               wronskian_relative(flow, cfg.physical, bif.lambda_star, bif.C0 * bif.lambda_star *
                                                                         bif.lambda_star)}};
    if (cfg.profile.kind() == VorticityProfile::Kind::zero) {
      j["oracle_lambda_star"] = oracles::irrotational_lambda_star(cfg.physical).value;
    }

    const double ls = bif.lambda_star, m0 = bif.C0 * ls * ls;
    std::vector<double> lams, mus;
    for (double f : {0.5, 0.75, 1.0, 1.5, 2.0}) lams.push_back(f * ls);
    for (int k = 0; k <= 8; ++k) mus.push_back(m0 * 0.25 * k);
    io::CsvTable scan;
    scan.set_meta("lambda_star", ls);
    scan.set_meta("C0", bif.C0);
    scan.columns = {"lambda", "mu", "W"};
    for (const auto& w : wronskian_scan(flow, cfg.physical, lams, mus)) {
      scan.rows.push_back({w.lambda, w.mu, w.W});
    }
    io::write_csv(cfg.out_dir / "wronskian_scan.csv", scan);
    io::write_json(cfg.out_dir / "bifurcation.json", j);
    log << "C0 = " << io::fmt(bif.C0) << ", lambda* = " << io::fmt(ls)
        << ", transversality = " << io::fmt(tr.quadrature) << "\n";
    return int(kOk);
  });
}

int cmd_branch(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    prepare_dir(cfg, {"conditions.json", "branch.csv"});
    remove_point_files(cfg.out_dir);
    const auto c = evaluate_conditions(cfg, nullptr);
    if (!c.cond1.holds || !c.cond2.holds) {
      log << (c.cond1.holds ? "COND2" : "COND1") << " fails: no bifurcating branch\n";
      return int(kCondition);
    }
    const auto& nu = cfg.numerics;
    const auto flow = build_laminar(cfg.profile, cfg.physical, nu.n_p);
    const auto bif = bifurcation_point(flow, cfg.physical);
    NewtonOptions opts;
    opts.tol = nu.newton_tol;
    const auto br = continue_branch(bif, nu.s_max, nu.n_steps, flow, cfg.physical, nu.n_q, opts);

    io::CsvTable t;
    t.set_meta("lambda_star", bif.lambda_star);
    t.set_meta("lambda_star_h", br.lambda_star_h);
    t.set_meta("complete", br.complete ? "true" : "false");
    t.set_meta("note", br.note);
    t.columns = {"s", "lambda", "eta_crest", "eta_trough", "residual"};
    bool verified = true;
    for (std::size_t k = 0; k < br.points.size(); ++k) {
      const auto& pt = br.points[k];
      const auto sol = fields_from_height(pt.field, flow, cfg.physical);
      const auto rep = euler_residual(sol, flow, cfg.physical);
      const double pbf = residual_F(pt.field, flow, cfg.physical).max_norm();
      const auto d = profile_diagnostics(sol.eta, sol.lambda);
      const std::string stem = point_stem(k);
      io::write_solution(cfg.out_dir, stem, sol);
      json r = {{"s", pt.s},
                {"lambda", pt.lambda},
                {"iterations", pt.iterations},
                {"newton_residual", pt.residual_norm},
                {"pbf_residual", pbf},
                {"profile",
                 {{"crest_x", d.crest_x},
                  {"trough_x", d.trough_x},
                  {"monotone", d.monotone},
                  {"degenerate", d.degenerate},
                  {"symmetry_defect", d.symmetry_defect},
                  {"mean", d.mean}}},
                {"euler", io::report_json(rep)}};
      io::write_json(cfg.out_dir / (stem + "_report.json"), r);
      t.rows.push_back({pt.s, pt.lambda, sol.eta[0], sol.eta[sol.n_q / 2], pt.residual_norm});
      const bool ok = rep.all_pass() && pbf <= kPbfTol;
      if (!ok) {
        const auto* f = rep.first_failure();
        log << stem << ": residual check failed (" << (f ? f->name : std::string("pbf")) << ")\n";
      }
      verified = verified && ok;
    }
    io::write_csv(cfg.out_dir / "branch.csv", t);
    log << br.points.size() << " branch points, lambda*_h = " << io::fmt(br.lambda_star_h) << "\n";
    if (!br.complete) {
      log << br.note << "\n";
      return int(kNumerical);
    }
    return int(verified ? kOk : kVerification);
  });
}

int cmd_verify(const fs::path& dir, const RunConfig* cfg_in, std::ostream& out) {
  return guarded(out, [&] {
    if (!fs::is_directory(dir)) throw io::IoError("not a directory: " + dir.string());
    RunConfig cfg;
    if (cfg_in) {
      cfg = *cfg_in;
    } else {
      cfg = parse_config(io::read_json(dir / "config.json"), dir.string());
    }
    std::vector<Row> rows;
    bool any = false;
    try {
      if (fs::exists(dir / "conditions.json")) any = true, verify_conditions(dir, cfg, rows);
      if (fs::exists(dir / "laminar.csv")) any = true, verify_laminar(dir, cfg, rows);
      if (fs::exists(dir / "bifurcation.json")) any = true, verify_bifurcation(dir, cfg, rows);
      if (fs::exists(dir / "branch.csv")) any = true, verify_branch(dir, cfg, rows);
    } catch (const json::exception& e) {
      throw io::IoError(std::string("malformed output file: ") + e.what());
    } catch (const std::out_of_range& e) {
      throw io::IoError(std::string("malformed output file: ") + e.what());
    }
    if (!any) throw io::IoError("no outputs to verify in " + dir.string());

    std::size_t width = 8;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    const Row* failed = nullptr;
    out << std::left << std::setw(static_cast<int>(width)) << "check" << "  "
        << std::setw(24) << "value" << "  " << std::setw(24) << "tol" << "  result\n";
    for (const auto& r : rows) {
      out << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::setw(24)
          << io::fmt(r.value) << "  " << std::setw(24) << io::fmt(r.tol) << "  "
          << (r.pass() ? "PASS" : "FAIL") << "\n";
      if (!r.pass() && !failed) failed = &r;
    }
    if (failed) {
      out << "verification failed: " << failed->name << "\n";
      return int(kVerification);
    }
    out << "all " << rows.size() << " checks passed\n";
    return int(kOk);
  });
}

SweepAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw ConfigError(text, "--vary expects key=v1,v2,...");
  }
  SweepAxis ax;
  ax.key = text.substr(0, eq);
  std::stringstream ss(text.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (v.empty()) throw ConfigError(ax.key, "empty sweep value");
    ax.values.push_back(v);
  }
  return ax;
}

int cmd_sweep(const json& base, const std::string& command, const std::vector<SweepAxis>& axes,
              unsigned jobs, const fs::path& out_dir, const fs::path& base_dir, std::ostream& log) {
  return guarded(log, [&]() -> int {
    if (command != "laminar" && command != "bifurcate" && command != "branch") {
      throw ConfigError("--command", "expected laminar, bifurcate or branch");
    }
    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.values.size();
    fs::create_directories(out_dir);

    struct Run {
      std::vector<std::string> values;
      int code = 0;
      std::string log;
      fs::path dir;
    };
    std::vector<Run> runs(total);
    for (std::size_t r = 0; r < total; ++r) {
      std::size_t rem = r;
      runs[r].values.resize(axes.size());
      for (std::size_t a = axes.size(); a-- > 0;) {
        runs[r].values[a] = axes[a].values[rem % axes[a].values.size()];
        rem /= axes[a].values.size();
      }
      char name[24];
      std::snprintf(name, sizeof name, "run_%04zu", r);
      runs[r].dir = out_dir / name;
    }

    auto execute = [&](Run& run) {
      std::ostringstream os;
      run.code = guarded(os, [&] {
        json j = base;
        for (std::size_t a = 0; a < axes.size(); ++a) {
          apply_override(j, axes[a].key + "=" + run.values[a]);
        }
        const auto cfg = parse_config(j, run.dir.string(), base_dir);
        if (command == "laminar") return cmd_laminar(cfg, os);
        if (command == "bifurcate") return cmd_bifurcate(cfg, os);
        return cmd_branch(cfg, os);
      });
      run.log = os.str();
    };
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t r; (r = next.fetch_add(1)) < total;) execute(runs[r]);
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    // text CSV: sweep values are written as given
    std::ostringstream csv;
    csv << "index";
    for (const auto& ax : axes) csv << "," << ax.key;
    csv << ",exit_code,theta,lambda_star\n";
    for (std::size_t r = 0; r < total; ++r) {
      const auto& run = runs[r];
      std::string theta = "nan", ls = "nan";
      if (fs::exists(run.dir / "conditions.json")) {
        const auto c = io::read_json(run.dir / "conditions.json");
        if (c.at("theta").is_number()) theta = io::fmt(c.at("theta").get<double>());
      }
      if (fs::exists(run.dir / "bifurcation.json")) {
        ls = io::fmt(io::read_json(run.dir / "bifurcation.json").at("lambda_star").get<double>());
      } else if (fs::exists(run.dir / "branch.csv")) {
        ls = io::read_csv(run.dir / "branch.csv").meta_value("lambda_star");
      }
      csv << r;
      for (const auto& v : run.values) csv << "," << (v.find(',') == std::string::npos ? v : "\"" + v + "\"");
      csv << "," << run.code << "," << theta << "," << ls << "\n";
      log << run.dir.filename().string() << ": exit " << run.code << "\n" << run.log;
    }
    std::ofstream f(out_dir / "sweep.csv");
    f << csv.str();
    if (!f) throw io::IoError("cannot write sweep.csv");
    return int(kOk);
  });
}

}  // namespace flexwave::cli
