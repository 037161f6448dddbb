#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "flexwave/cli/commands.hpp"
#include "flexwave/io.hpp"
#include "flexwave/oracles.hpp"

using namespace flexwave;
using namespace flexwave::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
  fs::path root;
  Scratch() {
    root = fs::temp_directory_path() / ("flexwave_cli_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() { fs::remove_all(root); }
};

const Scratch& scratch() {
  static Scratch s;
  return s;
}

fs::path tmp(const std::string& name) { return scratch().root / name; }

const json kRefConfig = {{"physical", {{"g", 1.0}, {"depth", 1.0}, {"p0", -2.0}, {"alpha", 0.5}}}};

fs::path write_config(const std::string& name, const json& j) {
  const auto p = tmp(name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "flexwave");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void corrupt_cell(const fs::path& csv, std::size_t data_row, const std::string& column,
                  const std::string& replacement) {
  std::ifstream in(csv);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  std::size_t header = 0;
  while (lines[header][0] == '#') ++header;
  std::vector<std::string> cols;
  {
    std::stringstream ss(lines[header]);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  }
  const std::size_t c = std::find(cols.begin(), cols.end(), column) - cols.begin();
  auto& line = lines[header + 1 + data_row];
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string x; std::getline(ss, x, ',');) cells.push_back(x);
  cells[c] = replacement;
  line.clear();
  for (std::size_t k = 0; k < cells.size(); ++k) line += (k ? "," : "") + cells[k];
  std::ofstream outf(csv);
  for (const auto& l : lines) outf << l << "\n";
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(u(rng) * 30));
    CHECK(std::stod(io::fmt(v)) == v);
  }
  const json j = {{"a", std::numeric_limits<double>::quiet_NaN()}, {"b", 0.1}, {"c", "x\"y"}};
  const auto back = json::parse(io::dump_json(j));
  CHECK(back["a"].is_null());
  CHECK(back["b"].get<double>() == 0.1);
  CHECK(back["c"] == "x\"y");
}

TEST_CASE("csv round trip keeps metadata and values") {
  io::CsvTable t;
  t.set_meta("lambda", 1.0 / 3.0);
  t.set_meta("note", "hello, world");
  t.columns = {"a", "b"};
  t.rows = {{0.1, -2e-300}, {1e300, 5.0}};
  io::write_csv(tmp("rt.csv"), t);
  const auto r = io::read_csv(tmp("rt.csv"));
  CHECK(r.meta_number("lambda") == 1.0 / 3.0);
  CHECK(r.meta_value("note") == "hello, world");
  CHECK(r.rows == t.rows);
  CHECK_THROWS_AS(r.column("c"), io::IoError);
}

TEST_CASE("dotted overrides") {
  json j = kRefConfig;
  apply_override(j, "physical.alpha=0.25");
  apply_override(j, "vorticity.kind=constant");
  apply_override(j, "numerics.n_q=32");
  CHECK(j["physical"]["alpha"].get<double>() == 0.25);
  CHECK(j["vorticity"]["kind"] == "constant");
  CHECK(j["numerics"]["n_q"].is_number_integer());
  CHECK_THROWS_AS(apply_override(j, "physical.alpha.x=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
}

TEST_CASE("config errors exit 1 and name the field") {
  json j = kRefConfig;
  j["physical"].erase("depth");
  auto r = run_cli({"laminar", "-c", write_config("nodepth", j).string(), "-o", tmp("nd").string()});
  CHECK(r.code == kConfig);
  CHECK(r.err.find("physical.depth") != std::string::npos);

  const auto bad = tmp("bad.json");
  std::ofstream(bad) << "{ not json";
  CHECK(run_cli({"laminar", "-c", bad.string()}).code == kConfig);
  CHECK(run_cli({"laminar", "-c", tmp("missing.json").string()}).code == kConfig);

  const auto ref = write_config("ref", kRefConfig).string();
  r = run_cli({"laminar", "-c", ref, "--set", "numerics.n_q=48"});
  CHECK(r.code == kConfig);
  CHECK(r.err.find("numerics.n_q") != std::string::npos);
  r = run_cli({"laminar", "-c", ref, "--set", "physical.gravity=1"});
  CHECK(r.err.find("physical.gravity") != std::string::npos);
  CHECK(run_cli({"laminar", "-c", ref, "--set", "vorticity.kind=spiral"}).code == kConfig);
  CHECK(run_cli({"laminar", "-c", ref, "--set", "physical.p0=2"}).code == kConfig);
  CHECK(run_cli({"nonsense"}).code == kConfig);
  CHECK(run_cli({}).code == kConfig);
  CHECK(run_cli({"--help"}).code == kOk);
}

TEST_CASE("output directory precedence") {
  const auto ref = write_config("ref", kRefConfig);
  json withdir = kRefConfig;
  withdir["output"]["dir"] = tmp("from_config").string();
  const auto cfgfile = write_config("withdir", withdir);

  ::setenv(kOutEnv, tmp("from_env").string().c_str(), 1);
  CHECK(run_cli({"laminar", "-c", ref.string()}).code == kOk);
  CHECK(fs::exists(tmp("from_env") / "laminar.csv"));
  CHECK(run_cli({"laminar", "-c", cfgfile.string()}).code == kOk);
  CHECK(fs::exists(tmp("from_config") / "laminar.csv"));
  CHECK(run_cli({"laminar", "-c", cfgfile.string(), "-o", tmp("from_flag").string()}).code == kOk);
  CHECK(fs::exists(tmp("from_flag") / "laminar.csv"));
  ::unsetenv(kOutEnv);
}

TEST_CASE("laminar command") {
  const auto ref = write_config("ref", kRefConfig).string();
  auto r = run_cli({"laminar", "-c", ref, "-o", tmp("lam").string()});
  REQUIRE(r.code == kOk);
  const auto c = io::read_json(tmp("lam") / "conditions.json");
  CHECK(c["cond1"] == true);
  CHECK(c["cond2"] == true);
  CHECK(std::abs(c["theta"].get<double>() - 4.0) < 1e-12);
  CHECK(std::abs(c["cond2_value"].get<double>() - 0.25) < 1e-12);
  const auto t = io::read_csv(tmp("lam") / "laminar.csv");
  CHECK(t.columns == std::vector<std::string>{"p", "H", "a"});
  CHECK(t.rows.size() == 257);
  CHECK(run_cli({"verify", "-d", tmp("lam").string()}).code == kOk);

  // COND1 fails: constant gamma0 = -1, p0 = -2 has limit 2 < depth 3
  r = run_cli({"laminar", "-c", ref, "--set", "vorticity.kind=constant", "--set",
               "vorticity.gamma0=-1", "--set", "physical.depth=3", "-o", tmp("c1").string()});
  CHECK(r.code == kCondition);
  const auto c1 = io::read_json(tmp("c1") / "conditions.json");
  CHECK(c1["cond1"] == false);
  CHECK(std::abs(c1["limit"].get<double>() - 2.0) < 1e-8);
  CHECK_FALSE(fs::exists(tmp("c1") / "laminar.csv"));
}

TEST_CASE("laminar verification catches a corrupted height") {
  const auto ref = write_config("ref", kRefConfig).string();
  REQUIRE(run_cli({"laminar", "-c", ref, "-o", tmp("lamc").string()}).code == kOk);
  const auto t = io::read_csv(tmp("lamc") / "laminar.csv");
  corrupt_cell(tmp("lamc") / "laminar.csv", 100, "H", io::fmt(t.rows[100][1] + 1e-6));
  const auto r = run_cli({"verify", "-d", tmp("lamc").string()});
  CHECK(r.code == kVerification);
  CHECK(r.out.find("verification failed: laminar.slope") != std::string::npos);
}

TEST_CASE("bifurcate command") {
  const auto ref = write_config("ref", kRefConfig).string();
  REQUIRE(run_cli({"bifurcate", "-c", ref, "-o", tmp("bif").string()}).code == kOk);
  const auto b = io::read_json(tmp("bif") / "bifurcation.json");
  const double oracle = oracles::irrotational_lambda_star({1.0, 1.0, -2.0, 0.5}).value;
  CHECK(std::abs(b["lambda_star"].get<double>() - oracle) < 1e-8 * oracle);
  CHECK(b["transversality"].get<double>() < 0);
  const auto scan = io::read_csv(tmp("bif") / "wronskian_scan.csv");
  CHECK(scan.rows.size() == 45);
  CHECK(run_cli({"verify", "-d", tmp("bif").string()}).code == kOk);

  auto r = run_cli({"bifurcate", "-c", ref, "--set", "vorticity.kind=constant", "--set",
                    "vorticity.gamma0=1", "-o", tmp("bifc").string()});
  CHECK(r.code == kOk);
  CHECK(io::read_json(tmp("bifc") / "bifurcation.json")["transversality"].get<double>() < 0);
}

TEST_CASE("negative controls produce no bifurcation output") {
  const auto ref = write_config("ref", kRefConfig).string();
  // COND2 fails: g d^3 / p0^2 = 9.81
  const auto d2 = tmp("neg2");
  fs::create_directories(d2);
  std::ofstream(d2 / "bifurcation.json") << "{}";  // stale file from an earlier run
  auto r = run_cli({"bifurcate", "-c", ref, "--set", "physical.g=9.81", "--set", "physical.p0=-1",
                    "-o", d2.string()});
  CHECK(r.code == kCondition);
  CHECK_FALSE(fs::exists(d2 / "bifurcation.json"));
  CHECK_FALSE(fs::exists(d2 / "wronskian_scan.csv"));
  CHECK(io::read_json(d2 / "conditions.json")["cond2"] == false);

  r = run_cli({"branch", "-c", ref, "--set", "physical.g=9.81", "--set", "physical.p0=-1", "-o",
               tmp("neg2b").string()});
  CHECK(r.code == kCondition);
  CHECK_FALSE(fs::exists(tmp("neg2b") / "branch.csv"));

  // COND1 fails
  r = run_cli({"bifurcate", "-c", ref, "--set", "vorticity.kind=constant", "--set",
               "vorticity.gamma0=-1", "--set", "physical.depth=3", "-o", tmp("neg1").string()});
  CHECK(r.code == kCondition);
  CHECK_FALSE(fs::exists(tmp("neg1") / "bifurcation.json"));
}

TEST_CASE("branch command, verification and fault injection") {
  const auto ref = write_config("ref", kRefConfig).string();
  const auto dir = tmp("branch");
  REQUIRE(run_cli({"branch", "-c", ref, "-o", dir.string()}).code == kOk);
  const auto t = io::read_csv(dir / "branch.csv");
  REQUIRE(t.rows.size() == 6);
  const double ls = t.meta_number("lambda_star");
  for (double l : t.column_values("lambda")) CHECK(std::abs(l - ls) < 0.01 * ls);
  CHECK(t.meta_value("complete") == "true");
  CHECK(run_cli({"verify", "-d", dir.string()}).code == kOk);

  const auto bad = tmp("branch_bad");
  fs::copy(dir, bad);
  const auto s = io::read_csv(bad / "point_003_surface.csv");
  corrupt_cell(bad / "point_003_surface.csv", 5, "eta", io::fmt(s.rows[5][1] + 1e-7));
  auto r = run_cli({"verify", "-d", bad.string()});
  CHECK(r.code == kVerification);
  CHECK(r.out.find("verification failed: point_003.") != std::string::npos);

  const auto broken = tmp("branch_broken");
  fs::copy(dir, broken);
  corrupt_cell(broken / "point_002_fields.csv", 7, "u", "abc");
  CHECK(run_cli({"verify", "-d", broken.string()}).code == kConfig);
  fs::remove(broken / "point_002_fields.csv");
  CHECK(run_cli({"verify", "-d", broken.string()}).code == kConfig);
  CHECK(run_cli({"verify", "-d", tmp("no_such_dir").string()}).code == kConfig);
}

TEST_CASE("branch truncation and the trivial branch") {
  const auto ref = write_config("ref", kRefConfig).string();
  const auto dir = tmp("trunc");
  auto r = run_cli({"branch", "-c", ref, "--set", "numerics.s_max=5", "-o", dir.string()});
  CHECK(r.code == kNumerical);
  const auto t = io::read_csv(dir / "branch.csv");
  CHECK(t.meta_value("complete") == "false");
  CHECK(t.meta_value("note").find("truncated") != std::string::npos);
  CHECK(fs::exists(dir / "point_000_fields.csv"));

  const auto z = tmp("trivial");
  REQUIRE(run_cli({"branch", "-c", ref, "--set", "numerics.n_steps=0", "-o", z.string()}).code ==
          kOk);
  const auto tz = io::read_csv(z / "branch.csv");
  REQUIRE(tz.rows.size() == 1);
  CHECK(tz.rows[0][0] == 0.0);
  CHECK(tz.rows[0][2] == 0.0);
  CHECK(run_cli({"verify", "-d", z.string()}).code == kOk);
}

TEST_CASE("identical configs give byte-identical outputs") {
  const auto ref = write_config("ref", kRefConfig).string();
  for (const char* cmd : {"laminar", "bifurcate", "branch"}) {
    const auto a = tmp(std::string("det_a_") + cmd), b = tmp(std::string("det_b_") + cmd);
    REQUIRE(run_cli({cmd, "-c", ref, "--set", "vorticity.kind=constant", "--set",
                     "vorticity.gamma0=1", "-o", a.string()}).code == kOk);
    REQUIRE(run_cli({cmd, "-c", ref, "--set", "vorticity.kind=constant", "--set",
                     "vorticity.gamma0=1", "-o", b.string()}).code == kOk);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
    CHECK(files >= 2);
  }
}

TEST_CASE("sweep is deterministic regardless of worker count") {
  const auto ref = write_config("ref", kRefConfig).string();
  const std::vector<std::string> common = {"sweep", "-c", ref, "--vary", "physical.alpha=0.25,0.5",
                                           "--vary", "physical.g=0.5,1,9.81"};
  auto a = common, b = common;
  a.insert(a.end(), {"-j", "1", "-o", tmp("sw1").string()});
  b.insert(b.end(), {"-j", "4", "-o", tmp("sw4").string()});
  REQUIRE(run_cli(a).code == kOk);
  REQUIRE(run_cli(b).code == kOk);
  const auto s1 = slurp(tmp("sw1") / "sweep.csv");
  CHECK(s1 == slurp(tmp("sw4") / "sweep.csv"));
  std::stringstream ss(s1);
  std::vector<std::string> lines;
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "index,physical.alpha,physical.g,exit_code,theta,lambda_star");
  CHECK(lines[1].rfind("0,0.25,0.5,0,", 0) == 0);
  CHECK(lines[3].rfind("2,0.25,9.81,2,", 0) == 0);  // COND2 fails at g = 9.81
  CHECK(slurp(tmp("sw1") / "run_0004" / "bifurcation.json") ==
        slurp(tmp("sw4") / "run_0004" / "bifurcation.json"));
  CHECK(run_cli({"sweep", "-c", ref, "--vary", "physical.alpha"}).code == kConfig);
}
