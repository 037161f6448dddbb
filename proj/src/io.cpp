#include "flexwave/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace flexwave::io {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta.emplace_back(key, value);
}

bool CsvTable::has_meta(const std::string& key) const {
  for (const auto& kv : meta) {
    if (kv.first == key) return true;
  }
  return false;
}

const std::string& CsvTable::meta_value(const std::string& key) const {
  for (const auto& kv : meta) {
    if (kv.first == key) return kv.second;
  }
  throw IoError("missing header entry '" + key + "'");
}

double CsvTable::meta_number(const std::string& key) const {
  const auto& s = meta_value(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("header entry '" + key + "' is not a number: " + s);
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] == name) return k;
  }
  throw IoError("missing column '" + name + "'");
}

std::vector<double> CsvTable::column_values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

void write_csv(const fs::path& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [k, v] : t.meta) out << "# " << k << "=" << v << "\n";
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << fmt(r[k]);
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      t.meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (t.columns.empty()) {
      t.columns = cells;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(t.columns.size()) + " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(c, &pos));
        if (pos != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw IoError(path.string() + ": no header row");
  return t;
}

namespace {

void emit(std::ostream& os, const nlohmann::json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << nlohmann::json(it.key()).dump() << ": ";
        emit(os, it.value(), depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) os << ",\n";
        os << pad;
        emit(os, j[k], depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? fmt(v) : "null");
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& j) {
  std::ostringstream os;
  emit(os, j, 0);
  os << "\n";
  return os.str();
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << dump_json(j);
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_solution(const fs::path& dir, const std::string& stem, const WaveSolution& s) {
  auto meta = [&](CsvTable& t) {
    t.set_meta("lambda", s.lambda);
    t.set_meta("Q", s.Q);
    t.set_meta("E", s.E);
    t.set_meta("n_q", std::to_string(s.n_q));
    t.set_meta("n_p", std::to_string(s.n_p));
  };
  CsvTable f;
  meta(f);
  f.columns = {"i", "j", "p", "x", "y", "u", "v", "P"};
  for (std::size_t i = 0; i < s.n_p; ++i) {
    for (std::size_t j = 0; j < s.n_q; ++j) {
      const std::size_t k = s.idx(i, j);
      f.rows.push_back({double(i), double(j), s.p[i], s.x[j], s.y[k], s.u[k], s.v[k], s.P[k]});
    }
  }
  write_csv(dir / (stem + "_fields.csv"), f);
  CsvTable e;
  meta(e);
  e.columns = {"x", "eta"};
  for (std::size_t j = 0; j < s.n_q; ++j) e.rows.push_back({s.x[j], s.eta[j]});
  write_csv(dir / (stem + "_surface.csv"), e);
}

WaveSolution read_solution(const fs::path& dir, const std::string& stem) {
  const auto f = read_csv(dir / (stem + "_fields.csv"));
  const auto e = read_csv(dir / (stem + "_surface.csv"));
  WaveSolution s;
  s.lambda = f.meta_number("lambda");
  s.Q = f.meta_number("Q");
  s.E = f.meta_number("E");
  s.n_q = static_cast<std::size_t>(f.meta_number("n_q"));
  s.n_p = static_cast<std::size_t>(f.meta_number("n_p"));
  if (f.rows.size() != s.n_q * s.n_p) throw IoError(stem + ": field row count does not match n_q * n_p");
  if (e.rows.size() != s.n_q) throw IoError(stem + ": surface row count does not match n_q");
  s.p.assign(s.n_p, 0.0);
  s.x.assign(s.n_q, 0.0);
  s.y.assign(s.n_q * s.n_p, 0.0);
  s.u = s.v = s.P = s.y;
  const std::size_t ci = f.column("i"), cj = f.column("j"), cp = f.column("p"), cx = f.column("x"),
                    cy = f.column("y"), cu = f.column("u"), cv = f.column("v"), cP = f.column("P");
  for (const auto& r : f.rows) {
    const double di = r[ci], dj = r[cj];
    if (di < 0 || dj < 0 || di >= double(s.n_p) || dj >= double(s.n_q)) {
      throw IoError(stem + ": node index out of range");
    }
    const auto i = static_cast<std::size_t>(di), j = static_cast<std::size_t>(dj);
    const std::size_t k = s.idx(i, j);
    s.p[i] = r[cp];
    s.x[j] = r[cx];
    s.y[k] = r[cy];
    s.u[k] = r[cu];
    s.v[k] = r[cv];
    s.P[k] = r[cP];
  }
  s.eta = e.column_values("eta");
  return s;
}

nlohmann::json report_json(const ResidualReport& rep) {
  nlohmann::json j;
  j["dp"] = rep.dp;
  j["grid_tol"] = rep.grid_tol;
  j["pass"] = rep.all_pass();
  nlohmann::json items = nlohmann::json::object();
  for (const auto& e : rep.entries) {
    items[e.name] = {{"value", e.value}, {"tol", e.tol}, {"pass", e.pass()}};
  }
  j["residuals"] = items;
  return j;
}

}  // namespace flexwave::io
