#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flexwave/reconstruct.hpp"
#include "json.hpp"

namespace flexwave::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 17 significant digits ("%.17g"); the text parses back to the same double.
std::string fmt(double v);

// CSV with leading `# key=value` rows, then a header row, then numeric rows.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void set_meta(const std::string& key, const std::string& value);
  void set_meta(const std::string& key, double value) { set_meta(key, fmt(value)); }
  bool has_meta(const std::string& key) const;
  const std::string& meta_value(const std::string& key) const;  // IoError if absent
  double meta_number(const std::string& key) const;
  std::size_t column(const std::string& name) const;             // IoError if absent
  std::vector<double> column_values(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// Pretty JSON with every floating-point number printed by fmt(); non-finite
// numbers become null.
std::string dump_json(const nlohmann::json& j);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Field dump of a wave solution: <stem>_fields.csv (i,j,p,x,y,u,v,P),
// <stem>_surface.csv (x,eta). Metadata rows carry lambda, Q, E, n_q, n_p.
void write_solution(const std::filesystem::path& dir, const std::string& stem,
                    const WaveSolution& sol);
WaveSolution read_solution(const std::filesystem::path& dir, const std::string& stem);

nlohmann::json report_json(const ResidualReport& rep);

}  // namespace flexwave::io
