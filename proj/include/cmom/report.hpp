#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cmom {

inline constexpr const char* kEngineVersion = "0.1.0";

// FNV-1a over the canonical config string; embedded in every report so a
// run can be tied back to its exact configuration.
std::string config_hash(const std::string& canonical);

// Star string from a two-sided p-value at the given levels (largest level
// first gives one star, and so on).
std::string stars(double p_value, const std::vector<double>& levels);

// Percent formatting at the report boundary only: 0.0122 -> "1.22".
std::string fmt_percent(double fraction, int decimals = 2);
std::string fmt_num(double v, int decimals = 2);
std::string fmt_tstat(double t);  // "[3.21]"

class MarkdownTable {
 public:
  explicit MarkdownTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  std::string render() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes body + config/version footer to <out_dir>/<name>.md and the JSON
// payload (with the same metadata) to <out_dir>/<name>.json.
void write_report(const std::string& out_dir, const std::string& name,
                  const std::string& markdown_body, nlohmann::json payload,
                  const std::string& cfg_hash);

}  // namespace cmom
