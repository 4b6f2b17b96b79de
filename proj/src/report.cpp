#include "cmom/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <fstream>

namespace cmom {

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string stars(double p_value, const std::vector<double>& levels) {
  std::vector<double> sorted = levels;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::string out;
  for (double level : sorted) {
    if (p_value < level) out += '*';
    else break;
  }
  return out;
}

std::string fmt_percent(double fraction, int decimals) {
  return fmt_num(fraction * 100.0, decimals);
}

std::string fmt_num(double v, int decimals) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string fmt_tstat(double t) {
  if (std::isnan(t)) return "";
  return "[" + fmt_num(t) + "]";
}

MarkdownTable::MarkdownTable(std::vector<std::string> header)
    : header_(std::move(header)) {}

void MarkdownTable::add_row(std::vector<std::string> row) {
  row.resize(header_.size());
  rows_.push_back(std::move(row));
}

std::string MarkdownTable::render() const {
  std::string out = "|";
  for (const auto& h : header_) out += " " + h + " |";
  out += "\n|";
  for (size_t i = 0; i < header_.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& row : rows_) {
    out += "|";
    for (const auto& cell : row) out += " " + cell + " |";
    out += "\n";
  }
  return out;
}

void write_report(const std::string& out_dir, const std::string& name,
                  const std::string& markdown_body, nlohmann::json payload,
                  const std::string& cfg_hash) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream md(out_dir + "/" + name + ".md");
    if (!md) throw std::runtime_error("cannot write report: " + name);
    md << markdown_body;
    md << "\nconfig " << cfg_hash << " engine " << kEngineVersion << "\n";
  }
  payload["config_hash"] = cfg_hash;
  payload["engine_version"] = kEngineVersion;
  payload["report"] = name;
  std::ofstream js(out_dir + "/" + name + ".json");
  if (!js) throw std::runtime_error("cannot write report: " + name);
  js << payload.dump(2) << '\n';
}

}  // namespace cmom
