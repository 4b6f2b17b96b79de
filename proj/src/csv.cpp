#include "cmom/csv.hpp"

#include <charconv>
#include <cstdio>

namespace cmom {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
    out.back().pop_back();
  return out;
}

CsvReader::CsvReader(const std::string& path) : in_(path), path_(path) {
  if (!in_) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in_, line))
    throw std::runtime_error("empty file (missing header): " + path);
  header_ = split_csv_line(line);
  for (int i = 0; i < static_cast<int>(header_.size()); ++i)
    index_.emplace(header_[i], i);
  line_ = 1;
}

bool CsvReader::has_column(const std::string& name) const {
  return index_.count(name) > 0;
}

int CsvReader::column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::runtime_error("missing column '" + name + "' in " + path_);
  return it->second;
}

bool CsvReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty() || line == "\r") continue;
    fields_ = split_csv_line(line);
    return true;
  }
  return false;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::string format_decimal(double v, int precision) {
  char buf[64];
  if (precision >= 17) {  // shortest representation that round-trips exactly
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
  }
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

}  // namespace cmom
