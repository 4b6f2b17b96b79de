#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cmom {

// Minimal CSV reader for the engine's flat schemas: header row, comma
// separated, no quoting, '.' decimal separator.
class CsvReader {
 public:
  explicit CsvReader(const std::string& path);

  const std::vector<std::string>& header() const { return header_; }
  bool has_column(const std::string& name) const;
  // Index of a required column; throws naming the column if missing.
  int column(const std::string& name) const;

  // Reads the next data row into fields(); false at EOF.
  bool next();
  const std::vector<std::string>& fields() const { return fields_; }
  const std::string& field(int idx) const { return fields_.at(idx); }
  int line_number() const { return line_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::vector<std::string> header_;
  std::vector<std::string> fields_;
  std::unordered_map<std::string, int> index_;
  int line_ = 0;
};

std::vector<std::string> split_csv_line(const std::string& line);

std::optional<double> parse_double(const std::string& s);

// Fixed-precision decimal formatting used by every CSV emitter, so that
// emit -> ingest round trips are bit-exact at the declared precision.
// Default precision is max_digits10 so emit/ingest round trips are exact.
std::string format_decimal(double v, int precision = 17);

}  // namespace cmom
