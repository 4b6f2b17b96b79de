#pragma once

#include <map>
#include <string>
#include <vector>

#include "cmom/panel.hpp"
#include "cmom/signal_lab.hpp"

namespace cmom {

struct FactorSeries {
  std::string name;
  std::map<int, double> returns;
  std::string breakpoint_universe = "NYSE";
  std::string signal;
  std::string size_split = "median";
};

// 2x3 size-by-signal factor: NYSE median ME split, NYSE 30th/70th signal
// percentiles, VW cells, monthly rebalanced;
// factor = 1/2 (SmallHigh + BigHigh) - 1/2 (SmallLow + BigLow).
// Periods with any empty cell are absent.
FactorSeries build_factor(const ReturnPanel& panel, const SignalPanel& signals,
                          const std::string& signal_name,
                          const std::string& factor_name);

// Cumulative growth of one unit; optional pre-scaling of returns so the
// sample SD matches `scale_to_sd`. Truncates if the cumulative value would
// go non-positive.
struct GrowthSeries {
  std::map<int, double> value;
  bool truncated = false;
};
GrowthSeries growth_of_dollar(const std::map<int, double>& returns,
                              double scale_to_sd = kAbsent);

void emit_factors_csv(const std::string& path,
                      const std::vector<FactorSeries>& factors);

// External factor files in the factors.csv schema (date, name, ret).
std::map<std::string, std::map<int, double>> load_factors_csv(
    const std::string& path);

}  // namespace cmom
