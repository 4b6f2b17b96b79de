#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmom/panel.hpp"
#include "cmom/signal_lab.hpp"

namespace cmom {

enum class BreakpointUniverse { FullSample, NYSEOnly, PooledAllPeriods };
enum class Weighting { Equal, Value };

struct BreakpointSpec {
  int n_buckets = 10;  // 2, 3, 5 or 10
  BreakpointUniverse universe = BreakpointUniverse::FullSample;

  bool per_period() const { return universe != BreakpointUniverse::PooledAllPeriods; }
};

// Quantile thresholds at i/n using inclusive linear interpolation.
// Throws "degenerate breakpoints" with fewer than n distinct values.
std::vector<double> compute_breakpoints(const std::vector<double>& values,
                                        const BreakpointSpec& spec);

// Bucket of a value given thresholds; boundary ties go to the lower bucket.
int assign_bucket(double value, const std::vector<double>& thresholds);

struct PortfolioPeriod {
  int period = 0;  // period the returns are measured in
  std::vector<double> bucket_ret;
  std::vector<int> count;
  double long_short = 0.0;  // r_n - r_1
};

struct PortfolioSeries {
  std::string signal_name;
  Weighting weighting = Weighting::Equal;
  int n_buckets = 0;
  std::vector<PortfolioPeriod> periods;  // ascending by period

  std::map<int, double> long_short_series() const;
  std::map<int, double> bucket_series(int bucket) const;
};

// Quantile portfolios: firms bucketed on the formation-period signal,
// returns measured at formation + 1 + holding_lag, VW with formation ME.
// Parallel by period; the serial variant is the test reference.
PortfolioSeries form_portfolios(const ReturnPanel& panel,
                                const SignalPanel& signals,
                                const std::string& signal_name,
                                const BreakpointSpec& spec, Weighting weighting,
                                int holding_lag = 0,
                                const std::map<std::pair<int, int>, bool>* mask = nullptr,
                                bool parallel = true);
PortfolioSeries form_portfolios_serial(const ReturnPanel& panel,
                                       const SignalPanel& signals,
                                       const std::string& signal_name,
                                       const BreakpointSpec& spec,
                                       Weighting weighting, int holding_lag = 0,
                                       const std::map<std::pair<int, int>, bool>* mask = nullptr);

// Conditional double sort: outer quantiles first (per period), inner sort
// within each outer bucket. Returns one inner PortfolioSeries per outer
// bucket.
std::vector<PortfolioSeries> conditional_double_sort(
    const ReturnPanel& panel, const SignalPanel& signals,
    const std::string& outer_signal, int n_outer,
    const std::string& inner_signal, int n_inner, Weighting weighting);

// Firm-period mask keeping observations with rel_size <= max_rel_size.
std::map<std::pair<int, int>, bool> restrict_by_ratio(
    const SignalPanel& signals, double max_rel_size,
    const std::string& rel_size_signal = "rel_size");

void emit_portfolios_csv(const std::string& path, const PortfolioSeries& series,
                         Frequency freq = Frequency::Monthly,
                         const TradingCalendar* calendar = nullptr);

}  // namespace cmom
