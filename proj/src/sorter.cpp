#include "cmom/sorter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "cmom/csv.hpp"
#include "cmom/econometrics.hpp"

namespace cmom {

std::vector<double> compute_breakpoints(const std::vector<double>& values,
                                        const BreakpointSpec& spec) {
  if (spec.n_buckets != 2 && spec.n_buckets != 3 && spec.n_buckets != 5 &&
      spec.n_buckets != 10)
    throw std::invalid_argument("n_buckets must be one of 2, 3, 5, 10");
  std::set<double> distinct(values.begin(), values.end());
  if (static_cast<int>(distinct.size()) < spec.n_buckets)
    throw std::invalid_argument("degenerate breakpoints: fewer distinct values than buckets");
  std::vector<double> thresholds;
  for (int i = 1; i < spec.n_buckets; ++i)
    thresholds.push_back(quantile(values, static_cast<double>(i) / spec.n_buckets));
  return thresholds;
}

int assign_bucket(double value, const std::vector<double>& thresholds) {
  // value == threshold goes to the lower bucket
  int b = 0;
  while (b < static_cast<int>(thresholds.size()) && value > thresholds[b]) ++b;
  return b;
}

std::map<int, double> PortfolioSeries::long_short_series() const {
  std::map<int, double> out;
  for (const PortfolioPeriod& p : periods) out[p.period] = p.long_short;
  return out;
}

std::map<int, double> PortfolioSeries::bucket_series(int bucket) const {
  std::map<int, double> out;
  for (const PortfolioPeriod& p : periods) out[p.period] = p.bucket_ret.at(bucket);
  return out;
}

namespace {

struct Candidate {
  int firm;
  double signal;
  double holding_ret;
  double formation_me;  // kAbsent allowed for EW
};

bool firm_allowed(const std::map<std::pair<int, int>, bool>* mask, int firm,
                  int period) {
  if (!mask) return true;
  auto it = mask->find({firm, period});
  return it != mask->end() && it->second;
}

// (firm, value) pairs grouped by period, firms ascending within a period.
std::map<int, std::vector<std::pair<int, double>>> group_by_period(
    const std::map<std::pair<int, int>, double>& signal) {
  std::map<int, std::vector<std::pair<int, double>>> out;
  for (const auto& [key, v] : signal) out[key.second].emplace_back(key.first, v);
  for (auto& [_, vec] : out)
    std::sort(vec.begin(), vec.end());
  return out;
}

// Candidates of one formation period: firms with a signal, passing the
// mask, and holding a return in the measurement period.
std::vector<Candidate> gather_candidates(
    const ReturnPanel& panel,
    const std::vector<std::pair<int, double>>& signal_values, int formation,
    int measurement, const std::map<std::pair<int, int>, bool>* mask) {
  std::vector<Candidate> out;
  for (const auto& [firm, value] : signal_values) {
    if (!firm_allowed(mask, firm, formation)) continue;
    double r = panel.ret_at(firm, measurement);
    if (is_absent(r)) continue;
    out.push_back({firm, value, r, panel.me_at(firm, formation)});
  }
  return out;
}

std::optional<PortfolioPeriod> bucket_period(
    const std::vector<Candidate>& candidates,
    const std::vector<double>& thresholds, int n_buckets, Weighting weighting,
    int measurement) {
  std::vector<double> ret_sum(n_buckets, 0.0), w_sum(n_buckets, 0.0);
  std::vector<int> count(n_buckets, 0);
  for (const Candidate& c : candidates) {
    int b = assign_bucket(c.signal, thresholds);
    if (weighting == Weighting::Value) {
      if (is_absent(c.formation_me)) continue;  // no weight without ME
      ret_sum[b] += c.formation_me * c.holding_ret;
      w_sum[b] += c.formation_me;
    } else {
      ret_sum[b] += c.holding_ret;
      w_sum[b] += 1.0;
    }
    ++count[b];
  }
  PortfolioPeriod out;
  out.period = measurement;
  out.bucket_ret.resize(n_buckets);
  out.count = count;
  for (int b = 0; b < n_buckets; ++b) {
    if (count[b] < 1 || w_sum[b] <= 0) return std::nullopt;  // period absent
    out.bucket_ret[b] = ret_sum[b] / w_sum[b];
  }
  out.long_short = out.bucket_ret[n_buckets - 1] - out.bucket_ret[0];
  return out;
}

}  // namespace

PortfolioSeries form_portfolios(const ReturnPanel& panel,
                                const SignalPanel& signals,
                                const std::string& signal_name,
                                const BreakpointSpec& spec, Weighting weighting,
                                int holding_lag,
                                const std::map<std::pair<int, int>, bool>* mask,
                                bool parallel) {
  const auto& signal = signals.series(signal_name);
  auto by_period = group_by_period(signal);

  std::vector<int> formation_periods;
  std::vector<const std::vector<std::pair<int, double>>*> period_values;
  for (const auto& [p, vec] : by_period) {
    formation_periods.push_back(p);
    period_values.push_back(&vec);
  }

  // Pooled breakpoints are computed once over every signal value.
  std::vector<double> pooled_thresholds;
  if (spec.universe == BreakpointUniverse::PooledAllPeriods) {
    std::vector<double> all;
    all.reserve(signal.size());
    for (const auto& [_, v] : signal) all.push_back(v);
    pooled_thresholds = compute_breakpoints(all, spec);
  }

  const int np = static_cast<int>(formation_periods.size());
  std::vector<std::optional<PortfolioPeriod>> slots(np);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < np; ++i) {
    int formation = formation_periods[i];
    int measurement = formation + 1 + holding_lag;
    std::vector<Candidate> candidates =
        gather_candidates(panel, *period_values[i], formation, measurement, mask);
    if (static_cast<int>(candidates.size()) < spec.n_buckets) continue;

    std::vector<double> thresholds;
    if (spec.universe == BreakpointUniverse::PooledAllPeriods) {
      thresholds = pooled_thresholds;
    } else {
      std::vector<double> universe_values;
      for (const Candidate& c : candidates) {
        if (spec.universe == BreakpointUniverse::NYSEOnly) {
          int row = panel.find(c.firm, formation);
          if (row < 0 || panel.exchange(row) != ExchangeTag::NYSE) continue;
        }
        universe_values.push_back(c.signal);
      }
      try {
        thresholds = compute_breakpoints(universe_values, spec);
      } catch (const std::invalid_argument&) {
        continue;  // degenerate period
      }
    }
    slots[i] = bucket_period(candidates, thresholds, spec.n_buckets, weighting,
                             measurement);
  }

  PortfolioSeries out;
  out.signal_name = signal_name;
  out.weighting = weighting;
  out.n_buckets = spec.n_buckets;
  for (const auto& slot : slots)
    if (slot) out.periods.push_back(*slot);
  return out;
}

PortfolioSeries form_portfolios_serial(
    const ReturnPanel& panel, const SignalPanel& signals,
    const std::string& signal_name, const BreakpointSpec& spec,
    Weighting weighting, int holding_lag,
    const std::map<std::pair<int, int>, bool>* mask) {
  return form_portfolios(panel, signals, signal_name, spec, weighting,
                         holding_lag, mask, false);
}

std::vector<PortfolioSeries> conditional_double_sort(
    const ReturnPanel& panel, const SignalPanel& signals,
    const std::string& outer_signal, int n_outer,
    const std::string& inner_signal, int n_inner, Weighting weighting) {
  const auto& inner = signals.series(inner_signal);
  auto outer_by_period = group_by_period(signals.series(outer_signal));

  std::vector<PortfolioSeries> out(n_outer);
  for (int b = 0; b < n_outer; ++b) {
    out[b].signal_name = inner_signal + "|" + outer_signal + "=" + std::to_string(b + 1);
    out[b].weighting = weighting;
    out[b].n_buckets = n_inner;
  }

  for (const auto& [formation, outer_values] : outer_by_period) {
    int measurement = formation + 1;
    // Jointly defined candidates only.
    struct Joint {
      int firm;
      double outer_v, inner_v, ret, me;
    };
    std::vector<Joint> joint;
    for (const auto& [firm, ov] : outer_values) {
      auto it = inner.find({firm, formation});
      if (it == inner.end()) continue;
      double r = panel.ret_at(firm, measurement);
      if (is_absent(r)) continue;
      joint.push_back({firm, ov, it->second, r, panel.me_at(firm, formation)});
    }
    if (static_cast<int>(joint.size()) < n_outer) continue;

    std::vector<double> outer_joint_values;
    for (const Joint& j : joint) outer_joint_values.push_back(j.outer_v);
    BreakpointSpec outer_spec;
    outer_spec.n_buckets = n_outer;
    std::vector<double> outer_thresholds;
    try {
      outer_thresholds = compute_breakpoints(outer_joint_values, outer_spec);
    } catch (const std::invalid_argument&) {
      continue;
    }

    for (int b = 0; b < n_outer; ++b) {
      std::vector<Candidate> candidates;
      for (const Joint& j : joint)
        if (assign_bucket(j.outer_v, outer_thresholds) == b)
          candidates.push_back({j.firm, j.inner_v, j.ret, j.me});
      if (static_cast<int>(candidates.size()) < n_inner) continue;
      std::vector<double> inner_values;
      for (const Candidate& c : candidates) inner_values.push_back(c.signal);
      BreakpointSpec inner_spec;
      inner_spec.n_buckets = n_inner;
      std::vector<double> inner_thresholds;
      try {
        inner_thresholds = compute_breakpoints(inner_values, inner_spec);
      } catch (const std::invalid_argument&) {
        continue;
      }
      auto pp = bucket_period(candidates, inner_thresholds, n_inner, weighting,
                              measurement);
      if (pp) out[b].periods.push_back(*pp);
    }
  }
  return out;
}

std::map<std::pair<int, int>, bool> restrict_by_ratio(
    const SignalPanel& signals, double max_rel_size,
    const std::string& rel_size_signal) {
  std::map<std::pair<int, int>, bool> mask;
  for (const auto& [key, v] : signals.series(rel_size_signal))
    mask[key] = v <= max_rel_size;
  return mask;
}

void emit_portfolios_csv(const std::string& path, const PortfolioSeries& series,
                         Frequency freq, const TradingCalendar* calendar) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "date,bucket,ret,count,weighting,signal_name\n";
  std::string w = series.weighting == Weighting::Equal ? "ew" : "vw";
  for (const PortfolioPeriod& p : series.periods) {
    std::string date = freq == Frequency::Monthly
                           ? month_label(p.period)
                           : format_date(calendar->date(p.period));
    for (int b = 0; b < series.n_buckets; ++b)
      out << date << ',' << (b + 1) << ',' << format_decimal(p.bucket_ret[b])
          << ',' << p.count[b] << ',' << w << ',' << series.signal_name << '\n';
    out << date << ",LS," << format_decimal(p.long_short) << ",0," << w << ','
        << series.signal_name << '\n';
  }
}

}  // namespace cmom
