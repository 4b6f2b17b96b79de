#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmom/econometrics.hpp"
#include "cmom/factor_factory.hpp"
#include "cmom/link_engine.hpp"
#include "cmom/panel.hpp"
#include "cmom/signal_lab.hpp"
#include "cmom/sorter.hpp"
#include "cmom/synth_lab.hpp"

namespace cmom {

// Exit codes of run_study; each error family is distinguishable.
enum class StudyExit : int {
  Ok = 0,
  Error = 1,
  SchemaMismatch = 2,
  MissingFactorSeries = 3,
  DegenerateBreakpoints = 4,
  BadConfig = 5,
};

struct StudyConfig {
  std::string data_dir = "data";
  std::string out_dir = "out";
  std::string from, to;  // "YYYY-MM", optional date-range filter
  std::string weights = "ew";  // ew | vw
  int buckets = 10;            // 5 | 10
  std::vector<std::string> lags = {"1-1", "2-1", "3-1", "7-1",
                                   "12-1", "2-2", "7-2", "12-2"};
  int nw_lags = -1;  // negative: floor(4*(T/100)^{2/9}) default
  std::vector<std::string> models = {"CAPM", "CAPM+UMD"};
  std::vector<double> regression_star_levels = {0.10, 0.05, 0.01};
  std::vector<double> corr_star_levels = {0.10, 0.01, 0.001};
  std::string format = "md";  // md | csv | json (md+json always written)
  int lag_months = 6;
  int link_expiry_months = 12;
  double max_rel_size = kAbsent;  // restricted-sort cap, absent = off
  std::optional<double> winsor;   // reserved; defaults off

  // synth command knobs
  std::uint64_t seed = 1;
  int synth_firms = 100;
  int synth_months = 120;
  double synth_beta_cmom = 0.04;
  double synth_beta_leadlag = 0.0;
  double synth_low_attention = 0.0;
  bool synth_daily = true;

  static StudyConfig load(const std::string& path);  // key=value file
  void apply_override(const std::string& key, const std::string& value);
  std::string canonical() const;  // stable string, hashed into reports
};

struct StudyData {
  FirmIndex firms;
  ReturnPanel monthly;
  LinkTable links;
  MarketSeries market;
  AnnouncementTable announcements;
  bool has_announcements = false;
  std::optional<TradingCalendar> calendar;
  std::optional<ReturnPanel> daily;
  MarketSeries daily_market;
  std::map<std::string, std::map<int, double>> external_factors;

  std::vector<CustomerAggregate> aggregates;
  SignalPanel signals;
};

// Loads panels from config.data_dir and derives aggregates and signals.
StudyData load_study_data(const StudyConfig& config);

// One command of the table/figure battery; "all" runs every family.
StudyExit run_study(const StudyConfig& config, const std::string& command);

}  // namespace cmom
