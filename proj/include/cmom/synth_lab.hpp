#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cmom/panel.hpp"

namespace cmom {

// Synthetic market configuration. Identical (seed, config) pairs produce
// bit-identical panels; generation is single-streamed from one mt19937_64.
struct DGPConfig {
  int n_firms = 100;          // customer pool + suppliers
  double supplier_fraction = 0.5;
  int min_customers = 1;
  int max_customers = 4;
  int n_periods = 120;        // months
  int start_month = 0;        // monthly ordinal of the first period

  double beta_cmom = 0.04;    // slope on lagged customer-portfolio return
  double beta_leadlag = 0.0;  // extra slope per unit log relative size
  double beta_contemp = 0.3;  // same-period comovement with customers
  double beta_mkt = 1.0;
  double alpha = 0.0;
  double noise_sd = 0.06;

  double low_attention_fraction = 0.0;
  int attention_extra_delay = 1;  // months of extra diffusion for low-attention links

  double mkt_mean = 0.008;
  double mkt_sd = 0.045;
  double rf = 0.003;

  double me_log_mean = 5.0;
  double me_log_sd = 1.0;
  double customer_log_size_gap = 2.0;  // mean extra log-size of customers
  double customer_log_size_gap_sd = 1.0;
  double me_drift = 0.002;
  double me_walk_sd = 0.02;

  int announcement_cycle_months = 3;
  double eps_level = 0.5;
  double eps_yoy_sd = 0.3;

  bool daily_panel = false;
  int trading_days_per_month = 21;
  double daily_noise_sd = 0.012;
  double volume_log_mean = 10.0;
  double volume_log_sd = 0.5;
  double attention_volume_spike = 1.5;  // log-volume jump on customer news days

  std::uint64_t seed = 1;
};

struct SynthTruth {
  DGPConfig config;
  // supplier -> planted slope on lagged customer return
  std::map<int, double> planted_slope;
  std::map<int, double> log_rel_size;
  std::map<int, bool> low_attention;
  double expected_linked_correlation_margin = 0.0;
};

struct SynthResult {
  FirmIndex firms;
  ReturnPanel monthly;
  LinkTable links;
  AnnouncementTable announcements;
  MarketSeries market;          // monthly
  TradingCalendar calendar;     // always generated (announcement dates live on it)
  ReturnPanel daily;            // populated when config.daily_panel
  MarketSeries daily_market;
  SynthTruth truth;
};

SynthResult generate(const DGPConfig& config);

void emit_truth_json(const std::string& path, const SynthTruth& truth,
                     const FirmIndex& firms);

}  // namespace cmom
