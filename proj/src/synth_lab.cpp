#include "cmom/synth_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace cmom {

namespace {

struct FirmState {
  bool is_supplier = false;
  std::vector<int> customers;
  double slope = 0.0;       // on lagged customer-portfolio return
  double log_rel_size = 0.0;
  bool low_attention = false;
  double log_me0 = 0.0;
  int announce_offset = 0;  // month within the cycle
  int announce_day = 15;
};

}  // namespace

SynthResult generate(const DGPConfig& cfg) {
  if (cfg.n_firms < 2 || cfg.n_periods < 2)
    throw std::invalid_argument("DGP needs at least 2 firms and 2 periods");
  if (cfg.noise_sd < 0 || cfg.mkt_sd < 0 || cfg.me_walk_sd < 0)
    throw std::invalid_argument("DGP standard deviations must be >= 0");
  if (cfg.low_attention_fraction < 0 || cfg.low_attention_fraction > 1)
    throw std::invalid_argument("low_attention_fraction must be in [0,1]");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SynthResult out;
  const int n = cfg.n_firms;
  const int T = cfg.n_periods;
  const int n_suppliers = std::max(1, static_cast<int>(n * cfg.supplier_fraction));
  const int pool = n - n_suppliers;  // firms 0..pool-1 are the customer pool
  if (pool < cfg.min_customers)
    throw std::invalid_argument("customer pool smaller than min_customers");

  for (int f = 0; f < n; ++f) out.firms.intern("F" + std::to_string(f + 1));

  // Firm setup: customer pool first, suppliers after.
  std::vector<FirmState> firms(n);
  std::vector<double> supplier_gap(n, 0.0);
  for (int f = 0; f < n; ++f) {
    FirmState& s = firms[f];
    s.is_supplier = f >= pool;
    s.log_me0 = cfg.me_log_mean + cfg.me_log_sd * stdnorm(rng);
    s.announce_offset = static_cast<int>(unif(rng) * cfg.announcement_cycle_months);
    s.announce_day = 5 + static_cast<int>(unif(rng) * 20);  // may hit a weekend
    if (!s.is_supplier) continue;
    int k = cfg.min_customers +
            static_cast<int>(unif(rng) * (cfg.max_customers - cfg.min_customers + 1));
    k = std::min(k, pool);
    std::vector<int> picks(pool);
    for (int i = 0; i < pool; ++i) picks[i] = i;
    for (int i = 0; i < k; ++i)
      std::swap(picks[i], picks[i + static_cast<int>(unif(rng) * (pool - i))]);
    picks.resize(k);
    std::sort(picks.begin(), picks.end());
    s.customers = picks;
    supplier_gap[f] = cfg.customer_log_size_gap +
                      cfg.customer_log_size_gap_sd * stdnorm(rng);
    s.low_attention = unif(rng) < cfg.low_attention_fraction;
  }

  // Customers of a supplier are shifted up in size by the drawn gap.
  for (int f = pool; f < n; ++f)
    for (int c : firms[f].customers)
      firms[c].log_me0 = std::max(firms[c].log_me0, firms[f].log_me0 + supplier_gap[f]);

  // ME paths: geometric random walk. Bounded redraws guard against
  // numerically unusable paths.
  std::vector<std::vector<double>> log_me(n, std::vector<double>(T));
  for (int f = 0; f < n; ++f) {
    for (int attempt = 0;; ++attempt) {
      log_me[f][0] = firms[f].log_me0;
      bool ok = true;
      for (int t = 1; t < T; ++t) {
        log_me[f][t] = log_me[f][t - 1] + cfg.me_drift + cfg.me_walk_sd * stdnorm(rng);
        if (std::abs(log_me[f][t]) > 50) ok = false;
      }
      if (ok) break;
      if (attempt >= 8)
        throw std::runtime_error("DGP: market-equity path rejected 8 times");
    }
  }

  // Planted slopes need the realized relative size.
  for (int f = pool; f < n; ++f) {
    FirmState& s = firms[f];
    double mean_cust_me = 0.0;
    for (int c : s.customers) mean_cust_me += std::exp(firms[c].log_me0);
    mean_cust_me /= s.customers.size();
    s.log_rel_size = std::log(mean_cust_me / std::exp(s.log_me0));
    s.slope = cfg.beta_cmom + cfg.beta_leadlag * s.log_rel_size;
  }

  // Monthly market series.
  std::vector<double> mkt(T);
  for (int t = 0; t < T; ++t) {
    mkt[t] = cfg.mkt_mean + cfg.mkt_sd * stdnorm(rng);
    out.market.set(cfg.start_month + t, mkt[t], cfg.rf);
  }

  // Returns: customer pool first (they only load on the market), then
  // suppliers on top of their customers' lagged portfolio return.
  std::vector<std::vector<double>> ret(n, std::vector<double>(T));
  for (int f = 0; f < pool; ++f)
    for (int t = 0; t < T; ++t)
      ret[f][t] = cfg.alpha + cfg.beta_mkt * mkt[t] + cfg.noise_sd * stdnorm(rng);

  auto cust_portfolio_ret = [&](const FirmState& s, int t) {
    double sum = 0.0;
    for (int c : s.customers) sum += ret[c][t];
    return sum / s.customers.size();
  };
  for (int f = pool; f < n; ++f) {
    const FirmState& s = firms[f];
    int delay = s.low_attention ? cfg.attention_extra_delay : 0;
    for (int t = 0; t < T; ++t) {
      double r = cfg.alpha + cfg.beta_mkt * mkt[t] + cfg.noise_sd * stdnorm(rng);
      int lag_t = t - 1 - delay;
      if (lag_t >= 0) r += s.slope * cust_portfolio_ret(s, lag_t);
      r += cfg.beta_contemp * cust_portfolio_ret(s, t);
      ret[f][t] = std::max(r, -0.95);  // returns must stay above -100%
    }
  }

  // Assemble the monthly panel.
  {
    std::vector<int> pf, pp;
    std::vector<double> pr, pme, pvol;
    std::vector<ExchangeTag> pex;
    for (int f = 0; f < n; ++f)
      for (int t = 0; t < T; ++t) {
        pf.push_back(f);
        pp.push_back(cfg.start_month + t);
        pr.push_back(ret[f][t]);
        pme.push_back(std::exp(log_me[f][t]));
        pvol.push_back(kAbsent);
        // larger half of the pool carries the NYSE tag
        pex.push_back(firms[f].log_me0 > cfg.me_log_mean ? ExchangeTag::NYSE
                                                         : ExchangeTag::Other);
      }
    out.monthly = ReturnPanel::from_rows(Frequency::Monthly, pf, pp, pr, pme,
                                         pvol, pex);
  }

  // Links: active over the whole sample.
  {
    std::vector<LinkRow> rows;
    for (int f = pool; f < n; ++f)
      for (int c : firms[f].customers)
        rows.push_back({f, c, cfg.start_month, cfg.start_month + T - 1});
    out.links = LinkTable(std::move(rows));
  }

  // Trading calendar spanning the sample; announcement dates live on it.
  int start_year = cfg.start_month / 12;
  int start_mon = cfg.start_month % 12 + 1;
  int n_days = cfg.trading_days_per_month * (T + 1);
  out.calendar = TradingCalendar::weekdays({start_year, start_mon, 1}, n_days);

  // Quarterly EPS announcements; YoY changes are iid normal by construction.
  {
    std::vector<Announcement> rows;
    for (int f = 0; f < n; ++f) {
      std::vector<double> eps;
      int q = 0;
      for (int t = firms[f].announce_offset; t < T;
           t += cfg.announcement_cycle_months, ++q) {
        double e = q >= 4 ? eps[q - 4] + cfg.eps_yoy_sd * stdnorm(rng)
                          : cfg.eps_level + cfg.eps_yoy_sd * stdnorm(rng);
        eps.push_back(e);
        int month = cfg.start_month + t;
        CalendarDate d{month / 12, month % 12 + 1, firms[f].announce_day};
        if (d.day > 28) d.day = 28;
        rows.push_back({f, d, e});
      }
    }
    out.announcements = AnnouncementTable(std::move(rows));
  }

  // Daily panel: market plus idiosyncratic noise; volume carries an
  // attention spike on the supplier when a customer announces.
  if (cfg.daily_panel) {
    std::map<long long, std::vector<int>> announcing_customers_by_day;
    for (const Announcement& a : out.announcements.rows()) {
      auto day = out.calendar.ordinal_on_or_after(a.date);
      if (day) announcing_customers_by_day[*day].push_back(a.firm);
    }
    // supplier -> customer set membership for the spike lookup
    std::vector<std::vector<int>> suppliers_of(n);
    for (int f = pool; f < n; ++f)
      for (int c : firms[f].customers) suppliers_of[c].push_back(f);

    std::vector<int> pf, pp;
    std::vector<double> pr, pme, pvol;
    std::vector<ExchangeTag> pex;
    std::vector<double> mkt_d(n_days);
    for (int d = 0; d < n_days; ++d) {
      mkt_d[d] = cfg.mkt_mean / cfg.trading_days_per_month +
                 cfg.mkt_sd / std::sqrt(cfg.trading_days_per_month) * stdnorm(rng);
      out.daily_market.set(d, mkt_d[d], cfg.rf / cfg.trading_days_per_month);
    }
    for (int f = 0; f < n; ++f) {
      double base_log_vol = cfg.volume_log_mean + cfg.volume_log_sd * stdnorm(rng);
      for (int d = 0; d < n_days; ++d) {
        double r = cfg.beta_mkt * mkt_d[d] + cfg.daily_noise_sd * stdnorm(rng);
        double log_vol = base_log_vol + cfg.volume_log_sd * stdnorm(rng);
        if (firms[f].is_supplier && !firms[f].low_attention) {
          auto it = announcing_customers_by_day.find(d);
          if (it != announcing_customers_by_day.end()) {
            for (int c : it->second)
              if (std::binary_search(firms[f].customers.begin(),
                                     firms[f].customers.end(), c)) {
                log_vol += cfg.attention_volume_spike;
                break;
              }
          }
        }
        pf.push_back(f);
        pp.push_back(d);
        pr.push_back(std::max(r, -0.95));
        pme.push_back(kAbsent);
        pvol.push_back(std::exp(log_vol));
        pex.push_back(ExchangeTag::Absent);
      }
    }
    out.daily = ReturnPanel::from_rows(Frequency::Daily, pf, pp, pr, pme, pvol, pex);
  }

  out.truth.config = cfg;
  for (int f = pool; f < n; ++f) {
    out.truth.planted_slope[f] = firms[f].slope;
    out.truth.log_rel_size[f] = firms[f].log_rel_size;
    out.truth.low_attention[f] = firms[f].low_attention;
  }
  // Comovement-implied gap between linked and random contemporaneous
  // correlation, from the planted loadings.
  out.truth.expected_linked_correlation_margin =
      cfg.beta_contemp > 0 ? cfg.beta_contemp * cfg.noise_sd : 0.0;
  return out;
}

void emit_truth_json(const std::string& path, const SynthTruth& truth,
                     const FirmIndex& firms) {
  nlohmann::json j;
  const DGPConfig& c = truth.config;
  j["config"] = {{"n_firms", c.n_firms},
                 {"supplier_fraction", c.supplier_fraction},
                 {"n_periods", c.n_periods},
                 {"start_month", month_label(c.start_month)},
                 {"beta_cmom", c.beta_cmom},
                 {"beta_leadlag", c.beta_leadlag},
                 {"beta_contemp", c.beta_contemp},
                 {"beta_mkt", c.beta_mkt},
                 {"noise_sd", c.noise_sd},
                 {"low_attention_fraction", c.low_attention_fraction},
                 {"attention_extra_delay", c.attention_extra_delay},
                 {"seed", c.seed},
                 {"rng", "mt19937_64"}};
  nlohmann::json slopes = nlohmann::json::object();
  for (const auto& [f, s] : truth.planted_slope) slopes[firms.name(f)] = s;
  j["planted_slope"] = slopes;
  nlohmann::json rel = nlohmann::json::object();
  for (const auto& [f, s] : truth.log_rel_size) rel[firms.name(f)] = s;
  j["log_rel_size"] = rel;
  nlohmann::json att = nlohmann::json::object();
  for (const auto& [f, s] : truth.low_attention) att[firms.name(f)] = s;
  j["low_attention"] = att;
  j["expected_linked_correlation_margin"] = truth.expected_linked_correlation_margin;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace cmom
