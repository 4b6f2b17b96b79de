#include "cmom/study.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cmom/csv.hpp"
#include "cmom/report.hpp"

namespace fs = std::filesystem;

namespace cmom {

namespace {

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_levels(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(std::stod(item));
  return out;
}

}  // namespace

StudyConfig StudyConfig::load(const std::string& path) {
  StudyConfig cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("bad config line: " + line);
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (!value.empty() && value.back() == '\r') value.pop_back();
    cfg.apply_override(key, value);
  }
  return cfg;
}

void StudyConfig::apply_override(const std::string& key, const std::string& value) {
  if (key == "data_dir") data_dir = value;
  else if (key == "out_dir") out_dir = value;
  else if (key == "from") from = value;
  else if (key == "to") to = value;
  else if (key == "weights") weights = value;
  else if (key == "buckets") buckets = std::stoi(value);
  else if (key == "lags") lags = split_list(value);
  else if (key == "nw_lags") nw_lags = std::stoi(value);
  else if (key == "models") models = split_list(value);
  else if (key == "regression_star_levels") regression_star_levels = parse_levels(value);
  else if (key == "corr_star_levels") corr_star_levels = parse_levels(value);
  else if (key == "format") format = value;
  else if (key == "lag_months") lag_months = std::stoi(value);
  else if (key == "link_expiry_months") link_expiry_months = std::stoi(value);
  else if (key == "max_rel_size") max_rel_size = std::stod(value);
  else if (key == "winsor") winsor = std::stod(value);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "synth_firms") synth_firms = std::stoi(value);
  else if (key == "synth_months") synth_months = std::stoi(value);
  else if (key == "synth_beta_cmom") synth_beta_cmom = std::stod(value);
  else if (key == "synth_beta_leadlag") synth_beta_leadlag = std::stod(value);
  else if (key == "synth_low_attention") synth_low_attention = std::stod(value);
  else if (key == "synth_daily") synth_daily = value == "1" || value == "true";
  else throw std::invalid_argument("unknown config key: " + key);
}

// Filesystem locations stay out of the canonical string: the hash ties a
// report to the analytical configuration, not to where it was written.
std::string StudyConfig::canonical() const {
  std::ostringstream os;
  os << "from=" << from
     << ";to=" << to << ";weights=" << weights << ";buckets=" << buckets
     << ";lags=";
  for (const auto& l : lags) os << l << ',';
  os << ";nw_lags=" << nw_lags << ";models=";
  for (const auto& m : models) os << m << ',';
  os << ";reg_stars=";
  for (double v : regression_star_levels) os << v << ',';
  os << ";corr_stars=";
  for (double v : corr_star_levels) os << v << ',';
  os << ";format=" << format << ";lag_months=" << lag_months
     << ";expiry=" << link_expiry_months << ";max_rel_size="
     << (is_absent(max_rel_size) ? std::string("off") : format_decimal(max_rel_size))
     << ";winsor=" << (winsor ? format_decimal(*winsor) : std::string("off"))
     << ";seed=" << seed << ";synth=" << synth_firms << 'x' << synth_months
     << ";beta_cmom=" << synth_beta_cmom << ";beta_leadlag=" << synth_beta_leadlag
     << ";low_attention=" << synth_low_attention << ";daily=" << synth_daily;
  return os.str();
}

namespace {

DGPConfig dgp_from_config(const StudyConfig& cfg) {
  DGPConfig d;
  d.n_firms = cfg.synth_firms;
  d.n_periods = cfg.synth_months;
  d.beta_cmom = cfg.synth_beta_cmom;
  d.beta_leadlag = cfg.synth_beta_leadlag;
  d.low_attention_fraction = cfg.synth_low_attention;
  d.daily_panel = cfg.synth_daily;
  d.seed = cfg.seed;
  d.start_month = month_ordinal(1980, 1);
  return d;
}

LinkTable load_links(const std::string& path, FirmIndex& firms,
                     const StudyConfig& cfg) {
  CsvReader reader(path);
  int c_sup = reader.column("supplier_id");
  int c_cust = reader.column("customer_id");
  if (reader.has_column("fy_end_date")) {
    // pre-lag form, run through the reporting-lag shift
    int c_fy = reader.column("fy_end_date");
    std::vector<RawLink> raw;
    while (reader.next()) {
      RawLink r;
      r.supplier = firms.intern(reader.field(c_sup));
      r.customer = firms.intern(reader.field(c_cust));
      r.fiscal_year_end = month_ordinal(reader.field(c_fy));
      raw.push_back(r);
    }
    LagOptions opt;
    opt.lag_months = cfg.lag_months;
    opt.expiry_months = cfg.link_expiry_months;
    return lag_links(std::move(raw), opt);
  }
  int c_from = reader.column("effective_from");
  int c_to = reader.column("effective_to");
  std::vector<LinkRow> rows;
  while (reader.next()) {
    LinkRow r;
    r.supplier = firms.intern(reader.field(c_sup));
    r.customer = firms.intern(reader.field(c_cust));
    r.effective_from = month_ordinal(reader.field(c_from));
    r.effective_to = month_ordinal(reader.field(c_to));
    rows.push_back(r);
  }
  return LinkTable(std::move(rows));
}

// Daily link windows: a link is active on every trading day whose month
// lies inside the monthly window.
LinkTable links_to_daily(const LinkTable& links, const TradingCalendar& cal) {
  std::vector<LinkRow> rows;
  for (const LinkRow& r : links.rows()) {
    int from_day = -1, to_day = -1;
    for (int d = 0; d < cal.size(); ++d) {
      int m = month_ordinal(cal.date(d).year, cal.date(d).month);
      if (from_day < 0 && m >= r.effective_from) from_day = d;
      if (m <= r.effective_to) to_day = d;
    }
    if (from_day >= 0 && to_day >= from_day)
      rows.push_back({r.supplier, r.customer, from_day, to_day});
  }
  return LinkTable(std::move(rows));
}

}  // namespace

StudyData load_study_data(const StudyConfig& cfg) {
  StudyData d;
  const std::string dir = cfg.data_dir;

  if (fs::exists(dir + "/calendar.csv"))
    d.calendar = TradingCalendar::load_csv(dir + "/calendar.csv");

  IngestReport ingest;
  d.monthly = ReturnPanel::ingest_csv(dir + "/returns.csv", Frequency::Monthly,
                                      d.firms, ingest);
  if (!cfg.from.empty() || !cfg.to.empty()) {
    int from = cfg.from.empty() ? d.monthly.min_period() : month_ordinal(cfg.from);
    int to = cfg.to.empty() ? d.monthly.max_period() : month_ordinal(cfg.to);
    d.monthly = d.monthly.filter(from, to);
  }

  d.links = load_links(dir + "/links.csv", d.firms, cfg);
  d.market = MarketSeries::load_csv(dir + "/market.csv", Frequency::Monthly);

  if (fs::exists(dir + "/announcements.csv")) {
    IngestReport rep;
    d.announcements = AnnouncementTable::load_csv(dir + "/announcements.csv",
                                                  d.firms, rep);
    d.has_announcements = true;
  }
  if (fs::exists(dir + "/daily_returns.csv")) {
    if (!d.calendar)
      throw std::runtime_error("daily_returns.csv requires calendar.csv");
    IngestReport rep;
    d.daily = ReturnPanel::ingest_csv(dir + "/daily_returns.csv", Frequency::Daily,
                                      d.firms, rep, {}, DedupePolicy::Fatal,
                                      &*d.calendar);
    d.daily_market = MarketSeries::load_csv(dir + "/daily_market.csv",
                                            Frequency::Daily, &*d.calendar);
  }
  if (fs::exists(dir + "/factors.csv"))
    d.external_factors = load_factors_csv(dir + "/factors.csv");

  const int first_month = d.monthly.min_period();
  const int last_month = d.monthly.max_period();

  // Announcement-based signals first; customer aggregates average them.
  if (d.has_announcements) {
    const auto& rows = d.announcements.rows();
    std::vector<std::optional<double>> sue(rows.size()), car3(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      auto [lo, hi] = d.announcements.firm_rows(rows[i].firm);
      sue[i] = compute_sue(d.announcements, rows[i].firm, static_cast<int>(i) - lo);
      (void)hi;
      if (d.daily && d.calendar)
        car3[i] = compute_car3(*d.daily, d.daily_market, *d.calendar,
                               rows[i].firm, rows[i].date);
    }
    attach_announcement_signal(d.announcements, sue, "sue", first_month,
                               last_month, d.signals);
    if (d.daily)
      attach_announcement_signal(d.announcements, car3, "car3", first_month,
                                 last_month, d.signals);
  }

  d.aggregates = customer_aggregates(d.monthly, d.links, &d.signals);
  aggregates_to_signals(d.aggregates, d.signals);
  for (const auto& lag : cfg.lags) {
    LagWindow w = LagWindow::parse(lag);
    if (!(w.j == 1 && w.k == 1))
      compute_customer_momentum(d.aggregates, w, d.signals);
  }
  compute_momentum(d.monthly, LagWindow(12, 2), d.signals);
  compute_momentum(d.monthly, LagWindow(1, 1), d.signals);
  standard_characteristics(d.monthly, nullptr, nullptr, d.signals);

  // NAV: supplier attention on its customers' announcement days, attached
  // for the following three months or until the customer's next report.
  if (d.daily && d.has_announcements) {
    std::map<int, std::vector<int>> suppliers_of;
    for (const LinkRow& r : d.links.rows())
      suppliers_of[r.customer].push_back(r.supplier);
    const auto& rows = d.announcements.rows();
    for (size_t i = 0; i < rows.size(); ++i) {
      auto it = suppliers_of.find(rows[i].firm);
      if (it == suppliers_of.end()) continue;
      auto day = d.calendar->ordinal_on_or_after(rows[i].date);
      if (!day) continue;
      int announce_month = month_ordinal(rows[i].date.year, rows[i].date.month);
      int until = announce_month + 3;
      if (i + 1 < rows.size() && rows[i + 1].firm == rows[i].firm)
        until = std::min(until, month_ordinal(rows[i + 1].date.year,
                                              rows[i + 1].date.month));
      for (int supplier : it->second) {
        auto nav = compute_nav(*d.daily, supplier, *day);
        if (!nav) continue;
        for (int t = std::max(first_month, announce_month + 1);
             t <= std::min(until, last_month + 1); ++t)
          d.signals.set("nav", supplier, t, *nav);
      }
    }
  }
  return d;
}

namespace {

Weighting weighting_of(const StudyConfig& cfg) {
  if (cfg.weights == "ew") return Weighting::Equal;
  if (cfg.weights == "vw") return Weighting::Value;
  throw std::invalid_argument("weights must be ew or vw");
}

CovSpec nw(const StudyConfig& cfg) { return CovSpec::newey_west(cfg.nw_lags); }

// Internally built factor collection, overlaid with any external series.
std::map<std::string, std::map<int, double>> build_factor_set(
    const StudyConfig& cfg, const StudyData& d) {
  std::map<std::string, std::map<int, double>> out;
  for (int p : d.market.periods())
    out["MKT-RF"][p] = d.market.mkt_ret(p) - d.market.rf(p);
  auto add = [&](const std::string& signal, const std::string& name) {
    if (!d.signals.has_signal(signal)) return;
    FactorSeries f = build_factor(d.monthly, d.signals, signal, name);
    if (!f.returns.empty()) out[name] = f.returns;
  };
  add("cmom-1-1", "CMOM");
  add("mom-12-2", "UMD");
  add("sue", "SUEF");
  add("car3", "CAR3F");
  for (const auto& [name, series] : d.external_factors) out[name] = series;
  return out;
}

struct ReportContext {
  const StudyConfig& cfg;
  std::string hash;
};

void cmd_coverage(const ReportContext& ctx, const StudyData& d) {
  auto table = coverage_report(d.monthly, d.links.suppliers(), d.monthly);
  MarkdownTable md({"year", "linked", "universe", "frac_firms", "frac_me"});
  nlohmann::json rows = nlohmann::json::array();
  for (const CoverageYear& y : table) {
    md.add_row({std::to_string(y.year), std::to_string(y.linked_firms),
                std::to_string(y.universe_firms), fmt_num(y.count_fraction, 3),
                fmt_num(y.me_fraction, 3)});
    rows.push_back({{"year", y.year},
                    {"linked", y.linked_firms},
                    {"universe", y.universe_firms},
                    {"frac_firms", is_absent(y.count_fraction) ? nlohmann::json()
                                                               : nlohmann::json(y.count_fraction)},
                    {"frac_me", is_absent(y.me_fraction) ? nlohmann::json()
                                                         : nlohmann::json(y.me_fraction)}});
  }
  write_report(ctx.cfg.out_dir, "coverage",
               "# Linked-sample coverage by year\n\n" + md.render(),
               {{"rows", rows}}, ctx.hash);
}

void sort_table(const ReportContext& ctx, const StudyData& d,
                const std::vector<std::string>& signal_names,
                const std::string& report_name, const std::string& title,
                const BreakpointSpec& spec) {
  Weighting w = weighting_of(ctx.cfg);
  std::vector<std::string> header{"signal", "stat"};
  for (int b = 1; b <= spec.n_buckets; ++b) header.push_back("D" + std::to_string(b));
  header.push_back("L/S");
  MarkdownTable md(header);
  nlohmann::json rows = nlohmann::json::array();

  for (const auto& name : signal_names) {
    if (!d.signals.has_signal(name)) continue;
    PortfolioSeries ps = form_portfolios(d.monthly, d.signals, name, spec, w);
    if (ps.periods.empty()) continue;
    std::vector<std::string> mean_row{name, "mean"}, t_row{"", "t"};
    nlohmann::json jrow{{"signal", name}};
    for (int b = 0; b < spec.n_buckets; ++b) {
      std::vector<double> excess;
      for (const PortfolioPeriod& p : ps.periods) {
        double rf = d.market.rf(p.period);
        excess.push_back(p.bucket_ret[b] - (is_absent(rf) ? 0.0 : rf));
      }
      SummaryRow s = summary_stats("", excess, Frequency::Monthly, nw(ctx.cfg));
      mean_row.push_back(fmt_percent(s.mean) +
                         stars(normal_two_sided_p(s.tstat), ctx.cfg.regression_star_levels));
      t_row.push_back(fmt_tstat(s.tstat));
      jrow["bucket_mean"].push_back(s.mean);
      jrow["bucket_t"].push_back(s.tstat);
    }
    std::vector<double> ls;
    for (const PortfolioPeriod& p : ps.periods) ls.push_back(p.long_short);
    SummaryRow s = summary_stats("", ls, Frequency::Monthly, nw(ctx.cfg));
    mean_row.push_back(fmt_percent(s.mean) +
                       stars(normal_two_sided_p(s.tstat), ctx.cfg.regression_star_levels));
    t_row.push_back(fmt_tstat(s.tstat));
    jrow["ls_mean"] = s.mean;
    jrow["ls_t"] = s.tstat;
    jrow["n_periods"] = static_cast<int>(ps.periods.size());
    md.add_row(mean_row);
    md.add_row(t_row);
    rows.push_back(jrow);
    emit_portfolios_csv(ctx.cfg.out_dir + "/portfolios_" + name + ".csv", ps);
  }
  write_report(ctx.cfg.out_dir, report_name, "# " + title + "\n\n" + md.render(),
               {{"rows", rows}}, ctx.hash);
}

void cmd_sort(const ReportContext& ctx, const StudyData& d) {
  std::vector<std::string> names;
  for (const auto& lag : ctx.cfg.lags) names.push_back("cmom-" + lag);
  BreakpointSpec spec;
  spec.n_buckets = ctx.cfg.buckets;
  spec.universe = BreakpointUniverse::PooledAllPeriods;
  sort_table(ctx, d, names, "sort",
             "Quantile portfolios on customer momentum by lag window", spec);

  // customers' earnings-signal sorts
  std::vector<std::string> cust_names;
  if (d.signals.has_signal("cust_sue")) cust_names.push_back("cust_sue");
  if (d.signals.has_signal("cust_car3")) cust_names.push_back("cust_car3");
  if (!cust_names.empty())
    sort_table(ctx, d, cust_names, "sort_customer_earnings",
               "Quantile portfolios on customers' SUE and CAR3", spec);

  // relative-size restricted sort
  if (!is_absent(ctx.cfg.max_rel_size) && d.signals.has_signal("rel_size")) {
    auto mask = restrict_by_ratio(d.signals, ctx.cfg.max_rel_size);
    PortfolioSeries ps = form_portfolios(d.monthly, d.signals, "cmom-1-1", spec,
                                         weighting_of(ctx.cfg), 0, &mask);
    std::vector<double> ls;
    for (const PortfolioPeriod& p : ps.periods) ls.push_back(p.long_short);
    nlohmann::json j;
    if (ls.size() >= 2) {
      SummaryRow s = summary_stats("", ls, Frequency::Monthly, nw(ctx.cfg));
      j["ls_mean"] = s.mean;
      j["ls_t"] = s.tstat;
      j["n_periods"] = s.n;
    }
    j["max_rel_size"] = ctx.cfg.max_rel_size;
    write_report(ctx.cfg.out_dir, "sort_restricted",
                 "# Customer momentum, links restricted by relative size\n",
                 j, ctx.hash);
  }
}

void cmd_sort_daily(const ReportContext& ctx, const StudyData& d) {
  if (!d.daily) return;
  LinkTable daily_links = links_to_daily(d.links, *d.calendar);
  auto daily_aggs = customer_aggregates(*d.daily, daily_links);
  SignalPanel daily_signals;
  aggregates_to_signals(daily_aggs, daily_signals);
  if (!daily_signals.has_signal("cmom-1-1")) return;

  std::vector<int> horizons{1, 5, 10, 15, 20, 30};
  std::vector<std::string> header{"horizon", "stat"};
  for (int b = 1; b <= 10; ++b) header.push_back("D" + std::to_string(b));
  header.push_back("L/S");
  MarkdownTable md(header);
  nlohmann::json rows = nlohmann::json::array();

  for (int h : horizons) {
    // forward h-day compounded return, re-dated to formation+1 so the
    // single-period sorter applies unchanged
    std::vector<int> pf, pp;
    std::vector<double> pr;
    for (int firm : d.daily->firms()) {
      auto [lo, hi] = d.daily->firm_rows(firm);
      for (int row = lo; row < hi; ++row) {
        int t = d.daily->period(row);
        double growth = 1.0;
        bool complete = true;
        for (int s = t; s < t + h; ++s) {
          double r = d.daily->ret_at(firm, s);
          if (is_absent(r)) {
            complete = false;
            break;
          }
          growth *= 1.0 + r;
        }
        if (!complete) continue;
        pf.push_back(firm);
        pp.push_back(t);
        pr.push_back(growth - 1.0);
      }
    }
    ReturnPanel fwd = ReturnPanel::from_rows(Frequency::Daily, pf, pp, pr, {}, {}, {});
    BreakpointSpec spec;
    spec.n_buckets = 10;
    spec.universe = BreakpointUniverse::PooledAllPeriods;
    PortfolioSeries ps = form_portfolios(fwd, daily_signals, "cmom-1-1", spec,
                                         Weighting::Equal);
    if (ps.periods.empty()) continue;
    std::vector<std::string> mean_row{std::to_string(h) + "d", "mean"},
        t_row{"", "t"};
    nlohmann::json jrow{{"horizon", h}};
    for (int b = 0; b < 10; ++b) {
      std::vector<double> series;
      for (const PortfolioPeriod& p : ps.periods) series.push_back(p.bucket_ret[b]);
      SummaryRow s = summary_stats("", series, Frequency::Daily, nw(ctx.cfg));
      mean_row.push_back(fmt_percent(s.mean));
      t_row.push_back(fmt_tstat(s.tstat));
      jrow["bucket_mean"].push_back(s.mean);
    }
    std::vector<double> ls;
    for (const PortfolioPeriod& p : ps.periods) ls.push_back(p.long_short);
    SummaryRow s = summary_stats("", ls, Frequency::Daily, nw(ctx.cfg));
    mean_row.push_back(fmt_percent(s.mean) +
                       stars(normal_two_sided_p(s.tstat), ctx.cfg.regression_star_levels));
    t_row.push_back(fmt_tstat(s.tstat));
    jrow["ls_mean"] = s.mean;
    jrow["ls_t"] = s.tstat;
    md.add_row(mean_row);
    md.add_row(t_row);
    rows.push_back(jrow);
  }
  write_report(ctx.cfg.out_dir, "sort_daily",
               "# Daily customer momentum by forward horizon\n\n" + md.render(),
               {{"rows", rows}}, ctx.hash);
}

void cmd_alpha(const ReportContext& ctx, const StudyData& d) {
  auto factors = build_factor_set(ctx.cfg, d);
  BreakpointSpec spec;
  spec.n_buckets = ctx.cfg.buckets;
  spec.universe = BreakpointUniverse::PooledAllPeriods;
  PortfolioSeries ps = form_portfolios(d.monthly, d.signals, "cmom-1-1", spec,
                                       weighting_of(ctx.cfg));
  if (ps.periods.empty()) throw std::runtime_error("alpha: no portfolio periods");

  std::vector<std::string> header{"model", "stat"};
  for (int b = 1; b <= spec.n_buckets; ++b) header.push_back("D" + std::to_string(b));
  header.push_back("L/S");
  MarkdownTable md(header);
  nlohmann::json rows = nlohmann::json::array();

  for (const auto& model : ctx.cfg.models) {
    std::vector<std::string> a_row{model, "alpha"}, t_row{"", "t"};
    nlohmann::json jrow{{"model", model}};
    for (int b = 0; b <= spec.n_buckets; ++b) {
      bool is_ls = b == spec.n_buckets;
      std::map<int, double> asset =
          is_ls ? ps.long_short_series() : ps.bucket_series(b);
      // single buckets are RF-adjusted, long-short legs are zero-investment
      RegressionReport rep = alpha_regression(asset, model, factors, &d.market,
                                              !is_ls, nw(ctx.cfg));
      double alpha = rep.coef[0], t = rep.tstat[0];
      a_row.push_back(fmt_percent(alpha) +
                      stars(normal_two_sided_p(t), ctx.cfg.regression_star_levels));
      t_row.push_back(fmt_tstat(t));
      jrow["alpha"].push_back(alpha);
      jrow["t"].push_back(t);
    }
    md.add_row(a_row);
    md.add_row(t_row);
    rows.push_back(jrow);
  }
  write_report(ctx.cfg.out_dir, "alpha",
               "# Abnormal returns of customer-momentum portfolios\n\n" + md.render(),
               {{"rows", rows}}, ctx.hash);
}

void cmd_factors(const ReportContext& ctx, const StudyData& d) {
  std::vector<FactorSeries> built;
  auto add = [&](const std::string& signal, const std::string& name) {
    if (!d.signals.has_signal(signal)) return;
    FactorSeries f = build_factor(d.monthly, d.signals, signal, name);
    if (!f.returns.empty()) built.push_back(std::move(f));
  };
  add("cmom-1-1", "CMOM");
  add("mom-12-2", "UMD");
  add("sue", "SUEF");
  add("car3", "CAR3F");
  FactorSeries mkt;
  mkt.name = "MKT-RF";
  for (int p : d.market.periods()) mkt.returns[p] = d.market.mkt_ret(p) - d.market.rf(p);
  built.push_back(std::move(mkt));
  emit_factors_csv(ctx.cfg.out_dir + "/factors.csv", built);

  MarkdownTable md({"factor", "mean", "t", "sd", "sharpe", "n"});
  nlohmann::json rows = nlohmann::json::array();
  for (const FactorSeries& f : built) {
    std::vector<double> series;
    for (const auto& [_, r] : f.returns) series.push_back(r);
    SummaryRow s = summary_stats(f.name, series, Frequency::Monthly, nw(ctx.cfg));
    md.add_row({f.name,
                fmt_percent(s.mean) + stars(normal_two_sided_p(s.tstat),
                                            ctx.cfg.regression_star_levels),
                fmt_tstat(s.tstat), fmt_percent(s.sd), fmt_num(s.sharpe),
                std::to_string(s.n)});
    rows.push_back({{"factor", f.name}, {"mean", s.mean}, {"t", s.tstat},
                    {"sd", s.sd}, {"n", s.n}});
  }
  write_report(ctx.cfg.out_dir, "factors",
               "# Constructed factors\n\n" + md.render(), {{"rows", rows}},
               ctx.hash);
}

void cmd_spanning(const ReportContext& ctx, const StudyData& d) {
  auto factors = build_factor_set(ctx.cfg, d);
  std::vector<std::string> testable;
  for (const auto& name : {"CMOM", "UMD", "SUEF", "CAR3F"})
    if (factors.count(name)) testable.push_back(name);

  MarkdownTable md({"target", "rhs", "alpha", "t", "r2", "n"});
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& target : testable) {
    std::vector<std::string> rhs{"MKT-RF"};
    for (const auto& other : testable)
      if (other != target) rhs.push_back(other);
    RegressionReport rep = spanning_test(factors.at(target), rhs, factors, nw(ctx.cfg));
    std::string rhs_label;
    for (const auto& r : rhs) rhs_label += (rhs_label.empty() ? "" : "+") + r;
    md.add_row({target, rhs_label,
                fmt_percent(rep.coef[0]) +
                    stars(normal_two_sided_p(rep.tstat[0]), ctx.cfg.regression_star_levels),
                fmt_tstat(rep.tstat[0]), fmt_num(rep.r2), std::to_string(rep.n_obs)});
    nlohmann::json jrow{{"target", target}, {"alpha", rep.coef[0]},
                        {"t", rep.tstat[0]}, {"r2", rep.r2}, {"n", rep.n_obs}};
    for (size_t i = 0; i < rep.names.size(); ++i) {
      jrow["coef"][rep.names[i]] = rep.coef[i];
      jrow["tstat"][rep.names[i]] = rep.tstat[i];
    }
    rows.push_back(jrow);
  }
  write_report(ctx.cfg.out_dir, "spanning",
               "# Factor spanning tests\n\n" + md.render(), {{"rows", rows}},
               ctx.hash);
}

void cmd_fm(const ReportContext& ctx, const StudyData& d) {
  FMInput input;
  for (const auto& name : d.signals.signal_names())
    input.signals[name] = d.signals.series(name);

  std::vector<std::vector<std::string>> specs;
  specs.push_back({"cmom-1-1"});
  if (d.signals.has_signal("mom-1-1") && d.signals.has_signal("mom-12-2") &&
      d.signals.has_signal("log_me"))
    specs.push_back({"cmom-1-1", "mom-1-1", "mom-12-2", "log_me"});
  if (d.signals.has_signal("sue") && d.signals.has_signal("car3"))
    specs.push_back({"cmom-1-1", "mom-1-1", "mom-12-2", "log_me", "sue", "car3"});
  if (d.signals.has_signal("rel_size"))
    specs.push_back({"cmom-1-1", "rel_size", "cmom-1-1*rel_size"});

  MarkdownTable md({"spec", "regressor", "slope", "t", "mean_adj_r2",
                    "pooled_r2", "n_periods", "n_obs"});
  nlohmann::json rows = nlohmann::json::array();
  int spec_no = 0;
  for (const auto& regressors : specs) {
    ++spec_no;
    FMReport rep;
    try {
      rep = fama_macbeth(d.monthly, input, regressors,
                         ctx.cfg.nw_lags >= 0 ? CovSpec::newey_west(ctx.cfg.nw_lags)
                                              : CovSpec::plain());
    } catch (const std::runtime_error&) {
      continue;  // no valid period for this specification
    }
    nlohmann::json jrow{{"spec", spec_no},
                        {"mean_adj_r2", rep.mean_adj_r2},
                        {"pooled_r2", rep.pooled_r2},
                        {"n_periods", rep.n_periods},
                        {"n_obs", rep.n_obs}};
    for (size_t i = 0; i < rep.names.size(); ++i) {
      md.add_row({i == 0 ? "(" + std::to_string(spec_no) + ")" : "",
                  rep.names[i],
                  fmt_num(rep.mean_slope[i], 4) +
                      stars(normal_two_sided_p(rep.tstat[i]),
                            ctx.cfg.regression_star_levels),
                  fmt_tstat(rep.tstat[i]),
                  i == 0 ? fmt_num(rep.mean_adj_r2, 3) : "",
                  i == 0 ? fmt_num(rep.pooled_r2, 3) : "",
                  i == 0 ? std::to_string(rep.n_periods) : "",
                  i == 0 ? std::to_string(rep.n_obs) : ""});
      jrow["slope"][rep.names[i]] = rep.mean_slope[i];
      jrow["t"][rep.names[i]] =
          is_absent(rep.tstat[i]) ? nlohmann::json() : nlohmann::json(rep.tstat[i]);
    }
    rows.push_back(jrow);
  }
  write_report(ctx.cfg.out_dir, "fm",
               "# Fama-MacBeth regressions\n\n" + md.render(), {{"rows", rows}},
               ctx.hash);
}

void double_sort_report(const ReportContext& ctx, const StudyData& d,
                        const std::string& outer_signal, int n_outer,
                        const std::string& report_name, const std::string& title) {
  auto series = conditional_double_sort(d.monthly, d.signals, outer_signal,
                                        n_outer, "cmom-1-1", 5,
                                        weighting_of(ctx.cfg));
  MarkdownTable md({"outer_bucket", "ls_mean", "t", "n_periods"});
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> ls_means;
  for (int b = 0; b < n_outer; ++b) {
    std::vector<double> ls;
    for (const PortfolioPeriod& p : series[b].periods) ls.push_back(p.long_short);
    if (ls.size() < 2) {
      md.add_row({std::to_string(b + 1), "", "", "0"});
      ls_means.push_back(kAbsent);
      continue;
    }
    SummaryRow s = summary_stats("", ls, Frequency::Monthly, nw(ctx.cfg));
    md.add_row({std::to_string(b + 1),
                fmt_percent(s.mean) + stars(normal_two_sided_p(s.tstat),
                                            ctx.cfg.regression_star_levels),
                fmt_tstat(s.tstat), std::to_string(s.n)});
    rows.push_back({{"outer_bucket", b + 1}, {"ls_mean", s.mean}, {"t", s.tstat},
                    {"n_periods", s.n}});
    ls_means.push_back(s.mean);
  }
  // low-minus-high difference across the outer sort
  nlohmann::json j{{"rows", rows}, {"outer_signal", outer_signal}};
  if (!ls_means.empty() && !is_absent(ls_means.front()) && !is_absent(ls_means.back()))
    j["low_minus_high"] = ls_means.front() - ls_means.back();
  write_report(ctx.cfg.out_dir, report_name, "# " + title + "\n\n" + md.render(),
               j, ctx.hash);
}

void cmd_doublesort(const ReportContext& ctx, const StudyData& d) {
  if (d.signals.has_signal("rel_size"))
    double_sort_report(ctx, d, "rel_size", 5, "doublesort_relsize",
                       "Customer momentum L/S across relative-size quintiles");
  if (d.signals.has_signal("nav"))
    double_sort_report(ctx, d, "nav", 5, "doublesort_nav",
                       "Customer momentum L/S across attention (NAV) quintiles");
}

void cmd_summary(const ReportContext& ctx, const StudyData& d) {
  auto factors = build_factor_set(ctx.cfg, d);
  std::vector<std::pair<std::string, std::map<int, double>>> series;
  for (int n_buckets : {5, 10}) {
    BreakpointSpec spec;
    spec.n_buckets = n_buckets;
    spec.universe = BreakpointUniverse::PooledAllPeriods;
    PortfolioSeries ps = form_portfolios(d.monthly, d.signals, "cmom-1-1", spec,
                                         weighting_of(ctx.cfg));
    series.emplace_back("LS" + std::to_string(n_buckets), ps.long_short_series());
  }
  std::map<int, double> mkt;
  for (int p : d.market.periods()) mkt[p] = d.market.mkt_ret(p);
  series.emplace_back("Mkt", mkt);
  for (const auto& [name, f] : factors)
    if (name != "MKT-RF") series.emplace_back(name, f);

  MarkdownTable md({"series", "mean", "se", "t", "sd", "min", "p05", "p25",
                    "p50", "p75", "p95", "max", "sharpe", "n"});
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [name, s_map] : series) {
    std::vector<double> vals;
    for (const auto& [_, v] : s_map) vals.push_back(v);
    if (vals.size() < 2) continue;
    SummaryRow s = summary_stats(name, vals, Frequency::Monthly, nw(ctx.cfg));
    md.add_row({name, fmt_percent(s.mean), fmt_percent(s.se), fmt_num(s.tstat),
                fmt_percent(s.sd), fmt_percent(s.min), fmt_percent(s.p05),
                fmt_percent(s.p25), fmt_percent(s.p50), fmt_percent(s.p75),
                fmt_percent(s.p95), fmt_percent(s.max), fmt_num(s.sharpe),
                std::to_string(s.n)});
    rows.push_back({{"series", name}, {"mean", s.mean}, {"sd", s.sd},
                    {"sharpe", is_absent(s.sharpe) ? nlohmann::json()
                                                   : nlohmann::json(s.sharpe)},
                    {"n", s.n}});
  }
  write_report(ctx.cfg.out_dir, "summary",
               "# Summary statistics\n\n" + md.render(), {{"rows", rows}},
               ctx.hash);
}

void cmd_corr(const ReportContext& ctx, const StudyData& d) {
  auto factors = build_factor_set(ctx.cfg, d);
  std::vector<std::string> names;
  std::vector<std::map<int, double>> series;
  for (const auto& [name, f] : factors) {
    names.push_back(name);
    series.push_back(f);
  }
  auto matrix = correlation_matrix(series, ctx.cfg.corr_star_levels);
  std::vector<std::string> header{""};
  header.insert(header.end(), names.begin(), names.end());
  MarkdownTable md(header);
  nlohmann::json rows = nlohmann::json::array();
  for (size_t i = 0; i < names.size(); ++i) {
    std::vector<std::string> row{names[i]};
    for (size_t j = 0; j <= i; ++j) {
      const CorrelationCell& c = matrix[i][j];
      row.push_back(is_absent(c.rho)
                        ? ""
                        : fmt_num(c.rho) + std::string(c.stars, '*'));
      if (j < i)
        rows.push_back({{"a", names[i]}, {"b", names[j]},
                        {"rho", is_absent(c.rho) ? nlohmann::json()
                                                 : nlohmann::json(c.rho)},
                        {"stars", c.stars}, {"n", c.n}});
    }
    md.add_row(row);
  }
  write_report(ctx.cfg.out_dir, "corr",
               "# Factor correlation matrix\n\n" + md.render(), {{"rows", rows}},
               ctx.hash);
}

void cmd_growth(const ReportContext& ctx, const StudyData& d) {
  auto factors = build_factor_set(ctx.cfg, d);
  std::vector<std::pair<std::string, GrowthSeries>> curves;
  if (factors.count("CMOM")) {
    curves.emplace_back("CMOM", growth_of_dollar(factors.at("CMOM")));
    if (factors.count("UMD")) {
      std::vector<double> umd;
      for (const auto& [_, r] : factors.at("UMD")) umd.push_back(r);
      SummaryRow s = summary_stats("", umd, Frequency::Monthly, CovSpec::plain());
      curves.emplace_back("CMOM_scaled_to_UMD",
                          growth_of_dollar(factors.at("CMOM"), s.sd));
      curves.emplace_back("UMD", growth_of_dollar(factors.at("UMD")));
    }
  }
  if (factors.count("MKT-RF"))
    curves.emplace_back("MKT-RF", growth_of_dollar(factors.at("MKT-RF")));

  fs::create_directories(ctx.cfg.out_dir);
  std::ofstream csv(ctx.cfg.out_dir + "/growth.csv");
  csv << "date,name,value\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [name, g] : curves) {
    for (const auto& [period, v] : g.value)
      csv << month_label(period) << ',' << name << ',' << format_decimal(v) << '\n';
    rows.push_back({{"name", name},
                    {"final", g.value.empty() ? nlohmann::json()
                                              : nlohmann::json(g.value.rbegin()->second)},
                    {"truncated", g.truncated}});
  }
  write_report(ctx.cfg.out_dir, "growth",
               "# Cumulative growth series (see growth.csv)\n", {{"rows", rows}},
               ctx.hash);
}

void cmd_synth(const ReportContext& ctx) {
  SynthResult r = generate(dgp_from_config(ctx.cfg));
  const std::string dir = ctx.cfg.data_dir;
  fs::create_directories(dir);
  r.monthly.emit_csv(dir + "/returns.csv", r.firms);
  r.links.emit_csv(dir + "/links.csv", r.firms);
  r.announcements.emit_csv(dir + "/announcements.csv", r.firms);
  r.market.emit_csv(dir + "/market.csv", Frequency::Monthly);
  {
    std::ofstream cal(dir + "/calendar.csv");
    cal << "date\n";
    for (const CalendarDate& d : r.calendar.days()) cal << format_date(d) << '\n';
  }
  if (ctx.cfg.synth_daily) {
    r.daily.emit_csv(dir + "/daily_returns.csv", r.firms, &r.calendar);
    r.daily_market.emit_csv(dir + "/daily_market.csv", Frequency::Daily,
                            &r.calendar);
  }
  emit_truth_json(dir + "/truth.json", r.truth, r.firms);
}

int error_code_for(const std::string& message) {
  auto starts_with = [&](const char* prefix) {
    return message.rfind(prefix, 0) == 0;
  };
  if (starts_with("missing column") || message.find("missing column") != std::string::npos)
    return static_cast<int>(StudyExit::SchemaMismatch);
  if (starts_with("missing factor series"))
    return static_cast<int>(StudyExit::MissingFactorSeries);
  if (starts_with("degenerate breakpoints"))
    return static_cast<int>(StudyExit::DegenerateBreakpoints);
  if (starts_with("unknown config key") || starts_with("bad config line") ||
      starts_with("cannot open config"))
    return static_cast<int>(StudyExit::BadConfig);
  return static_cast<int>(StudyExit::Error);
}

}  // namespace

StudyExit run_study(const StudyConfig& cfg, const std::string& command) {
  ReportContext ctx{cfg, config_hash(cfg.canonical())};
  try {
    if (command == "synth") {
      cmd_synth(ctx);
      return StudyExit::Ok;
    }
    StudyData d = load_study_data(cfg);
    bool all = command == "all";
    bool ran = false;
    if (all || command == "coverage") cmd_coverage(ctx, d), ran = true;
    if (all || command == "sort") cmd_sort(ctx, d), cmd_sort_daily(ctx, d), ran = true;
    if (all || command == "alpha") cmd_alpha(ctx, d), ran = true;
    if (all || command == "factors") cmd_factors(ctx, d), ran = true;
    if (all || command == "spanning") cmd_spanning(ctx, d), ran = true;
    if (all || command == "fm") cmd_fm(ctx, d), ran = true;
    if (all || command == "doublesort") cmd_doublesort(ctx, d), ran = true;
    if (all || command == "summary") cmd_summary(ctx, d), ran = true;
    if (all || command == "corr") cmd_corr(ctx, d), ran = true;
    if (all || command == "growth") cmd_growth(ctx, d), ran = true;
    if (!ran) throw std::invalid_argument("unknown command: " + command);
    emit_aggregates_csv(cfg.out_dir + "/aggregates.csv", d.aggregates, d.firms);
    d.signals.emit_csv(cfg.out_dir + "/signals.csv", d.firms);
    return StudyExit::Ok;
  } catch (const std::exception& e) {
    int code = error_code_for(e.what());
    nlohmann::json err{{"error", e.what()}, {"exit_code", code},
                       {"command", command}, {"config_hash", ctx.hash}};
    std::cerr << err.dump() << '\n';
    try {
      fs::create_directories(cfg.out_dir);
      std::ofstream out(cfg.out_dir + "/error.json");
      out << err.dump(2) << '\n';
    } catch (...) {
    }
    return static_cast<StudyExit>(code);
  }
}

}  // namespace cmom
