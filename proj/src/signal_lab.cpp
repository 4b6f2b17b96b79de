#include "cmom/signal_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cmom/csv.hpp"

namespace cmom {

LagWindow LagWindow::parse(const std::string& s) {
  size_t dash = s.find('-');
  if (dash == std::string::npos)
    throw std::invalid_argument("bad lag window: " + s);
  return LagWindow(std::stoi(s.substr(0, dash)), std::stoi(s.substr(dash + 1)));
}

void SignalPanel::set(const std::string& signal, int firm, int period,
                      double value) {
  if (!std::isfinite(value))
    throw std::invalid_argument("signal values must be finite");
  data_[signal][{firm, period}] = value;
}

std::optional<double> SignalPanel::get(const std::string& signal, int firm,
                                       int period) const {
  auto it = data_.find(signal);
  if (it == data_.end()) return std::nullopt;
  auto jt = it->second.find({firm, period});
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

bool SignalPanel::has_signal(const std::string& signal) const {
  return data_.count(signal) > 0;
}

const std::map<std::pair<int, int>, double>& SignalPanel::series(
    const std::string& signal) const {
  auto it = data_.find(signal);
  if (it == data_.end())
    throw std::invalid_argument("no signal named " + signal);
  return it->second;
}

std::vector<std::string> SignalPanel::signal_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : data_) out.push_back(name);
  return out;
}

void SignalPanel::emit_csv(const std::string& path, const FirmIndex& firms,
                           Frequency freq, const TradingCalendar* calendar) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "firm_id,date,signal_name,value\n";
  // Deterministic order: firm, period, signal_name.
  std::vector<std::tuple<int, int, const std::string*, double>> rows;
  for (const auto& [name, series] : data_)
    for (const auto& [key, value] : series)
      rows.emplace_back(key.first, key.second, &name, value);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a), *std::get<2>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b), *std::get<2>(b));
  });
  for (const auto& [firm, period, name, value] : rows) {
    out << firms.name(firm) << ',';
    if (freq == Frequency::Monthly) out << month_label(period);
    else out << format_date(calendar->date(period));
    out << ',' << *name << ',' << format_decimal(value) << '\n';
  }
}

std::optional<double> window_return(const ReturnPanel& panel, int firm, int t,
                                    const LagWindow& w) {
  double growth = 1.0;
  for (int s = t - w.j; s <= t - w.k; ++s) {
    double r = panel.ret_at(firm, s);
    if (is_absent(r)) return std::nullopt;  // no partial compounding
    growth *= 1.0 + r;
  }
  return growth - 1.0;
}

void compute_momentum(const ReturnPanel& panel, const LagWindow& w,
                      SignalPanel& out, const std::string& name) {
  std::string signal = name.empty() ? "mom-" + w.label() : name;
  int lo = panel.min_period(), hi = panel.max_period();
  for (int firm : panel.firms()) {
    // window [t+1-j, t+1-k] relative to the month t+1 the sort earns
    for (int t = lo + w.j - 1; t <= hi + w.k - 1; ++t) {
      auto r = window_return(panel, firm, t + 1, w);
      if (r) out.set(signal, firm, t, *r);
    }
  }
}

std::optional<double> compute_sue(const AnnouncementTable& announcements,
                                  int firm, int t, const SueOptions& opt) {
  auto [lo, hi] = announcements.firm_rows(firm);
  const auto& rows = announcements.rows();
  int idx = lo + t;
  if (t < 0 || idx >= hi) return std::nullopt;

  // Sample rule: at least min_announcements in the trailing 2-year window.
  const CalendarDate& d = rows[idx].date;
  CalendarDate cutoff{d.year - 2, d.month, d.day};
  int in_window = 0;
  for (int i = lo; i <= idx; ++i)
    if (rows[i].date > cutoff) ++in_window;
  if (in_window < opt.min_announcements) return std::nullopt;

  // YoY changes over the announcement sequence, most recent `history`.
  std::vector<double> changes;
  for (int i = idx; i >= lo + 4 && static_cast<int>(changes.size()) < opt.history; --i)
    changes.push_back(rows[i].eps - rows[i - 4].eps);
  if (changes.empty()) return std::nullopt;

  double latest = changes.front();
  double mean = std::accumulate(changes.begin(), changes.end(), 0.0) / changes.size();
  double var = 0.0;
  for (double c : changes) var += (c - mean) * (c - mean);
  if (changes.size() < 2) return std::nullopt;
  var /= (changes.size() - 1);
  double sd = std::sqrt(var);
  // flat change histories leave only FP dust in the variance
  if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) return std::nullopt;
  return latest / sd;
}

std::optional<double> compute_car3(const ReturnPanel& daily_panel,
                                   const MarketSeries& market,
                                   const TradingCalendar& calendar, int firm,
                                   const CalendarDate& announce_date) {
  auto day = calendar.ordinal_on_or_after(announce_date);
  if (!day) return std::nullopt;  // past the end of the calendar
  double car = 0.0;
  for (int d = *day - 1; d <= *day + 1; ++d) {
    if (d < 0 || d >= calendar.size()) return std::nullopt;
    double r = daily_panel.ret_at(firm, d);
    double m = market.mkt_ret(d);
    if (is_absent(r) || is_absent(m)) return std::nullopt;
    car += r - m;
  }
  return car;
}

std::optional<double> compute_nav(const ReturnPanel& daily_panel, int supplier,
                                  int event_day, const NavOptions& opt) {
  int row = daily_panel.find(supplier, event_day);
  if (row < 0) return std::nullopt;
  double v_event = daily_panel.volume(row);
  if (is_absent(v_event)) return std::nullopt;

  std::vector<double> baseline;
  for (int d = event_day - opt.baseline_from; d <= event_day - opt.baseline_to; ++d) {
    if (d < 0) continue;
    int r = daily_panel.find(supplier, d);
    if (r < 0) continue;
    double v = daily_panel.volume(r);
    if (is_absent(v)) continue;
    baseline.push_back(std::log1p(v));
  }
  if (static_cast<int>(baseline.size()) < opt.min_baseline_obs)
    return std::nullopt;

  double mean = std::accumulate(baseline.begin(), baseline.end(), 0.0) / baseline.size();
  double var = 0.0;
  for (double v : baseline) var += (v - mean) * (v - mean);
  var /= (baseline.size() - 1);
  double sd = std::sqrt(var);
  // flat baselines leave only FP dust in the variance; treat as degenerate
  if (sd <= 1e-9 * std::max(1.0, std::abs(mean))) return std::nullopt;
  return (std::log1p(v_event) - mean) / sd;
}

void standard_characteristics(
    const ReturnPanel& panel,
    const std::map<std::pair<int, int>, double>* book_to_market,
    const std::map<std::pair<int, int>, double>* profitability,
    SignalPanel& out) {
  for (int i = 0; i < panel.size(); ++i) {
    double me = panel.market_equity(i);
    if (!is_absent(me) && me > 0)
      out.set("log_me", panel.firm(i), panel.period(i), std::log(me));
  }
  if (book_to_market) {
    for (const auto& [key, bm] : *book_to_market)
      if (!is_absent(bm) && bm > 0)
        out.set("log_bm", key.first, key.second, std::log(bm));
  }
  if (profitability) {
    for (const auto& [key, op] : *profitability)
      if (!is_absent(op)) out.set("op", key.first, key.second, op);
  }
}

void attach_announcement_signal(
    const AnnouncementTable& announcements,
    const std::vector<std::optional<double>>& per_announcement_value,
    const std::string& signal_name, int first_month, int last_month,
    SignalPanel& out) {
  const auto& rows = announcements.rows();
  if (per_announcement_value.size() != rows.size())
    throw std::invalid_argument("one value per announcement required");
  for (size_t i = 0; i < rows.size(); ++i) {
    int firm = rows[i].firm;
    int announce_month = month_ordinal(rows[i].date.year, rows[i].date.month);
    // Active until the next announcement of the same firm supersedes it.
    int until = last_month;
    if (i + 1 < rows.size() && rows[i + 1].firm == firm)
      until = std::min(until,
                       month_ordinal(rows[i + 1].date.year, rows[i + 1].date.month));
    if (!per_announcement_value[i]) continue;
    for (int t = std::max(first_month, announce_month + 1); t <= until; ++t)
      out.set(signal_name, firm, t, *per_announcement_value[i]);
  }
}

}  // namespace cmom
