#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmom/panel.hpp"

namespace cmom {

// j-k return window: periods t-j through t-k inclusive, j >= k >= 1.
struct LagWindow {
  int j = 1, k = 1;

  LagWindow() = default;
  LagWindow(int j_, int k_) : j(j_), k(k_) {
    if (j < k || k < 1) throw std::invalid_argument("lag window needs j >= k >= 1");
  }
  static LagWindow parse(const std::string& s);  // "12-2"
  std::string label() const { return std::to_string(j) + "-" + std::to_string(k); }
};

// Firm x period named signal values. Absent values are simply not stored.
class SignalPanel {
 public:
  void set(const std::string& signal, int firm, int period, double value);
  std::optional<double> get(const std::string& signal, int firm, int period) const;
  bool has_signal(const std::string& signal) const;
  const std::map<std::pair<int, int>, double>& series(const std::string& signal) const;
  std::vector<std::string> signal_names() const;

  void emit_csv(const std::string& path, const FirmIndex& firms,
                Frequency freq = Frequency::Monthly,
                const TradingCalendar* calendar = nullptr) const;

 private:
  std::map<std::string, std::map<std::pair<int, int>, double>> data_;
};

// Compounded return over the window, absent if any period is missing.
std::optional<double> window_return(const ReturnPanel& panel, int firm, int t,
                                    const LagWindow& w);

// Adds "mom-<j>-<k>" for every firm-period with a complete window. The
// signal at month t covers [t+1-j, t+1-k], the window counted from the
// month t+1 the sort earns.
void compute_momentum(const ReturnPanel& panel, const LagWindow& w,
                      SignalPanel& out, const std::string& name = "");

struct SueOptions {
  int history = 8;          // YoY changes entering the dispersion estimate
  int min_announcements = 6;  // within the trailing 2-year window
};

// SUE per announcement: latest YoY EPS change over the sample SD of the
// most recent `history` YoY changes. Index `t` is the position within the
// firm's announcement sequence.
std::optional<double> compute_sue(const AnnouncementTable& announcements,
                                  int firm, int t, const SueOptions& opt = {});

// Three-day abnormal return around the announcement, firm minus market,
// announcement shifted forward to the next trading day when needed.
std::optional<double> compute_car3(const ReturnPanel& daily_panel,
                                   const MarketSeries& market,
                                   const TradingCalendar& calendar, int firm,
                                   const CalendarDate& announce_date);

struct NavOptions {
  int baseline_from = 60;  // trading days before the event
  int baseline_to = 11;
  int min_baseline_obs = 30;
};

// Normalized abnormal log-volume of the supplier on the event day against
// a [-60,-11] trading-day baseline.
std::optional<double> compute_nav(const ReturnPanel& daily_panel, int supplier,
                                  int event_day, const NavOptions& opt = {});

// log(ME), log(B/M), OP rows; non-positive inputs are skipped.
void standard_characteristics(
    const ReturnPanel& panel,
    const std::map<std::pair<int, int>, double>* book_to_market,
    const std::map<std::pair<int, int>, double>* profitability,
    SignalPanel& out);

// Attaches per-announcement values (SUE, CAR3) to months: the value at
// month t is the one from the latest announcement strictly before month t.
void attach_announcement_signal(
    const AnnouncementTable& announcements,
    const std::vector<std::optional<double>>& per_announcement_value,
    const std::string& signal_name, int first_month, int last_month,
    SignalPanel& out);

}  // namespace cmom
