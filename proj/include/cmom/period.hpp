#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cmom {

enum class Frequency { Monthly, Daily };

// Monthly ordinals: year*12 + (month-1). Contiguous across year boundaries,
// so ordinal arithmetic equals calendar arithmetic.
int month_ordinal(int year, int month);
int month_ordinal(const std::string& label);  // "YYYY-MM" or "YYYY-MM-DD"
std::string month_label(int ordinal);

struct CalendarDate {
  int year = 0, month = 0, day = 0;
  auto operator<=>(const CalendarDate&) const = default;
};

CalendarDate parse_date(const std::string& iso);  // "YYYY-MM-DD"
std::string format_date(const CalendarDate& d);

// Ordered list of trading days. Daily ordinals index into this list, so
// weekends and holidays never appear as ordinals.
class TradingCalendar {
 public:
  TradingCalendar() = default;
  explicit TradingCalendar(std::vector<CalendarDate> days);

  int size() const { return static_cast<int>(days_.size()); }
  const CalendarDate& date(int ordinal) const { return days_.at(ordinal); }
  const std::vector<CalendarDate>& days() const { return days_; }

  // Exact lookup; nullopt for non-trading days.
  std::optional<int> ordinal(const CalendarDate& d) const;
  // First trading day >= d (announcement forward-shift rule).
  std::optional<int> ordinal_on_or_after(const CalendarDate& d) const;

  static TradingCalendar load_csv(const std::string& path);
  // Synthetic weekday calendar starting at `start`, n trading days.
  static TradingCalendar weekdays(CalendarDate start, int n);

 private:
  std::vector<CalendarDate> days_;
  std::unordered_map<long long, int> index_;
};

}  // namespace cmom
