#include "cmom/period.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "cmom/csv.hpp"

namespace cmom {

int month_ordinal(int year, int month) {
  if (month < 1 || month > 12) throw std::invalid_argument("month out of range");
  return year * 12 + (month - 1);
}

int month_ordinal(const std::string& label) {
  if (label.size() < 7 || label[4] != '-')
    throw std::invalid_argument("bad month label: " + label);
  int year = std::stoi(label.substr(0, 4));
  int month = std::stoi(label.substr(5, 2));
  return month_ordinal(year, month);
}

std::string month_label(int ordinal) {
  int year = ordinal / 12;
  int month = ordinal % 12 + 1;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

CalendarDate parse_date(const std::string& iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
    throw std::invalid_argument("bad date: " + iso);
  CalendarDate d;
  d.year = std::stoi(iso.substr(0, 4));
  d.month = std::stoi(iso.substr(5, 2));
  d.day = std::stoi(iso.substr(8, 2));
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
    throw std::invalid_argument("bad date: " + iso);
  return d;
}

std::string format_date(const CalendarDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

namespace {
long long date_key(const CalendarDate& d) {
  return static_cast<long long>(d.year) * 10000 + d.month * 100 + d.day;
}

// Days since a fixed epoch; standard civil-from-days arithmetic.
long long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  long long era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

CalendarDate civil_from_days(long long z) {
  z += 719468;
  long long era = (z >= 0 ? z : z - 146096) / 146097;
  unsigned doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  long long y = static_cast<long long>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  unsigned d = doy - (153 * mp + 2) / 5 + 1;
  unsigned m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
  return {static_cast<int>(y), static_cast<int>(m), static_cast<int>(d)};
}
}  // namespace

TradingCalendar::TradingCalendar(std::vector<CalendarDate> days)
    : days_(std::move(days)) {
  if (!std::is_sorted(days_.begin(), days_.end()))
    throw std::invalid_argument("trading calendar dates must be ascending");
  for (int i = 0; i < static_cast<int>(days_.size()); ++i) {
    if (!index_.emplace(date_key(days_[i]), i).second)
      throw std::invalid_argument("duplicate trading day: " + format_date(days_[i]));
  }
}

std::optional<int> TradingCalendar::ordinal(const CalendarDate& d) const {
  auto it = index_.find(date_key(d));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> TradingCalendar::ordinal_on_or_after(const CalendarDate& d) const {
  auto it = std::lower_bound(days_.begin(), days_.end(), d);
  if (it == days_.end()) return std::nullopt;
  return static_cast<int>(it - days_.begin());
}

TradingCalendar TradingCalendar::load_csv(const std::string& path) {
  CsvReader reader(path);
  int col = reader.column("date");
  std::vector<CalendarDate> days;
  while (reader.next()) days.push_back(parse_date(reader.field(col)));
  return TradingCalendar(std::move(days));
}

TradingCalendar TradingCalendar::weekdays(CalendarDate start, int n) {
  std::vector<CalendarDate> days;
  days.reserve(n);
  long long z = days_from_civil(start.year, start.month, start.day);
  while (static_cast<int>(days.size()) < n) {
    int dow = static_cast<int>(((z % 7) + 10) % 7);  // 0=Mon .. 6=Sun
    if (dow < 5) days.push_back(civil_from_days(z));
    ++z;
  }
  return TradingCalendar(std::move(days));
}

}  // namespace cmom
