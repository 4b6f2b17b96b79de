#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmom/period.hpp"

namespace cmom {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
inline bool is_absent(double v) { return std::isnan(v); }

enum class ExchangeTag { NYSE, Other, Absent };

// Interned firm identifiers shared by all panels of a study.
class FirmIndex {
 public:
  int intern(const std::string& id);
  std::optional<int> lookup(const std::string& id) const;
  const std::string& name(int fid) const { return names_.at(fid); }
  int size() const { return static_cast<int>(names_.size()); }

 private:
  std::unordered_map<std::string, int> map_;
  std::vector<std::string> names_;
};

struct IngestReport {
  int n_accepted = 0;
  int n_rejected = 0;
  std::map<std::string, int> rejection_reasons;
  bool empty_result = false;
};

enum class DedupePolicy { Fatal, Last };

struct ReturnsSchema {
  std::string firm_id = "firm_id";
  std::string date = "date";
  std::string ret = "ret";
  std::string me = "me";      // optional column
  std::string vol = "vol";    // optional column
  std::string exch = "exch";  // optional column
};

// Columnar firm x period observations, immutable after ingest. Rows are
// sorted by (firm, period); per-firm and per-period indexes support both
// time-series and cross-sectional scans.
class ReturnPanel {
 public:
  ReturnPanel() = default;

  static ReturnPanel ingest_csv(const std::string& path, Frequency freq,
                                FirmIndex& firms, IngestReport& report,
                                const ReturnsSchema& schema = {},
                                DedupePolicy dedupe = DedupePolicy::Fatal,
                                const TradingCalendar* calendar = nullptr);

  static ReturnPanel from_rows(Frequency freq, std::vector<int> firm,
                               std::vector<int> period, std::vector<double> ret,
                               std::vector<double> me, std::vector<double> vol,
                               std::vector<ExchangeTag> exch);

  void emit_csv(const std::string& path, const FirmIndex& firms,
                const TradingCalendar* calendar = nullptr) const;

  Frequency frequency() const { return freq_; }
  int size() const { return static_cast<int>(ret_.size()); }
  int firm(int row) const { return firm_[row]; }
  int period(int row) const { return period_[row]; }
  double ret(int row) const { return ret_[row]; }
  double market_equity(int row) const { return me_[row]; }
  double volume(int row) const { return vol_[row]; }
  ExchangeTag exchange(int row) const { return exch_[row]; }

  int min_period() const;
  int max_period() const;

  // Row index of (firm, period), or -1.
  int find(int firm, int period) const;
  double ret_at(int firm, int period) const;    // kAbsent if no row
  double me_at(int firm, int period) const;     // kAbsent if no row / missing

  // Contiguous [begin,end) row range of one firm's observations.
  std::pair<int, int> firm_rows(int firm) const;
  // Row indices of one period's cross-section.
  const std::vector<int>& period_rows(int period) const;
  std::vector<int> periods() const;  // sorted distinct periods
  std::vector<int> firms() const;    // sorted distinct firms

  ReturnPanel filter(int from, int to, bool* empty_flag = nullptr) const;

 private:
  void build_indexes();

  Frequency freq_ = Frequency::Monthly;
  std::vector<int> firm_, period_;
  std::vector<double> ret_, me_, vol_;
  std::vector<ExchangeTag> exch_;
  std::vector<std::pair<int, int>> firm_spans_;        // by firm id
  std::map<int, std::vector<int>> period_index_;
  static const std::vector<int> empty_rows_;
};

struct LinkRow {
  int supplier = 0, customer = 0;
  int effective_from = 0, effective_to = 0;  // monthly ordinals, inclusive
};

enum class OverlapPolicy { Reject, Merge };

class LinkTable {
 public:
  LinkTable() = default;
  explicit LinkTable(std::vector<LinkRow> rows, OverlapPolicy policy = OverlapPolicy::Reject);

  const std::vector<LinkRow>& rows() const { return rows_; }
  int size() const { return static_cast<int>(rows_.size()); }

  // Customers of `supplier` whose window contains `period`.
  std::vector<int> active_customers(int supplier, int period) const;
  std::vector<int> suppliers() const;

  void emit_csv(const std::string& path, const FirmIndex& firms) const;

 private:
  std::vector<LinkRow> rows_;  // sorted by (supplier, customer, from)
  std::vector<std::pair<int, int>> supplier_spans_;
};

struct Announcement {
  int firm = 0;
  CalendarDate date;
  double eps = 0.0;
};

class AnnouncementTable {
 public:
  AnnouncementTable() = default;
  explicit AnnouncementTable(std::vector<Announcement> rows);

  static AnnouncementTable load_csv(const std::string& path, FirmIndex& firms,
                                    IngestReport& report);
  void emit_csv(const std::string& path, const FirmIndex& firms) const;

  const std::vector<Announcement>& rows() const { return rows_; }
  // Announcements of one firm in date order, [begin,end) into rows().
  std::pair<int, int> firm_rows(int firm) const;

 private:
  std::vector<Announcement> rows_;  // sorted by (firm, date)
  std::vector<std::pair<int, int>> firm_spans_;
};

// Per-period market return and risk-free rate.
class MarketSeries {
 public:
  MarketSeries() = default;

  static MarketSeries load_csv(const std::string& path, Frequency freq,
                               const TradingCalendar* calendar = nullptr);
  void emit_csv(const std::string& path, Frequency freq,
                const TradingCalendar* calendar = nullptr) const;

  void set(int period, double mkt_ret, double rf);
  double mkt_ret(int period) const;  // kAbsent if undefined
  double rf(int period) const;
  bool covers(int period) const { return data_.count(period) > 0; }
  std::vector<int> periods() const;

 private:
  std::map<int, std::pair<double, double>> data_;
};

struct CoverageYear {
  int year = 0;
  int linked_firms = 0;
  int universe_firms = 0;
  double count_fraction = kAbsent;  // absent when universe empty
  double me_fraction = kAbsent;     // June-ME weighted, absent when no ME
};

// Per-year count and June-ME-weighted coverage of the linked subsample.
std::vector<CoverageYear> coverage_report(const ReturnPanel& panel,
                                          const std::vector<int>& linked_firms,
                                          const ReturnPanel& universe);

}  // namespace cmom
