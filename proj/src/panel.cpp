#include "cmom/panel.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "cmom/csv.hpp"

namespace cmom {

const std::vector<int> ReturnPanel::empty_rows_;

int FirmIndex::intern(const std::string& id) {
  auto it = map_.find(id);
  if (it != map_.end()) return it->second;
  int fid = static_cast<int>(names_.size());
  map_.emplace(id, fid);
  names_.push_back(id);
  return fid;
}

std::optional<int> FirmIndex::lookup(const std::string& id) const {
  auto it = map_.find(id);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

namespace {

int parse_period(const std::string& date, Frequency freq,
                 const TradingCalendar* calendar) {
  if (freq == Frequency::Monthly) return month_ordinal(date);
  if (!calendar)
    throw std::runtime_error("daily panel requires a trading calendar");
  auto ord = calendar->ordinal(parse_date(date));
  if (!ord) throw std::invalid_argument("non-trading day: " + date);
  return *ord;
}

std::string period_string(int period, Frequency freq,
                          const TradingCalendar* calendar) {
  if (freq == Frequency::Monthly) return month_label(period);
  return format_date(calendar->date(period));
}

}  // namespace

ReturnPanel ReturnPanel::ingest_csv(const std::string& path, Frequency freq,
                                    FirmIndex& firms, IngestReport& report,
                                    const ReturnsSchema& schema,
                                    DedupePolicy dedupe,
                                    const TradingCalendar* calendar) {
  CsvReader reader(path);
  int c_firm = reader.column(schema.firm_id);
  int c_date = reader.column(schema.date);
  int c_ret = reader.column(schema.ret);
  int c_me = reader.has_column(schema.me) ? reader.column(schema.me) : -1;
  int c_vol = reader.has_column(schema.vol) ? reader.column(schema.vol) : -1;
  int c_exch = reader.has_column(schema.exch) ? reader.column(schema.exch) : -1;

  struct Row {
    int firm, period;
    double ret, me, vol;
    ExchangeTag exch;
    int order;  // file order, for dedupe=last
  };
  std::vector<Row> rows;
  auto reject = [&](const std::string& reason) {
    ++report.n_rejected;
    ++report.rejection_reasons[reason];
  };

  int order = 0;
  while (reader.next()) {
    ++order;
    Row r{};
    r.order = order;
    try {
      r.firm = firms.intern(reader.field(c_firm));
      r.period = parse_period(reader.field(c_date), freq, calendar);
    } catch (const std::exception&) {
      reject("unparseable date");
      continue;
    }
    auto ret = parse_double(reader.field(c_ret));
    if (!ret) {
      reject("unparseable return");
      continue;
    }
    if (*ret <= -1.0) {
      reject("return <= -100%");
      continue;
    }
    r.ret = *ret;
    r.me = kAbsent;
    r.vol = kAbsent;
    r.exch = ExchangeTag::Absent;
    if (c_me >= 0) {
      auto me = parse_double(reader.field(c_me));
      if (me) {
        if (*me < 0) {
          reject("negative market equity");
          continue;
        }
        r.me = *me;
      }
    }
    if (c_vol >= 0) {
      auto vol = parse_double(reader.field(c_vol));
      if (vol) {
        if (*vol < 0) {
          reject("negative volume");
          continue;
        }
        r.vol = *vol;
      }
    }
    if (c_exch >= 0) {
      const std::string& tag = reader.field(c_exch);
      if (tag == "NYSE") r.exch = ExchangeTag::NYSE;
      else if (!tag.empty()) r.exch = ExchangeTag::Other;
    }
    rows.push_back(r);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.firm, a.period) < std::tie(b.firm, b.period);
  });
  std::vector<Row> kept;
  kept.reserve(rows.size());
  for (const Row& r : rows) {
    if (!kept.empty() && kept.back().firm == r.firm &&
        kept.back().period == r.period) {
      if (dedupe == DedupePolicy::Fatal)
        throw std::runtime_error("duplicate (firm, period) in " + path + ": " +
                                 firms.name(r.firm) + " " +
                                 period_string(r.period, freq, calendar));
      if (r.order > kept.back().order) kept.back() = r;
      continue;
    }
    kept.push_back(r);
  }
  report.n_accepted = static_cast<int>(kept.size());
  report.empty_result = kept.empty();

  ReturnPanel p;
  p.freq_ = freq;
  p.firm_.reserve(kept.size());
  for (const Row& r : kept) {
    p.firm_.push_back(r.firm);
    p.period_.push_back(r.period);
    p.ret_.push_back(r.ret);
    p.me_.push_back(r.me);
    p.vol_.push_back(r.vol);
    p.exch_.push_back(r.exch);
  }
  p.build_indexes();
  return p;
}

ReturnPanel ReturnPanel::from_rows(Frequency freq, std::vector<int> firm,
                                   std::vector<int> period,
                                   std::vector<double> ret,
                                   std::vector<double> me,
                                   std::vector<double> vol,
                                   std::vector<ExchangeTag> exch) {
  size_t n = firm.size();
  if (period.size() != n || ret.size() != n)
    throw std::invalid_argument("column length mismatch");
  if (me.empty()) me.assign(n, kAbsent);
  if (vol.empty()) vol.assign(n, kAbsent);
  if (exch.empty()) exch.assign(n, ExchangeTag::Absent);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::tie(firm[a], period[a]) < std::tie(firm[b], period[b]);
  });
  ReturnPanel p;
  p.freq_ = freq;
  for (int i : order) {
    if (!p.firm_.empty() && p.firm_.back() == firm[i] &&
        p.period_.back() == period[i])
      throw std::invalid_argument("duplicate (firm, period)");
    if (ret[i] <= -1.0) throw std::invalid_argument("return <= -100%");
    p.firm_.push_back(firm[i]);
    p.period_.push_back(period[i]);
    p.ret_.push_back(ret[i]);
    p.me_.push_back(me[i]);
    p.vol_.push_back(vol[i]);
    p.exch_.push_back(exch[i]);
  }
  p.build_indexes();
  return p;
}

void ReturnPanel::build_indexes() {
  int max_firm = -1;
  for (int f : firm_) max_firm = std::max(max_firm, f);
  firm_spans_.assign(max_firm + 1, {0, 0});
  period_index_.clear();
  for (int i = 0; i < size(); ++i) {
    if (i == 0 || firm_[i] != firm_[i - 1]) firm_spans_[firm_[i]].first = i;
    firm_spans_[firm_[i]].second = i + 1;
    period_index_[period_[i]].push_back(i);
  }
}

void ReturnPanel::emit_csv(const std::string& path, const FirmIndex& firms,
                           const TradingCalendar* calendar) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "firm_id,date,ret,me,vol,exch\n";
  for (int i = 0; i < size(); ++i) {
    out << firms.name(firm_[i]) << ','
        << period_string(period_[i], freq_, calendar) << ','
        << format_decimal(ret_[i]) << ','
        << (is_absent(me_[i]) ? "" : format_decimal(me_[i])) << ','
        << (is_absent(vol_[i]) ? "" : format_decimal(vol_[i])) << ',';
    switch (exch_[i]) {
      case ExchangeTag::NYSE: out << "NYSE"; break;
      case ExchangeTag::Other: out << "Other"; break;
      case ExchangeTag::Absent: break;
    }
    out << '\n';
  }
}

int ReturnPanel::min_period() const {
  if (period_index_.empty()) throw std::runtime_error("empty panel");
  return period_index_.begin()->first;
}

int ReturnPanel::max_period() const {
  if (period_index_.empty()) throw std::runtime_error("empty panel");
  return period_index_.rbegin()->first;
}

int ReturnPanel::find(int firm, int period) const {
  if (firm < 0 || firm >= static_cast<int>(firm_spans_.size())) return -1;
  auto [lo, hi] = firm_spans_[firm];
  auto begin = period_.begin() + lo, end = period_.begin() + hi;
  auto it = std::lower_bound(begin, end, period);
  if (it == end || *it != period) return -1;
  return static_cast<int>(it - period_.begin());
}

double ReturnPanel::ret_at(int firm, int period) const {
  int row = find(firm, period);
  return row < 0 ? kAbsent : ret_[row];
}

double ReturnPanel::me_at(int firm, int period) const {
  int row = find(firm, period);
  return row < 0 ? kAbsent : me_[row];
}

std::pair<int, int> ReturnPanel::firm_rows(int firm) const {
  if (firm < 0 || firm >= static_cast<int>(firm_spans_.size())) return {0, 0};
  return firm_spans_[firm];
}

const std::vector<int>& ReturnPanel::period_rows(int period) const {
  auto it = period_index_.find(period);
  return it == period_index_.end() ? empty_rows_ : it->second;
}

std::vector<int> ReturnPanel::periods() const {
  std::vector<int> out;
  out.reserve(period_index_.size());
  for (const auto& [p, _] : period_index_) out.push_back(p);
  return out;
}

std::vector<int> ReturnPanel::firms() const {
  std::vector<int> out;
  for (int f = 0; f < static_cast<int>(firm_spans_.size()); ++f)
    if (firm_spans_[f].second > firm_spans_[f].first) out.push_back(f);
  return out;
}

ReturnPanel ReturnPanel::filter(int from, int to, bool* empty_flag) const {
  if (from > to) throw std::invalid_argument("filter: from > to");
  ReturnPanel p;
  p.freq_ = freq_;
  for (int i = 0; i < size(); ++i) {
    if (period_[i] < from || period_[i] > to) continue;
    p.firm_.push_back(firm_[i]);
    p.period_.push_back(period_[i]);
    p.ret_.push_back(ret_[i]);
    p.me_.push_back(me_[i]);
    p.vol_.push_back(vol_[i]);
    p.exch_.push_back(exch_[i]);
  }
  p.build_indexes();
  if (empty_flag) *empty_flag = p.size() == 0;
  return p;
}

LinkTable::LinkTable(std::vector<LinkRow> rows, OverlapPolicy policy) {
  for (const LinkRow& r : rows) {
    if (r.supplier == r.customer)
      throw std::invalid_argument("self-link: supplier == customer");
    if (r.effective_from > r.effective_to)
      throw std::invalid_argument("link window: effective_from > effective_to");
  }
  std::sort(rows.begin(), rows.end(), [](const LinkRow& a, const LinkRow& b) {
    return std::tie(a.supplier, a.customer, a.effective_from, a.effective_to) <
           std::tie(b.supplier, b.customer, b.effective_from, b.effective_to);
  });
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    LinkRow& a = rows[i];
    LinkRow& b = rows[i + 1];
    if (a.supplier == b.supplier && a.customer == b.customer &&
        b.effective_from <= a.effective_to) {
      if (policy == OverlapPolicy::Reject)
        throw std::invalid_argument("overlapping link windows for one pair");
      b.effective_from = std::min(a.effective_from, b.effective_from);
      b.effective_to = std::max(a.effective_to, b.effective_to);
      a.effective_to = a.effective_from - 1;  // mark for removal
    }
  }
  std::erase_if(rows, [](const LinkRow& r) {
    return r.effective_from > r.effective_to;
  });
  rows_ = std::move(rows);

  int max_supplier = -1;
  for (const LinkRow& r : rows_) max_supplier = std::max(max_supplier, r.supplier);
  supplier_spans_.assign(max_supplier + 1, {0, 0});
  for (int i = 0; i < size(); ++i) {
    if (i == 0 || rows_[i].supplier != rows_[i - 1].supplier)
      supplier_spans_[rows_[i].supplier].first = i;
    supplier_spans_[rows_[i].supplier].second = i + 1;
  }
}

std::vector<int> LinkTable::active_customers(int supplier, int period) const {
  std::vector<int> out;
  if (supplier < 0 || supplier >= static_cast<int>(supplier_spans_.size()))
    return out;
  auto [lo, hi] = supplier_spans_[supplier];
  for (int i = lo; i < hi; ++i) {
    const LinkRow& r = rows_[i];
    if (r.effective_from <= period && period <= r.effective_to)
      out.push_back(r.customer);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> LinkTable::suppliers() const {
  std::vector<int> out;
  for (int s = 0; s < static_cast<int>(supplier_spans_.size()); ++s)
    if (supplier_spans_[s].second > supplier_spans_[s].first) out.push_back(s);
  return out;
}

void LinkTable::emit_csv(const std::string& path, const FirmIndex& firms) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "supplier_id,customer_id,effective_from,effective_to\n";
  for (const LinkRow& r : rows_)
    out << firms.name(r.supplier) << ',' << firms.name(r.customer) << ','
        << month_label(r.effective_from) << ',' << month_label(r.effective_to)
        << '\n';
}

AnnouncementTable::AnnouncementTable(std::vector<Announcement> rows)
    : rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(),
            [](const Announcement& a, const Announcement& b) {
              return std::tie(a.firm, a.date) < std::tie(b.firm, b.date);
            });
  for (size_t i = 0; i + 1 < rows_.size(); ++i)
    if (rows_[i].firm == rows_[i + 1].firm && rows_[i].date == rows_[i + 1].date)
      throw std::invalid_argument("duplicate (firm, announce_date)");
  int max_firm = -1;
  for (const Announcement& a : rows_) max_firm = std::max(max_firm, a.firm);
  firm_spans_.assign(max_firm + 1, {0, 0});
  for (int i = 0; i < static_cast<int>(rows_.size()); ++i) {
    if (i == 0 || rows_[i].firm != rows_[i - 1].firm)
      firm_spans_[rows_[i].firm].first = i;
    firm_spans_[rows_[i].firm].second = i + 1;
  }
}

AnnouncementTable AnnouncementTable::load_csv(const std::string& path,
                                              FirmIndex& firms,
                                              IngestReport& report) {
  CsvReader reader(path);
  int c_firm = reader.column("firm_id");
  int c_date = reader.column("rdq_date");
  int c_eps = reader.column("eps");
  std::vector<Announcement> rows;
  while (reader.next()) {
    Announcement a;
    a.firm = firms.intern(reader.field(c_firm));
    try {
      a.date = parse_date(reader.field(c_date));
    } catch (const std::exception&) {
      ++report.n_rejected;
      ++report.rejection_reasons["unparseable date"];
      continue;
    }
    auto eps = parse_double(reader.field(c_eps));
    if (!eps) {
      ++report.n_rejected;
      ++report.rejection_reasons["unparseable eps"];
      continue;
    }
    a.eps = *eps;
    rows.push_back(a);
    ++report.n_accepted;
  }
  return AnnouncementTable(std::move(rows));
}

void AnnouncementTable::emit_csv(const std::string& path,
                                 const FirmIndex& firms) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "firm_id,rdq_date,eps\n";
  for (const Announcement& a : rows_)
    out << firms.name(a.firm) << ',' << format_date(a.date) << ','
        << format_decimal(a.eps) << '\n';
}

std::pair<int, int> AnnouncementTable::firm_rows(int firm) const {
  if (firm < 0 || firm >= static_cast<int>(firm_spans_.size())) return {0, 0};
  return firm_spans_[firm];
}

MarketSeries MarketSeries::load_csv(const std::string& path, Frequency freq,
                                    const TradingCalendar* calendar) {
  CsvReader reader(path);
  int c_date = reader.column("date");
  int c_mkt = reader.column("mkt_ret");
  int c_rf = reader.column("rf");
  MarketSeries m;
  while (reader.next()) {
    int period = parse_period(reader.field(c_date), freq, calendar);
    auto mkt = parse_double(reader.field(c_mkt));
    auto rf = parse_double(reader.field(c_rf));
    if (!mkt || !rf)
      throw std::runtime_error("unparseable market row at line " +
                               std::to_string(reader.line_number()));
    m.set(period, *mkt, *rf);
  }
  return m;
}

void MarketSeries::emit_csv(const std::string& path, Frequency freq,
                            const TradingCalendar* calendar) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "date,mkt_ret,rf\n";
  for (const auto& [p, v] : data_)
    out << period_string(p, freq, calendar) << ',' << format_decimal(v.first)
        << ',' << format_decimal(v.second) << '\n';
}

void MarketSeries::set(int period, double mkt_ret, double rf) {
  data_[period] = {mkt_ret, rf};
}

double MarketSeries::mkt_ret(int period) const {
  auto it = data_.find(period);
  return it == data_.end() ? kAbsent : it->second.first;
}

double MarketSeries::rf(int period) const {
  auto it = data_.find(period);
  return it == data_.end() ? kAbsent : it->second.second;
}

std::vector<int> MarketSeries::periods() const {
  std::vector<int> out;
  out.reserve(data_.size());
  for (const auto& [p, _] : data_) out.push_back(p);
  return out;
}

std::vector<CoverageYear> coverage_report(const ReturnPanel& panel,
                                          const std::vector<int>& linked_firms,
                                          const ReturnPanel& universe) {
  if (panel.frequency() != universe.frequency())
    throw std::invalid_argument("coverage: frequency mismatch");
  if (universe.frequency() != Frequency::Monthly)
    throw std::invalid_argument("coverage: per-year report needs a monthly panel");
  std::set<int> linked(linked_firms.begin(), linked_firms.end());

  // year -> firm sets and June ME sums
  std::map<int, std::set<int>> universe_by_year, linked_by_year;
  std::map<int, double> me_universe, me_linked;
  for (int i = 0; i < universe.size(); ++i) {
    int year = universe.period(i) / 12;
    int month = universe.period(i) % 12 + 1;
    int f = universe.firm(i);
    universe_by_year[year].insert(f);
    if (linked.count(f)) linked_by_year[year].insert(f);
    if (month == 6 && !is_absent(universe.market_equity(i))) {
      me_universe[year] += universe.market_equity(i);
      if (linked.count(f)) me_linked[year] += universe.market_equity(i);
    }
  }

  std::vector<CoverageYear> out;
  for (const auto& [year, firms] : universe_by_year) {
    CoverageYear c;
    c.year = year;
    c.universe_firms = static_cast<int>(firms.size());
    auto it = linked_by_year.find(year);
    c.linked_firms = it == linked_by_year.end()
                         ? 0
                         : static_cast<int>(it->second.size());
    if (c.universe_firms > 0)
      c.count_fraction = static_cast<double>(c.linked_firms) / c.universe_firms;
    auto mu = me_universe.find(year);
    if (mu != me_universe.end() && mu->second > 0)
      c.me_fraction = (me_linked.count(year) ? me_linked[year] : 0.0) / mu->second;
    out.push_back(c);
  }
  return out;
}

}  // namespace cmom
