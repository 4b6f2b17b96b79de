#include "cmom/link_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cmom/csv.hpp"
#include "cmom/econometrics.hpp"

namespace cmom {

LinkTable lag_links(std::vector<RawLink> raw, const LagOptions& opt) {
  if (opt.lag_months < 0) throw std::invalid_argument("lag_months must be >= 0");
  if (opt.expiry_months < 1) throw std::invalid_argument("expiry_months must be >= 1");
  std::sort(raw.begin(), raw.end(), [](const RawLink& a, const RawLink& b) {
    return std::tie(a.supplier, a.customer, a.fiscal_year_end) <
           std::tie(b.supplier, b.customer, b.fiscal_year_end);
  });
  std::vector<LinkRow> rows;
  rows.reserve(raw.size());
  for (const RawLink& r : raw) {
    LinkRow row;
    row.supplier = r.supplier;
    row.customer = r.customer;
    row.effective_from = r.fiscal_year_end + opt.lag_months + 1;
    row.effective_to = row.effective_from + opt.expiry_months - 1;
    rows.push_back(row);
  }
  // Consecutive reports of the same pair: earlier link ends when the
  // later one becomes effective.
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    LinkRow& a = rows[i];
    const LinkRow& b = rows[i + 1];
    if (a.supplier == b.supplier && a.customer == b.customer &&
        b.effective_from <= a.effective_to)
      a.effective_to = b.effective_from - 1;
  }
  std::erase_if(rows, [](const LinkRow& r) {
    return r.effective_from > r.effective_to;
  });
  return LinkTable(std::move(rows));
}

namespace {

void aggregate_period(const ReturnPanel& panel, const LinkTable& links,
                      const SignalPanel* signals, int period,
                      const std::vector<int>& suppliers,
                      std::vector<CustomerAggregate>& out) {
  for (int supplier : suppliers) {
    std::vector<int> customers = links.active_customers(supplier, period);
    if (customers.empty()) continue;

    double sum_ret = 0.0;
    int n = 0;
    double sum_sue = 0.0, sum_car3 = 0.0;
    int n_sue = 0, n_car3 = 0;
    double sum_me = 0.0;
    bool all_me = true;
    for (int c : customers) {
      double r = panel.ret_at(c, period);
      if (is_absent(r)) continue;
      sum_ret += r;
      ++n;
      double me = panel.me_at(c, period);
      if (is_absent(me)) all_me = false;
      else sum_me += me;
      if (signals) {
        if (auto v = signals->get("sue", c, period)) {
          sum_sue += *v;
          ++n_sue;
        }
        if (auto v = signals->get("car3", c, period)) {
          sum_car3 += *v;
          ++n_car3;
        }
      }
    }
    if (n == 0) continue;

    CustomerAggregate a;
    a.supplier = supplier;
    a.period = period;
    a.cust_ret_ew = sum_ret / n;
    a.n_customers = n;
    if (n_sue > 0) a.mean_cust_sue = sum_sue / n_sue;
    if (n_car3 > 0) a.mean_cust_car3 = sum_car3 / n_car3;
    double sup_me = panel.me_at(supplier, period);
    if (all_me && !is_absent(sup_me) && sup_me > 0)
      a.rel_size = (sum_me / n) / sup_me;
    out.push_back(a);
  }
}

}  // namespace

std::vector<CustomerAggregate> customer_aggregates(const ReturnPanel& panel,
                                                   const LinkTable& links,
                                                   const SignalPanel* signals,
                                                   bool parallel) {
  std::vector<int> periods = panel.periods();
  std::vector<int> suppliers = links.suppliers();
  const int np = static_cast<int>(periods.size());
  std::vector<std::vector<CustomerAggregate>> per_period(np);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < np; ++i)
    aggregate_period(panel, links, signals, periods[i], suppliers, per_period[i]);

  std::vector<CustomerAggregate> out;
  for (auto& chunk : per_period)
    out.insert(out.end(), chunk.begin(), chunk.end());
  // (supplier, period) order for stable emission
  std::sort(out.begin(), out.end(),
            [](const CustomerAggregate& a, const CustomerAggregate& b) {
              return std::tie(a.supplier, a.period) < std::tie(b.supplier, b.period);
            });
  return out;
}

std::vector<CustomerAggregate> customer_aggregates_serial(
    const ReturnPanel& panel, const LinkTable& links, const SignalPanel* signals) {
  return customer_aggregates(panel, links, signals, false);
}

std::optional<double> contemporaneous_link_correlation(
    const ReturnPanel& panel, const std::vector<CustomerAggregate>& aggregates) {
  std::vector<double> a, b;
  for (const CustomerAggregate& agg : aggregates) {
    double r = panel.ret_at(agg.supplier, agg.period);
    if (is_absent(r)) continue;
    a.push_back(r);
    b.push_back(agg.cust_ret_ew);
  }
  if (a.size() < 2) return std::nullopt;
  double rho = pearson(a, b);
  if (is_absent(rho)) return std::nullopt;
  return rho;
}

void emit_aggregates_csv(const std::string& path,
                         const std::vector<CustomerAggregate>& aggregates,
                         const FirmIndex& firms) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "supplier_id,date,cust_ret_ew,n_customers,mean_cust_sue,mean_cust_car3,rel_size\n";
  for (const CustomerAggregate& a : aggregates) {
    out << firms.name(a.supplier) << ',' << month_label(a.period) << ','
        << format_decimal(a.cust_ret_ew) << ',' << a.n_customers << ','
        << (is_absent(a.mean_cust_sue) ? "" : format_decimal(a.mean_cust_sue)) << ','
        << (is_absent(a.mean_cust_car3) ? "" : format_decimal(a.mean_cust_car3)) << ','
        << (is_absent(a.rel_size) ? "" : format_decimal(a.rel_size)) << '\n';
  }
}

void aggregates_to_signals(const std::vector<CustomerAggregate>& aggregates,
                           SignalPanel& out) {
  for (const CustomerAggregate& a : aggregates) {
    int t = a.period;  // end-of-month dating; the sort earns month t+1
    out.set("cmom-1-1", a.supplier, t, a.cust_ret_ew);
    if (!is_absent(a.mean_cust_sue)) out.set("cust_sue", a.supplier, t, a.mean_cust_sue);
    if (!is_absent(a.mean_cust_car3)) out.set("cust_car3", a.supplier, t, a.mean_cust_car3);
    if (!is_absent(a.rel_size)) out.set("rel_size", a.supplier, t, a.rel_size);
  }
}

void compute_customer_momentum(const std::vector<CustomerAggregate>& aggregates,
                               const LagWindow& w, SignalPanel& out) {
  // Per supplier: compound the customer-portfolio return over the window.
  std::map<int, std::map<int, double>> by_supplier;
  for (const CustomerAggregate& a : aggregates)
    by_supplier[a.supplier][a.period] = a.cust_ret_ew;
  std::string name = "cmom-" + w.label();
  for (const auto& [supplier, series] : by_supplier) {
    if (series.empty()) continue;
    int lo = series.begin()->first, hi = series.rbegin()->first;
    // window [t+1-j, t+1-k] relative to the month t+1 the sort earns
    for (int t = lo + w.j - 1; t <= hi + w.k - 1; ++t) {
      double growth = 1.0;
      bool complete = true;
      for (int s = t + 1 - w.j; s <= t + 1 - w.k; ++s) {
        auto it = series.find(s);
        if (it == series.end()) {
          complete = false;
          break;
        }
        growth *= 1.0 + it->second;
      }
      if (complete) out.set(name, supplier, t, growth - 1.0);
    }
  }
}

}  // namespace cmom
