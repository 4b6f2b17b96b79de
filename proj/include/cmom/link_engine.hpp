#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmom/panel.hpp"
#include "cmom/signal_lab.hpp"

namespace cmom {

struct RawLink {
  int supplier = 0, customer = 0;
  int fiscal_year_end = 0;  // monthly ordinal of the fiscal year-end month
};

struct LagOptions {
  int lag_months = 6;
  int expiry_months = 12;  // link lifetime once effective
};

// Shifts reporting-lagged links into effectiveness windows. A link becomes
// effective the month after fiscal_year_end + lag_months and lasts
// expiry_months, truncated when the pair's next report takes effect.
LinkTable lag_links(std::vector<RawLink> raw, const LagOptions& opt = {});

struct CustomerAggregate {
  int supplier = 0;
  int period = 0;
  double cust_ret_ew = 0.0;
  int n_customers = 0;
  double mean_cust_sue = kAbsent;
  double mean_cust_car3 = kAbsent;
  double rel_size = kAbsent;  // mean customer ME / supplier ME
};

// One row per (supplier, period) with at least one active customer that has
// a return that period. Parallel by period with a deterministic merge; the
// serial variant is the reference the tests compare against.
std::vector<CustomerAggregate> customer_aggregates(
    const ReturnPanel& panel, const LinkTable& links,
    const SignalPanel* signals = nullptr, bool parallel = true);
std::vector<CustomerAggregate> customer_aggregates_serial(
    const ReturnPanel& panel, const LinkTable& links,
    const SignalPanel* signals = nullptr);

// Pearson correlation between supplier return and same-period customer
// portfolio return; absent when degenerate.
std::optional<double> contemporaneous_link_correlation(
    const ReturnPanel& panel, const std::vector<CustomerAggregate>& aggregates);

void emit_aggregates_csv(const std::string& path,
                         const std::vector<CustomerAggregate>& aggregates,
                         const FirmIndex& firms);

// Copies per-supplier aggregate columns into sorting signals: cmom-1-1,
// cust_sue, cust_car3, rel_size. Signals are dated end-of-month: the value
// at month t is the aggregate of month t, and the sorter earns month t+1.
void aggregates_to_signals(const std::vector<CustomerAggregate>& aggregates,
                           SignalPanel& out);

// cmom-<j>-<k>: compounded customer-portfolio return over the j-k window
// counted from the month t+1 the sort earns, i.e. months [t+1-j, t+1-k].
void compute_customer_momentum(const std::vector<CustomerAggregate>& aggregates,
                               const LagWindow& w, SignalPanel& out);

}  // namespace cmom
