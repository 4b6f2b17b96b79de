#include "cmom/factor_factory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cmom/csv.hpp"
#include "cmom/econometrics.hpp"

namespace cmom {

FactorSeries build_factor(const ReturnPanel& panel, const SignalPanel& signals,
                          const std::string& signal_name,
                          const std::string& factor_name) {
  FactorSeries out;
  out.name = factor_name;
  out.signal = signal_name;

  // group signal by formation period
  std::map<int, std::vector<std::pair<int, double>>> by_period;
  for (const auto& [key, v] : signals.series(signal_name))
    by_period[key.second].emplace_back(key.first, v);

  for (const auto& [formation, firms] : by_period) {
    int measurement = formation + 1;

    struct Member {
      double signal, me, ret;
      bool nyse;
    };
    std::vector<Member> members;
    for (const auto& [firm, sv] : firms) {
      int row = panel.find(firm, formation);
      if (row < 0) continue;
      double me = panel.market_equity(row);
      if (is_absent(me) || me <= 0) continue;
      double r = panel.ret_at(firm, measurement);
      if (is_absent(r)) continue;
      members.push_back({sv, me, r, panel.exchange(row) == ExchangeTag::NYSE});
    }

    // NYSE-only breakpoints: ME median, signal 30th/70th percentiles.
    std::vector<double> nyse_me, nyse_sig;
    for (const Member& m : members)
      if (m.nyse) {
        nyse_me.push_back(m.me);
        nyse_sig.push_back(m.signal);
      }
    if (nyse_me.size() < 2) continue;
    double me_median = quantile(nyse_me, 0.5);
    double sig_lo = quantile(nyse_sig, 0.3);
    double sig_hi = quantile(nyse_sig, 0.7);
    if (!(sig_lo < sig_hi)) continue;  // degenerate signal spread

    // cells: [size 0=small,1=big] x [signal 0=low,1=mid,2=high], VW
    double ret_sum[2][3] = {}, w_sum[2][3] = {};
    for (const Member& m : members) {
      int s = m.me > me_median ? 1 : 0;
      // symmetric boundary rule, so negating the signal mirrors the cells
      int g = m.signal <= sig_lo ? 0 : (m.signal >= sig_hi ? 2 : 1);
      ret_sum[s][g] += m.me * m.ret;
      w_sum[s][g] += m.me;
    }
    bool complete = true;
    double cell[2][3];
    for (int s = 0; s < 2; ++s)
      for (int g = 0; g < 3; ++g) {
        if (w_sum[s][g] <= 0) complete = false;
        else cell[s][g] = ret_sum[s][g] / w_sum[s][g];
      }
    if (!complete) continue;  // empty cell, period absent

    out.returns[measurement] =
        0.5 * (cell[0][2] + cell[1][2]) - 0.5 * (cell[0][0] + cell[1][0]);
  }
  return out;
}

GrowthSeries growth_of_dollar(const std::map<int, double>& returns,
                              double scale_to_sd) {
  GrowthSeries out;
  std::vector<double> rets;
  for (const auto& [_, r] : returns) rets.push_back(r);
  double scale = 1.0;
  if (!is_absent(scale_to_sd) && rets.size() > 1) {
    double mean = std::accumulate(rets.begin(), rets.end(), 0.0) / rets.size();
    double var = 0.0;
    for (double r : rets) var += (r - mean) * (r - mean);
    var /= (rets.size() - 1);
    double sd = std::sqrt(var);
    if (sd > 0) scale = scale_to_sd / sd;
  }
  double value = 1.0;
  for (const auto& [period, r] : returns) {
    value *= 1.0 + scale * r;
    if (value <= 0) {
      out.truncated = true;
      break;
    }
    out.value[period] = value;
  }
  return out;
}

void emit_factors_csv(const std::string& path,
                      const std::vector<FactorSeries>& factors) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "date,name,ret\n";
  for (const FactorSeries& f : factors)
    for (const auto& [period, r] : f.returns)
      out << month_label(period) << ',' << f.name << ',' << format_decimal(r)
          << '\n';
}

std::map<std::string, std::map<int, double>> load_factors_csv(
    const std::string& path) {
  CsvReader reader(path);
  int c_date = reader.column("date");
  int c_name = reader.column("name");
  int c_ret = reader.column("ret");
  std::map<std::string, std::map<int, double>> out;
  while (reader.next()) {
    auto r = parse_double(reader.field(c_ret));
    if (!r)
      throw std::runtime_error("unparseable factor return at line " +
                               std::to_string(reader.line_number()));
    out[reader.field(c_name)][month_ordinal(reader.field(c_date))] = *r;
  }
  return out;
}

}  // namespace cmom
