#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "cmom/sorter.hpp"

using namespace cmom;

namespace {

// sort-and-slice quantile oracle: inclusive linear interpolation on the
// sorted sample, independent of the library's estimator
double slice_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  double h = (v.size() - 1) * q;
  size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

ReturnPanel two_period_panel(const std::vector<double>& signal_vals,
                             const std::vector<double>& next_rets,
                             const std::vector<double>& me = {},
                             const std::vector<ExchangeTag>& ex = {}) {
  int n = static_cast<int>(signal_vals.size());
  std::vector<int> f, p;
  std::vector<double> r, m;
  std::vector<ExchangeTag> e;
  for (int i = 0; i < n; ++i) {
    f.push_back(i);
    p.push_back(10);
    r.push_back(0.0);
    m.push_back(me.empty() ? kAbsent : me[i]);
    e.push_back(ex.empty() ? ExchangeTag::Other : ex[i]);
    f.push_back(i);
    p.push_back(11);
    r.push_back(next_rets[i]);
    m.push_back(kAbsent);
    e.push_back(ex.empty() ? ExchangeTag::Other : ex[i]);
  }
  return ReturnPanel::from_rows(Frequency::Monthly, f, p, r, m, {}, e);
}

SignalPanel make_signals(const std::vector<double>& vals, int period = 10) {
  SignalPanel s;
  for (size_t i = 0; i < vals.size(); ++i)
    s.set("sig", static_cast<int>(i), period, vals[i]);
  return s;
}

}  // namespace

TEST_CASE("breakpoints match the sort-and-slice oracle") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> norm(0.0, 1.0);
  for (int n_buckets : {2, 3, 5, 10}) {
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> v(40 + static_cast<int>(rng() % 60));
      for (double& x : v) x = norm(rng);
      BreakpointSpec spec;
      spec.n_buckets = n_buckets;
      auto bp = compute_breakpoints(v, spec);
      REQUIRE(bp.size() == static_cast<size_t>(n_buckets - 1));
      for (int i = 1; i < n_buckets; ++i)
        CHECK(bp[i - 1] ==
              doctest::Approx(slice_quantile(v, double(i) / n_buckets)).epsilon(1e-12));
    }
  }
}

TEST_CASE("too few distinct values is a degenerate sort") {
  BreakpointSpec spec;
  spec.n_buckets = 5;
  CHECK_THROWS_WITH_AS(compute_breakpoints({1.0, 1.0, 1.0, 2.0}, spec),
                       doctest::Contains("degenerate breakpoints"),
                       std::invalid_argument);
}

TEST_CASE("boundary ties go to the lower bucket") {
  std::vector<double> thresholds{1.0, 2.0};
  CHECK(assign_bucket(0.5, thresholds) == 0);
  CHECK(assign_bucket(1.0, thresholds) == 0);
  CHECK(assign_bucket(1.5, thresholds) == 1);
  CHECK(assign_bucket(2.0, thresholds) == 1);
  CHECK(assign_bucket(2.5, thresholds) == 2);
}

TEST_CASE("equal-weight tercile hand example") {
  // 6 firms, signal 1..6; terciles {1,2},{3,4},{5,6}
  std::vector<double> sig{1, 2, 3, 4, 5, 6};
  std::vector<double> ret{0.01, 0.03, 0.00, 0.02, 0.05, 0.07};
  auto panel = two_period_panel(sig, ret);
  auto signals = make_signals(sig);
  BreakpointSpec spec;
  spec.n_buckets = 3;
  auto series = form_portfolios(panel, signals, "sig", spec, Weighting::Equal);
  REQUIRE(series.periods.size() == 1);
  const auto& pp = series.periods[0];
  CHECK(pp.period == 11);
  CHECK(pp.bucket_ret[0] == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(pp.bucket_ret[1] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(pp.bucket_ret[2] == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(pp.long_short == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(pp.count[0] == 2);
}

TEST_CASE("value weights use formation market equity") {
  std::vector<double> sig{1, 2, 3, 4};
  std::vector<double> ret{0.10, 0.00, 0.02, 0.06};
  std::vector<double> me{30, 10, 10, 30};
  auto panel = two_period_panel(sig, ret, me);
  auto signals = make_signals(sig);
  BreakpointSpec spec;
  spec.n_buckets = 2;
  auto series = form_portfolios(panel, signals, "sig", spec, Weighting::Value);
  REQUIRE(series.periods.size() == 1);
  // low bucket: (30*0.10 + 10*0.00)/40; high: (10*0.02 + 30*0.06)/40
  CHECK(series.periods[0].bucket_ret[0] == doctest::Approx(0.075).epsilon(1e-12));
  CHECK(series.periods[0].bucket_ret[1] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(series.periods[0].long_short == doctest::Approx(-0.025).epsilon(1e-12));
}

TEST_CASE("value weighting drops firms without formation ME") {
  std::vector<double> sig{1, 2, 3, 4};
  std::vector<double> ret{0.10, 0.00, 0.02, 0.06};
  std::vector<double> me{30, kAbsent, 10, 30};
  auto panel = two_period_panel(sig, ret, me);
  auto series = form_portfolios(panel, make_signals(sig), "sig",
                                BreakpointSpec{2}, Weighting::Value);
  REQUIRE(series.periods.size() == 1);
  CHECK(series.periods[0].bucket_ret[0] == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(series.periods[0].count[0] == 1);
}

TEST_CASE("NYSE-only breakpoints ignore other exchanges") {
  // NYSE firms have signals {1, 3}; median threshold 2 splits the rest
  std::vector<double> sig{1, 3, 1.5, 2.5};
  std::vector<double> ret{0.01, 0.02, 0.03, 0.04};
  std::vector<ExchangeTag> ex{ExchangeTag::NYSE, ExchangeTag::NYSE,
                              ExchangeTag::Other, ExchangeTag::Other};
  auto panel = two_period_panel(sig, ret, {}, ex);
  BreakpointSpec spec;
  spec.n_buckets = 2;
  spec.universe = BreakpointUniverse::NYSEOnly;
  auto series = form_portfolios(panel, make_signals(sig), "sig", spec,
                                Weighting::Equal);
  REQUIRE(series.periods.size() == 1);
  // low = firms with sig <= 2: {0, 2}; high = {1, 3}
  CHECK(series.periods[0].bucket_ret[0] == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(series.periods[0].bucket_ret[1] == doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("a period with an empty bucket is dropped entirely") {
  // only 2 firms but 3 buckets requested -> degenerate, period absent
  std::vector<double> sig{1, 2};
  std::vector<double> ret{0.01, 0.02};
  auto panel = two_period_panel(sig, ret);
  BreakpointSpec spec;
  spec.n_buckets = 3;
  auto series = form_portfolios(panel, make_signals(sig), "sig", spec,
                                Weighting::Equal);
  CHECK(series.periods.empty());
}

TEST_CASE("holding lag shifts the measured return period") {
  std::vector<int> f, p;
  std::vector<double> r;
  std::vector<double> sig{1, 2, 3, 4};
  for (int i = 0; i < 4; ++i)
    for (int t = 10; t <= 13; ++t) {
      f.push_back(i);
      p.push_back(t);
      r.push_back(t == 13 ? 0.01 * (i + 1) : 0.0);
    }
  auto panel = ReturnPanel::from_rows(Frequency::Monthly, f, p, r, {}, {}, {});
  auto signals = make_signals(sig, 10);
  auto series = form_portfolios(panel, signals, "sig", BreakpointSpec{2},
                                Weighting::Equal, 2);  // t+1+2 = 13
  REQUIRE(series.periods.size() == 1);
  CHECK(series.periods[0].period == 13);
  CHECK(series.periods[0].bucket_ret[0] == doctest::Approx(0.015).epsilon(1e-12));
  CHECK(series.periods[0].bucket_ret[1] == doctest::Approx(0.035).epsilon(1e-12));
}

TEST_CASE("mask removes firms before the sort") {
  std::vector<double> sig{1, 2, 3, 4, 5, 6};
  std::vector<double> ret{0.01, 0.02, 0.03, 0.04, 0.05, 0.06};
  auto panel = two_period_panel(sig, ret);
  std::map<std::pair<int, int>, bool> mask;
  for (int i = 0; i < 4; ++i) mask[{i, 10}] = true;  // drop firms 4, 5
  auto series = form_portfolios(panel, make_signals(sig), "sig",
                                BreakpointSpec{2}, Weighting::Equal, 0, &mask);
  REQUIRE(series.periods.size() == 1);
  CHECK(series.periods[0].count[0] + series.periods[0].count[1] == 4);
  CHECK(series.periods[0].bucket_ret[1] == doctest::Approx(0.035).epsilon(1e-12));
}

TEST_CASE("parallel and serial sorts agree exactly on a random panel") {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> norm(0.0, 0.05);
  std::lognormal_distribution<double> me_dist(4.0, 1.0);
  std::vector<int> f, p;
  std::vector<double> r, me;
  SignalPanel signals;
  for (int i = 0; i < 80; ++i)
    for (int t = 0; t < 60; ++t) {
      if ((rng() & 15) == 0) continue;
      f.push_back(i);
      p.push_back(t);
      r.push_back(norm(rng));
      me.push_back(me_dist(rng));
      signals.set("sig", i, t, norm(rng));
    }
  auto panel = ReturnPanel::from_rows(Frequency::Monthly, f, p, r, me, {}, {});
  for (Weighting w : {Weighting::Equal, Weighting::Value}) {
    auto par = form_portfolios(panel, signals, "sig", BreakpointSpec{5}, w);
    auto ser = form_portfolios_serial(panel, signals, "sig", BreakpointSpec{5}, w);
    REQUIRE(par.periods.size() == ser.periods.size());
    for (size_t i = 0; i < par.periods.size(); ++i) {
      CHECK(par.periods[i].period == ser.periods[i].period);
      for (int b = 0; b < 5; ++b) {
        CHECK(par.periods[i].bucket_ret[b] == ser.periods[i].bucket_ret[b]);
        CHECK(par.periods[i].count[b] == ser.periods[i].count[b]);
      }
      CHECK(par.periods[i].long_short == ser.periods[i].long_short);
    }
  }
}

TEST_CASE("pooled breakpoints are shared across periods") {
  // period 10 signals all below the pooled median, period 12 all above:
  // with per-period breakpoints both periods would split; pooled ones put
  // each period entirely in one bucket, so both periods are dropped
  std::vector<int> f, p;
  std::vector<double> r;
  SignalPanel signals;
  for (int i = 0; i < 4; ++i)
    for (int t = 10; t <= 13; ++t) {
      f.push_back(i);
      p.push_back(t);
      r.push_back(0.01);
      if (t == 10) signals.set("sig", i, t, 1.0 + 0.1 * i);
      if (t == 12) signals.set("sig", i, t, 10.0 + 0.1 * i);
    }
  auto panel = ReturnPanel::from_rows(Frequency::Monthly, f, p, r, {}, {}, {});
  BreakpointSpec pooled;
  pooled.n_buckets = 2;
  pooled.universe = BreakpointUniverse::PooledAllPeriods;
  auto series = form_portfolios(panel, signals, "sig", pooled, Weighting::Equal);
  CHECK(series.periods.empty());
  auto per_period = form_portfolios(panel, signals, "sig", BreakpointSpec{2},
                                    Weighting::Equal);
  CHECK(per_period.periods.size() == 2);
}

TEST_CASE("conditional double sort refines within the outer bucket") {
  // outer signal splits firms 0-3 vs 4-7; inner signal ranks within each
  std::vector<double> outer{1, 1, 1, 1, 9, 9, 9, 9};
  std::vector<double> inner{1, 2, 3, 4, 4, 3, 2, 1};
  std::vector<double> ret{0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08};
  auto panel = two_period_panel(outer, ret);
  SignalPanel signals;
  for (int i = 0; i < 8; ++i) {
    signals.set("outer", i, 10, outer[i] + 0.01 * i);  // break exact ties
    signals.set("inner", i, 10, inner[i]);
  }
  auto series = conditional_double_sort(panel, signals, "outer", 2, "inner", 2,
                                        Weighting::Equal);
  REQUIRE(series.size() == 2);
  REQUIRE(series[0].periods.size() == 1);
  // outer bucket 0 = firms 0-3, inner low = {0,1}, inner high = {2,3}
  CHECK(series[0].periods[0].bucket_ret[0] == doctest::Approx(0.015).epsilon(1e-12));
  CHECK(series[0].periods[0].bucket_ret[1] == doctest::Approx(0.035).epsilon(1e-12));
  // outer bucket 1 = firms 4-7, inner low = {6,7}, inner high = {4,5}
  CHECK(series[1].periods[0].bucket_ret[0] == doctest::Approx(0.075).epsilon(1e-12));
  CHECK(series[1].periods[0].bucket_ret[1] == doctest::Approx(0.055).epsilon(1e-12));
}

TEST_CASE("rel-size restriction masks large-customer observations") {
  SignalPanel signals;
  signals.set("rel_size", 0, 10, 0.5);
  signals.set("rel_size", 1, 10, 2.0);
  signals.set("rel_size", 2, 11, 0.9);
  auto mask = restrict_by_ratio(signals, 1.0);
  // one entry per rel_size observation; oversized customers are marked false
  CHECK(mask.size() == 3);
  CHECK(mask.at({0, 10}));
  CHECK(!mask.at({1, 10}));
  CHECK(mask.at({2, 11}));
}

TEST_CASE("long-short series matches top minus bottom bucket series") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> norm(0.0, 0.05);
  std::vector<int> f, p;
  std::vector<double> r;
  SignalPanel signals;
  for (int i = 0; i < 30; ++i)
    for (int t = 0; t < 24; ++t) {
      f.push_back(i);
      p.push_back(t);
      r.push_back(norm(rng));
      signals.set("sig", i, t, norm(rng));
    }
  auto panel = ReturnPanel::from_rows(Frequency::Monthly, f, p, r, {}, {}, {});
  auto series = form_portfolios(panel, signals, "sig", BreakpointSpec{3},
                                Weighting::Equal);
  auto ls = series.long_short_series();
  auto lo = series.bucket_series(0);
  auto hi = series.bucket_series(2);
  REQUIRE(!ls.empty());
  for (const auto& [t, v] : ls)
    CHECK(v == doctest::Approx(hi.at(t) - lo.at(t)).epsilon(1e-12));
}
