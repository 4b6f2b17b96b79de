#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "cmom/factor_factory.hpp"

using namespace cmom;

namespace {

// one formation period (10) and one measurement period (11)
ReturnPanel cell_panel(const std::vector<double>& me,
                       const std::vector<double>& next_ret,
                       const std::vector<ExchangeTag>& ex) {
  int n = static_cast<int>(me.size());
  std::vector<int> f, p;
  std::vector<double> r, m;
  std::vector<ExchangeTag> e;
  for (int i = 0; i < n; ++i) {
    f.push_back(i);
    p.push_back(10);
    r.push_back(0.0);
    m.push_back(me[i]);
    e.push_back(ex[i]);
    f.push_back(i);
    p.push_back(11);
    r.push_back(next_ret[i]);
    m.push_back(kAbsent);
    e.push_back(ex[i]);
  }
  return ReturnPanel::from_rows(Frequency::Monthly, f, p, r, m, {}, e);
}

SignalPanel one_period_signals(const std::vector<double>& vals) {
  SignalPanel s;
  for (size_t i = 0; i < vals.size(); ++i)
    s.set("sig", static_cast<int>(i), 10, vals[i]);
  return s;
}

}  // namespace

TEST_CASE("2x3 factor hand example") {
  // 10 NYSE firms, signal 1..10: NYSE p30 = 3.7, p70 = 7.3.
  // odd firms small (ME 10), even big (ME 100); NYSE ME median = 55.
  // cells: SL {1,3} BL {2} SH {9} BH {8,10}, VW with equal in-cell MEs.
  std::vector<double> sig, me, ret;
  std::vector<ExchangeTag> ex;
  for (int i = 1; i <= 10; ++i) {
    sig.push_back(i);
    me.push_back(i % 2 ? 10.0 : 100.0);
    ret.push_back(0.01 * i);
    ex.push_back(ExchangeTag::NYSE);
  }
  auto panel = cell_panel(me, ret, ex);
  auto factor = build_factor(panel, one_period_signals(sig), "sig", "CMOM");
  REQUIRE(factor.returns.size() == 1);
  // 1/2 (0.09 + 0.09) - 1/2 (0.02 + 0.02) = 0.07
  CHECK(factor.returns.at(11) == doctest::Approx(0.07).epsilon(1e-12));
  CHECK(factor.name == "CMOM");
}

TEST_CASE("negating the signal negates the factor exactly") {
  std::mt19937_64 rng(59);
  std::normal_distribution<double> sig_dist(0.0, 1.0), ret_dist(0.0, 0.05);
  std::lognormal_distribution<double> me_dist(4.0, 1.2);
  std::vector<int> f, p;
  std::vector<double> r, m;
  std::vector<ExchangeTag> e;
  SignalPanel pos, neg;
  for (int i = 0; i < 60; ++i)
    for (int t = 0; t < 36; ++t) {
      f.push_back(i);
      p.push_back(t);
      r.push_back(ret_dist(rng));
      m.push_back(me_dist(rng));
      e.push_back(i % 3 ? ExchangeTag::NYSE : ExchangeTag::Other);
      double s = sig_dist(rng);
      pos.set("sig", i, t, s);
      neg.set("sig", i, t, -s);
    }
  auto panel = ReturnPanel::from_rows(Frequency::Monthly, f, p, r, m, {}, e);
  auto up = build_factor(panel, pos, "sig", "UP");
  auto down = build_factor(panel, neg, "sig", "DOWN");
  REQUIRE(up.returns.size() > 30);
  REQUIRE(down.returns.size() == up.returns.size());
  for (const auto& [t, v] : up.returns) CHECK(down.returns.at(t) == -v);
}

TEST_CASE("doubling every market equity leaves the factor unchanged") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> sig_dist(0.0, 1.0), ret_dist(0.0, 0.05);
  std::lognormal_distribution<double> me_dist(4.0, 1.2);
  std::vector<int> f, p;
  std::vector<double> r, m1, m2;
  std::vector<ExchangeTag> e;
  SignalPanel signals;
  for (int i = 0; i < 50; ++i)
    for (int t = 0; t < 24; ++t) {
      f.push_back(i);
      p.push_back(t);
      r.push_back(ret_dist(rng));
      double me = me_dist(rng);
      m1.push_back(me);
      m2.push_back(2.0 * me);
      e.push_back(ExchangeTag::NYSE);
      signals.set("sig", i, t, sig_dist(rng));
    }
  auto a = build_factor(ReturnPanel::from_rows(Frequency::Monthly, f, p, r, m1, {}, e),
                        signals, "sig", "F");
  auto b = build_factor(ReturnPanel::from_rows(Frequency::Monthly, f, p, r, m2, {}, e),
                        signals, "sig", "F");
  REQUIRE(a.returns.size() > 15);
  REQUIRE(b.returns.size() == a.returns.size());
  for (const auto& [t, v] : a.returns) CHECK(b.returns.at(t) == v);
}

TEST_CASE("an empty cell drops the period") {
  // high-signal firms are all big, so small-high is empty
  std::vector<double> sig, me, ret;
  std::vector<ExchangeTag> ex;
  for (int i = 1; i <= 10; ++i) {
    sig.push_back(i);
    me.push_back(i >= 8 ? 100.0 : (i % 2 ? 10.0 : 100.0));
    ret.push_back(0.01);
    ex.push_back(ExchangeTag::NYSE);
  }
  auto panel = cell_panel(me, ret, ex);
  auto factor = build_factor(panel, one_period_signals(sig), "sig", "F");
  CHECK(factor.returns.empty());
}

TEST_CASE("a flat signal cross-section drops the period") {
  std::vector<double> sig(10, 1.0), me, ret;
  std::vector<ExchangeTag> ex(10, ExchangeTag::NYSE);
  for (int i = 0; i < 10; ++i) {
    me.push_back(10.0 + i);
    ret.push_back(0.01);
  }
  auto panel = cell_panel(me, ret, ex);
  CHECK(build_factor(panel, one_period_signals(sig), "sig", "F").returns.empty());
}

TEST_CASE("growth of a dollar compounds and can rescale to a target SD") {
  std::map<int, double> rets{{0, 0.1}, {1, -0.5}};
  auto plain = growth_of_dollar(rets);
  CHECK(plain.value.at(0) == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(plain.value.at(1) == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(!plain.truncated);

  // {0.1, -0.1} has sample SD 0.1*sqrt(2); doubling the target doubles
  // the returns
  std::map<int, double> sym{{0, 0.1}, {1, -0.1}};
  double sd = 0.1 * std::sqrt(2.0);
  auto scaled = growth_of_dollar(sym, 2.0 * sd);
  CHECK(scaled.value.at(0) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(scaled.value.at(1) == doctest::Approx(1.2 * 0.8).epsilon(1e-12));
}

TEST_CASE("growth truncates at zero") {
  std::map<int, double> rets{{0, 0.1}, {1, -1.2}, {2, 0.3}};
  auto g = growth_of_dollar(rets);
  CHECK(g.truncated);
  CHECK(g.value.size() == 1);
}

TEST_CASE("factor CSV round trip") {
  FactorSeries a;
  a.name = "CMOM";
  a.returns = {{month_ordinal("2000-01"), 0.01}, {month_ordinal("2000-02"), -0.02}};
  FactorSeries b;
  b.name = "UMD";
  b.returns = {{month_ordinal("2000-01"), 0.005}};
  auto path = (std::filesystem::temp_directory_path() / "ff_roundtrip.csv").string();
  emit_factors_csv(path, {a, b});
  auto back = load_factors_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back.at("CMOM").at(month_ordinal("2000-01")) == doctest::Approx(0.01));
  CHECK(back.at("CMOM").at(month_ordinal("2000-02")) == doctest::Approx(-0.02));
  CHECK(back.at("UMD").size() == 1);
}
