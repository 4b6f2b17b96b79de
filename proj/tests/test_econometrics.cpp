#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cmom/econometrics.hpp"
#include "oracles.hpp"

using namespace cmom;

namespace {

// y, X with AR(1) errors for HAC exercises
void make_problem(std::mt19937_64& rng, int n, int k, std::vector<double>& y,
                  std::vector<std::vector<double>>& X_cols,
                  oracle::Matrix& X_rows) {
  std::normal_distribution<double> norm(0.0, 1.0);
  X_cols.assign(k, std::vector<double>(n));
  X_rows.assign(n, std::vector<double>(k));
  for (int i = 0; i < n; ++i) {
    X_cols[0][i] = 1.0;
    for (int j = 1; j < k; ++j) X_cols[j][i] = norm(rng);
    for (int j = 0; j < k; ++j) X_rows[i][j] = X_cols[j][i];
  }
  y.assign(n, 0.0);
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    e = 0.6 * e + norm(rng);
    double fit = 0.0;
    for (int j = 0; j < k; ++j) fit += (j + 1) * 0.5 * X_cols[j][i];
    y[i] = fit + e;
  }
}

}  // namespace

TEST_CASE("exact fit recovers the coefficient with R2 = 1") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y{2, 4, 6, 8, 10};
  auto rep = ols(y, {std::vector<double>(5, 1.0), x}, {"const", "x"});
  CHECK(rep.coef[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.coef[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("NW with L = 0 equals the HC0 sandwich") {
  std::mt19937_64 rng(7);
  std::vector<double> y;
  std::vector<std::vector<double>> X;
  oracle::Matrix Xr;
  make_problem(rng, 120, 3, y, X, Xr);
  auto rep = ols(y, X, {"const", "x1", "x2"}, CovSpec::newey_west(0));
  auto ref = oracle::ols_nw(y, Xr, 0);
  for (int j = 0; j < 3; ++j)
    CHECK(rep.se[j] == doctest::Approx(ref.nw_se[j]).epsilon(1e-12));
}

TEST_CASE("coefficients and SEs match the textbook-formula oracle") {
  std::mt19937_64 rng(11);
  for (int rep_i = 0; rep_i < 10; ++rep_i) {
    int n = 60 + rep_i * 30, k = 2 + rep_i % 4;
    std::vector<double> y;
    std::vector<std::vector<double>> X;
    oracle::Matrix Xr;
    make_problem(rng, n, k, y, X, Xr);
    std::vector<std::string> names;
    for (int j = 0; j < k; ++j) names.push_back("x" + std::to_string(j));
    for (int L : {0, 3, 6}) {
      auto mine = ols(y, X, names, CovSpec::newey_west(L));
      auto ref = oracle::ols_nw(y, Xr, L);
      for (int j = 0; j < k; ++j) {
        CHECK(mine.coef[j] == doctest::Approx(ref.coef[j]).epsilon(1e-8));
        CHECK(mine.se[j] == doctest::Approx(ref.nw_se[j]).epsilon(1e-8));
      }
      CHECK(mine.r2 == doctest::Approx(ref.r2).epsilon(1e-10));
    }
    auto plain = ols(y, X, names, CovSpec::plain());
    auto ref = oracle::ols_nw(y, Xr, 0);
    for (int j = 0; j < k; ++j)
      CHECK(plain.se[j] == doctest::Approx(ref.plain_se[j]).epsilon(1e-8));
  }
}

TEST_CASE("rank deficiency is reported with the collinear column named") {
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> x2{2, 4, 6, 8, 10, 12};
  std::vector<double> y{1, 1, 2, 2, 3, 3};
  CHECK_THROWS_WITH_AS(
      ols(y, {std::vector<double>(6, 1.0), x, x2}, {"const", "a", "b"}),
      doctest::Contains("collinear"), std::invalid_argument);
}

TEST_CASE("too few observations is an error") {
  std::vector<double> y{1, 2};
  CHECK_THROWS_AS(ols(y, {std::vector<double>(2, 1.0), {1, 2}}, {"const", "x"}),
                  std::invalid_argument);
}

TEST_CASE("scaling a regressor scales its coefficient and nothing else") {
  std::mt19937_64 rng(23);
  std::vector<double> y;
  std::vector<std::vector<double>> X;
  oracle::Matrix Xr;
  make_problem(rng, 90, 3, y, X, Xr);
  auto base = ols(y, X, {"const", "a", "b"}, CovSpec::newey_west(4));
  auto scaled_X = X;
  for (double& v : scaled_X[1]) v *= 7.0;
  auto scaled = ols(y, scaled_X, {"const", "a", "b"}, CovSpec::newey_west(4));
  CHECK(scaled.coef[1] == doctest::Approx(base.coef[1] / 7.0).epsilon(1e-10));
  CHECK(scaled.tstat[1] == doctest::Approx(base.tstat[1]).epsilon(1e-10));
  CHECK(scaled.coef[2] == doctest::Approx(base.coef[2]).epsilon(1e-10));
  CHECK(scaled.r2 == doctest::Approx(base.r2).epsilon(1e-10));
}

TEST_CASE("adding a constant to y moves only the intercept") {
  std::mt19937_64 rng(29);
  std::vector<double> y;
  std::vector<std::vector<double>> X;
  oracle::Matrix Xr;
  make_problem(rng, 80, 3, y, X, Xr);
  auto base = ols(y, X, {"const", "a", "b"}, CovSpec::newey_west(3));
  for (double& v : y) v += 5.0;
  auto shifted = ols(y, X, {"const", "a", "b"}, CovSpec::newey_west(3));
  for (int j = 1; j < 3; ++j) {
    CHECK(shifted.coef[j] == doctest::Approx(base.coef[j]).epsilon(1e-10));
    CHECK(shifted.se[j] == doctest::Approx(base.se[j]).epsilon(1e-10));
  }
  CHECK(shifted.coef[0] == doctest::Approx(base.coef[0] + 5.0).epsilon(1e-10));
}

TEST_CASE("alpha regression: the market on itself prices exactly") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> norm(0.008, 0.04);
  MarketSeries market;
  std::map<int, double> asset;
  std::map<std::string, std::map<int, double>> factors;
  for (int t = 0; t < 120; ++t) {
    double m = norm(rng);
    market.set(t, m, 0.003);
    factors["MKT-RF"][t] = m - 0.003;
    asset[t] = m;  // raw market return; engine subtracts rf
  }
  auto rep = alpha_regression(asset, "CAPM", factors, &market, true,
                              CovSpec::plain());
  CHECK(rep.coef[0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(rep.coef[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.r2 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("alpha of an orthogonal asset is its mean") {
  // asset built orthogonal to the factor in-sample
  std::mt19937_64 rng(37);
  std::normal_distribution<double> norm(0.0, 1.0);
  const int T = 200;
  std::vector<double> f(T), e(T);
  for (int t = 0; t < T; ++t) {
    f[t] = norm(rng);
    e[t] = norm(rng);
  }
  // residualize e on f and the constant, then add a known mean
  double fb = 0.0, eb = 0.0;
  for (int t = 0; t < T; ++t) {
    fb += f[t];
    eb += e[t];
  }
  fb /= T;
  eb /= T;
  double num = 0.0, den = 0.0;
  for (int t = 0; t < T; ++t) {
    num += (f[t] - fb) * (e[t] - eb);
    den += (f[t] - fb) * (f[t] - fb);
  }
  double slope = num / den;
  std::map<int, double> asset;
  std::map<std::string, std::map<int, double>> factors;
  for (int t = 0; t < T; ++t) {
    asset[t] = 0.01 + (e[t] - eb) - slope * (f[t] - fb);
    factors["MKT-RF"][t] = f[t];
  }
  auto rep = alpha_regression(asset, "CAPM", factors, nullptr, false,
                              CovSpec::plain());
  CHECK(rep.coef[0] == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(rep.coef[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("alpha regression lists the missing factor series") {
  std::map<int, double> asset{{0, 0.1}, {1, 0.2}, {2, 0.0}};
  std::map<std::string, std::map<int, double>> factors;
  factors["MKT-RF"] = asset;
  CHECK_THROWS_WITH_AS(
      alpha_regression(asset, "FF3", factors, nullptr, false, CovSpec::plain()),
      doctest::Contains("SMB"), std::invalid_argument);
}

TEST_CASE("spanning test: a target inside the rhs set is spanned exactly") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> norm(0.0, 0.03);
  std::map<std::string, std::map<int, double>> factors;
  for (int t = 0; t < 100; ++t) {
    factors["A"][t] = norm(rng);
    factors["B"][t] = norm(rng);
  }
  auto rep = spanning_test(factors["A"], {"A", "B"}, factors, CovSpec::plain());
  CHECK(rep.coef[0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(rep.coef_of("A") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.coef_of("B") == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("spanning test recovers a planted linear combination") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> norm(0.0, 0.03);
  std::normal_distribution<double> tiny(0.0, 0.002);
  std::map<std::string, std::map<int, double>> factors;
  std::map<int, double> target;
  for (int t = 0; t < 600; ++t) {
    double a = norm(rng), b = norm(rng);
    factors["A"][t] = a;
    factors["B"][t] = b;
    target[t] = 0.5 * a + 0.3 * b + tiny(rng);
  }
  auto rep = spanning_test(target, {"A", "B"}, factors, CovSpec::plain());
  CHECK(rep.coef_of("A") == doctest::Approx(0.5).epsilon(0.05));
  CHECK(rep.coef_of("B") == doctest::Approx(0.3).epsilon(0.08));
}

TEST_CASE("single-period Fama-MacBeth equals that period's OLS") {
  std::vector<int> firms, periods;
  std::vector<double> rets;
  FMInput input;
  std::mt19937_64 rng(47);
  std::normal_distribution<double> norm(0.0, 1.0);
  for (int f = 0; f < 20; ++f) {
    double sig = norm(rng);
    firms.push_back(f);
    periods.push_back(5);
    rets.push_back(0.02 + 0.5 * sig + 0.001 * norm(rng));
    input.signals["sig"][{f, 4}] = sig;  // formation month precedes the return
  }
  auto panel = ReturnPanel::from_rows(Frequency::Monthly, firms, periods, rets,
                                      {}, {}, {});
  auto rep = fama_macbeth(panel, input, {"sig"});
  CHECK(rep.n_periods == 1);
  CHECK(rep.slope_of("sig") == doctest::Approx(0.5).epsilon(0.01));
  CHECK(is_absent(rep.se[1]));
}

TEST_CASE("identical cross-sections every period give zero FM SEs") {
  std::vector<int> firms, periods;
  std::vector<double> rets;
  FMInput input;
  for (int t = 0; t < 6; ++t)
    for (int f = 0; f < 8; ++f) {
      firms.push_back(f);
      periods.push_back(t);
      rets.push_back(0.01 * f);
      input.signals["sig"][{f, t}] = f;
    }
  auto panel = ReturnPanel::from_rows(Frequency::Monthly, firms, periods, rets,
                                      {}, {}, {});
  auto rep = fama_macbeth(panel, input, {"sig"});
  CHECK(rep.slope_of("sig") == doctest::Approx(0.01).epsilon(1e-10));
  CHECK(rep.se[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("FM interaction terms are raw products") {
  // r = 2*a*b exactly; the interaction column should absorb everything
  std::vector<int> firms, periods;
  std::vector<double> rets;
  FMInput input;
  std::mt19937_64 rng(53);
  std::normal_distribution<double> norm(0.0, 1.0);
  for (int t = 0; t < 4; ++t)
    for (int f = 0; f < 12; ++f) {
      double a = norm(rng), b = norm(rng);
      firms.push_back(f);
      periods.push_back(t);
      rets.push_back(std::max(-0.9, 2.0 * a * b * 0.01));
      input.signals["a"][{f, t - 1}] = a;
      input.signals["b"][{f, t - 1}] = b;
    }
  auto panel = ReturnPanel::from_rows(Frequency::Monthly, firms, periods, rets,
                                      {}, {}, {});
  auto rep = fama_macbeth(panel, input, {"a", "b", "a*b"});
  CHECK(rep.slope_of("a*b") == doctest::Approx(0.02).epsilon(1e-6));
}

TEST_CASE("parallel and serial Fama-MacBeth agree exactly") {
  std::vector<int> firms, periods;
  std::vector<double> rets;
  FMInput input;
  std::mt19937_64 rng(59);
  std::normal_distribution<double> norm(0.0, 1.0);
  for (int t = 0; t < 40; ++t)
    for (int f = 0; f < 30; ++f) {
      double sig = norm(rng);
      firms.push_back(f);
      periods.push_back(t);
      rets.push_back(std::max(-0.9, 0.01 + 0.04 * sig + 0.05 * norm(rng)));
      input.signals["sig"][{f, t}] = sig;
    }
  auto panel = ReturnPanel::from_rows(Frequency::Monthly, firms, periods, rets,
                                      {}, {}, {});
  auto par = fama_macbeth(panel, input, {"sig"});
  auto ser = fama_macbeth_serial(panel, input, {"sig"});
  CHECK(par.slope_of("sig") == ser.slope_of("sig"));
  CHECK(par.se[1] == ser.se[1]);
  CHECK(par.pooled_r2 == ser.pooled_r2);
}

TEST_CASE("summary stats: degenerate series has no Sharpe") {
  auto row = summary_stats("c", std::vector<double>(10, 0.01), Frequency::Monthly);
  CHECK(row.sd == doctest::Approx(0.0));
  CHECK(is_absent(row.sharpe));
}

TEST_CASE("Sharpe matches a direct annual-aggregation recomputation") {
  std::mt19937_64 rng(63);
  std::normal_distribution<double> norm(0.008, 0.05);
  std::vector<double> series(360);
  for (double& v : series) v = norm(rng);
  auto row = summary_stats("ls", series, Frequency::Monthly);

  std::vector<double> annual;
  for (int y = 0; y < 30; ++y) {
    double g = 1.0;
    for (int m = 0; m < 12; ++m) g *= 1.0 + series[y * 12 + m];
    annual.push_back(g - 1.0);
  }
  double a_mean = 0.0;
  for (double a : annual) a_mean += a;
  a_mean /= annual.size();
  CHECK(row.sharpe ==
        doctest::Approx(a_mean / oracle::sample_sd(annual)).epsilon(1e-12));
}

TEST_CASE("percentiles match a sort-based oracle") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::vector<double> v(1000);
  for (double& x : v) x = norm(rng);
  auto row = summary_stats("s", v, Frequency::Monthly);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  auto interp = [&](double q) {
    double pos = q * (sorted.size() - 1);
    int lo = static_cast<int>(pos);
    double frac = pos - lo;
    return sorted[lo] * (1 - frac) + sorted[std::min<size_t>(lo + 1, sorted.size() - 1)] * frac;
  };
  CHECK(row.p05 == doctest::Approx(interp(0.05)).epsilon(1e-12));
  CHECK(row.p50 == doctest::Approx(interp(0.50)).epsilon(1e-12));
  CHECK(row.p95 == doctest::Approx(interp(0.95)).epsilon(1e-12));
}

TEST_CASE("short series fall back to sqrt-of-horizon Sharpe scaling") {
  std::mt19937_64 rng(67);
  std::normal_distribution<double> norm(0.01, 0.05);
  std::vector<double> v(20);  // under two full years
  for (double& x : v) x = norm(rng);
  auto row = summary_stats("a", v, Frequency::Monthly);
  CHECK(row.sharpe ==
        doctest::Approx(row.mean / row.sd * std::sqrt(12.0)).epsilon(1e-12));
}

TEST_CASE("correlation of a series with itself is 1") {
  std::map<int, double> s{{0, 0.1}, {1, -0.2}, {2, 0.3}, {3, 0.05}};
  auto m = correlation_matrix({s, s});
  CHECK(m[1][0].rho == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("independent Gaussian pairs have near-zero correlation") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::map<int, double> a, b;
  for (int i = 0; i < 10000; ++i) {
    a[i] = norm(rng);
    b[i] = norm(rng);
  }
  auto m = correlation_matrix({a, b});
  CHECK(std::abs(m[1][0].rho) < 0.05);
}

TEST_CASE("default NW lag rule") {
  CHECK(default_nw_lags(100) == 4);
  CHECK(default_nw_lags(50) == 3);
  CHECK(default_nw_lags(500) == 5);
}
