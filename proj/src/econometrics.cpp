#include "cmom/econometrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cmom {

int default_nw_lags(int n_obs) {
  return static_cast<int>(std::floor(4.0 * std::pow(n_obs / 100.0, 2.0 / 9.0)));
}

double RegressionReport::coef_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return coef[i];
  throw std::invalid_argument("no regressor named " + name);
}

double RegressionReport::tstat_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return tstat[i];
  throw std::invalid_argument("no regressor named " + name);
}

RegressionReport ols(const std::vector<double>& y,
                     const std::vector<std::vector<double>>& X,
                     const std::vector<std::string>& names,
                     const CovSpec& cov) {
  const int n = static_cast<int>(y.size());
  const int k = static_cast<int>(X.size());
  if (k == 0 || names.size() != X.size())
    throw std::invalid_argument("ols: empty or mismatched design");
  for (const auto& col : X)
    if (static_cast<int>(col.size()) != n)
      throw std::invalid_argument("ols: column length mismatch");
  if (n <= k)
    throw std::invalid_argument("ols: T <= number of regressors");

  Eigen::MatrixXd Xm(n, k);
  Eigen::VectorXd yv(n);
  for (int i = 0; i < n; ++i) yv(i) = y[i];
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) Xm(i, j) = X[j][i];

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xm);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    const auto& perm = qr.colsPermutation().indices();
    std::string collinear;
    for (int j = qr.rank(); j < k; ++j) {
      if (!collinear.empty()) collinear += ", ";
      collinear += names[perm(j)];
    }
    throw std::invalid_argument("ols: rank-deficient design, collinear: " + collinear);
  }

  Eigen::VectorXd beta = qr.solve(yv);
  Eigen::VectorXd resid = yv - Xm * beta;
  double ssr = resid.squaredNorm();
  double ymean = yv.mean();
  double sst = (yv.array() - ymean).square().sum();

  Eigen::MatrixXd xtx_inv = (Xm.transpose() * Xm).inverse();

  RegressionReport rep;
  rep.names = names;
  rep.n_obs = n;
  rep.coef.resize(k);
  for (int j = 0; j < k; ++j) rep.coef[j] = beta(j);
  rep.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
  rep.adj_r2 = sst > 0 ? 1.0 - (1.0 - rep.r2) * (n - 1.0) / (n - k) : 1.0;
  rep.resid_sd = std::sqrt(ssr / (n - k));

  Eigen::MatrixXd V;
  if (cov.kind == CovSpec::Plain) {
    V = (ssr / (n - k)) * xtx_inv;
    rep.cov_tag = "OLS";
  } else {
    int L = cov.lags >= 0 ? cov.lags : default_nw_lags(n);
    // Bartlett-weighted HAC sum; lag 0 term is the HC0 meat.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, k);
    for (int t = 0; t < n; ++t)
      S += resid(t) * resid(t) * Xm.row(t).transpose() * Xm.row(t);
    for (int l = 1; l <= L; ++l) {
      double w = 1.0 - static_cast<double>(l) / (L + 1);
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k, k);
      for (int t = l; t < n; ++t)
        G += resid(t) * resid(t - l) * Xm.row(t).transpose() * Xm.row(t - l);
      S += w * (G + G.transpose());
    }
    V = xtx_inv * S * xtx_inv;
    rep.cov_tag = "NW(lags=" + std::to_string(L) + ")";
  }

  rep.se.resize(k);
  rep.tstat.resize(k);
  for (int j = 0; j < k; ++j) {
    rep.se[j] = std::sqrt(std::max(0.0, V(j, j)));
    rep.tstat[j] = rep.se[j] > 0 ? rep.coef[j] / rep.se[j] : kAbsent;
  }
  return rep;
}

RegressionReport ols_named(
    const std::map<int, double>& y,
    const std::vector<std::pair<std::string, const std::map<int, double>*>>& xs,
    const CovSpec& cov) {
  std::vector<double> yv;
  std::vector<std::vector<double>> X(xs.size() + 1);
  std::vector<std::string> names{"const"};
  for (const auto& [name, _] : xs) names.push_back(name);
  for (const auto& [period, yval] : y) {
    if (is_absent(yval)) continue;
    std::vector<double> row;
    bool complete = true;
    for (const auto& [_, series] : xs) {
      auto it = series->find(period);
      if (it == series->end() || is_absent(it->second)) {
        complete = false;
        break;
      }
      row.push_back(it->second);
    }
    if (!complete) continue;
    yv.push_back(yval);
    X[0].push_back(1.0);
    for (size_t j = 0; j < row.size(); ++j) X[j + 1].push_back(row[j]);
  }
  return ols(yv, X, names, cov);
}

std::vector<std::string> model_factors(const std::string& model) {
  if (model == "CAPM") return {"MKT-RF"};
  if (model == "CAPM+UMD") return {"MKT-RF", "UMD"};
  if (model == "FF3") return {"MKT-RF", "SMB", "HML"};
  if (model == "FF3+UMD") return {"MKT-RF", "SMB", "HML", "UMD"};
  if (model == "FF5") return {"MKT-RF", "SMB", "HML", "RMW", "CMA"};
  if (model == "FF5+UMD") return {"MKT-RF", "SMB", "HML", "RMW", "CMA", "UMD"};
  throw std::invalid_argument("unknown factor model: " + model);
}

RegressionReport alpha_regression(
    const std::map<int, double>& asset, const std::string& model,
    const std::map<std::string, std::map<int, double>>& factors,
    const MarketSeries* market, bool subtract_rf, const CovSpec& cov) {
  std::vector<std::string> rhs = model_factors(model);
  std::string missing;
  for (const auto& name : rhs)
    if (!factors.count(name)) missing += (missing.empty() ? "" : ", ") + name;
  if (!missing.empty())
    throw std::invalid_argument("missing factor series: " + missing);

  std::map<int, double> lhs;
  for (const auto& [period, r] : asset) {
    if (subtract_rf) {
      if (!market) throw std::invalid_argument("excess returns need a market series");
      double rf = market->rf(period);
      if (is_absent(rf)) continue;
      lhs[period] = r - rf;
    } else {
      lhs[period] = r;
    }
  }
  std::vector<std::pair<std::string, const std::map<int, double>*>> xs;
  for (const auto& name : rhs) xs.emplace_back(name, &factors.at(name));
  RegressionReport rep = ols_named(lhs, xs, cov);
  rep.names[0] = "alpha";
  return rep;
}

RegressionReport spanning_test(
    const std::map<int, double>& target,
    const std::vector<std::string>& rhs_names,
    const std::map<std::string, std::map<int, double>>& factors,
    const CovSpec& cov) {
  std::string missing;
  for (const auto& name : rhs_names)
    if (!factors.count(name)) missing += (missing.empty() ? "" : ", ") + name;
  if (!missing.empty())
    throw std::invalid_argument("missing factor series: " + missing);
  std::vector<std::pair<std::string, const std::map<int, double>*>> xs;
  for (const auto& name : rhs_names) xs.emplace_back(name, &factors.at(name));
  RegressionReport rep = ols_named(target, xs, cov);
  rep.names[0] = "alpha";
  return rep;
}

double FMReport::slope_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return mean_slope[i];
  throw std::invalid_argument("no regressor named " + name);
}

double FMReport::tstat_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return tstat[i];
  throw std::invalid_argument("no regressor named " + name);
}

namespace {

// Value of a (possibly interaction "a*b") regressor for one firm-period.
std::optional<double> regressor_value(const FMInput& input,
                                      const std::string& name, int firm,
                                      int period) {
  size_t star = name.find('*');
  if (star != std::string::npos) {
    auto a = regressor_value(input, name.substr(0, star), firm, period);
    auto b = regressor_value(input, name.substr(star + 1), firm, period);
    if (!a || !b) return std::nullopt;
    return *a * *b;
  }
  auto it = input.signals.find(name);
  if (it == input.signals.end())
    throw std::invalid_argument("unknown FM regressor: " + name);
  auto jt = it->second.find({firm, period});
  if (jt == it->second.end() || is_absent(jt->second)) return std::nullopt;
  return jt->second;
}

struct PeriodFit {
  bool valid = false;
  std::vector<double> slopes;  // incl. intercept
  double adj_r2 = 0.0;
  double ssr = 0.0;
  double sum_y = 0.0, sum_y2 = 0.0;
  int n = 0;
};

// Cross-section dated by the formation period: returns of period + 1 are
// regressed on signals dated `period`.
PeriodFit fit_cross_section(const ReturnPanel& panel, const FMInput& input,
                            const std::vector<std::string>& regressors,
                            int period) {
  PeriodFit out;
  const int k = static_cast<int>(regressors.size()) + 1;
  std::vector<double> y;
  std::vector<std::vector<double>> X(k);
  for (int row : panel.period_rows(period + 1)) {
    std::vector<double> vals;
    bool complete = true;
    for (const auto& name : regressors) {
      auto v = regressor_value(input, name, panel.firm(row), period);
      if (!v) {
        complete = false;
        break;
      }
      vals.push_back(*v);
    }
    if (!complete) continue;
    y.push_back(panel.ret(row));
    X[0].push_back(1.0);
    for (size_t j = 0; j < vals.size(); ++j) X[j + 1].push_back(vals[j]);
  }
  if (static_cast<int>(y.size()) <= k) return out;
  std::vector<std::string> names{"const"};
  names.insert(names.end(), regressors.begin(), regressors.end());
  RegressionReport rep;
  try {
    rep = ols(y, X, names, CovSpec::plain());
  } catch (const std::invalid_argument&) {
    return out;  // degenerate cross-section (collinear), skipped
  }
  out.valid = true;
  out.slopes = rep.coef;
  out.adj_r2 = rep.adj_r2;
  out.n = rep.n_obs;
  out.ssr = rep.resid_sd * rep.resid_sd * (rep.n_obs - k);
  for (double v : y) {
    out.sum_y += v;
    out.sum_y2 += v * v;
  }
  return out;
}

}  // namespace

FMReport fama_macbeth_serial(const ReturnPanel& panel, const FMInput& signals,
                             const std::vector<std::string>& regressors,
                             const CovSpec& slope_cov) {
  return fama_macbeth(panel, signals, regressors, slope_cov, false);
}

FMReport fama_macbeth(const ReturnPanel& panel, const FMInput& signals,
                      const std::vector<std::string>& regressors,
                      const CovSpec& slope_cov, bool parallel) {
  std::vector<int> periods = panel.periods();
  const int np = static_cast<int>(periods.size());
  std::vector<PeriodFit> fits(np);

  // one cross-section per return period, dated by its formation period
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < np; ++i)
    fits[i] = fit_cross_section(panel, signals, regressors, periods[i] - 1);

  FMReport rep;
  rep.names.push_back("const");
  rep.names.insert(rep.names.end(), regressors.begin(), regressors.end());
  const int k = static_cast<int>(rep.names.size());

  std::vector<std::vector<double>> slope_series(k);
  double sum_adj_r2 = 0.0, pooled_ssr = 0.0, pooled_y = 0.0, pooled_y2 = 0.0;
  for (const PeriodFit& f : fits) {
    if (!f.valid) continue;
    ++rep.n_periods;
    rep.n_obs += f.n;
    sum_adj_r2 += f.adj_r2;
    pooled_ssr += f.ssr;
    pooled_y += f.sum_y;
    pooled_y2 += f.sum_y2;
    for (int j = 0; j < k; ++j) slope_series[j].push_back(f.slopes[j]);
  }
  if (rep.n_periods == 0)
    throw std::runtime_error("fama_macbeth: no period has a valid cross-section");

  rep.mean_adj_r2 = sum_adj_r2 / rep.n_periods;
  double grand_mean = pooled_y / rep.n_obs;
  double pooled_sst = pooled_y2 - rep.n_obs * grand_mean * grand_mean;
  rep.pooled_r2 = pooled_sst > 0 ? 1.0 - pooled_ssr / pooled_sst : kAbsent;

  const int T = rep.n_periods;
  rep.mean_slope.resize(k);
  rep.se.assign(k, kAbsent);
  rep.tstat.assign(k, kAbsent);
  for (int j = 0; j < k; ++j) {
    const auto& s = slope_series[j];
    rep.mean_slope[j] = std::accumulate(s.begin(), s.end(), 0.0) / T;
    if (T < 2) continue;
    if (slope_cov.kind == CovSpec::Plain) {
      double var = 0.0;
      for (double v : s) var += (v - rep.mean_slope[j]) * (v - rep.mean_slope[j]);
      var /= (T - 1);
      rep.se[j] = std::sqrt(var / T);
    } else {
      std::vector<std::vector<double>> ones{std::vector<double>(T, 1.0)};
      RegressionReport mean_fit = ols(s, ones, {"const"}, slope_cov);
      rep.se[j] = mean_fit.se[0];
    }
    if (rep.se[j] > 0) rep.tstat[j] = rep.mean_slope[j] / rep.se[j];
  }
  return rep;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty set");
  std::sort(values.begin(), values.end());
  const int n = static_cast<int>(values.size());
  double pos = q * (n - 1);
  int lo = static_cast<int>(std::floor(pos));
  int hi = static_cast<int>(std::ceil(pos));
  if (lo == hi) return values[lo];
  double frac = pos - lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

SummaryRow summary_stats(const std::string& name,
                         const std::vector<double>& series, Frequency freq,
                         const CovSpec& cov) {
  SummaryRow row;
  row.name = name;
  std::vector<double> s;
  for (double v : series)
    if (!is_absent(v)) s.push_back(v);
  row.n = static_cast<int>(s.size());
  if (row.n < 2) return row;

  double mean = std::accumulate(s.begin(), s.end(), 0.0) / row.n;
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  var /= (row.n - 1);
  row.mean = mean;
  row.sd = std::sqrt(var);

  std::vector<std::vector<double>> ones{std::vector<double>(row.n, 1.0)};
  RegressionReport mean_fit = ols(s, ones, {"const"}, cov);
  row.se = mean_fit.se[0];
  row.tstat = mean_fit.tstat[0];

  row.min = *std::min_element(s.begin(), s.end());
  row.max = *std::max_element(s.begin(), s.end());
  row.p05 = quantile(s, 0.05);
  row.p25 = quantile(s, 0.25);
  row.p50 = quantile(s, 0.50);
  row.p75 = quantile(s, 0.75);
  row.p95 = quantile(s, 0.95);
  // constant series accumulate FP dust in the variance; treat them as flat
  if (row.sd > 1e-12 * std::max(1.0, std::abs(mean))) {
    // Sharpe at annual frequency: compound non-overlapping years (in input
    // order) and take mean over SD of the annual returns. Short series fall
    // back to sqrt-of-horizon scaling of the per-period ratio.
    const int block = freq == Frequency::Monthly ? 12 : 252;
    const int n_blocks = row.n / block;
    if (n_blocks >= 2) {
      std::vector<double> annual(n_blocks);
      for (int b = 0; b < n_blocks; ++b) {
        double g = 1.0;
        for (int i = 0; i < block; ++i) g *= 1.0 + s[b * block + i];
        annual[b] = g - 1.0;
      }
      double a_mean = std::accumulate(annual.begin(), annual.end(), 0.0) / n_blocks;
      double a_var = 0.0;
      for (double a : annual) a_var += (a - a_mean) * (a - a_mean);
      a_var /= (n_blocks - 1);
      if (a_var > 0) row.sharpe = a_mean / std::sqrt(a_var);
    } else {
      row.sharpe = mean / row.sd * std::sqrt(static_cast<double>(block));
    }
  }
  return row;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = static_cast<int>(a.size());
  if (n != static_cast<int>(b.size()) || n < 2)
    throw std::invalid_argument("pearson: need >= 2 paired observations");
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (int i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0 || sbb <= 0) return kAbsent;
  return sab / std::sqrt(saa * sbb);
}

double normal_two_sided_p(double t) {
  return std::erfc(std::abs(t) / std::sqrt(2.0));
}

std::vector<std::vector<CorrelationCell>> correlation_matrix(
    const std::vector<std::map<int, double>>& series,
    const std::vector<double>& levels) {
  std::vector<double> sorted_levels = levels;
  std::sort(sorted_levels.begin(), sorted_levels.end(), std::greater<>());
  const int m = static_cast<int>(series.size());
  std::vector<std::vector<CorrelationCell>> out(m);
  for (int i = 0; i < m; ++i) {
    out[i].resize(i + 1);
    for (int j = 0; j <= i; ++j) {
      std::vector<double> a, b;
      for (const auto& [period, v] : series[i]) {
        auto it = series[j].find(period);
        if (it == series[j].end()) continue;
        if (is_absent(v) || is_absent(it->second)) continue;
        a.push_back(v);
        b.push_back(it->second);
      }
      CorrelationCell& cell = out[i][j];
      cell.n = static_cast<int>(a.size());
      if (cell.n < 3) continue;
      cell.rho = pearson(a, b);
      if (is_absent(cell.rho)) continue;
      double denom = 1.0 - cell.rho * cell.rho;
      if (denom <= 0) {
        cell.stars = static_cast<int>(sorted_levels.size());
        continue;
      }
      double t = cell.rho * std::sqrt((cell.n - 2) / denom);
      double p = normal_two_sided_p(t);
      for (double level : sorted_levels)
        if (p < level) ++cell.stars;
        else break;
    }
  }
  return out;
}

}  // namespace cmom
