#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmom/panel.hpp"

namespace cmom {

struct CovSpec {
  enum Kind { Plain, NeweyWest } kind = Plain;
  // NeweyWest only; negative means the floor(4*(T/100)^{2/9}) default.
  int lags = -1;

  static CovSpec plain() { return {Plain, 0}; }
  static CovSpec newey_west(int lags = -1) { return {NeweyWest, lags}; }
};

int default_nw_lags(int n_obs);

struct RegressionReport {
  std::vector<std::string> names;  // regressors, intercept first
  std::vector<double> coef;
  std::vector<double> se;
  std::vector<double> tstat;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  int n_obs = 0;
  std::string cov_tag;  // "OLS" or "NW(lags=L)"
  double resid_sd = 0.0;

  double coef_of(const std::string& name) const;
  double tstat_of(const std::string& name) const;
};

// OLS of y on X (no implicit intercept; pass a ones column named "const").
// X is column-major: X[j] is regressor j. Throws on rank deficiency,
// naming the collinear column.
RegressionReport ols(const std::vector<double>& y,
                     const std::vector<std::vector<double>>& X,
                     const std::vector<std::string>& names,
                     const CovSpec& cov = CovSpec::plain());

// Aligned-series regression with an automatic intercept. Observations
// where y or any x is absent are dropped (complete cases).
RegressionReport ols_named(const std::map<int, double>& y,
                           const std::vector<std::pair<std::string, const std::map<int, double>*>>& xs,
                           const CovSpec& cov);

// Named factor model sets for alpha regressions.
std::vector<std::string> model_factors(const std::string& model);

// Jensen-alpha time-series regression of an asset on a factor model.
// If subtract_rf, the asset is converted to excess returns first
// (long-short legs are zero-investment and are passed with false).
RegressionReport alpha_regression(
    const std::map<int, double>& asset, const std::string& model,
    const std::map<std::string, std::map<int, double>>& factors,
    const MarketSeries* market, bool subtract_rf, const CovSpec& cov);

// Time-series spanning regression of one factor on a set of others.
RegressionReport spanning_test(
    const std::map<int, double>& target,
    const std::vector<std::string>& rhs_names,
    const std::map<std::string, std::map<int, double>>& factors,
    const CovSpec& cov);

struct FMReport {
  std::vector<std::string> names;  // intercept first
  std::vector<double> mean_slope;
  std::vector<double> se;     // time-series SE of slopes (optionally NW)
  std::vector<double> tstat;
  double mean_adj_r2 = 0.0;
  double pooled_r2 = 0.0;
  int n_periods = 0;
  int n_obs = 0;  // pooled

  double slope_of(const std::string& name) const;
  double tstat_of(const std::string& name) const;
};

// Cross-sectional design: firm/period keyed regressor values. Interaction
// terms are written "a*b" and formed as raw elementwise products.
struct FMInput {
  // (firm, period) -> value, one map per named signal
  std::map<std::string, std::map<std::pair<int, int>, double>> signals;
};

// Fama-MacBeth two-pass regression of next-period returns on formation-
// period signals: the cross-section dated t pairs returns of t+1 with
// signals at t. A period enters only if its complete-case cross-section
// has more observations than regressors. One common complete-case sample
// across all regressors.
FMReport fama_macbeth(const ReturnPanel& panel, const FMInput& signals,
                      const std::vector<std::string>& regressors,
                      const CovSpec& slope_cov = CovSpec::plain(),
                      bool parallel = true);
FMReport fama_macbeth_serial(const ReturnPanel& panel, const FMInput& signals,
                             const std::vector<std::string>& regressors,
                             const CovSpec& slope_cov = CovSpec::plain());

struct SummaryRow {
  std::string name;
  double mean = kAbsent, se = kAbsent, tstat = kAbsent, sd = kAbsent;
  double min = kAbsent, p05 = kAbsent, p25 = kAbsent, p50 = kAbsent;
  double p75 = kAbsent, p95 = kAbsent, max = kAbsent;
  double sharpe = kAbsent;  // annualized
  int n = 0;
};

// Inclusive linear-interpolation quantile, the same estimator the sorter
// uses for breakpoints.
double quantile(std::vector<double> values, double q);

SummaryRow summary_stats(const std::string& name,
                         const std::vector<double>& series, Frequency freq,
                         const CovSpec& cov = CovSpec::newey_west());

struct CorrelationCell {
  double rho = kAbsent;
  int n = 0;
  int stars = 0;  // significance stars at the configured levels
};

// Lower-triangular pairwise-complete Pearson correlations with stars from
// the t = rho*sqrt((n-2)/(1-rho^2)) test at `levels` (two-sided p-values,
// most stars for the smallest level passed).
std::vector<std::vector<CorrelationCell>> correlation_matrix(
    const std::vector<std::map<int, double>>& series,
    const std::vector<double>& levels = {0.10, 0.05, 0.01});

double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Two-sided p-value of a t statistic under the standard normal
// approximation used for star assignment.
double normal_two_sided_p(double t);

}  // namespace cmom
