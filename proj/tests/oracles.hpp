// Independent test oracles. Everything here deliberately avoids the
// library's estimation path: plain nested loops, Gauss-Jordan inversion,
// explicit textbook formulas.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  size_t n = a.size(), m = b[0].size(), k = b.size();
  Matrix out(n, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t l = 0; l < k; ++l)
      for (size_t j = 0; j < m; ++j) out[i][j] += a[i][l] * b[l][j];
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a[0].size(), std::vector<double>(a.size()));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[0].size(); ++j) out[j][i] = a[i][j];
  return out;
}

// Gauss-Jordan with partial pivoting.
inline Matrix inverse(Matrix a) {
  size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-14)
      throw std::runtime_error("oracle: singular matrix");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    double d = a[col][col];
    for (size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r][col];
      for (size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

struct OlsResult {
  std::vector<double> coef;
  std::vector<double> plain_se;
  std::vector<double> nw_se;  // for the requested lag count
  double r2 = 0.0;
};

// Textbook OLS with explicit (X'X)^{-1} and the Bartlett HAC sum.
// X is row-major: X[i] is observation i.
inline OlsResult ols_nw(const std::vector<double>& y, const Matrix& X, int nw_lags) {
  size_t n = y.size(), k = X[0].size();
  Matrix Xt = transpose(X);
  Matrix xtx = matmul(Xt, X);
  Matrix xtx_inv = inverse(xtx);

  std::vector<double> xty(k, 0.0);
  for (size_t j = 0; j < k; ++j)
    for (size_t i = 0; i < n; ++i) xty[j] += X[i][j] * y[i];

  OlsResult out;
  out.coef.assign(k, 0.0);
  for (size_t j = 0; j < k; ++j)
    for (size_t l = 0; l < k; ++l) out.coef[j] += xtx_inv[j][l] * xty[l];

  std::vector<double> resid(n);
  double ssr = 0.0, ymean = 0.0;
  for (size_t i = 0; i < n; ++i) ymean += y[i];
  ymean /= n;
  double sst = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (size_t j = 0; j < k; ++j) fit += X[i][j] * out.coef[j];
    resid[i] = y[i] - fit;
    ssr += resid[i] * resid[i];
    sst += (y[i] - ymean) * (y[i] - ymean);
  }
  out.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;

  double s2 = ssr / (n - k);
  out.plain_se.resize(k);
  for (size_t j = 0; j < k; ++j) out.plain_se[j] = std::sqrt(s2 * xtx_inv[j][j]);

  // S = sum_t e_t^2 x_t x_t' + sum_l w_l sum_t e_t e_{t-l} (x_t x_{t-l}' + x_{t-l} x_t')
  Matrix S(k, std::vector<double>(k, 0.0));
  for (size_t t = 0; t < n; ++t)
    for (size_t a = 0; a < k; ++a)
      for (size_t b = 0; b < k; ++b) S[a][b] += resid[t] * resid[t] * X[t][a] * X[t][b];
  for (int l = 1; l <= nw_lags; ++l) {
    double w = 1.0 - static_cast<double>(l) / (nw_lags + 1);
    for (size_t t = l; t < n; ++t)
      for (size_t a = 0; a < k; ++a)
        for (size_t b = 0; b < k; ++b)
          S[a][b] += w * resid[t] * resid[t - l] *
                     (X[t][a] * X[t - l][b] + X[t - l][a] * X[t][b]);
  }
  Matrix V = matmul(matmul(xtx_inv, S), xtx_inv);
  out.nw_se.resize(k);
  for (size_t j = 0; j < k; ++j) out.nw_se[j] = std::sqrt(V[j][j]);
  return out;
}

// Sample standard deviation, spreadsheet style.
inline double sample_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / (v.size() - 1));
}

}  // namespace oracle
