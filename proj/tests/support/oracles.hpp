#pragma once

// Reference computations written independently of the library: plain nested
// vectors, no shared helpers beyond the standard library.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

// exp(Q t) as a plain Taylor series summed in long double until the terms
// vanish. Adequate for |Q t| up to a few tens.
inline Mat taylor_expm(const Mat& q, double t) {
  const std::size_t n = q.size();
  std::vector<std::vector<long double>> term(n, std::vector<long double>(n, 0.0L));
  std::vector<std::vector<long double>> sum(n, std::vector<long double>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) term[i][i] = sum[i][i] = 1.0L;
  for (int k = 1; k < 400; ++k) {
    std::vector<std::vector<long double>> next(n, std::vector<long double>(n, 0.0L));
    long double biggest = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        long double acc = 0.0L;
        for (std::size_t m = 0; m < n; ++m) acc += term[i][m] * static_cast<long double>(q[m][j]);
        next[i][j] = acc * static_cast<long double>(t) / k;
        biggest = std::max(biggest, std::fabs(next[i][j]));
      }
    }
    term = std::move(next);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) sum[i][j] += term[i][j];
    }
    if (k > 8 && biggest < 1e-40L) break;
  }
  Mat out(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i][j] = static_cast<double>(sum[i][j]);
  }
  return out;
}

inline void normalize(Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
}

// Chain x_0 .. x_n with x_0 ~ prior, x_k | x_{k-1} ~ trans[k-1] and a
// nonnegative likelihood factor like[k] on every x_k (like[0] may be all
// ones). Returns P(x_k | all factors) for every k.
inline std::vector<Vec> chain_smoothing(const Vec& prior, const std::vector<Mat>& trans,
                                        const std::vector<Vec>& like) {
  const std::size_t n = like.size();
  const std::size_t card = prior.size();
  std::vector<Vec> alpha(n, Vec(card)), beta(n, Vec(card, 1.0));
  for (std::size_t x = 0; x < card; ++x) alpha[0][x] = prior[x] * like[0][x];
  normalize(alpha[0]);
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t x = 0; x < card; ++x) {
      double acc = 0.0;
      for (std::size_t y = 0; y < card; ++y) acc += alpha[k - 1][y] * trans[k - 1][y][x];
      alpha[k][x] = acc * like[k][x];
    }
    normalize(alpha[k]);
  }
  for (std::size_t k = n - 1; k-- > 0;) {
    for (std::size_t y = 0; y < card; ++y) {
      double acc = 0.0;
      for (std::size_t x = 0; x < card; ++x) acc += trans[k][y][x] * like[k + 1][x] * beta[k + 1][x];
      beta[k][y] = acc;
    }
    normalize(beta[k]);
  }
  std::vector<Vec> out(n, Vec(card));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t x = 0; x < card; ++x) out[k][x] = alpha[k][x] * beta[k][x];
    normalize(out[k]);
  }
  return out;
}

// Forward filtering only: P(x_k | factors up to k).
inline std::vector<Vec> chain_filtering(const Vec& prior, const std::vector<Mat>& trans,
                                        const std::vector<Vec>& like) {
  std::vector<Vec> out;
  Vec a(prior.size());
  for (std::size_t x = 0; x < prior.size(); ++x) a[x] = prior[x] * like[0][x];
  normalize(a);
  out.push_back(a);
  for (std::size_t k = 1; k < like.size(); ++k) {
    Vec b(prior.size(), 0.0);
    for (std::size_t x = 0; x < prior.size(); ++x) {
      for (std::size_t y = 0; y < prior.size(); ++y) b[x] += a[y] * trans[k - 1][y][x];
      b[x] *= like[k][x];
    }
    normalize(b);
    a = b;
    out.push_back(a);
  }
  return out;
}

}  // namespace oracle
