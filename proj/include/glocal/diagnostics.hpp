#ifndef GLOCAL_DIAGNOSTICS_HPP
#define GLOCAL_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace glocal {

/// Adjusted Rand index in the Hubert-Arabie form:
/// (Index - Expected) / (Max - Expected) over the pair-count contingency table.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("ARI: label vectors differ in length");
  if (a.size() < 2) throw std::invalid_argument("ARI: need at least two items");
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto choose2 = [](double x) { return 0.5 * x * (x - 1.0); };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, v] : cells) index += choose2(v);
  for (const auto& [key, v] : rows) sum_rows += choose2(v);
  for (const auto& [key, v] : cols) sum_cols += choose2(v);
  // Scaled by 2 C(n, 2) so every term is an integer held exactly in a
  // double; the single final division is then correctly rounded.
  const double pairs = choose2(static_cast<double>(a.size()));
  const double num = 2.0 * index * pairs - 2.0 * sum_rows * sum_cols;
  const double den = (sum_rows + sum_cols) * pairs - 2.0 * sum_rows * sum_cols;
  if (den == 0.0) return 1.0;  // both partitions trivial (all-one or all-singletons) and equal
  return num / den;
}

inline double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Sample autocorrelation at lags 0..max_lag with the biased 1/N estimator.
inline std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n <= max_lag) throw std::invalid_argument("autocorrelation: series shorter than max lag");
  const double m = mean_of(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  if (!(c0 > 0.0)) throw std::invalid_argument("autocorrelation: constant series");
  std::vector<double> acf(max_lag + 1);
  acf[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double c = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) c += (x[i] - m) * (x[i + k] - m);
    acf[k] = c / c0;
  }
  return acf;
}

/// N / tau with tau = -1 + 2 sum_m (rho_2m + rho_2m+1), summing pairs while
/// they stay positive (Geyer's initial positive sequence). Clamped to (0, N].
inline double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("ESS: need at least two values");
  const double m = mean_of(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - m) * (v - m);
  if (!(c0 > 0.0)) throw std::invalid_argument("ESS: constant series");
  auto rho = [&](std::size_t k) {
    double c = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) c += (x[i] - m) * (x[i + k] - m);
    return c / c0;
  };
  double tau = -1.0;
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    const double pair = (lag == 0 ? 1.0 : rho(lag)) + rho(lag + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  const double nd = static_cast<double>(n);
  if (!(tau > 0.0)) return nd;
  return std::clamp(nd / tau, std::numeric_limits<double>::min(), nd);
}

/// Potential scale reduction factor sqrt(V / W) with
/// V = (n - 1) / n W + B / n, B = n var(chain means), W = mean within-chain variance.
inline double gelman_rubin(std::span<const std::vector<double>> chains) {
  if (chains.size() < 2) throw std::invalid_argument("Gelman-Rubin: need at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 10) throw std::invalid_argument("Gelman-Rubin: chains must have length >= 10");
  for (const auto& c : chains)
    if (c.size() != n) throw std::invalid_argument("Gelman-Rubin: chains differ in length");
  const double m = static_cast<double>(chains.size());
  const double nd = static_cast<double>(n);
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    const double mu = mean_of(c);
    double s = 0.0;
    for (double v : c) s += (v - mu) * (v - mu);
    means.push_back(mu);
    vars.push_back(s / (nd - 1.0));
  }
  const double grand = mean_of(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= nd / (m - 1.0);
  const double w = mean_of(vars);
  if (!(w > 0.0)) throw std::invalid_argument("Gelman-Rubin: zero within-chain variance");
  const double v = (nd - 1.0) / nd * w + b / nd;
  return std::sqrt(v / w);
}

/// Trapezoid integral of (estimated - truth)^2 over an equidistant grid.
inline double mise(std::span<const double> estimated, std::span<const double> truth,
                   std::span<const double> grid) {
  if (estimated.size() != truth.size() || truth.size() != grid.size())
    throw std::invalid_argument("MISE: vectors differ in length");
  if (grid.size() < 2) throw std::invalid_argument("MISE: grid needs at least two points");
  const double h = grid[1] - grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs((grid[i] - grid[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument("MISE: grid is not equidistant");
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = estimated[i] - truth[i];
    const double w = (i == 0 || i + 1 == grid.size()) ? 0.5 : 1.0;
    s += w * d * d;
  }
  return s * h;
}

}  // namespace glocal

#endif  // GLOCAL_DIAGNOSTICS_HPP
