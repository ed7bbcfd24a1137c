#ifndef GLOCAL_SUMMARIES_HPP
#define GLOCAL_SUMMARIES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "glocal/model.hpp"
#include "glocal/sampler.hpp"

namespace glocal {

/// Dense row-major square matrix.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  explicit SquareMatrix(std::size_t n_ = 0) : n(n_), values(n_ * n_, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

using Labels = std::vector<int>;

/// Concatenated global labels: entry (j, i) is k_{j t_ji}, groups in order.
inline Labels derive_global_labels(const std::vector<std::vector<int>>& t_labels,
                                   const std::vector<std::vector<int>>& k_table) {
  Labels z;
  for (std::size_t j = 0; j < t_labels.size(); ++j)
    for (int t : t_labels[j]) z.push_back(k_table[j].at(static_cast<std::size_t>(t)));
  return z;
}

inline Labels derive_global_labels(const Draw& d) { return derive_global_labels(d.t_labels, d.k_table); }

inline void check_equal_lengths(std::span<const Labels> seqs) {
  if (seqs.empty()) throw std::invalid_argument("need at least one label sequence");
  for (const auto& z : seqs)
    if (z.size() != seqs.front().size()) throw std::invalid_argument("label sequences differ in length");
}

/// Posterior co-clustering probabilities: entry (a, b) is the fraction of
/// sequences in which items a and b share a label.
inline SquareMatrix coclustering_matrix(std::span<const Labels> seqs) {
  check_equal_lengths(seqs);
  const std::size_t n = seqs.front().size();
  SquareMatrix pm(n);
  std::vector<std::size_t> counts(n * (n + 1) / 2, 0);
  for (const auto& z : seqs) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < n; ++a) {
      const int za = z[a];
      for (std::size_t b = a; b < n; ++b, ++idx) counts[idx] += (za == z[b]);
    }
  }
  const double m = static_cast<double>(seqs.size());
  std::size_t idx = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b, ++idx) pm(a, b) = pm(b, a) = static_cast<double>(counts[idx]) / m;
  return pm;
}

/// Sum over unordered pairs a < b of (1[z_a = z_b] - P_ab)^2.
inline double clustering_loss(const Labels& z, const SquareMatrix& pm) {
  double loss = 0.0;
  for (std::size_t a = 0; a < pm.n; ++a)
    for (std::size_t b = a + 1; b < pm.n; ++b) {
      const double r = (z[a] == z[b] ? 1.0 : 0.0) - pm(a, b);
      loss += r * r;
    }
  return loss;
}

struct LeastSquaresResult {
  std::size_t index = 0;  // position within the input sequences
  double loss = 0.0;      // unordered-pair loss of the chosen sequence
  std::vector<double> losses;
  Labels labels;
};

/// Relative slack under which two losses count as tied; equal partitions
/// can differ by rounding in the last bits.
inline constexpr double kTieTolerance = 1e-12;

/// Picks the sampled clustering closest to the co-clustering matrix in
/// squared distance; the earliest index wins ties.
inline LeastSquaresResult least_squares_clustering(std::span<const Labels> seqs) {
  const auto pm = coclustering_matrix(seqs);
  LeastSquaresResult r;
  r.losses.reserve(seqs.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    const double l = clustering_loss(seqs[b], pm);
    r.losses.push_back(l);
    if (b == 0 || l < best - kTieTolerance * std::max(1.0, std::abs(best))) {
      best = l;
      r.index = b;
    }
  }
  r.loss = best;
  r.labels = seqs[r.index];
  return r;
}

inline std::size_t count_distinct(const Labels& z) { return std::set<int>(z.begin(), z.end()).size(); }

struct ClusteringResult {
  Labels global_labels;              // concatenated over groups
  std::vector<Labels> local_labels;  // per group
  std::size_t chosen_draw_index = 0; // draw realising the global minimum
  std::vector<std::size_t> chosen_local_draw_index;
  std::size_t n_global_clusters = 0;
  std::vector<std::size_t> n_local_clusters;  // per group

  std::size_t total_local_clusters() const {
    std::size_t n = 0;
    for (auto v : n_local_clusters) n += v;
    return n;
  }

  /// Slice of the concatenated global labels belonging to group j.
  Labels group_global_labels(std::size_t j) const {
    std::size_t offset = 0;
    for (std::size_t g = 0; g < j; ++g) offset += local_labels[g].size();
    return Labels(global_labels.begin() + static_cast<long>(offset),
                  global_labels.begin() + static_cast<long>(offset + local_labels[j].size()));
  }
};

inline void check_draws(std::span<const Draw> draws) {
  if (draws.empty()) throw std::invalid_argument("no retained draws to summarise");
  const auto& first = draws.front();
  for (const auto& d : draws) {
    if (d.t_labels.size() != first.t_labels.size() || d.k_table.size() != first.k_table.size())
      throw std::invalid_argument("draws disagree on group count");
    for (std::size_t j = 0; j < d.t_labels.size(); ++j)
      if (d.t_labels[j].size() != first.t_labels[j].size() || d.k_table[j].size() != first.k_table[j].size())
        throw std::invalid_argument("draws disagree on group shape");
  }
}

/// Least-squares global clustering over the concatenated derived labels and
/// a least-squares local clustering per group.
inline ClusteringResult summarize(std::span<const Draw> draws) {
  check_draws(draws);
  ClusteringResult r;
  std::vector<Labels> global;
  global.reserve(draws.size());
  for (const auto& d : draws) global.push_back(derive_global_labels(d));
  const auto g = least_squares_clustering(global);
  r.chosen_draw_index = g.index;
  r.global_labels = g.labels;
  r.n_global_clusters = count_distinct(g.labels);

  const std::size_t J = draws.front().t_labels.size();
  std::vector<Labels> local(draws.size());
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t b = 0; b < draws.size(); ++b) local[b] = draws[b].t_labels[j];
    const auto l = least_squares_clustering(local);
    r.chosen_local_draw_index.push_back(l.index);
    r.n_local_clusters.push_back(count_distinct(l.labels));
    r.local_labels.push_back(l.labels);
  }
  return r;
}

inline ClusteringResult summarize(const PosteriorDraws& p) { return summarize(std::span<const Draw>(p.draws)); }

/// Least-squares estimate of the global labels of group j alone, using the
/// co-clustering matrix restricted to that group's rows.
inline LeastSquaresResult group_global_clustering(std::span<const Draw> draws, std::size_t j) {
  check_draws(draws);
  std::vector<Labels> seqs;
  seqs.reserve(draws.size());
  for (const auto& d : draws) {
    Labels z;
    z.reserve(d.t_labels.at(j).size());
    for (int t : d.t_labels[j]) z.push_back(d.k_table[j][static_cast<std::size_t>(t)]);
    seqs.push_back(std::move(z));
  }
  return least_squares_clustering(seqs);
}

/// Posterior-mean density of group j's one-dimensional shared variable:
/// average over draws of sum_t pi_jt N(y | phi_{k_jt}).
inline std::vector<double> posterior_density_grid(std::span<const Draw> draws, std::size_t j,
                                                  std::span<const double> grid) {
  if (draws.empty()) throw std::invalid_argument("no retained draws");
  std::vector<double> out(grid.size(), 0.0);
  for (const auto& d : draws) {
    if (!d.has_parameters()) throw std::invalid_argument("weights and atoms were not retained");
    const auto& pi = d.pi.at(j);
    for (std::size_t t = 0; t < pi.size(); ++t) {
      const Atom& a = d.phi.at(static_cast<std::size_t>(d.k_table[j][t]));
      if (a.mean.size() != 1) throw std::invalid_argument("density grid requires one-dimensional shared data");
      const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * a.var);
      for (std::size_t h = 0; h < grid.size(); ++h) {
        const double r = grid[h] - a.mean[0];
        out[h] += pi[t] * norm * std::exp(-0.5 * r * r / a.var);
      }
    }
  }
  for (double& v : out) v /= static_cast<double>(draws.size());
  return out;
}

/// `count` equidistant points covering [lo, hi].
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  for (std::size_t h = 0; h < count; ++h)
    g[h] = lo + (hi - lo) * static_cast<double>(h) / static_cast<double>(count - 1);
  return g;
}

}  // namespace glocal

#endif  // GLOCAL_SUMMARIES_HPP
