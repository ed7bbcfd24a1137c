#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "glocal/diagnostics.hpp"
#include "glocal/random.hpp"
#include "glocal/summaries.hpp"

using namespace glocal;

namespace {

const std::vector<Labels> kThree{{1, 1, 2, 2}, {1, 1, 1, 2}, {1, 2, 1, 2}};

// Sum over all ordered pairs including the diagonal, written independently.
double brute_loss(const Labels& z, const std::vector<Labels>& seqs) {
  const std::size_t n = z.size();
  double loss = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double p = 0.0;
      for (const auto& s : seqs) p += s[a] == s[b];
      p /= static_cast<double>(seqs.size());
      const double d = (z[a] == z[b]) - p;
      loss += d * d;
    }
  return loss / 2.0;
}

Draw make_draw(std::vector<std::vector<int>> t, std::vector<std::vector<int>> k) {
  Draw d;
  d.t_labels = std::move(t);
  d.k_table = std::move(k);
  return d;
}

std::vector<Draw> random_draws(std::size_t M, std::size_t L, std::size_t T, unsigned seed) {
  RngStream rng(seed);
  std::vector<Draw> out;
  const std::vector<std::size_t> sizes{7, 5, 6};
  for (std::size_t m = 0; m < M; ++m) {
    Draw d;
    for (std::size_t n : sizes) {
      std::vector<int> t(n), k(T);
      for (int& v : t) v = static_cast<int>(rng() % T);
      for (int& v : k) v = static_cast<int>(rng() % L);
      d.t_labels.push_back(t);
      d.k_table.push_back(k);
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace

TEST(DeriveGlobalLabels, Composition) {
  EXPECT_EQ(derive_global_labels({{0, 1}}, {{3, 5}}), (Labels{3, 5}));
  EXPECT_EQ(derive_global_labels({{0, 0, 0}}, {{7, 1}}), (Labels{7, 7, 7}));
  const auto z = derive_global_labels({{0, 1}, {1, 0}}, {{2, 4}, {4, 2}});
  EXPECT_EQ(z, (Labels{2, 4, 2, 4}));
}

TEST(Coclustering, HandEnumeratedExample) {
  const auto pm = coclustering_matrix(kThree);
  EXPECT_DOUBLE_EQ(pm(0, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(pm(0, 2), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(pm(0, 3), 0.0);
  EXPECT_DOUBLE_EQ(pm(1, 2), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(pm(1, 3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(pm(2, 3), 1.0 / 3.0);
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_EQ(pm(a, a), 1.0);
    for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(pm(a, b), pm(b, a));
  }
}

TEST(Coclustering, SingleDrawAndRelabelling) {
  const std::vector<Labels> one{{4, 4, 9}};
  const auto pm = coclustering_matrix(one);
  EXPECT_EQ(pm(0, 1), 1.0);
  EXPECT_EQ(pm(0, 2), 0.0);
  auto relabelled = kThree;
  for (int& v : relabelled[1]) v = 10 - v;
  EXPECT_EQ(coclustering_matrix(relabelled).values, coclustering_matrix(kThree).values);
  const std::vector<Labels> bad{{1, 2}, {1}};
  EXPECT_THROW(coclustering_matrix(bad), std::invalid_argument);
}

TEST(LeastSquares, ThreeDrawExample) {
  const auto r = least_squares_clustering(kThree);
  EXPECT_EQ(r.index, 1u);
  EXPECT_EQ(r.labels, (Labels{1, 1, 1, 2}));
  ASSERT_EQ(r.losses.size(), 3u);
  EXPECT_NEAR(r.losses[0], 11.0 / 9.0, 1e-12);
  EXPECT_NEAR(r.losses[1], 8.0 / 9.0, 1e-12);
  EXPECT_NEAR(r.losses[2], 11.0 / 9.0, 1e-12);
  for (std::size_t b = 0; b < 3; ++b) EXPECT_NEAR(r.losses[b], brute_loss(kThree[b], kThree), 1e-12);
}

TEST(LeastSquares, DegenerateInputs) {
  const std::vector<Labels> one{{3, 1, 3}};
  const auto r1 = least_squares_clustering(one);
  EXPECT_EQ(r1.index, 0u);
  EXPECT_EQ(r1.loss, 0.0);
  const std::vector<Labels> same(5, Labels{1, 2, 2});
  const auto r2 = least_squares_clustering(same);
  EXPECT_EQ(r2.index, 0u);
  EXPECT_EQ(r2.loss, 0.0);
}

TEST(LeastSquares, TiesGoToEarliestDraw) {
  const std::vector<Labels> seqs{{1, 2}, {1, 1}};
  EXPECT_EQ(least_squares_clustering(seqs).index, 0u);
}

TEST(LeastSquares, MatchesBruteForceOnRandomInput) {
  RngStream rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Labels> seqs(12, Labels(9));
    for (auto& z : seqs)
      for (int& v : z) v = static_cast<int>(rng() % 3);
    const auto r = least_squares_clustering(seqs);
    std::size_t best = 0;
    for (std::size_t b = 1; b < seqs.size(); ++b)
      if (brute_loss(seqs[b], seqs) < brute_loss(seqs[best], seqs) - 1e-12) best = b;
    ASSERT_EQ(r.index, best);
  }
}

TEST(LeastSquares, RelabellingWithinDrawsDoesNotChangeChoice) {
  RngStream rng(4);
  std::vector<Labels> seqs(15, Labels(10));
  for (auto& z : seqs)
    for (int& v : z) v = static_cast<int>(rng() % 4);
  auto permuted = seqs;
  for (std::size_t b = 0; b < permuted.size(); ++b)
    for (int& v : permuted[b]) v = (v + static_cast<int>(b)) % 4 + 100;
  EXPECT_EQ(least_squares_clustering(seqs).index, least_squares_clustering(permuted).index);
}

TEST(Summarize, ConstantLocalLabels) {
  std::vector<Draw> draws;
  for (int m = 0; m < 4; ++m) draws.push_back(make_draw({{0, 0, 0}}, {{m % 2, 1}}));
  const auto r = summarize(std::span<const Draw>(draws));
  EXPECT_EQ(r.n_local_clusters, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.local_labels[0], (Labels{0, 0, 0}));
  EXPECT_EQ(r.n_global_clusters, 1u);
}

TEST(Summarize, ChosenDrawIsConsistent) {
  const auto draws = random_draws(25, 3, 4, 5);
  const auto r = summarize(std::span<const Draw>(draws));
  EXPECT_EQ(r.global_labels, derive_global_labels(draws[r.chosen_draw_index]));
  EXPECT_EQ(r.n_global_clusters, count_distinct(r.global_labels));
  EXPECT_LE(r.n_global_clusters, 3u);
  for (std::size_t j = 0; j < r.local_labels.size(); ++j) {
    EXPECT_EQ(r.local_labels[j], draws[r.chosen_local_draw_index[j]].t_labels[j]);
    EXPECT_LE(r.n_local_clusters[j], 4u);
  }
  std::size_t offset = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    const auto g = r.group_global_labels(j);
    EXPECT_EQ(g, Labels(r.global_labels.begin() + offset, r.global_labels.begin() + offset + g.size()));
    offset += g.size();
  }
}

TEST(Summarize, GroupSubmatrixMatchesGroupCoclustering) {
  const auto draws = random_draws(30, 4, 4, 6);
  std::vector<Labels> all, group1;
  for (const auto& d : draws) {
    all.push_back(derive_global_labels(d));
    Labels z;
    for (int t : d.t_labels[1]) z.push_back(d.k_table[1][t]);
    group1.push_back(z);
  }
  const auto full = coclustering_matrix(all), sub = coclustering_matrix(group1);
  const std::size_t off = draws[0].t_labels[0].size();
  for (std::size_t a = 0; a < sub.n; ++a)
    for (std::size_t b = 0; b < sub.n; ++b) ASSERT_EQ(full(off + a, off + b), sub(a, b));
  EXPECT_EQ(group_global_clustering(std::span<const Draw>(draws), 1).labels,
            least_squares_clustering(group1).labels);
}

TEST(Summarize, RejectsEmptyOrRaggedDraws) {
  std::vector<Draw> none;
  EXPECT_THROW(summarize(std::span<const Draw>(none)), std::invalid_argument);
  std::vector<Draw> ragged{make_draw({{0, 0}}, {{0}}), make_draw({{0}}, {{0}})};
  EXPECT_THROW(summarize(std::span<const Draw>(ragged)), std::invalid_argument);
}

namespace {

Draw density_draw(std::vector<double> pi, std::vector<int> k, std::vector<Atom> phi) {
  Draw d;
  d.t_labels = {{0}};
  d.k_table = {std::move(k)};
  d.pi = {std::move(pi)};
  d.beta = std::vector<double>(phi.size(), 1.0 / static_cast<double>(phi.size()));
  d.phi = std::move(phi);
  return d;
}

double normal_pdf(double x, double m, double v) {
  return std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(2 * std::numbers::pi * v);
}

}  // namespace

TEST(DensityGrid, SingleGaussian) {
  const std::vector<Draw> draws{density_draw({1.0}, {0}, {Atom{{0.0}, 1.0}})};
  const std::vector<double> grid{0.0};
  EXPECT_NEAR(posterior_density_grid(draws, 0, grid)[0], 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
}

TEST(DensityGrid, IntegratesToOne) {
  const std::vector<Draw> draws{density_draw({0.3, 0.7}, {0, 1}, {Atom{{-1.0}, 0.5}, Atom{{2.0}, 2.0}})};
  const auto grid = linspace(-1.0 - 10 * std::sqrt(0.5), 2.0 + 10 * std::sqrt(2.0), 2000);
  const auto dens = posterior_density_grid(draws, 0, grid);
  double s = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) s += 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
  EXPECT_NEAR(s, 1.0, 1e-3);
}

TEST(DensityGrid, AveragesDrawsLinearly) {
  const std::vector<Draw> draws{density_draw({0.3, 0.7}, {0, 1}, {Atom{{-1.0}, 0.5}, Atom{{2.0}, 2.0}}),
                                density_draw({1.0, 0.0}, {1, 0}, {Atom{{0.0}, 1.0}, Atom{{3.0}, 0.2}})};
  const auto grid = linspace(-3.0, 5.0, 17);
  const auto dens = posterior_density_grid(draws, 0, grid);
  for (std::size_t h = 0; h < grid.size(); ++h) {
    const double d1 = 0.3 * normal_pdf(grid[h], -1.0, 0.5) + 0.7 * normal_pdf(grid[h], 2.0, 2.0);
    const double d2 = normal_pdf(grid[h], 3.0, 0.2);
    EXPECT_NEAR(dens[h], 0.5 * (d1 + d2), 1e-14);
  }
}

TEST(DensityGrid, RequiresRetainedParameters) {
  const std::vector<Draw> draws{make_draw({{0}}, {{0}})};
  const std::vector<double> grid{0.0};
  EXPECT_THROW(posterior_density_grid(draws, 0, grid), std::invalid_argument);
  const auto g = linspace(-1.0, 1.0, 5);
  EXPECT_EQ(g, (std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
}
