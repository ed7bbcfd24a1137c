#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "glocal/diagnostics.hpp"
#include "glocal/random.hpp"

using namespace glocal;

namespace {

std::vector<double> ar1(double rho, std::size_t n, unsigned seed) {
  RngStream rng(seed);
  std::vector<double> x(n);
  double v = sample_standard_normal(rng) / std::sqrt(1 - rho * rho);
  for (auto& e : x) {
    v = rho * v + sample_standard_normal(rng);
    e = v;
  }
  return x;
}

std::vector<double> white(std::size_t n, unsigned seed, double shift = 0.0) {
  RngStream rng(seed);
  std::vector<double> x(n);
  for (auto& e : x) e = shift + sample_standard_normal(rng);
  return x;
}

// Pair-count ARI evaluated from a dense contingency table.
double ari_oracle(const std::vector<int>& a, const std::vector<int>& b, int ka, int kb) {
  std::vector<std::vector<double>> n(ka, std::vector<double>(kb, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) n[a[i]][b[i]] += 1;
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double idx = 0, ra = 0, cb = 0;
  for (int i = 0; i < ka; ++i) {
    double r = 0;
    for (int j = 0; j < kb; ++j) {
      idx += c2(n[i][j]);
      r += n[i][j];
    }
    ra += c2(r);
  }
  for (int j = 0; j < kb; ++j) {
    double c = 0;
    for (int i = 0; i < ka; ++i) c += n[i][j];
    cb += c2(c);
  }
  const double e = ra * cb / c2(static_cast<double>(a.size()));
  return (idx - e) / (0.5 * (ra + cb) - e);
}

}  // namespace

TEST(Ari, Examples) {
  const std::vector<int> a{1, 1, 2, 2}, b{2, 2, 1, 1}, c{1, 2, 1, 2};
  EXPECT_EQ(adjusted_rand_index(a, a), 1.0);
  EXPECT_EQ(adjusted_rand_index(a, b), 1.0);
  EXPECT_EQ(adjusted_rand_index(a, c), -0.5);
  const std::vector<int> short1{1};
  EXPECT_THROW(adjusted_rand_index(short1, short1), std::invalid_argument);
  EXPECT_THROW(adjusted_rand_index(a, std::vector<int>{1, 2}), std::invalid_argument);
}

TEST(Ari, SymmetryRelabellingAndOracle) {
  RngStream rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> a(40), b(40);
    for (auto& v : a) v = static_cast<int>(rng() % 4);
    for (auto& v : b) v = static_cast<int>(rng() % 5);
    const double ab = adjusted_rand_index(a, b);
    ASSERT_NEAR(ab, adjusted_rand_index(b, a), 1e-14);
    ASSERT_NEAR(ab, ari_oracle(a, b, 4, 5), 1e-12);
    auto relabelled = a;
    for (auto& v : relabelled) v = 7 * (3 - v) + 1;
    ASSERT_NEAR(ab, adjusted_rand_index(relabelled, b), 1e-14);
    ASSERT_GE(ab, -1.0);
    ASSERT_LE(ab, 1.0);
  }
}

TEST(Autocorrelation, LagZeroWhiteNoiseAndAr1) {
  const auto w = white(100000, 2);
  const auto aw = autocorrelation(w, 5);
  EXPECT_EQ(aw[0], 1.0);
  EXPECT_LT(std::abs(aw[1]), 0.02);
  const auto x = ar1(0.9, 100000, 3);
  EXPECT_NEAR(autocorrelation(x, 2)[1], 0.9, 0.02);
  const std::vector<double> flat(20, 1.5);
  EXPECT_THROW(autocorrelation(flat, 3), std::invalid_argument);
  EXPECT_THROW(autocorrelation(x, x.size()), std::invalid_argument);
}

TEST(Ess, WhiteNoiseAndAr1) {
  const auto w = white(10000, 4);
  const double ew = effective_sample_size(w);
  EXPECT_NEAR(ew, 10000.0, 1000.0);
  EXPECT_LE(ew, 10000.0);
  const auto x = ar1(0.9, 100000, 5);
  const double target = 100000.0 / 19.0;
  EXPECT_NEAR(effective_sample_size(x), target, 0.15 * target);
  const std::vector<double> flat(20, 1.5);
  EXPECT_THROW(effective_sample_size(flat), std::invalid_argument);
}

TEST(Ess, AlternatingSeriesClampedToLength) {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? 1.0 : -1.0;
  const double e = effective_sample_size(x);
  EXPECT_GT(e, 0.0);
  EXPECT_LE(e, 1000.0);
}

TEST(GelmanRubin, SameAndShiftedChains) {
  const std::vector<std::vector<double>> same{white(10000, 6), white(10000, 7), white(10000, 8)};
  EXPECT_LT(gelman_rubin(same), 1.01);
  const std::vector<std::vector<double>> shifted{white(10000, 6), white(10000, 7), white(10000, 8, 5.0)};
  const double r = gelman_rubin(shifted);
  EXPECT_GT(r, 1.1);
  // Variance decomposition by hand: means about (0, 0, 5), within variance about 1.
  EXPECT_NEAR(r * r, ((10000.0 - 1) / 10000.0 + 25.0 / 3.0) / 1.0, 0.3);
  const std::vector<std::vector<double>> one{white(100, 9)};
  EXPECT_THROW(gelman_rubin(one), std::invalid_argument);
  const std::vector<std::vector<double>> flat{std::vector<double>(20, 1.0), std::vector<double>(20, 1.0)};
  EXPECT_THROW(gelman_rubin(flat), std::invalid_argument);
}

TEST(Invariance, EssAndRhatUnderAffineMaps) {
  const auto x = ar1(0.5, 5000, 10);
  auto y = x;
  for (auto& v : y) v = 3.5 * v - 12.0;
  EXPECT_NEAR(effective_sample_size(x), effective_sample_size(y), 1e-6 * effective_sample_size(x));
  std::vector<std::vector<double>> c{ar1(0.5, 2000, 11), ar1(0.5, 2000, 12), ar1(0.5, 2000, 13)};
  const double r = gelman_rubin(c);
  for (auto& s : c)
    for (auto& v : s) v = -0.25 * v + 7.0;
  EXPECT_NEAR(r, gelman_rubin(c), 1e-9);
}

namespace {
double pdf(double x, double m) { return std::exp(-0.5 * (x - m) * (x - m)) / std::sqrt(2 * std::numbers::pi); }
}  // namespace

TEST(Mise, IdentityAndShiftedNormal) {
  std::vector<double> grid(100), a(100), b(100);
  for (int i = 0; i < 100; ++i) {
    grid[i] = -6.0 + 12.0 * i / 99.0;
    a[i] = pdf(grid[i], 0.0);
    b[i] = pdf(grid[i], 0.1);
  }
  EXPECT_EQ(mise(a, a, grid), 0.0);
  // Composite Simpson on a fine grid as the independent quadrature.
  const int n = 200000;
  const double h = 12.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -6.0 + i * h;
    const double d = pdf(x, 0.0) - pdf(x, 0.1);
    s += (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2)) * d * d;
  }
  s *= h / 3;
  const double m = mise(b, a, grid);
  EXPECT_NEAR(m, s, 1e-6);
  const double closed = 2.0 / (2.0 * std::sqrt(std::numbers::pi)) * (1.0 - std::exp(-0.01 / 4.0));
  EXPECT_NEAR(m, closed, 1e-6);
  EXPECT_GT(m, 0.0);
}

TEST(Mise, RejectsBadInput) {
  const std::vector<double> g{0.0, 1.0, 3.0}, v{1.0, 1.0, 1.0};
  EXPECT_THROW(mise(v, v, g), std::invalid_argument);
  const std::vector<double> g2{0.0, 1.0};
  EXPECT_THROW(mise(v, v, g2), std::invalid_argument);
}
