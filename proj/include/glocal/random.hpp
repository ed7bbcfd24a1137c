#ifndef GLOCAL_RANDOM_HPP
#define GLOCAL_RANDOM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace glocal {

/// A seeded 64-bit Mersenne Twister owned by exactly one chain. The engine
/// state is derived from (seed, stream_id) through std::seed_seq, so equal
/// pairs give bit-identical sequences and distinct stream ids give unrelated
/// streams.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x676c6f63u};
    engine_.seed(seq);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// Uniform on the open interval (0, 1).
template <class Rng>
double sample_uniform_open(Rng& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0) return u;
  }
}

template <class Rng>
double sample_standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

/// log of a Gamma(shape, rate) draw. Shapes below one use the
/// G(a) = G(a + 1) * U^(1/a) identity in log space so tiny shapes do not
/// underflow.
template <class Rng>
double sample_log_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma parameters must be positive");
  if (shape >= 1.0) {
    const double g = std::gamma_distribution<double>(shape, 1.0)(rng);
    return std::log(g) - std::log(rate);
  }
  const double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(rng);
  return std::log(g) + std::log(sample_uniform_open(rng)) / shape - std::log(rate);
}

/// Gamma draw in the shape-rate parameterisation (mean shape / rate).
template <class Rng>
double sample_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma parameters must be positive");
  if (shape >= 1.0) return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
  return std::exp(sample_log_gamma(shape, rate, rng));
}

/// Reciprocal of a Gamma(shape, rate) draw.
template <class Rng>
double sample_inverse_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::invalid_argument("inverse-gamma parameters must be positive");
  return std::exp(-sample_log_gamma(shape, rate, rng));
}

/// Dirichlet draw via normalised gamma variates, normalised in log space.
template <class Rng>
std::vector<double> sample_dirichlet(std::span<const double> params, Rng& rng) {
  if (params.empty()) throw std::invalid_argument("Dirichlet needs at least one parameter");
  std::vector<double> out(params.size());
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params[i] > 0.0)) throw std::invalid_argument("Dirichlet parameters must be positive");
    out[i] = sample_log_gamma(params[i], 1.0, rng);
    hi = std::max(hi, out[i]);
  }
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - hi);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

/// Elementwise natural log; zero probabilities map to -infinity.
inline std::vector<double> log_of(std::span<const double> p) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log(p[i]);
  return out;
}

/// Draws index k with probability proportional to exp(weights[k]). The
/// buffer is overwritten with unnormalised probabilities.
template <class Rng>
std::size_t sample_categorical_inplace(std::span<double> weights, Rng& rng) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double w : weights) hi = std::max(hi, w);
  if (!(hi > -std::numeric_limits<double>::infinity()))
    throw std::domain_error("categorical weights are all -infinity");
  double total = 0.0;
  for (double& w : weights) {
    w = std::exp(w - hi);
    total += w;
  }
  const double u = std::generate_canonical<double, 53>(rng) * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

template <class Rng>
std::size_t sample_categorical(std::span<const double> log_weights, Rng& rng) {
  std::vector<double> buf(log_weights.begin(), log_weights.end());
  return sample_categorical_inplace(std::span<double>(buf), rng);
}

/// Each coordinate independently N(mean_i, var).
template <class Rng>
std::vector<double> sample_gaussian_iso(std::span<const double> mean, double var, Rng& rng) {
  if (!(var > 0.0)) throw std::invalid_argument("Gaussian variance must be positive");
  const double sd = std::sqrt(var);
  std::vector<double> out(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) out[i] = mean[i] + sd * sample_standard_normal(rng);
  return out;
}

}  // namespace glocal

#endif  // GLOCAL_RANDOM_HPP
