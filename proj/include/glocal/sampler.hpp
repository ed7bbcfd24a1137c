#ifndef GLOCAL_SAMPLER_HPP
#define GLOCAL_SAMPLER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "glocal/model.hpp"
#include "glocal/random.hpp"

namespace glocal {

// ---------------------------------------------------------------------------
// Conjugate normal-inverse-gamma updates
// ---------------------------------------------------------------------------

/// Sufficient statistics of a set of rows: count, coordinate-wise sum and the
/// sum of squared norms.
struct SuffStats {
  std::size_t count = 0;
  std::vector<double> sum;
  double sumsq = 0.0;

  explicit SuffStats(std::size_t dim = 0) : sum(dim, 0.0) {}

  void add(std::span<const double> x) {
    if (x.size() != sum.size()) throw std::invalid_argument("dimension mismatch among rows");
    ++count;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum[i] += x[i];
      sumsq += x[i] * x[i];
    }
  }
  void clear() {
    count = 0;
    std::fill(sum.begin(), sum.end(), 0.0);
    sumsq = 0.0;
  }
};

struct NIGPosterior {
  std::vector<double> mean;
  double precision = 1.0;
  double shape = 1.0;
  double rate = 1.0;
};

/// Posterior of (mean, sigma^2) under a NIG prior given pooled rows:
///   precision_n = precision_0 + n
///   mean_n      = (precision_0 m0 + s) / precision_n
///   shape_n     = shape_0 + n p / 2
///   rate_n      = rate_0 + (within-row scatter + precision_0 n / precision_n |xbar - m0|^2) / 2
inline NIGPosterior nig_posterior(const SuffStats& stats, const NIGPrior& prior) {
  const std::size_t p = stats.sum.size();
  if (p == 0) throw std::invalid_argument("NIG posterior needs dimension >= 1");
  NIGPosterior post;
  post.mean.resize(p);
  const double n = static_cast<double>(stats.count);
  post.precision = prior.precision + n;
  post.shape = prior.shape + 0.5 * n * static_cast<double>(p);
  if (stats.count == 0) {
    for (std::size_t i = 0; i < p; ++i) post.mean[i] = prior.mean_at(i);
    post.rate = prior.rate;
    return post;
  }
  double centred_sq = 0.0, shift_sq = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double m0 = prior.mean_at(i);
    const double xbar = stats.sum[i] / n;
    post.mean[i] = (prior.precision * m0 + stats.sum[i]) / post.precision;
    sum_sq += stats.sum[i] * xbar;
    shift_sq += (xbar - m0) * (xbar - m0);
  }
  centred_sq = std::max(0.0, stats.sumsq - sum_sq);
  post.rate = prior.rate + 0.5 * (centred_sq + prior.precision * n / post.precision * shift_sq);
  return post;
}

inline NIGPosterior nig_posterior(std::span<const std::vector<double>> rows, std::size_t dim,
                                  const NIGPrior& prior) {
  SuffStats stats(dim);
  for (const auto& r : rows) stats.add(r);
  return nig_posterior(stats, prior);
}

/// sigma^2 ~ IG(shape, rate), then mean ~ N(mean_n, sigma^2 / precision_n I).
template <class Rng>
Atom sample_nig(const NIGPosterior& post, Rng& rng) {
  Atom a;
  a.var = sample_inverse_gamma(post.shape, post.rate, rng);
  a.mean = sample_gaussian_iso(post.mean, a.var / post.precision, rng);
  return a;
}

template <class Rng>
Atom sample_nig_prior(const NIGPrior& prior, std::size_t dim, Rng& rng) {
  return sample_nig(nig_posterior(SuffStats(dim), prior), rng);
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

/// m_jt: number of rows of one group carrying local label t.
inline std::vector<int> count_local(std::span<const int> t_labels, std::size_t T) {
  std::vector<int> m(T, 0);
  for (int t : t_labels) {
    if (t < 0 || static_cast<std::size_t>(t) >= T) throw std::out_of_range("local label out of range");
    ++m[static_cast<std::size_t>(t)];
  }
  return m;
}

/// d_k: number of tables (j, t) pointing at global component k.
inline std::vector<int> count_global(const std::vector<std::vector<int>>& k_table, std::size_t L) {
  std::vector<int> d(L, 0);
  for (const auto& row : k_table)
    for (int k : row) {
      if (k < 0 || static_cast<std::size_t>(k) >= L) throw std::out_of_range("global label out of range");
      ++d[static_cast<std::size_t>(k)];
    }
  return d;
}

inline std::vector<double> group_weight_params(std::span<const int> m, double alpha) {
  const double base = alpha / static_cast<double>(m.size());
  std::vector<double> a(m.size());
  for (std::size_t t = 0; t < m.size(); ++t) a[t] = m[t] + base;
  return a;
}

/// pi_j | - ~ Dir(m_j1 + alpha/T, ..., m_jT + alpha/T).
template <class Rng>
std::vector<double> update_group_weights(std::span<const int> m, double alpha, std::size_t T, Rng& rng) {
  if (m.size() != T) throw std::invalid_argument("count vector length must equal T");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const auto params = group_weight_params(m, alpha);
  return sample_dirichlet(params, rng);
}

/// beta | - ~ Dir(d_1 + gamma/L, ..., d_L + gamma/L); the counts must cover
/// every table exactly once.
template <class Rng>
std::vector<double> update_global_weights(std::span<const int> d, double gamma, std::size_t n_tables,
                                          Rng& rng) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  long total = 0;
  for (int v : d) total += v;
  if (total != static_cast<long>(n_tables))
    throw std::invalid_argument("global counts sum to " + std::to_string(total) + ", expected " +
                                std::to_string(n_tables));
  const auto params = group_weight_params(d, gamma);
  return sample_dirichlet(params, rng);
}

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

inline std::vector<SuffStats> global_component_stats(const SamplerState& s, const GroupedDataset& data) {
  std::vector<SuffStats> stats(s.phi.size(), SuffStats(data.global_dim));
  for (std::size_t j = 0; j < data.num_groups(); ++j) {
    const auto& g = data.groups[j];
    for (std::size_t i = 0; i < g.size(); ++i)
      stats[static_cast<std::size_t>(s.k_table[j][s.t_labels[j][i]])].add(g.global_row(i));
  }
  return stats;
}

/// Conjugate posterior of each global atom given the rows whose derived
/// global label k_{j t_ji} equals k.
inline std::vector<NIGPosterior> global_atom_posteriors(const SamplerState& s, const GroupedDataset& data,
                                                        const NIGPrior& prior) {
  const auto stats = global_component_stats(s, data);
  std::vector<NIGPosterior> out;
  out.reserve(stats.size());
  for (const auto& st : stats) out.push_back(nig_posterior(st, prior));
  return out;
}

template <class Rng>
void update_global_atoms(SamplerState& s, const GroupedDataset& data, const NIGPrior& prior, Rng& rng) {
  const auto posts = global_atom_posteriors(s, data, prior);
  for (std::size_t k = 0; k < posts.size(); ++k) s.phi[k] = sample_nig(posts[k], rng);
}

/// Per group, the conjugate posterior of each local atom; empty for groups
/// without local variables.
inline std::vector<std::vector<NIGPosterior>> local_atom_posteriors(const SamplerState& s,
                                                                    const GroupedDataset& data,
                                                                    const NIGPrior& prior,
                                                                    std::size_t T) {
  std::vector<std::vector<NIGPosterior>> out(data.num_groups());
  for (std::size_t j = 0; j < data.num_groups(); ++j) {
    const auto& g = data.groups[j];
    if (g.local_dim == 0) continue;
    std::vector<SuffStats> stats(T, SuffStats(g.local_dim));
    for (std::size_t i = 0; i < g.size(); ++i) stats[static_cast<std::size_t>(s.t_labels[j][i])].add(g.local_row(i));
    out[j].reserve(T);
    for (const auto& st : stats) out[j].push_back(nig_posterior(st, prior));
  }
  return out;
}

template <class Rng>
void update_local_atoms(SamplerState& s, const GroupedDataset& data, const NIGPrior& prior, Rng& rng) {
  const std::size_t T = s.pi.empty() ? 0 : s.pi[0].size();
  const auto posts = local_atom_posteriors(s, data, prior, T);
  s.psi.resize(data.num_groups());
  for (std::size_t j = 0; j < data.num_groups(); ++j) {
    if (data.groups[j].local_dim == 0) {
      s.psi[j].clear();
      continue;
    }
    s.psi[j].resize(T);
    for (std::size_t t = 0; t < T; ++t) s.psi[j][t] = sample_nig(posts[j][t], rng);
  }
}

// ---------------------------------------------------------------------------
// Indicators
// ---------------------------------------------------------------------------

namespace detail {

// Per-atom constants of log N(x | mu, var I): -p/2 log(2 pi var) and 1/(2 var).
struct GaussConst {
  double log_norm;
  double half_prec;
};

inline GaussConst gauss_const(const Atom& a, std::size_t dim) {
  return {-0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * a.var), 0.5 / a.var};
}

inline double gauss_eval(std::span<const double> x, const Atom& a, const GaussConst& c) {
  double ss = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double r = x[d] - a.mean[d];
    ss += r * r;
  }
  return c.log_norm - c.half_prec * ss;
}

// sum_i log N(x_i | mu, var I) over a table, from its sufficient statistics.
inline double gauss_table(const SuffStats& st, const Atom& a, const GaussConst& c) {
  if (st.count == 0) return 0.0;
  double cross = 0.0, mu2 = 0.0;
  for (std::size_t d = 0; d < st.sum.size(); ++d) {
    cross += a.mean[d] * st.sum[d];
    mu2 += a.mean[d] * a.mean[d];
  }
  const double n = static_cast<double>(st.count);
  const double ss = std::max(0.0, st.sumsq - 2.0 * cross + n * mu2);
  return n * c.log_norm - c.half_prec * ss;
}

}  // namespace detail

/// Unnormalised log Pr(t_ji = t | -) = log pi_jt + log f1 + log f2(x | phi_{k_jt}).
inline std::vector<double> local_indicator_log_weights(const SamplerState& s, const GroupedDataset& data,
                                                       std::size_t j, std::size_t i) {
  const auto& g = data.groups[j];
  const std::size_t T = s.pi[j].size();
  std::vector<double> w(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& phi = s.phi[static_cast<std::size_t>(s.k_table[j][t])];
    w[t] = safe_log_prob(s.pi[j][t]) + log_density_global(g.global_row(i), phi);
    if (g.local_dim > 0) w[t] += log_density_local(g.local_row(i), s.psi[j][t], g.local_dim);
  }
  return w;
}

/// Resamples every t_ji from its full conditional. Rows are visited in
/// storage order and each consumes exactly one categorical draw.
template <class Rng>
void update_local_indicators(SamplerState& s, const GroupedDataset& data, Rng& rng) {
  const std::size_t L = s.phi.size();
  std::vector<detail::GaussConst> gc(L);
  for (std::size_t k = 0; k < L; ++k) gc[k] = detail::gauss_const(s.phi[k], data.global_dim);
  std::vector<double> global_ll(L), w, local_const_norm;
  std::vector<detail::GaussConst> lc;
  for (std::size_t j = 0; j < data.num_groups(); ++j) {
    const auto& g = data.groups[j];
    const std::size_t T = s.pi[j].size();
    const auto& kt = s.k_table[j];
    std::vector<double> log_pi(T);
    for (std::size_t t = 0; t < T; ++t) log_pi[t] = safe_log_prob(s.pi[j][t]);
    const bool has_local = g.local_dim > 0;
    if (has_local) {
      lc.resize(T);
      for (std::size_t t = 0; t < T; ++t) lc[t] = detail::gauss_const(s.psi[j][t], g.local_dim);
    }
    w.resize(T);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto xg = g.global_row(i);
      for (std::size_t k = 0; k < L; ++k) global_ll[k] = detail::gauss_eval(xg, s.phi[k], gc[k]);
      for (std::size_t t = 0; t < T; ++t) w[t] = log_pi[t] + global_ll[static_cast<std::size_t>(kt[t])];
      if (has_local) {
        const auto xl = g.local_row(i);
        for (std::size_t t = 0; t < T; ++t) w[t] += detail::gauss_eval(xl, s.psi[j][t], lc[t]);
      }
      s.t_labels[j][i] = static_cast<int>(sample_categorical_inplace(std::span<double>(w), rng));
    }
  }
}

inline std::vector<SuffStats> table_stats(const SamplerState& s, const GroupedDataset& data, std::size_t j) {
  const auto& g = data.groups[j];
  std::vector<SuffStats> stats(s.pi[j].size(), SuffStats(data.global_dim));
  for (std::size_t i = 0; i < g.size(); ++i) stats[static_cast<std::size_t>(s.t_labels[j][i])].add(g.global_row(i));
  return stats;
}

/// Unnormalised log Pr(k_jt = k | -) = log beta_k + sum_{i: t_ji = t} log f2(x_ji | phi_k).
inline std::vector<double> global_indicator_log_weights(const SamplerState& s, const GroupedDataset& data,
                                                        std::size_t j, std::size_t t) {
  const auto stats = table_stats(s, data, j);
  const std::size_t L = s.phi.size();
  std::vector<double> w(L);
  for (std::size_t k = 0; k < L; ++k)
    w[k] = safe_log_prob(s.beta[k]) +
           detail::gauss_table(stats[t], s.phi[k], detail::gauss_const(s.phi[k], data.global_dim));
  return w;
}

/// Resamples every k_jt; a table with no rows draws from beta alone.
template <class Rng>
void update_global_indicators(SamplerState& s, const GroupedDataset& data, Rng& rng) {
  const std::size_t L = s.phi.size();
  std::vector<detail::GaussConst> gc(L);
  std::vector<double> log_beta(L), w(L);
  for (std::size_t k = 0; k < L; ++k) {
    gc[k] = detail::gauss_const(s.phi[k], data.global_dim);
    log_beta[k] = safe_log_prob(s.beta[k]);
  }
  for (std::size_t j = 0; j < data.num_groups(); ++j) {
    const auto stats = table_stats(s, data, j);
    for (std::size_t t = 0; t < stats.size(); ++t) {
      for (std::size_t k = 0; k < L; ++k) w[k] = log_beta[k] + detail::gauss_table(stats[t], s.phi[k], gc[k]);
      s.k_table[j][t] = static_cast<int>(sample_categorical_inplace(std::span<double>(w), rng));
    }
  }
}

// ---------------------------------------------------------------------------
// Concentrations (independence Metropolis-Hastings, proposal = prior)
// ---------------------------------------------------------------------------

struct MHResult {
  double value;
  bool accepted;
};

/// log of J log Gamma(alpha) - J T log Gamma(alpha/T) + (alpha/T - 1) sum log pi_jt + log p(alpha).
inline double log_alpha_target(double alpha, const std::vector<std::vector<double>>& pi, double shape,
                               double rate) {
  if (!(alpha > 0.0)) return -std::numeric_limits<double>::infinity();
  double sum_log = 0.0;
  std::size_t T = 0;
  for (const auto& row : pi) {
    T = row.size();
    for (double p : row) sum_log += safe_log_prob(p);
  }
  const double J = static_cast<double>(pi.size());
  const double Td = static_cast<double>(T);
  return J * std::lgamma(alpha) - J * Td * std::lgamma(alpha / Td) + (alpha / Td - 1.0) * sum_log +
         log_gamma_density(alpha, shape, rate);
}

/// log Gamma(gamma) - L log Gamma(gamma/L) + (gamma/L - 1) sum log beta_k + log p(gamma).
inline double log_gamma_target(double gamma, std::span<const double> beta, double shape, double rate) {
  if (!(gamma > 0.0)) return -std::numeric_limits<double>::infinity();
  double sum_log = 0.0;
  for (double b : beta) sum_log += safe_log_prob(b);
  const double L = static_cast<double>(beta.size());
  return std::lgamma(gamma) - L * std::lgamma(gamma / L) + (gamma / L - 1.0) * sum_log +
         log_gamma_density(gamma, shape, rate);
}

/// log of g(new) q(old) / (g(old) q(new)) for the alpha update.
inline double alpha_log_acceptance(const std::vector<std::vector<double>>& pi, double current, double proposed,
                                   const Hyperparams& h) {
  if (!(proposed > 0.0) || !std::isfinite(proposed)) return -std::numeric_limits<double>::infinity();
  return (log_alpha_target(proposed, pi, h.alpha_shape, h.alpha_rate) - log_alpha_target(current, pi, h.alpha_shape, h.alpha_rate)) +
         (log_gamma_density(current, h.alpha_shape, h.alpha_rate) - log_gamma_density(proposed, h.alpha_shape, h.alpha_rate));
}

inline double gamma_log_acceptance(std::span<const double> beta, double current, double proposed,
                                   const Hyperparams& h) {
  if (!(proposed > 0.0) || !std::isfinite(proposed)) return -std::numeric_limits<double>::infinity();
  return (log_gamma_target(proposed, beta, h.gamma_shape, h.gamma_rate) - log_gamma_target(current, beta, h.gamma_shape, h.gamma_rate)) +
         (log_gamma_density(current, h.gamma_shape, h.gamma_rate) - log_gamma_density(proposed, h.gamma_shape, h.gamma_rate));
}

namespace detail {
template <class Rng>
MHResult mh_accept(double current, double proposed, double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) throw std::domain_error("non-finite concentration target");
  // One uniform is always consumed so the stream position does not depend on the outcome.
  const double u = sample_uniform_open(rng);
  if (log_ratio >= 0.0 || std::log(u) < log_ratio) return {proposed, true};
  return {current, false};
}
}  // namespace detail

template <class Rng>
MHResult update_alpha(const SamplerState& s, const Hyperparams& h, Rng& rng) {
  const double proposed = sample_gamma(h.alpha_shape, h.alpha_rate, rng);
  const double ratio = alpha_log_acceptance(s.pi, s.alpha, proposed, h);
  if (!std::isfinite(log_alpha_target(s.alpha, s.pi, h.alpha_shape, h.alpha_rate)))
    throw std::domain_error("non-finite alpha target at current value");
  return detail::mh_accept(s.alpha, proposed, ratio, rng);
}

template <class Rng>
MHResult update_gamma(const SamplerState& s, const Hyperparams& h, Rng& rng) {
  const double proposed = sample_gamma(h.gamma_shape, h.gamma_rate, rng);
  const double ratio = gamma_log_acceptance(s.beta, s.gamma, proposed, h);
  if (!std::isfinite(log_gamma_target(s.gamma, s.beta, h.gamma_shape, h.gamma_rate)))
    throw std::domain_error("non-finite gamma target at current value");
  return detail::mh_accept(s.gamma, proposed, ratio, rng);
}

// ---------------------------------------------------------------------------
// Chain orchestration
// ---------------------------------------------------------------------------

enum class InitPolicy {
  prior,          // every latent quantity drawn from its prior, labels uniform
  single_cluster  // priors for weights/atoms, all labels at component 0
};

struct ChainConfig {
  std::size_t iterations = 20000;
  std::size_t burn_in = 5000;
  std::size_t thin = 15;
  std::size_t n_chains = 1;
  InitPolicy init_policy = InitPolicy::prior;
  bool retain_parameters = false;

  std::size_t retained_count() const { return iterations > burn_in ? (iterations - burn_in) / thin : 0; }

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("iterations must be positive");
    if (burn_in >= iterations) throw std::invalid_argument("burn-in must be smaller than iterations");
    if (thin < 1) throw std::invalid_argument("thin must be positive");
    if (n_chains < 1) throw std::invalid_argument("need at least one chain");
    if (retained_count() < 1) throw std::invalid_argument("configuration retains no samples");
  }
};

/// One retained sample. Weights and atoms are present only when the chain
/// was configured to retain them.
struct Draw {
  std::size_t iteration = 0;
  std::vector<std::vector<int>> t_labels;
  std::vector<std::vector<int>> k_table;
  double alpha = 0.0;
  double gamma = 0.0;
  double log_posterior = 0.0;
  std::vector<double> beta;
  std::vector<std::vector<double>> pi;
  std::vector<Atom> phi;
  std::vector<std::vector<Atom>> psi;

  bool has_parameters() const { return !beta.empty(); }
};

/// Per-iteration monitored scalars over the whole run (burn-in included).
struct ChainTrace {
  std::vector<double> log_posterior;
  std::vector<double> alpha;
  std::vector<double> gamma;
  std::vector<int> n_global_clusters;
  std::size_t alpha_accepted = 0;
  std::size_t gamma_accepted = 0;
};

struct PosteriorDraws {
  Mode mode = Mode::glocal;
  Truncation truncation;
  std::size_t chain_id = 0;
  std::vector<Draw> draws;
  ChainTrace trace;
};

/// Number of distinct derived global labels k_{j t_ji} over all rows.
inline std::size_t occupied_global(const std::vector<std::vector<int>>& t_labels,
                                   const std::vector<std::vector<int>>& k_table, std::size_t L) {
  std::vector<char> seen(L, 0);
  std::size_t n = 0;
  for (std::size_t j = 0; j < t_labels.size(); ++j)
    for (int t : t_labels[j]) {
      const auto k = static_cast<std::size_t>(k_table[j][t]);
      if (!seen[k]) {
        seen[k] = 1;
        ++n;
      }
    }
  return n;
}

template <class Rng>
SamplerState initialize_state(const GroupedDataset& data, const Hyperparams& h, const Truncation& trunc,
                              InitPolicy policy, Rng& rng) {
  const std::size_t J = data.num_groups(), L = trunc.global_components, T = trunc.local_components;
  SamplerState s;
  s.alpha = sample_gamma(h.alpha_shape, h.alpha_rate, rng);
  s.gamma = sample_gamma(h.gamma_shape, h.gamma_rate, rng);
  s.beta = sample_dirichlet(std::vector<double>(L, s.gamma / static_cast<double>(L)), rng);
  s.pi.resize(J);
  for (auto& p : s.pi) p = sample_dirichlet(std::vector<double>(T, s.alpha / static_cast<double>(T)), rng);
  s.phi.resize(L);
  for (auto& a : s.phi) a = sample_nig_prior(h.global_atoms, data.global_dim, rng);
  s.psi.assign(J, {});
  for (std::size_t j = 0; j < J; ++j) {
    const std::size_t p = data.groups[j].local_dim;
    if (p == 0) continue;
    s.psi[j].resize(T);
    for (auto& a : s.psi[j]) a = sample_nig_prior(h.local_atoms, p, rng);
  }
  s.t_labels.resize(J);
  s.k_table.resize(J);
  std::uniform_int_distribution<int> pick_t(0, static_cast<int>(T) - 1), pick_k(0, static_cast<int>(L) - 1);
  for (std::size_t j = 0; j < J; ++j) {
    s.t_labels[j].resize(data.groups[j].size());
    s.k_table[j].resize(T);
    for (int& t : s.t_labels[j]) t = policy == InitPolicy::prior ? pick_t(rng) : 0;
    for (int& k : s.k_table[j]) k = policy == InitPolicy::prior ? pick_k(rng) : 0;
  }
  return s;
}

struct SweepStats {
  bool alpha_accepted = false;
  bool gamma_accepted = false;
};

/// One full sweep in fixed order: group weights, global weights, global
/// atoms, local atoms, local indicators, global indicators, alpha, gamma.
template <class Rng>
SweepStats gibbs_sweep(SamplerState& s, const GroupedDataset& data, const Hyperparams& h,
                       const Truncation& trunc, Rng& rng) {
  const std::size_t J = data.num_groups(), L = trunc.global_components, T = trunc.local_components;
  for (std::size_t j = 0; j < J; ++j) {
    const auto m = count_local(s.t_labels[j], T);
    s.pi[j] = update_group_weights(m, s.alpha, T, rng);
  }
  const auto d = count_global(s.k_table, L);
  s.beta = update_global_weights(d, s.gamma, J * T, rng);
  update_global_atoms(s, data, h.global_atoms, rng);
  update_local_atoms(s, data, h.local_atoms, rng);
  update_local_indicators(s, data, rng);
  update_global_indicators(s, data, rng);
  SweepStats st;
  const auto a = update_alpha(s, h, rng);
  s.alpha = a.value;
  st.alpha_accepted = a.accepted;
  const auto g = update_gamma(s, h, rng);
  s.gamma = g.value;
  st.gamma_accepted = g.accepted;
  return st;
}

/// Runs one chain. In hdp mode local variables are dropped before sampling,
/// which removes the local likelihood and the local-atom updates.
template <class Rng>
PosteriorDraws run_chain(const GroupedDataset& input, const Hyperparams& h, const Truncation& trunc,
                         const ChainConfig& cfg, Mode mode, Rng& rng, std::size_t chain_id = 0) {
  validate_dataset(input);
  h.validate();
  trunc.validate();
  cfg.validate();
  const GroupedDataset stripped = mode == Mode::hdp ? strip_local(input) : GroupedDataset{};
  const GroupedDataset& data = mode == Mode::hdp ? stripped : input;

  PosteriorDraws out;
  out.mode = mode;
  out.truncation = trunc;
  out.chain_id = chain_id;
  out.draws.reserve(cfg.retained_count());
  auto& tr = out.trace;
  tr.log_posterior.reserve(cfg.iterations);
  tr.alpha.reserve(cfg.iterations);
  tr.gamma.reserve(cfg.iterations);
  tr.n_global_clusters.reserve(cfg.iterations);

  SamplerState s = initialize_state(data, h, trunc, cfg.init_policy, rng);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    double lp;
    try {
      const auto st = gibbs_sweep(s, data, h, trunc, rng);
      tr.alpha_accepted += st.alpha_accepted;
      tr.gamma_accepted += st.gamma_accepted;
      lp = log_posterior(s, data, h, trunc, Mode::glocal);
    } catch (const std::exception& e) {
      throw std::runtime_error("chain " + std::to_string(chain_id) + " aborted at iteration " +
                               std::to_string(it + 1) + ": " + e.what());
    }
    tr.log_posterior.push_back(lp);
    tr.alpha.push_back(s.alpha);
    tr.gamma.push_back(s.gamma);
    tr.n_global_clusters.push_back(
        static_cast<int>(occupied_global(s.t_labels, s.k_table, trunc.global_components)));
    if (it >= cfg.burn_in && (it - cfg.burn_in + 1) % cfg.thin == 0) {
      Draw d;
      d.iteration = it + 1;
      d.t_labels = s.t_labels;
      d.k_table = s.k_table;
      d.alpha = s.alpha;
      d.gamma = s.gamma;
      d.log_posterior = lp;
      if (cfg.retain_parameters) {
        d.beta = s.beta;
        d.pi = s.pi;
        d.phi = s.phi;
        d.psi = s.psi;
      }
      out.draws.push_back(std::move(d));
    }
  }
  return out;
}

}  // namespace glocal

#endif  // GLOCAL_SAMPLER_HPP
