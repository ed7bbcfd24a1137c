#ifndef GLOCAL_MODEL_HPP
#define GLOCAL_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace glocal {

/// Error raised when a dataset violates a structural invariant. Indices are
/// zero-based; `group` / `row` are -1 when not applicable.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(const std::string& what, long group = -1, long row = -1)
      : std::invalid_argument(what), group_(group), row_(row) {}
  long group() const noexcept { return group_; }
  long row() const noexcept { return row_; }

 private:
  long group_;
  long row_;
};

/// Observations of one group. Rows are stored row-major in two flat buffers,
/// one for the group-specific (local) block and one for the shared (global)
/// block.
struct GroupData {
  std::size_t local_dim = 0;
  std::size_t global_dim = 0;
  std::vector<double> local;   // n * local_dim
  std::vector<double> global;  // n * global_dim

  GroupData() = default;
  GroupData(std::size_t local_dim_, std::size_t global_dim_)
      : local_dim(local_dim_), global_dim(global_dim_) {}

  std::size_t size() const noexcept {
    return global_dim == 0 ? 0 : global.size() / global_dim;
  }

  std::span<const double> local_row(std::size_t i) const {
    return {local.data() + i * local_dim, local_dim};
  }
  std::span<const double> global_row(std::size_t i) const {
    return {global.data() + i * global_dim, global_dim};
  }

  void add_row(std::span<const double> local_part, std::span<const double> global_part) {
    local.insert(local.end(), local_part.begin(), local_part.end());
    global.insert(global.end(), global_part.begin(), global_part.end());
  }
};

struct GroupedDataset {
  std::size_t global_dim = 0;
  std::vector<GroupData> groups;

  std::size_t num_groups() const noexcept { return groups.size(); }
  std::size_t total_size() const noexcept {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }
};

/// Checks every dataset invariant and returns the dataset unchanged, or
/// throws a ValidationError naming the first violation.
inline const GroupedDataset& validate_dataset(const GroupedDataset& data) {
  if (data.global_dim == 0) throw ValidationError("global dimension must be positive");
  if (data.groups.empty()) throw ValidationError("dataset has no groups");
  for (std::size_t j = 0; j < data.groups.size(); ++j) {
    const auto& g = data.groups[j];
    const long gj = static_cast<long>(j);
    if (g.global_dim != data.global_dim) {
      throw ValidationError("dimension mismatch: group " + std::to_string(j + 1) +
                                " has global dimension " + std::to_string(g.global_dim) +
                                ", expected " + std::to_string(data.global_dim),
                            gj);
    }
    if (g.global.size() % data.global_dim != 0) {
      throw ValidationError("dimension mismatch: group " + std::to_string(j + 1) +
                                " global block is not a whole number of rows",
                            gj);
    }
    const std::size_t n = g.size();
    if (n == 0) throw ValidationError("empty group " + std::to_string(j + 1), gj);
    if (g.local.size() != n * g.local_dim) {
      long row = g.local_dim == 0 ? 0 : static_cast<long>(g.local.size() / g.local_dim);
      throw ValidationError("dimension mismatch: group " + std::to_string(j + 1) +
                                " declares local dimension " + std::to_string(g.local_dim) +
                                " but local block has " + std::to_string(g.local.size()) +
                                " values for " + std::to_string(n) + " rows",
                            gj, row);
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto finite = [](std::span<const double> r) {
        for (double v : r)
          if (!std::isfinite(v)) return false;
        return true;
      };
      if (!finite(g.local_row(i)) || !finite(g.global_row(i))) {
        throw ValidationError("non-finite entry in group " + std::to_string(j + 1) + ", row " +
                                  std::to_string(i + 1),
                              gj, static_cast<long>(i));
      }
    }
  }
  return data;
}

/// Copy of `data` with every local block removed.
inline GroupedDataset strip_local(const GroupedDataset& data) {
  GroupedDataset out = data;
  for (auto& g : out.groups) {
    g.local_dim = 0;
    g.local.clear();
  }
  return out;
}

struct Truncation {
  std::size_t global_components = 20;  // L
  std::size_t local_components = 20;   // T

  void validate() const {
    if (global_components < 1 || local_components < 1)
      throw std::invalid_argument("truncation levels must be positive");
    if (global_components > local_components)
      throw std::invalid_argument("global truncation must not exceed local truncation");
  }
};

/// Normal-inverse-gamma prior: sigma^2 ~ IG(shape, rate),
/// mean | sigma^2 ~ N(prior_mean, sigma^2 / precision * I).
/// `prior_mean` may hold one value (broadcast) or be empty (zero).
struct NIGPrior {
  std::vector<double> prior_mean;
  double precision = 1.0;
  double shape = 0.1;
  double rate = 0.1;

  double mean_at(std::size_t i) const {
    if (prior_mean.empty()) return 0.0;
    if (prior_mean.size() == 1) return prior_mean[0];
    return prior_mean.at(i);
  }

  void validate() const {
    if (!(precision > 0.0) || !(shape > 0.0) || !(rate > 0.0))
      throw std::invalid_argument("NIG prior parameters must be strictly positive");
  }
};

/// Gamma(shape, rate) priors on the two concentrations plus the atom priors.
struct Hyperparams {
  double alpha_shape = 0.1;
  double alpha_rate = 0.1;
  double gamma_shape = 0.1;
  double gamma_rate = 0.1;
  NIGPrior global_atoms;
  NIGPrior local_atoms;

  void validate() const {
    if (!(alpha_shape > 0.0) || !(alpha_rate > 0.0) || !(gamma_shape > 0.0) ||
        !(gamma_rate > 0.0))
      throw std::invalid_argument("concentration hyperparameters must be strictly positive");
    global_atoms.validate();
    local_atoms.validate();
  }
};

enum class Mode { glocal, hdp };

inline const char* to_string(Mode m) { return m == Mode::glocal ? "glocal" : "hdp"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "glocal") return Mode::glocal;
  if (s == "hdp") return Mode::hdp;
  throw std::invalid_argument("unknown mode '" + s + "' (expected glocal or hdp)");
}

/// Isotropic Gaussian component: N(mean, var * I).
struct Atom {
  std::vector<double> mean;
  double var = 1.0;
};

/// All latent quantities of one sweep. Labels are zero-based:
/// t_labels[j][i] in [0, T), k_table[j][t] in [0, L).
/// psi[j] is empty for groups without local variables.
struct SamplerState {
  std::vector<double> beta;
  std::vector<std::vector<double>> pi;
  std::vector<Atom> phi;
  std::vector<std::vector<Atom>> psi;
  std::vector<std::vector<int>> t_labels;
  std::vector<std::vector<int>> k_table;
  double alpha = 1.0;
  double gamma = 1.0;
};

/// Floor applied to simplex entries before taking logs.
inline constexpr double kSimplexFloor = 1e-300;

inline double safe_log_prob(double p) { return std::log(p < kSimplexFloor ? kSimplexFloor : p); }

inline double log_density_iso(std::span<const double> x, std::span<const double> mean, double var) {
  if (x.size() != mean.size()) throw std::invalid_argument("dimension mismatch in Gaussian density");
  if (!(var > 0.0)) throw std::invalid_argument("Gaussian variance must be positive");
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean[i];
    ss += d * d;
  }
  const double d = static_cast<double>(x.size());
  return -0.5 * d * std::log(2.0 * std::numbers::pi * var) - 0.5 * ss / var;
}

/// log N(x | atom.mean, atom.var I) for the shared variables.
inline double log_density_global(std::span<const double> x, const Atom& atom) {
  return log_density_iso(x, atom.mean, atom.var);
}

/// Local-variable density; exactly 0 when the group has no local variables.
inline double log_density_local(std::span<const double> x, const Atom& atom, std::size_t local_dim) {
  if (x.size() != local_dim) throw std::invalid_argument("dimension mismatch in local density");
  if (local_dim == 0) return 0.0;
  return log_density_iso(x, atom.mean, atom.var);
}

inline double log_gamma_density(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

inline double log_inverse_gamma_density(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

/// Symmetric-or-not Dirichlet log density; entries are floored before logs.
inline double log_dirichlet_density(std::span<const double> p, std::span<const double> params) {
  double total = 0.0, out = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    total += params[i];
    out += (params[i] - 1.0) * safe_log_prob(p[i]) - std::lgamma(params[i]);
  }
  return out + std::lgamma(total);
}

inline double log_symmetric_dirichlet_density(std::span<const double> p, double param) {
  const double k = static_cast<double>(p.size());
  double out = std::lgamma(param * k) - k * std::lgamma(param);
  for (double v : p) out += (param - 1.0) * safe_log_prob(v);
  return out;
}

inline double log_nig_density(const Atom& atom, const NIGPrior& prior) {
  const std::size_t p = atom.mean.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double d = atom.mean[i] - prior.mean_at(i);
    ss += d * d;
  }
  const double mean_var = atom.var / prior.precision;
  return -0.5 * static_cast<double>(p) * std::log(2.0 * std::numbers::pi * mean_var) -
         0.5 * ss / mean_var + log_inverse_gamma_density(atom.var, prior.shape, prior.rate);
}

/// Additive pieces of the log joint density. No constants are dropped: every
/// Gaussian, Dirichlet, gamma and inverse-gamma normaliser is included, so
/// values are comparable across iterations, chains and runs.
struct LogPosteriorTerms {
  double local_likelihood = 0.0;    // sum log f1
  double global_likelihood = 0.0;   // sum log f2
  double local_assignment = 0.0;    // sum log pi_{j t_ji}
  double table_assignment = 0.0;    // sum log beta_{k_jt}
  double local_atom_prior = 0.0;    // sum log p(psi_jt)
  double global_atom_prior = 0.0;   // sum log p(phi_k)
  double group_weight_prior = 0.0;  // sum log Dir(pi_j | alpha/T)
  double global_weight_prior = 0.0; // log Dir(beta | gamma/L)
  double alpha_prior = 0.0;
  double gamma_prior = 0.0;

  double total() const {
    return local_likelihood + global_likelihood + local_assignment + table_assignment +
           local_atom_prior + global_atom_prior + group_weight_prior + global_weight_prior +
           alpha_prior + gamma_prior;
  }
};

inline void check_state(const SamplerState& s, const GroupedDataset& data, const Truncation& trunc,
                        Mode mode) {
  const std::size_t J = data.num_groups(), L = trunc.global_components, T = trunc.local_components;
  auto fail = [](const std::string& m) { throw std::invalid_argument("inconsistent state: " + m); };
  if (s.beta.size() != L || s.phi.size() != L) fail("global block size");
  if (s.pi.size() != J || s.t_labels.size() != J || s.k_table.size() != J) fail("group count");
  for (std::size_t j = 0; j < J; ++j) {
    if (s.pi[j].size() != T || s.k_table[j].size() != T) fail("local truncation size");
    if (s.t_labels[j].size() != data.groups[j].size()) fail("label count");
    for (int t : s.t_labels[j])
      if (t < 0 || static_cast<std::size_t>(t) >= T) fail("local label out of range");
    for (int k : s.k_table[j])
      if (k < 0 || static_cast<std::size_t>(k) >= L) fail("global label out of range");
    if (mode == Mode::glocal && data.groups[j].local_dim > 0) {
      if (s.psi.size() != J || s.psi[j].size() != T) fail("local atoms missing");
      for (const auto& a : s.psi[j])
        if (a.mean.size() != data.groups[j].local_dim) fail("local atom dimension");
    }
  }
  for (const auto& a : s.phi)
    if (a.mean.size() != data.global_dim) fail("global atom dimension");
}

/// Term-by-term log joint density. In hdp mode every group is treated as
/// having no local variables: local likelihood and local atom prior vanish.
inline LogPosteriorTerms log_posterior_terms(const SamplerState& s, const GroupedDataset& data,
                                             const Hyperparams& hyper, const Truncation& trunc,
                                             Mode mode = Mode::glocal) {
  check_state(s, data, trunc, mode);
  LogPosteriorTerms out;
  const std::size_t J = data.num_groups();
  const double T = static_cast<double>(trunc.local_components);
  const double L = static_cast<double>(trunc.global_components);
  for (std::size_t j = 0; j < J; ++j) {
    const auto& g = data.groups[j];
    const bool has_local = mode == Mode::glocal && g.local_dim > 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const int t = s.t_labels[j][i];
      const int k = s.k_table[j][t];
      if (has_local) out.local_likelihood += log_density_iso(g.local_row(i), s.psi[j][t].mean, s.psi[j][t].var);
      out.global_likelihood += log_density_global(g.global_row(i), s.phi[k]);
      out.local_assignment += safe_log_prob(s.pi[j][t]);
    }
    for (int k : s.k_table[j]) out.table_assignment += safe_log_prob(s.beta[k]);
    if (has_local)
      for (const auto& a : s.psi[j]) out.local_atom_prior += log_nig_density(a, hyper.local_atoms);
    out.group_weight_prior += log_symmetric_dirichlet_density(s.pi[j], s.alpha / T);
  }
  for (const auto& a : s.phi) out.global_atom_prior += log_nig_density(a, hyper.global_atoms);
  out.global_weight_prior = log_symmetric_dirichlet_density(s.beta, s.gamma / L);
  out.alpha_prior = log_gamma_density(s.alpha, hyper.alpha_shape, hyper.alpha_rate);
  out.gamma_prior = log_gamma_density(s.gamma, hyper.gamma_shape, hyper.gamma_rate);
  return out;
}

inline double log_posterior(const SamplerState& s, const GroupedDataset& data, const Hyperparams& hyper,
                            const Truncation& trunc, Mode mode = Mode::glocal) {
  return log_posterior_terms(s, data, hyper, trunc, mode).total();
}

}  // namespace glocal

#endif  // GLOCAL_MODEL_HPP
