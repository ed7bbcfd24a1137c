#ifndef GLOCAL_CLI_HPP
#define GLOCAL_CLI_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "glocal/diagnostics.hpp"
#include "glocal/io.hpp"
#include "glocal/model.hpp"
#include "glocal/sampler.hpp"
#include "glocal/summaries.hpp"
#include "glocal/synthgen.hpp"

namespace glocal {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  std::optional<fs::path> manifest;
  std::optional<std::string> preset;
  std::uint64_t seed = 1;
  Truncation truncation;
  Hyperparams hyper;
  ChainConfig chain;
  Mode mode = Mode::glocal;
  fs::path out_dir = "glocal_out";
  bool retain_atoms = false;
  std::size_t replicates = 1;

  void validate(bool need_data = true) const {
    if (need_data && manifest.has_value() == preset.has_value())
      throw std::invalid_argument("config needs exactly one of a data manifest or a scenario preset");
    truncation.validate();
    hyper.validate();
    chain.validate();
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (out_dir.empty()) throw std::invalid_argument("output directory must be set");
  }
};

/// Command-line values that win over the config file.
struct ConfigOverrides {
  std::optional<fs::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::size_t> chains;
  std::optional<std::string> preset;
  std::optional<std::size_t> replicates;
};

/// Burn-in of a quarter of the run and a thinning factor retaining about
/// 1000 draws.
inline void default_schedule(ChainConfig& c, std::size_t iterations) {
  c.iterations = iterations;
  c.burn_in = iterations / 4;
  c.thin = std::max<std::size_t>(1, (iterations - c.burn_in) / 1000);
}

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

inline void read_nig(const json& obj, NIGPrior& p, const std::string& where) {
  reject_unknown(obj, {"mean", "precision", "shape", "rate"}, where);
  if (obj.contains("mean")) {
    const auto& m = obj.at("mean");
    p.prior_mean = m.is_array() ? m.get<std::vector<double>>() : std::vector<double>{m.get<double>()};
  }
  read_opt(obj, "precision", p.precision);
  read_opt(obj, "shape", p.shape);
  read_opt(obj, "rate", p.rate);
}

}  // namespace detail

/// Builds a config from JSON text. Keys:
///   data.manifest | preset, seed, mode, out_dir, retain_atoms, replicates,
///   truncation.{L,T}, priors.{alpha,gamma}.{shape,rate},
///   priors.{global_atoms,local_atoms}.{mean,precision,shape,rate},
///   chain.{iterations,burn_in,thin,chains,init}.
/// Relative manifest paths resolve against `base_dir`.
inline RunConfig parse_config_json(const std::string& text, const fs::path& base_dir = {}) {
  using detail::json;
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  RunConfig c;
  try {
    detail::reject_unknown(j,
                           {"data", "preset", "seed", "mode", "out_dir", "retain_atoms", "replicates", "truncation",
                            "priors", "chain"},
                           "top level");
    if (j.contains("data")) {
      detail::reject_unknown(j["data"], {"manifest"}, "data");
      if (j["data"].contains("manifest")) {
        fs::path m = j["data"]["manifest"].get<std::string>();
        if (m.is_relative() && !base_dir.empty()) m = base_dir / m;
        c.manifest = m;
      }
    }
    if (j.contains("preset")) c.preset = j["preset"].get<std::string>();
    detail::read_opt(j, "seed", c.seed);
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    detail::read_opt(j, "retain_atoms", c.retain_atoms);
    detail::read_opt(j, "replicates", c.replicates);
    if (j.contains("truncation")) {
      const auto& t = j["truncation"];
      detail::reject_unknown(t, {"L", "T"}, "truncation");
      detail::read_opt(t, "L", c.truncation.global_components);
      detail::read_opt(t, "T", c.truncation.local_components);
    }
    if (j.contains("priors")) {
      const auto& p = j["priors"];
      detail::reject_unknown(p, {"alpha", "gamma", "global_atoms", "local_atoms"}, "priors");
      if (p.contains("alpha")) {
        detail::reject_unknown(p["alpha"], {"shape", "rate"}, "priors.alpha");
        detail::read_opt(p["alpha"], "shape", c.hyper.alpha_shape);
        detail::read_opt(p["alpha"], "rate", c.hyper.alpha_rate);
      }
      if (p.contains("gamma")) {
        detail::reject_unknown(p["gamma"], {"shape", "rate"}, "priors.gamma");
        detail::read_opt(p["gamma"], "shape", c.hyper.gamma_shape);
        detail::read_opt(p["gamma"], "rate", c.hyper.gamma_rate);
      }
      if (p.contains("global_atoms")) detail::read_nig(p["global_atoms"], c.hyper.global_atoms, "priors.global_atoms");
      if (p.contains("local_atoms")) detail::read_nig(p["local_atoms"], c.hyper.local_atoms, "priors.local_atoms");
    }
    if (j.contains("chain")) {
      const auto& ch = j["chain"];
      detail::reject_unknown(ch, {"iterations", "burn_in", "thin", "chains", "init"}, "chain");
      if (ch.contains("iterations")) default_schedule(c.chain, ch["iterations"].get<std::size_t>());
      detail::read_opt(ch, "burn_in", c.chain.burn_in);
      detail::read_opt(ch, "thin", c.chain.thin);
      detail::read_opt(ch, "chains", c.chain.n_chains);
      if (ch.contains("init")) {
        const auto s = ch["init"].get<std::string>();
        if (s == "prior") c.chain.init_policy = InitPolicy::prior;
        else if (s == "single_cluster") c.chain.init_policy = InitPolicy::single_cluster;
        else throw std::invalid_argument("config: init must be 'prior' or 'single_cluster'");
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.chain.retain_parameters = c.retain_atoms;
  return c;
}

inline RunConfig load_config_file(const fs::path& path) {
  auto in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str(), path.parent_path());
}

/// Precedence: overrides > file > defaults.
inline RunConfig resolve_config(const std::optional<fs::path>& config_file, const ConfigOverrides& o) {
  RunConfig c = config_file ? load_config_file(*config_file) : RunConfig{};
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.seed) c.seed = *o.seed;
  if (o.mode) c.mode = parse_mode(*o.mode);
  if (o.chains) c.chain.n_chains = *o.chains;
  if (o.preset) {
    c.preset = *o.preset;
    c.manifest.reset();
  }
  if (o.replicates) c.replicates = *o.replicates;
  return c;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct FitResult {
  std::vector<PosteriorDraws> chains;
  std::vector<Draw> pooled;  // retained draws of all chains, chain order
  ClusteringResult clustering;
};

/// Runs `n_chains` independent chains concurrently, chain c on stream
/// (seed, c + 1), and summarises the pooled draws. Output does not depend on
/// thread scheduling.
inline FitResult fit_chains(const GroupedDataset& data, const Hyperparams& h, const Truncation& trunc,
                            const ChainConfig& cfg, Mode mode, std::uint64_t seed) {
  FitResult r;
  r.chains.resize(cfg.n_chains);
  std::vector<std::exception_ptr> errors(cfg.n_chains);
  auto work = [&](std::size_t c) {
    try {
      RngStream rng(seed, c + 1);
      r.chains[c] = run_chain(data, h, trunc, cfg, mode, rng, c);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (cfg.n_chains == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t c = 0; c < cfg.n_chains; ++c) pool.emplace_back(work, c);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& ch : r.chains) r.pooled.insert(r.pooled.end(), ch.draws.begin(), ch.draws.end());
  r.clustering = summarize(std::span<const Draw>(r.pooled));
  return r;
}

inline std::vector<double> retained_log_posterior(const PosteriorDraws& p) {
  std::vector<double> v;
  for (const auto& d : p.draws) v.push_back(d.log_posterior);
  return v;
}

/// ESS that reports NaN instead of failing on a constant series.
inline double safe_ess(std::span<const double> x) {
  try {
    return effective_sample_size(x);
  } catch (const std::invalid_argument&) {
    return std::nan("");
  }
}

struct LoadedInput {
  NamedDataset named;
  std::optional<LabeledDataset> truth;  // present for presets
};

inline LoadedInput load_input(const RunConfig& c) {
  LoadedInput in;
  if (c.manifest) {
    in.named = load_grouped_csv(*c.manifest);
  } else {
    in.truth = generate_preset(scenario_preset(*c.preset, c.seed));
    in.named.data = in.truth->dataset;
    in.named.names = default_group_names(in.named.data.num_groups());
  }
  return in;
}

inline void write_assignments_csv(const fs::path& path, const std::vector<std::string>& names,
                                  const ClusteringResult& r, Mode mode) {
  auto out = open_output(path);
  out << "group,row,global_cluster,local_cluster\n";
  std::size_t offset = 0;
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto& loc = r.local_labels[j];
    for (std::size_t i = 0; i < loc.size(); ++i) {
      out << names[j] << ',' << i + 1 << ',' << r.global_labels[offset + i] + 1 << ',';
      if (mode == Mode::glocal) out << loc[i] + 1;
      out << '\n';
    }
    offset += loc.size();
  }
  finish_output(out, path);
}

/// `fit`: runs the chains and writes assignments, co-clustering matrices,
/// the retained trace and a text summary. Returns the process exit code.
inline int cmd_fit(const RunConfig& c, std::ostream& log) {
  c.validate();
  const auto in = load_input(c);
  const auto& data = in.named.data;
  const auto& names = in.named.names;
  const FitResult fit = fit_chains(data, c.hyper, c.truncation, c.chain, c.mode, c.seed);
  fs::create_directories(c.out_dir);

  write_assignments_csv(c.out_dir / "assignments.csv", names, fit.clustering, c.mode);

  std::vector<Labels> global;
  for (const auto& d : fit.pooled) global.push_back(derive_global_labels(d));
  write_matrix_csv(c.out_dir / "coclust_global.csv", coclustering_matrix(global));
  if (c.mode == Mode::glocal) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      std::vector<Labels> local;
      for (const auto& d : fit.pooled) local.push_back(d.t_labels[j]);
      write_matrix_csv(c.out_dir / ("coclust_local_" + names[j] + ".csv"), coclustering_matrix(local));
    }
  }
  write_trace_csv(c.out_dir / "trace.csv", trace_rows(fit.chains));

  std::ostringstream s;
  s << std::setprecision(12);
  s << "mode: " << to_string(c.mode) << "\n";
  s << "chains: " << c.chain.n_chains << "\n";
  s << "iterations: " << c.chain.iterations << " burn_in: " << c.chain.burn_in << " thin: " << c.chain.thin
    << " retained_per_chain: " << c.chain.retained_count() << "\n";
  s << "truncation: L=" << c.truncation.global_components << " T=" << c.truncation.local_components << "\n";
  s << "global_clusters: " << fit.clustering.n_global_clusters << "\n";
  for (std::size_t j = 0; j < names.size(); ++j) {
    s << "group " << names[j] << ": global_clusters=" << count_distinct(fit.clustering.group_global_labels(j));
    if (c.mode == Mode::glocal) s << " local_clusters=" << fit.clustering.n_local_clusters[j];
    s << "\n";
  }
  std::vector<std::vector<double>> lp;
  for (const auto& ch : fit.chains) {
    lp.push_back(retained_log_posterior(ch));
    s << "chain " << ch.chain_id << ": ess_log_posterior=" << safe_ess(lp.back())
      << " alpha_acceptance=" << static_cast<double>(ch.trace.alpha_accepted) / c.chain.iterations
      << " gamma_acceptance=" << static_cast<double>(ch.trace.gamma_accepted) / c.chain.iterations << "\n";
  }
  if (lp.size() >= 2 && lp.front().size() >= 10)
    s << "rhat_log_posterior: " << gelman_rubin(lp) << "\n";
  else
    s << "rhat_log_posterior: not computed (needs at least 2 chains)\n";
  if (in.truth) {
    s << "ari_global_vs_truth: "
      << adjusted_rand_index(fit.clustering.global_labels, in.truth->concatenated_global_labels()) << "\n";
  }
  {
    const fs::path p = c.out_dir / "summary.txt";
    auto out = open_output(p);
    out << s.str();
    finish_output(out, p);
  }
  log << s.str();
  return 0;
}

/// `simulate`: writes the preset's group CSVs, a manifest and truth.csv.
inline int cmd_simulate(const RunConfig& c, std::ostream& log) {
  if (!c.preset) throw std::invalid_argument("simulate needs a preset");
  const auto ds = generate_preset(scenario_preset(*c.preset, c.seed));
  const auto names = default_group_names(ds.dataset.num_groups());
  const auto manifest = write_grouped_csv(c.out_dir, ds.dataset, names);
  write_truth_csv(c.out_dir / "truth.csv", names, ds.true_local_labels, ds.true_global_labels);
  log << "wrote " << names.size() << " groups to " << c.out_dir.string() << " (manifest " << manifest.string()
      << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct CompareRow {
  std::size_t replicate = 0;
  Mode method = Mode::glocal;
  double ari_global = 0.0;
  std::vector<double> ari_local;  // empty for hdp
  double ess_logpost = 0.0;
};

/// Fits both modes on one generated dataset; hdp drops the local columns.
inline std::vector<CompareRow> compare_replicate(const RunConfig& c, const std::string& preset,
                                                 std::size_t replicate) {
  const std::uint64_t seed = c.seed + replicate;
  const auto ds = generate_preset(scenario_preset(preset, seed));
  const auto truth = ds.concatenated_global_labels();
  std::vector<CompareRow> rows;
  for (Mode m : {Mode::glocal, Mode::hdp}) {
    const auto fit = fit_chains(ds.dataset, c.hyper, c.truncation, c.chain, m, seed);
    CompareRow r;
    r.replicate = replicate + 1;
    r.method = m;
    r.ari_global = adjusted_rand_index(fit.clustering.global_labels, truth);
    if (m == Mode::glocal)
      for (std::size_t j = 0; j < ds.dataset.num_groups(); ++j)
        r.ari_local.push_back(adjusted_rand_index(fit.clustering.local_labels[j], ds.true_local_labels[j]));
    r.ess_logpost = safe_ess(retained_log_posterior(fit.chains.front()));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_comparison_csv(const fs::path& path, const std::vector<CompareRow>& rows) {
  auto out = open_output(path);
  out << "replicate,method,ari_global,ari_local_per_group,ess_logpost\n";
  for (const auto& r : rows) {
    out << r.replicate << ',' << to_string(r.method) << ',' << format_double(r.ari_global) << ',';
    for (std::size_t j = 0; j < r.ari_local.size(); ++j) out << (j ? ";" : "") << format_double(r.ari_local[j]);
    out << ',' << format_double(r.ess_logpost) << '\n';
  }
  finish_output(out, path);
}

inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

/// `compare`: replicate seeds are seed, seed + 1, ...
inline int cmd_compare(const RunConfig& c, std::ostream& log) {
  if (!c.preset) throw std::invalid_argument("compare needs a preset");
  c.validate();
  std::vector<CompareRow> rows;
  for (std::size_t r = 0; r < c.replicates; ++r) {
    auto rr = compare_replicate(c, *c.preset, r);
    rows.insert(rows.end(), rr.begin(), rr.end());
  }
  fs::create_directories(c.out_dir);
  write_comparison_csv(c.out_dir / "comparison.csv", rows);
  log << std::setprecision(4) << std::fixed;
  for (Mode m : {Mode::glocal, Mode::hdp}) {
    std::vector<double> a;
    for (const auto& r : rows)
      if (r.method == m) a.push_back(r.ari_global);
    const auto [mean, sd] = mean_sd(a);
    log << to_string(m) << ": ari_global " << mean << " +- " << sd << " over " << a.size() << " replicates\n";
  }
  log.unsetf(std::ios::floatfield);
  return 0;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct SeriesDiagnostics {
  std::string label;            // "<file>:chain <c>"
  std::string quantity;         // log_posterior, alpha or gamma
  std::vector<double> acf;      // lags 1..max
  double ess = 0.0;             // NaN for a constant series
};

struct DiagnosticsReport {
  std::vector<SeriesDiagnostics> series;
  std::map<std::string, double> rhat;  // per quantity, only with >= 2 chains
  std::string note;
};

inline constexpr std::size_t kMaxAcfLag = 50;

inline DiagnosticsReport diagnose_traces(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw std::invalid_argument("diagnose needs at least one trace file");
  struct Chain {
    std::string label;
    std::map<std::string, std::vector<double>> values;
  };
  std::vector<Chain> chains;
  for (const auto& p : paths) {
    std::map<std::size_t, std::size_t> index;  // chain id -> position
    for (const auto& row : read_trace_csv(p)) {
      auto it = index.find(row.chain);
      if (it == index.end()) {
        it = index.emplace(row.chain, chains.size()).first;
        chains.push_back({p.filename().string() + ":chain " + std::to_string(row.chain), {}});
      }
      auto& v = chains[it->second].values;
      v["log_posterior"].push_back(row.log_posterior);
      v["alpha"].push_back(row.alpha);
      v["gamma"].push_back(row.gamma);
    }
  }
  DiagnosticsReport rep;
  const std::vector<std::string> quantities{"log_posterior", "alpha", "gamma"};
  for (const auto& ch : chains)
    for (const auto& q : quantities) {
      const auto& x = ch.values.at(q);
      SeriesDiagnostics d{ch.label, q, {}, safe_ess(x)};
      if (x.size() >= 2) {
        try {
          auto acf = autocorrelation(x, std::min(kMaxAcfLag, x.size() - 1));
          d.acf.assign(acf.begin() + 1, acf.end());
        } catch (const std::invalid_argument&) {
        }
      }
      rep.series.push_back(std::move(d));
    }
  if (chains.size() < 2) {
    rep.note = "single chain: R-hat omitted (needs at least 2 chains)";
    return rep;
  }
  for (const auto& q : quantities) {
    std::vector<std::vector<double>> xs;
    for (const auto& ch : chains) xs.push_back(ch.values.at(q));
    try {
      rep.rhat[q] = gelman_rubin(xs);
    } catch (const std::invalid_argument& e) {
      rep.note += "R-hat for " + q + " not computed: " + e.what() + "\n";
    }
  }
  return rep;
}

inline std::string format_report(const DiagnosticsReport& rep) {
  std::ostringstream s;
  s << std::setprecision(12);
  s << "series,quantity,ess";
  for (std::size_t k = 1; k <= kMaxAcfLag; ++k) s << ",acf_" << k;
  s << "\n";
  for (const auto& d : rep.series) {
    s << d.label << ',' << d.quantity << ',' << d.ess;
    for (std::size_t k = 0; k < kMaxAcfLag; ++k) {
      s << ',';
      if (k < d.acf.size()) s << d.acf[k];
    }
    s << "\n";
  }
  for (const auto& [q, r] : rep.rhat) s << "rhat " << q << ": " << r << "\n";
  if (!rep.note.empty()) s << "note: " << rep.note << "\n";
  return s.str();
}

/// `diagnose`: prints the report and, when an output directory is given,
/// writes it to diagnostics.txt there.
inline int cmd_diagnose(const std::vector<fs::path>& traces, const std::optional<fs::path>& out_dir,
                        std::ostream& log) {
  const auto text = format_report(diagnose_traces(traces));
  if (out_dir) {
    fs::create_directories(*out_dir);
    const fs::path p = *out_dir / "diagnostics.txt";
    auto out = open_output(p);
    out << text;
    finish_output(out, p);
  }
  log << text;
  return 0;
}

}  // namespace glocal

#endif  // GLOCAL_CLI_HPP
