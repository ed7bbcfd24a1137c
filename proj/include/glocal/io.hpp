#ifndef GLOCAL_IO_HPP
#define GLOCAL_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glocal/model.hpp"
#include "glocal/sampler.hpp"
#include "glocal/summaries.hpp"

namespace glocal {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Low-level CSV helpers
// ---------------------------------------------------------------------------

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open file '" + p.string() + "'");
  return in;
}

inline std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file '" + p.string() + "'");
  return out;
}

inline void finish_output(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

/// Reads non-empty lines, skipping those starting with '#'.
inline std::vector<std::string> read_data_lines(const fs::path& p) {
  auto in = open_input(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    lines.emplace_back(t);
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Grouped data
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string group;
  fs::path path;
};

/// A dataset together with the group names it was loaded under.
struct NamedDataset {
  GroupedDataset data;
  std::vector<std::string> names;
};

/// Manifest: header `group,path`, one row per group. Relative paths resolve
/// against the manifest's directory.
inline std::vector<ManifestEntry> read_manifest(const fs::path& manifest) {
  const auto lines = read_data_lines(manifest);
  if (lines.empty()) throw IoError("manifest '" + manifest.string() + "' is empty");
  const auto header = split_csv_line(lines[0]);
  if (header.size() != 2 || header[0] != "group" || header[1] != "path")
    throw IoError("manifest header must be 'group,path'");
  std::vector<ManifestEntry> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_csv_line(lines[r]);
    if (cells.size() != 2 || cells[0].empty() || cells[1].empty())
      throw IoError("manifest row " + std::to_string(r) + " must have a group name and a path");
    fs::path p = cells[1];
    if (p.is_relative()) p = manifest.parent_path() / p;
    out.push_back({cells[0], p});
  }
  if (out.empty()) throw IoError("manifest lists no groups");
  return out;
}

namespace detail {

/// Maps a header cell like `global_3` to (is_global, zero-based index).
inline bool parse_column_name(const std::string& name, bool& is_global, std::size_t& idx) {
  std::string_view s = name;
  if (s.starts_with("global_")) {
    is_global = true;
    s.remove_prefix(7);
  } else if (s.starts_with("local_")) {
    is_global = false;
    s.remove_prefix(6);
  } else {
    return false;
  }
  std::size_t one_based = 0;
  if (!parse_int(s, one_based) || one_based < 1) return false;
  idx = one_based - 1;
  return true;
}

}  // namespace detail

/// Parses one group file. Columns may appear in any order but must be named
/// global_1..global_p and local_1..local_q without gaps.
inline GroupData load_group_csv(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing file '" + path.string() + "'");
  const auto lines = read_data_lines(path);
  if (lines.empty()) throw IoError("'" + path.string() + "' has no header row");
  const auto header = split_csv_line(lines[0]);
  std::vector<long> global_col, local_col;  // value position -> column
  std::vector<std::pair<bool, std::size_t>> slot(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    bool is_global = false;
    std::size_t idx = 0;
    if (!detail::parse_column_name(header[c], is_global, idx))
      throw IoError("'" + path.string() + "': unrecognised column '" + header[c] + "'");
    auto& cols = is_global ? global_col : local_col;
    if (cols.size() <= idx) cols.resize(idx + 1, -1);
    if (cols[idx] != -1) throw IoError("'" + path.string() + "': duplicate column '" + header[c] + "'");
    cols[idx] = static_cast<long>(c);
    slot[c] = {is_global, idx};
  }
  for (const auto* cols : {&global_col, &local_col})
    if (std::find(cols->begin(), cols->end(), -1) != cols->end())
      throw IoError("'" + path.string() + "': column numbering has gaps");
  if (global_col.empty()) throw IoError("'" + path.string() + "': no global_ columns");

  GroupData g(local_col.size(), global_col.size());
  std::vector<double> xl(local_col.size()), xg(global_col.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_csv_line(lines[r]);
    if (cells.size() != header.size())
      throw IoError("'" + path.string() + "' row " + std::to_string(r) + ": expected " +
                    std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v) || !std::isfinite(v))
        throw IoError("'" + path.string() + "' row " + std::to_string(r) + " column '" + header[c] +
                      "': non-numeric cell '" + cells[c] + "'");
      (slot[c].first ? xg : xl)[slot[c].second] = v;
    }
    g.add_row(xl, xg);
  }
  if (g.size() == 0) throw IoError("'" + path.string() + "' has no data rows");
  return g;
}

inline NamedDataset load_grouped_csv(const std::vector<ManifestEntry>& entries) {
  NamedDataset out;
  for (const auto& e : entries) {
    GroupData g = load_group_csv(e.path);
    if (out.data.groups.empty()) {
      out.data.global_dim = g.global_dim;
    } else if (g.global_dim != out.data.global_dim) {
      throw IoError("global dimension mismatch: group '" + e.group + "' has " + std::to_string(g.global_dim) +
                    " global columns, expected " + std::to_string(out.data.global_dim));
    }
    out.data.groups.push_back(std::move(g));
    out.names.push_back(e.group);
  }
  validate_dataset(out.data);
  return out;
}

inline NamedDataset load_grouped_csv(const fs::path& manifest) { return load_grouped_csv(read_manifest(manifest)); }

inline void write_group_csv(const fs::path& path, const GroupData& g) {
  auto out = open_output(path);
  bool first = true;
  auto sep = [&] {
    if (!first) out << ',';
    first = false;
  };
  for (std::size_t l = 0; l < g.global_dim; ++l) sep(), out << "global_" << l + 1;
  for (std::size_t l = 0; l < g.local_dim; ++l) sep(), out << "local_" << l + 1;
  out << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    first = true;
    for (double v : g.global_row(i)) sep(), out << format_double(v);
    for (double v : g.local_row(i)) sep(), out << format_double(v);
    out << '\n';
  }
  finish_output(out, path);
}

/// Writes `<dir>/<name>.csv` per group plus `<dir>/manifest.csv`.
inline fs::path write_grouped_csv(const fs::path& dir, const GroupedDataset& data,
                                  const std::vector<std::string>& names) {
  if (names.size() != data.groups.size()) throw std::invalid_argument("one name per group required");
  fs::create_directories(dir);
  const fs::path manifest = dir / "manifest.csv";
  auto out = open_output(manifest);
  out << "group,path\n";
  for (std::size_t j = 0; j < data.groups.size(); ++j) {
    const std::string file = names[j] + ".csv";
    write_group_csv(dir / file, data.groups[j]);
    out << names[j] << ',' << file << '\n';
  }
  finish_output(out, manifest);
  return manifest;
}

inline std::vector<std::string> default_group_names(std::size_t J) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < J; ++j) names.push_back("group" + std::to_string(j + 1));
  return names;
}

// ---------------------------------------------------------------------------
// Labels, matrices, traces
// ---------------------------------------------------------------------------

/// Ground truth as `group,row,local_label,global_label`, labels one-based.
inline void write_truth_csv(const fs::path& path, const std::vector<std::string>& names,
                            const std::vector<std::vector<int>>& local_labels,
                            const std::vector<std::vector<int>>& global_labels) {
  auto out = open_output(path);
  out << "group,row,local_label,global_label\n";
  for (std::size_t j = 0; j < names.size(); ++j)
    for (std::size_t i = 0; i < local_labels[j].size(); ++i)
      out << names[j] << ',' << i + 1 << ',' << local_labels[j][i] + 1 << ',' << global_labels[j][i] + 1 << '\n';
  finish_output(out, path);
}

struct LabelTable {
  std::vector<std::string> columns;                        // label column names
  std::vector<std::string> groups;                         // in order of appearance
  std::vector<std::vector<std::vector<int>>> values;       // [column][group][row]
};

/// Reads a labels file whose first two columns are group and row and whose
/// remaining columns are one-based integer labels (empty cells map to -1).
/// Labels come back zero-based, groups in order of first appearance.
inline LabelTable read_label_csv(const fs::path& path) {
  const auto lines = read_data_lines(path);
  if (lines.empty()) throw IoError("'" + path.string() + "' is empty");
  const auto header = split_csv_line(lines[0]);
  if (header.size() < 3 || header[0] != "group" || header[1] != "row")
    throw IoError("'" + path.string() + "': expected header group,row,...");
  LabelTable t;
  t.columns.assign(header.begin() + 2, header.end());
  t.values.resize(t.columns.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_csv_line(lines[r]);
    if (cells.size() != header.size()) throw IoError("'" + path.string() + "' row " + std::to_string(r) + ": wrong cell count");
    if (t.groups.empty() || t.groups.back() != cells[0]) {
      t.groups.push_back(cells[0]);
      for (auto& col : t.values) col.emplace_back();
    }
    for (std::size_t c = 2; c < cells.size(); ++c) {
      int v = 0;
      if (cells[c].empty()) {
        v = 0;
      } else if (!parse_int(cells[c], v) || v < 1) {
        throw IoError("'" + path.string() + "' row " + std::to_string(r) + " column '" + header[c] +
                      "': invalid label '" + cells[c] + "'");
      }
      t.values[c - 2].back().push_back(v - 1);
    }
  }
  return t;
}

inline void write_matrix_csv(const fs::path& path, const SquareMatrix& m) {
  auto out = open_output(path);
  for (std::size_t a = 0; a < m.n; ++a) {
    for (std::size_t b = 0; b < m.n; ++b) {
      if (b) out << ',';
      out << format_double(m(a, b));
    }
    out << '\n';
  }
  finish_output(out, path);
}

inline SquareMatrix read_matrix_csv(const fs::path& path) {
  const auto lines = read_data_lines(path);
  SquareMatrix m(lines.size());
  for (std::size_t a = 0; a < lines.size(); ++a) {
    const auto cells = split_csv_line(lines[a]);
    if (cells.size() != lines.size()) throw IoError("'" + path.string() + "' is not a square matrix");
    for (std::size_t b = 0; b < cells.size(); ++b)
      if (!parse_double(cells[b], m(a, b)))
        throw IoError("'" + path.string() + "' row " + std::to_string(a + 1) + ": non-numeric cell");
  }
  return m;
}

struct TraceRow {
  std::size_t iteration = 0;
  std::size_t chain = 0;
  double log_posterior = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  int n_global_clusters = 0;
};

inline constexpr const char* kTraceHeader = "iteration,chain,log_posterior,alpha,gamma,n_global_clusters";

/// One row per retained draw; chains in order.
inline std::vector<TraceRow> trace_rows(const std::vector<PosteriorDraws>& chains) {
  std::vector<TraceRow> rows;
  for (const auto& c : chains)
    for (const auto& d : c.draws)
      rows.push_back({d.iteration, c.chain_id, d.log_posterior, d.alpha, d.gamma,
                      c.trace.n_global_clusters.at(d.iteration - 1)});
  return rows;
}

inline void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& rows) {
  auto out = open_output(path);
  out << "# log_posterior is the full log joint density of data and parameters, normalising constants included\n";
  out << kTraceHeader << '\n';
  for (const auto& r : rows)
    out << r.iteration << ',' << r.chain << ',' << format_double(r.log_posterior) << ',' << format_double(r.alpha)
        << ',' << format_double(r.gamma) << ',' << r.n_global_clusters << '\n';
  finish_output(out, path);
}

inline std::vector<TraceRow> read_trace_csv(const fs::path& path) {
  const auto lines = read_data_lines(path);
  if (lines.empty() || lines[0] != kTraceHeader)
    throw IoError("malformed trace file '" + path.string() + "': expected header " + kTraceHeader);
  std::vector<TraceRow> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto c = split_csv_line(lines[r]);
    TraceRow t;
    if (c.size() != 6 || !parse_int(c[0], t.iteration) || !parse_int(c[1], t.chain) ||
        !parse_double(c[2], t.log_posterior) || !parse_double(c[3], t.alpha) || !parse_double(c[4], t.gamma) ||
        !parse_int(c[5], t.n_global_clusters))
      throw IoError("malformed trace file '" + path.string() + "' at row " + std::to_string(r));
    rows.push_back(t);
  }
  if (rows.empty()) throw IoError("trace file '" + path.string() + "' has no rows");
  return rows;
}

}  // namespace glocal

#endif  // GLOCAL_IO_HPP
