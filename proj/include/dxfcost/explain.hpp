#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dxfcost/common.hpp"
#include "dxfcost/gbdt.hpp"
#include "dxfcost/metrics.hpp"
#include "dxfcost/rng.hpp"

namespace dxfcost {

struct ImportanceReport {
  std::string method;
  std::vector<std::pair<std::string, double>> entries;  // sorted by weight, descending
};

namespace detail {

inline void sort_entries(std::vector<std::pair<std::string, double>>& entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
}

}  // namespace detail

inline ImportanceReport average_importance(
    const std::vector<std::map<std::string, double>>& reports) {
  if (reports.empty()) throw std::invalid_argument("average_importance: no reports");
  std::map<std::string, double> sums;
  for (const auto& report : reports)
    for (const auto& [name, w] : report) sums[name] += w;
  ImportanceReport out;
  out.method = "split_count";
  for (const auto& [name, sum] : sums)
    out.entries.emplace_back(name, sum / static_cast<double>(reports.size()));
  detail::sort_entries(out.entries);
  return out;
}

// Mean increase of the metric when one feature column is shuffled. A feature
// no tree ever splits on scores exactly 0 because predictions are unchanged.
inline ImportanceReport permutation_importance(const GbdtModel& model, const Matrix& x,
                                               const std::vector<double>& y, Metric metric,
                                               int n_repeats, std::uint64_t seed) {
  if (x.empty() || x.size() != y.size())
    throw std::invalid_argument("permutation_importance: empty data or row/target mismatch");
  if (n_repeats < 1) throw std::invalid_argument("permutation_importance: n_repeats must be >= 1");

  const std::size_t n = x.size();
  const std::size_t n_features = x[0].size();
  std::vector<double> pred(n);
  for (std::size_t i = 0; i < n; ++i) pred[i] = model.predict(x[i]);
  const double baseline = metric_value(metric, y, pred);

  ImportanceReport out;
  out.method = "permutation";
  Matrix scratch = x;
  std::vector<std::size_t> order(n);
  for (std::size_t f = 0; f < n_features; ++f) {
    double total = 0.0;
    for (int rep = 0; rep < n_repeats; ++rep) {
      Rng rng(seed + static_cast<std::uint64_t>(f) * static_cast<std::uint64_t>(n_repeats) +
              static_cast<std::uint64_t>(rep));
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order);
      for (std::size_t i = 0; i < n; ++i) scratch[i][f] = x[order[i]][f];
      for (std::size_t i = 0; i < n; ++i) pred[i] = model.predict(scratch[i]);
      total += metric_value(metric, y, pred) - baseline;
    }
    for (std::size_t i = 0; i < n; ++i) scratch[i][f] = x[i][f];
    const std::string name =
        f < model.schema.size() ? model.schema[f] : "f" + std::to_string(f);
    out.entries.emplace_back(name, total / n_repeats);
  }
  detail::sort_entries(out.entries);
  return out;
}

// Classical Shapley values by full subset enumeration over the active
// features. A coalition's value is the mean prediction over the background
// rows with out-of-coalition features replaced by the background row's
// values. Efficiency: the values sum to v(active set) - v(empty set); with
// every feature active that is f(row) - mean f(background).
inline std::vector<std::pair<std::string, double>> exact_shapley(
    const GbdtModel& model, const std::vector<double>& row, const Matrix& background,
    const std::vector<std::size_t>& active) {
  if (active.size() > 12)
    throw std::invalid_argument(
        "exact_shapley: active set exceeds 12 features; use permutation importance instead");
  if (background.empty()) throw std::invalid_argument("exact_shapley: empty background");
  const std::size_t d = active.size();
  const std::size_t n_masks = std::size_t{1} << d;

  std::vector<double> value(n_masks, 0.0);
  std::vector<double> z;
  for (const auto& bg : background) {
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
      z = bg;
      for (std::size_t i = 0; i < d; ++i)
        if (mask & (std::size_t{1} << i)) z[active[i]] = row[active[i]];
      value[mask] += model.predict(z);
    }
  }
  for (auto& v : value) v /= static_cast<double>(background.size());

  std::vector<double> fact(d + 1, 1.0);
  for (std::size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double phi = 0.0;
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      const auto s = static_cast<std::size_t>(std::popcount(mask));
      const double w = fact[s] * fact[d - s - 1] / fact[d];
      phi += w * (value[mask | bit] - value[mask]);
    }
    const std::string name = active[i] < model.schema.size() ? model.schema[active[i]]
                                                             : "f" + std::to_string(active[i]);
    out.emplace_back(name, phi);
  }
  return out;
}

// Seeded background sample of at most `limit` rows for Shapley baselines.
inline Matrix shapley_background(const Matrix& x, std::size_t limit, std::uint64_t seed) {
  if (x.size() <= limit) return x;
  Rng rng(seed);
  Matrix out;
  for (std::size_t i : rng.sample_indices(x.size(), limit)) out.push_back(x[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Decision-tree export

namespace detail {

inline std::string short_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

inline std::string percent_of(std::int64_t part, std::int64_t whole) {
  char buf[64];
  const double pct = whole > 0 ? 100.0 * static_cast<double>(part) / static_cast<double>(whole)
                               : 0.0;
  std::snprintf(buf, sizeof(buf), "%.1f%%", pct);
  return buf;
}

inline std::string feature_label(const std::vector<std::string>& schema, int feature) {
  const auto f = static_cast<std::size_t>(feature);
  return f < schema.size() ? schema[f] : "f" + std::to_string(feature);
}

}  // namespace detail

inline std::string export_tree_dot(const Tree& tree, const std::vector<std::string>& schema) {
  std::ostringstream os;
  os << "digraph tree {\n";
  os << "  node [shape=box, fontname=\"Helvetica\"];\n";
  const std::int64_t total = tree.nodes.empty() ? 0 : tree.nodes[0].n_samples;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& nd = tree.nodes[i];
    os << "  n" << i << " [label=\"";
    if (nd.is_leaf()) {
      os << "value " << detail::short_num(nd.value);
    } else {
      os << detail::feature_label(schema, nd.feature) << " <= "
         << detail::short_num(nd.threshold) << "\\n";
      os << "value " << detail::short_num(nd.value);
    }
    os << "\\nsamples " << nd.n_samples << " (" << detail::percent_of(nd.n_samples, total)
       << ")\"];\n";
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& nd = tree.nodes[i];
    if (nd.is_leaf()) continue;
    os << "  n" << i << " -> n" << nd.left << " [label=\"yes"
       << (nd.default_left ? ", missing" : "") << "\"];\n";
    os << "  n" << i << " -> n" << nd.right << " [label=\"no"
       << (nd.default_left ? "" : ", missing") << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

namespace detail {

inline void export_text_node(const Tree& tree, int idx, const std::vector<std::string>& schema,
                             std::int64_t total, int depth, std::ostringstream& os) {
  const TreeNode& nd = tree.nodes[static_cast<std::size_t>(idx)];
  for (int i = 0; i < depth; ++i) os << "|   ";
  os << "|--- ";
  if (nd.is_leaf()) {
    os << "leaf: value " << short_num(nd.value) << " | samples " << nd.n_samples << " ("
       << percent_of(nd.n_samples, total) << ")\n";
    return;
  }
  os << feature_label(schema, nd.feature) << " <= " << short_num(nd.threshold) << " | samples "
     << nd.n_samples << " (" << percent_of(nd.n_samples, total) << ") | value "
     << short_num(nd.value) << (nd.default_left ? " | missing -> yes" : " | missing -> no")
     << "\n";
  export_text_node(tree, nd.left, schema, total, depth + 1, os);
  export_text_node(tree, nd.right, schema, total, depth + 1, os);
}

}  // namespace detail

inline std::string export_tree_text(const Tree& tree, const std::vector<std::string>& schema) {
  std::ostringstream os;
  if (tree.nodes.empty()) return "";
  detail::export_text_node(tree, 0, schema, tree.nodes[0].n_samples, 0, os);
  return os.str();
}

inline void write_importance_csv(const ImportanceReport& report, std::ostream& os) {
  os << "rank,feature,weight,method\n";
  for (std::size_t i = 0; i < report.entries.size(); ++i)
    os << (i + 1) << ',' << report.entries[i].first << ','
       << format_double(report.entries[i].second) << ',' << report.method << '\n';
}

}  // namespace dxfcost
