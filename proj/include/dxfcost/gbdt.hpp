#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dxfcost/common.hpp"
#include "dxfcost/metrics.hpp"
#include "dxfcost/rng.hpp"

namespace dxfcost {

using Matrix = std::vector<std::vector<double>>;

enum class Growth { kDepthWise, kLeafWise };

inline const char* growth_name(Growth g) {
  return g == Growth::kDepthWise ? "depth_wise" : "leaf_wise";
}

inline Growth growth_from_name(const std::string& name) {
  if (name == "depth_wise") return Growth::kDepthWise;
  if (name == "leaf_wise") return Growth::kLeafWise;
  throw std::invalid_argument("unknown growth mode: " + name);
}

struct TrainParams {
  double learning_rate = 0.1;
  int max_depth = 6;
  int n_estimators = 500;
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  double gamma = 0.0;
  double reg_alpha = 0.0;
  double reg_lambda = 1.0;
  int early_stopping_rounds = 20;
  int num_leaves = 31;
  int min_child_samples = 5;
  Growth growth = Growth::kDepthWise;
  std::uint64_t seed = 0;

  void validate(bool allow_depth_zero = false) const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
      throw std::invalid_argument("learning_rate must be in (0, 1]");
    if (max_depth < (allow_depth_zero ? 0 : 1))
      throw std::invalid_argument("max_depth out of range");
    if (n_estimators < 1) throw std::invalid_argument("n_estimators must be >= 1");
    if (!(subsample > 0.0 && subsample <= 1.0))
      throw std::invalid_argument("subsample must be in (0, 1]");
    if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0))
      throw std::invalid_argument("colsample_bytree must be in (0, 1]");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
    if (reg_alpha < 0.0) throw std::invalid_argument("reg_alpha must be >= 0");
    if (reg_lambda < 0.0) throw std::invalid_argument("reg_lambda must be >= 0");
    if (early_stopping_rounds < 0)
      throw std::invalid_argument("early_stopping_rounds must be >= 0");
    if (num_leaves < 2) throw std::invalid_argument("num_leaves must be >= 2");
    if (min_child_samples < 1) throw std::invalid_argument("min_child_samples must be >= 1");
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  bool default_left = true;
  int left = -1;
  int right = -1;
  std::int64_t n_samples = 0;
  double value = 0.0;  // leaf weight; node estimate on internal nodes
  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const std::vector<double>& row) const {
    if (nodes.empty()) return 0.0;
    int idx = 0;
    while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
      const TreeNode& nd = nodes[static_cast<std::size_t>(idx)];
      const double v = static_cast<std::size_t>(nd.feature) < row.size()
                           ? row[static_cast<std::size_t>(nd.feature)]
                           : kMissing;
      const bool go_left = is_missing(v) ? nd.default_left : (v <= nd.threshold);
      idx = go_left ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(idx)].value;
  }
};

struct TrainingLog {
  std::vector<double> train;
  std::vector<double> valid;
};

struct GbdtModel {
  double base_score = 0.0;
  double shrinkage = 0.1;
  std::vector<Tree> trees;
  std::vector<std::string> schema;
  int best_iteration = -1;  // inclusive index of the last used tree
  Metric metric = Metric::kMae;
  TrainParams params;
  TrainingLog log;

  double predict(const std::vector<double>& row) const {
    double out = base_score;
    for (int t = 0; t <= best_iteration && t < static_cast<int>(trees.size()); ++t)
      out += shrinkage * trees[static_cast<std::size_t>(t)].predict(row);
    return out;
  }

  // Order-independent entry point: features looked up by name, absent names
  // are treated as missing, unknown names are ignored.
  double predict(const std::map<std::string, double>& row) const {
    std::vector<double> aligned(schema.size(), kMissing);
    for (std::size_t i = 0; i < schema.size(); ++i) {
      auto it = row.find(schema[i]);
      if (it != row.end()) aligned[i] = it->second;
    }
    return predict(aligned);
  }
};

// ---------------------------------------------------------------------------
// Split search

namespace detail {

// Gains below this are treated as zero so floating-point cancellation noise
// cannot manufacture a split on constant gradients.
constexpr double kGainEps = 1e-12;

inline double soft_threshold(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

inline double score(double g, double h, double reg_lambda, double reg_alpha) {
  const double t = soft_threshold(g, reg_alpha);
  return t * t / (h + reg_lambda);
}

inline double leaf_weight(double g, double h, const TrainParams& p) {
  return -soft_threshold(g, p.reg_alpha) / (h + p.reg_lambda);
}

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  bool default_left = true;
  double gain = 0.0;
};

inline std::optional<SplitCandidate> best_split(const Matrix& x,
                                                const std::vector<std::size_t>& rows,
                                                const std::vector<double>& g,
                                                const std::vector<double>& h,
                                                const std::vector<int>& features,
                                                const TrainParams& p) {
  if (rows.empty()) return std::nullopt;

  double g_total = 0.0, h_total = 0.0;
  for (std::size_t r : rows) {
    g_total += g[r];
    h_total += h[r];
  }
  const double parent_score = score(g_total, h_total, p.reg_lambda, p.reg_alpha);

  std::optional<SplitCandidate> best;
  std::vector<std::pair<double, std::size_t>> present;
  present.reserve(rows.size());

  for (int f : features) {
    present.clear();
    double g_miss = 0.0, h_miss = 0.0;
    std::size_t n_miss = 0;
    for (std::size_t r : rows) {
      const double v = x[r][static_cast<std::size_t>(f)];
      if (is_missing(v)) {
        g_miss += g[r];
        h_miss += h[r];
        ++n_miss;
      } else {
        present.emplace_back(v, r);
      }
    }
    if (present.size() < 2) continue;
    std::sort(present.begin(), present.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double g_left = 0.0, h_left = 0.0;
    for (std::size_t i = 1; i < present.size(); ++i) {
      g_left += g[present[i - 1].second];
      h_left += h[present[i - 1].second];
      const double lo = present[i - 1].first;
      const double hi = present[i].first;
      if (!(hi > lo)) continue;
      double thr = (lo + hi) / 2.0;
      if (!(thr > lo && thr < hi)) thr = lo;  // adjacent doubles; keep routing consistent

      const double g_right = g_total - g_miss - g_left;
      const double h_right = h_total - h_miss - h_left;
      const std::size_t n_left = i;
      const std::size_t n_right = present.size() - i;

      // Missing rows try the left child first; switching to right needs a
      // strictly larger gain so ties resolve left.
      for (int side = 0; side < 2; ++side) {
        const bool miss_left = (side == 0);
        const std::size_t nl = n_left + (miss_left ? n_miss : 0);
        const std::size_t nr = n_right + (miss_left ? 0 : n_miss);
        if (nl < static_cast<std::size_t>(p.min_child_samples) ||
            nr < static_cast<std::size_t>(p.min_child_samples))
          continue;
        const double gl = g_left + (miss_left ? g_miss : 0.0);
        const double hl = h_left + (miss_left ? h_miss : 0.0);
        const double gr = g_right + (miss_left ? 0.0 : g_miss);
        const double hr = h_right + (miss_left ? 0.0 : h_miss);
        const double gain = 0.5 * (score(gl, hl, p.reg_lambda, p.reg_alpha) +
                                   score(gr, hr, p.reg_lambda, p.reg_alpha) - parent_score) -
                            p.gamma;
        if (gain <= kGainEps) continue;
        if (!best || gain > best->gain)
          best = SplitCandidate{f, thr, miss_left, gain};
      }
    }
  }
  return best;
}

struct FrontierEntry {
  int node = -1;
  std::vector<std::size_t> rows;
  int depth = 0;
  std::optional<SplitCandidate> cand;
};

inline void partition_rows(const Matrix& x, const std::vector<std::size_t>& rows,
                           const SplitCandidate& c, std::vector<std::size_t>& left,
                           std::vector<std::size_t>& right) {
  left.clear();
  right.clear();
  for (std::size_t r : rows) {
    const double v = x[r][static_cast<std::size_t>(c.feature)];
    const bool go_left = is_missing(v) ? c.default_left : (v <= c.threshold);
    (go_left ? left : right).push_back(r);
  }
}

inline int make_node(Tree& tree, const std::vector<std::size_t>& rows,
                     const std::vector<double>& g, const std::vector<double>& h,
                     const TrainParams& p) {
  double gs = 0.0, hs = 0.0;
  for (std::size_t r : rows) {
    gs += g[r];
    hs += h[r];
  }
  TreeNode node;
  node.n_samples = static_cast<std::int64_t>(rows.size());
  node.value = leaf_weight(gs, hs, p);
  tree.nodes.push_back(node);
  return static_cast<int>(tree.nodes.size()) - 1;
}

inline Tree build_tree(const Matrix& x, const std::vector<std::size_t>& rows,
                       const std::vector<double>& g, const std::vector<double>& h,
                       const TrainParams& p, Rng& rng) {
  // max_depth 0 lifts the depth cap entirely (used by single-tree fits).
  const int max_depth = p.max_depth == 0 ? std::numeric_limits<int>::max() : p.max_depth;
  const std::size_t n_features = rows.empty() ? 0 : x[rows[0]].size();
  std::vector<int> features;
  if (p.colsample_bytree < 1.0 && n_features > 1) {
    const auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(p.colsample_bytree * static_cast<double>(n_features))));
    for (std::size_t i : rng.sample_indices(n_features, std::min(k, n_features)))
      features.push_back(static_cast<int>(i));
  } else {
    features.resize(n_features);
    std::iota(features.begin(), features.end(), 0);
  }

  Tree tree;
  const int root = make_node(tree, rows, g, h, p);
  int leaves = 1;

  const auto apply_split = [&](FrontierEntry& e, std::vector<std::size_t>& lrows,
                               std::vector<std::size_t>& rrows) {
    partition_rows(x, e.rows, *e.cand, lrows, rrows);
    const int li = make_node(tree, lrows, g, h, p);
    const int ri = make_node(tree, rrows, g, h, p);
    TreeNode& nd = tree.nodes[static_cast<std::size_t>(e.node)];
    nd.feature = e.cand->feature;
    nd.threshold = e.cand->threshold;
    nd.default_left = e.cand->default_left;
    nd.left = li;
    nd.right = ri;
    ++leaves;
    return std::pair<int, int>{li, ri};
  };

  if (p.growth == Growth::kDepthWise) {
    std::deque<FrontierEntry> queue;
    queue.push_back({root, rows, 0, std::nullopt});
    while (!queue.empty()) {
      FrontierEntry e = std::move(queue.front());
      queue.pop_front();
      if (e.depth >= max_depth || leaves >= p.num_leaves) continue;
      e.cand = best_split(x, e.rows, g, h, features, p);
      if (!e.cand) continue;
      std::vector<std::size_t> lrows, rrows;
      const auto [li, ri] = apply_split(e, lrows, rrows);
      queue.push_back({li, std::move(lrows), e.depth + 1, std::nullopt});
      queue.push_back({ri, std::move(rrows), e.depth + 1, std::nullopt});
    }
  } else {
    std::vector<FrontierEntry> frontier;
    FrontierEntry root_entry{root, rows, 0, std::nullopt};
    if (max_depth > 0) root_entry.cand = best_split(x, rows, g, h, features, p);
    frontier.push_back(std::move(root_entry));
    while (leaves < p.num_leaves) {
      // Max-gain frontier leaf; ties go to the earliest-created entry.
      std::size_t pick = frontier.size();
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        if (!frontier[i].cand) continue;
        if (pick == frontier.size() || frontier[i].cand->gain > frontier[pick].cand->gain)
          pick = i;
      }
      if (pick == frontier.size()) break;
      FrontierEntry e = std::move(frontier[pick]);
      frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
      std::vector<std::size_t> lrows, rrows;
      const auto [li, ri] = apply_split(e, lrows, rrows);
      FrontierEntry le{li, std::move(lrows), e.depth + 1, std::nullopt};
      FrontierEntry re{ri, std::move(rrows), e.depth + 1, std::nullopt};
      if (le.depth < max_depth) le.cand = best_split(x, le.rows, g, h, features, p);
      if (re.depth < max_depth) re.cand = best_split(x, re.rows, g, h, features, p);
      frontier.push_back(std::move(le));
      frontier.push_back(std::move(re));
    }
  }
  return tree;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Boosting

inline GbdtModel fit_gbdt(const Matrix& x, const std::vector<double>& y, const Matrix* x_valid,
                          const std::vector<double>* y_valid, const TrainParams& params,
                          Metric metric = Metric::kMae,
                          const std::vector<std::string>& schema = {}) {
  params.validate();
  if (x.empty() || x.size() != y.size())
    throw std::invalid_argument("fit_gbdt: empty training set or row/target mismatch");
  for (double t : y)
    if (!std::isfinite(t)) throw std::invalid_argument("fit_gbdt: non-finite target");
  const bool has_valid = x_valid != nullptr && y_valid != nullptr && !x_valid->empty();
  if (has_valid && x_valid->size() != y_valid->size())
    throw std::invalid_argument("fit_gbdt: validation row/target mismatch");

  const std::size_t n = x.size();
  GbdtModel model;
  model.params = params;
  model.metric = metric;
  model.shrinkage = params.learning_rate;
  model.schema = schema;
  model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  std::vector<double> pred(n, model.base_score);
  std::vector<double> pred_valid(has_valid ? x_valid->size() : 0, model.base_score);
  std::vector<double> g(n, 0.0);
  const std::vector<double> h(n, 1.0);

  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

  Rng rng(params.seed);
  double best_valid = std::numeric_limits<double>::infinity();
  int best_round = -1;
  int rounds_since_best = 0;

  for (int round = 0; round < params.n_estimators; ++round) {
    std::vector<std::size_t> rows;
    if (params.subsample < 1.0) {
      const auto k = std::max<std::size_t>(
          1,
          static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n))));
      rows = rng.sample_indices(n, std::min(k, n));
    } else {
      rows = all_rows;
    }
    for (std::size_t i = 0; i < n; ++i) g[i] = pred[i] - y[i];

    Tree tree = detail::build_tree(x, rows, g, h, params, rng);
    for (std::size_t i = 0; i < n; ++i)
      pred[i] += params.learning_rate * tree.predict(x[i]);
    for (std::size_t i = 0; i < pred_valid.size(); ++i)
      pred_valid[i] += params.learning_rate * tree.predict((*x_valid)[i]);
    model.trees.push_back(std::move(tree));

    model.log.train.push_back(metric_value(metric, y, pred));
    if (has_valid) {
      const double vm = metric_value(metric, *y_valid, pred_valid);
      model.log.valid.push_back(vm);
      if (vm < best_valid - 1e-12) {
        best_valid = vm;
        best_round = round;
        rounds_since_best = 0;
      } else {
        ++rounds_since_best;
      }
      if (params.early_stopping_rounds > 0 && rounds_since_best >= params.early_stopping_rounds)
        break;
    }
  }

  if (has_valid && params.early_stopping_rounds > 0 && best_round >= 0)
    model.best_iteration = best_round;
  else
    model.best_iteration = static_cast<int>(model.trees.size()) - 1;
  return model;
}

inline std::map<std::string, double> split_count_importance(const GbdtModel& model) {
  std::map<std::string, double> counts;
  for (const auto& name : model.schema) counts[name] = 0.0;
  std::int64_t total = 0;
  for (int t = 0; t <= model.best_iteration && t < static_cast<int>(model.trees.size()); ++t) {
    for (const auto& node : model.trees[static_cast<std::size_t>(t)].nodes) {
      if (node.is_leaf()) continue;
      const auto f = static_cast<std::size_t>(node.feature);
      const std::string name =
          f < model.schema.size() ? model.schema[f] : "f" + std::to_string(node.feature);
      counts[name] += 1.0;
      ++total;
    }
  }
  if (total > 0)
    for (auto& [name, c] : counts) c /= static_cast<double>(total);
  return counts;
}

// Single regression tree fit directly on the targets: every node's value is
// the mean cost of the rows routed through it, so the export matches the
// usual CART reading. Regularizers and sampling are switched off.
inline Tree fit_cart(const Matrix& x, const std::vector<double>& y, TrainParams params) {
  params.learning_rate = 1.0;
  params.reg_alpha = 0.0;
  params.reg_lambda = 0.0;
  params.subsample = 1.0;
  params.colsample_bytree = 1.0;
  params.validate(/*allow_depth_zero=*/true);
  if (x.empty() || x.size() != y.size())
    throw std::invalid_argument("fit_cart: empty training set or row/target mismatch");
  for (double t : y)
    if (!std::isfinite(t)) throw std::invalid_argument("fit_cart: non-finite target");

  const std::size_t n = x.size();
  const double base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = base - y[i];
  const std::vector<double> h(n, 1.0);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});

  Rng rng(params.seed);
  Tree tree = detail::build_tree(x, rows, g, h, params, rng);
  for (auto& node : tree.nodes) node.value += base;
  return tree;
}

// ---------------------------------------------------------------------------
// JSON persistence

namespace detail {

inline nlohmann::json tree_node_to_json(const Tree& tree, int idx,
                                        const std::vector<std::string>& schema) {
  const TreeNode& nd = tree.nodes[static_cast<std::size_t>(idx)];
  nlohmann::json j;
  j["n"] = nd.n_samples;
  if (nd.is_leaf()) {
    j["weight"] = nd.value;
    return j;
  }
  const auto f = static_cast<std::size_t>(nd.feature);
  j["feature"] = f < schema.size() ? schema[f] : "f" + std::to_string(nd.feature);
  j["threshold"] = nd.threshold;
  j["default_left"] = nd.default_left;
  j["value"] = nd.value;
  j["left"] = tree_node_to_json(tree, nd.left, schema);
  j["right"] = tree_node_to_json(tree, nd.right, schema);
  return j;
}

inline int tree_node_from_json(const nlohmann::json& j, Tree& tree,
                               const std::map<std::string, int>& feature_index) {
  TreeNode node;
  node.n_samples = j.value("n", std::int64_t{0});
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(node);
  if (j.contains("weight")) {
    tree.nodes[static_cast<std::size_t>(idx)].value = j.at("weight").get<double>();
    return idx;
  }
  const std::string fname = j.at("feature").get<std::string>();
  auto it = feature_index.find(fname);
  if (it == feature_index.end()) throw SchemaError("model references unknown feature: " + fname);
  const double threshold = j.at("threshold").get<double>();
  const bool default_left = j.at("default_left").get<bool>();
  const double value = j.value("value", 0.0);
  const int li = tree_node_from_json(j.at("left"), tree, feature_index);
  const int ri = tree_node_from_json(j.at("right"), tree, feature_index);
  TreeNode& nd = tree.nodes[static_cast<std::size_t>(idx)];
  nd.feature = it->second;
  nd.threshold = threshold;
  nd.default_left = default_left;
  nd.value = value;
  nd.left = li;
  nd.right = ri;
  return idx;
}

inline nlohmann::json params_to_json(const TrainParams& p) {
  nlohmann::json j;
  j["learning_rate"] = p.learning_rate;
  j["max_depth"] = p.max_depth;
  j["n_estimators"] = p.n_estimators;
  j["subsample"] = p.subsample;
  j["colsample_bytree"] = p.colsample_bytree;
  j["gamma"] = p.gamma;
  j["reg_alpha"] = p.reg_alpha;
  j["reg_lambda"] = p.reg_lambda;
  j["early_stopping_rounds"] = p.early_stopping_rounds;
  j["num_leaves"] = p.num_leaves;
  j["min_child_samples"] = p.min_child_samples;
  j["growth"] = growth_name(p.growth);
  j["seed"] = p.seed;
  return j;
}

inline TrainParams params_from_json(const nlohmann::json& j) {
  TrainParams p;
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.n_estimators = j.value("n_estimators", p.n_estimators);
  p.subsample = j.value("subsample", p.subsample);
  p.colsample_bytree = j.value("colsample_bytree", p.colsample_bytree);
  p.gamma = j.value("gamma", p.gamma);
  p.reg_alpha = j.value("reg_alpha", p.reg_alpha);
  p.reg_lambda = j.value("reg_lambda", p.reg_lambda);
  p.early_stopping_rounds = j.value("early_stopping_rounds", p.early_stopping_rounds);
  p.num_leaves = j.value("num_leaves", p.num_leaves);
  p.min_child_samples = j.value("min_child_samples", p.min_child_samples);
  p.growth = growth_from_name(j.value("growth", std::string(growth_name(p.growth))));
  p.seed = j.value("seed", p.seed);
  return p;
}

}  // namespace detail

inline nlohmann::json train_params_to_json(const TrainParams& p) {
  return detail::params_to_json(p);
}

inline TrainParams train_params_from_json(const nlohmann::json& j) {
  return detail::params_from_json(j);
}

inline nlohmann::json gbdt_to_json(const GbdtModel& model) {
  nlohmann::json j;
  j["format"] = "dxfcost-gbdt-v1";
  j["base_score"] = model.base_score;
  j["shrinkage"] = model.shrinkage;
  j["best_iteration"] = model.best_iteration;
  j["metric"] = metric_name(model.metric);
  j["schema"] = model.schema;
  j["params"] = detail::params_to_json(model.params);
  j["log"] = {{"train", model.log.train}, {"valid", model.log.valid}};
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees)
    trees.push_back(detail::tree_node_to_json(tree, 0, model.schema));
  j["trees"] = std::move(trees);
  return j;
}

inline GbdtModel gbdt_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "dxfcost-gbdt-v1")
    throw SchemaError("not a gbdt model file (missing or wrong format tag)");
  GbdtModel model;
  try {
    model.base_score = j.at("base_score").get<double>();
    model.shrinkage = j.at("shrinkage").get<double>();
    model.best_iteration = j.at("best_iteration").get<int>();
    model.metric = metric_from_name(j.value("metric", "mae"));
    model.schema = j.at("schema").get<std::vector<std::string>>();
    model.params = detail::params_from_json(j.value("params", nlohmann::json::object()));
    if (j.contains("log")) {
      model.log.train = j.at("log").value("train", std::vector<double>{});
      model.log.valid = j.at("log").value("valid", std::vector<double>{});
    }
    std::map<std::string, int> feature_index;
    for (std::size_t i = 0; i < model.schema.size(); ++i)
      feature_index[model.schema[i]] = static_cast<int>(i);
    for (const auto& tj : j.at("trees")) {
      Tree tree;
      detail::tree_node_from_json(tj, tree, feature_index);
      model.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed gbdt model file: ") + e.what());
  }
  return model;
}

inline void save_gbdt(const GbdtModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << gbdt_to_json(model).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline GbdtModel load_gbdt(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return gbdt_from_json(j);
}

}  // namespace dxfcost
