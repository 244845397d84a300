#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "dxfcost/gbdt.hpp"
#include "dxfcost/rng.hpp"

using namespace dxfcost;
using Catch::Matchers::WithinAbs;

namespace {

Matrix random_matrix(Rng& rng, std::size_t n, std::size_t f) {
  Matrix x(n, std::vector<double>(f));
  for (auto& row : x)
    for (auto& v : row) v = rng.uniform(-10.0, 10.0);
  return x;
}

// Independent root-split oracle: enumerate every feature and every midpoint
// threshold, score with the second-order gain formula directly.
struct OracleSplit {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

OracleSplit oracle_best_split(const Matrix& x, const std::vector<double>& g,
                              const TrainParams& p) {
  const auto soft = [&](double G) {
    if (G > p.reg_alpha) return G - p.reg_alpha;
    if (G < -p.reg_alpha) return G + p.reg_alpha;
    return 0.0;
  };
  const auto score = [&](double G, double H) {
    const double t = soft(G);
    return t * t / (H + p.reg_lambda);
  };

  const std::size_t n = x.size();
  double g_total = 0.0;
  for (double v : g) g_total += v;
  const double parent = score(g_total, static_cast<double>(n));

  OracleSplit best;
  for (std::size_t f = 0; f < x[0].size(); ++f) {
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < n; ++i) order.push_back({x[i][f], i});
    std::sort(order.begin(), order.end());
    for (std::size_t cut = 1; cut < n; ++cut) {
      if (order[cut - 1].first == order[cut].first) continue;
      double thr = (order[cut - 1].first + order[cut].first) / 2.0;
      if (!(thr > order[cut - 1].first && thr < order[cut].first)) thr = order[cut - 1].first;
      double gl = 0.0;
      std::size_t nl = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (x[i][f] <= thr) {
          gl += g[i];
          ++nl;
        }
      const std::size_t nr = n - nl;
      if (nl < static_cast<std::size_t>(p.min_child_samples) ||
          nr < static_cast<std::size_t>(p.min_child_samples))
        continue;
      const double gain =
          0.5 * (score(gl, static_cast<double>(nl)) + score(g_total - gl, static_cast<double>(nr)) -
                 parent) -
          p.gamma;
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = static_cast<int>(f);
        best.threshold = thr;
      }
    }
  }
  return best;
}

std::size_t count_leaves(const Tree& tree) {
  std::size_t leaves = 0;
  for (const auto& nd : tree.nodes)
    if (nd.is_leaf()) ++leaves;
  return leaves;
}

int tree_depth(const Tree& tree, int idx = 0) {
  const auto& nd = tree.nodes[static_cast<std::size_t>(idx)];
  if (nd.is_leaf()) return 0;
  return 1 + std::max(tree_depth(tree, nd.left), tree_depth(tree, nd.right));
}

}  // namespace

TEST_CASE("a single stump reproduces the hand-worked split") {
  // Two rows, gradients +/-5 around the base score of 5. With lambda = 0 the
  // split scores are 25 each, the parent scores 0, so the gain is 25 and the
  // leaf weights are -/+5.
  const Matrix x = {{0.0}, {1.0}};
  const std::vector<double> y = {0.0, 10.0};
  TrainParams p;
  p.learning_rate = 1.0;
  p.n_estimators = 1;
  p.max_depth = 1;
  p.min_child_samples = 1;
  p.reg_lambda = 0.0;
  p.early_stopping_rounds = 0;

  const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p);
  REQUIRE(m.trees.size() == 1);
  const Tree& t = m.trees[0];
  REQUIRE(t.nodes.size() == 3);
  CHECK(m.base_score == 5.0);
  CHECK(t.nodes[0].feature == 0);
  CHECK_THAT(t.nodes[0].threshold, WithinAbs(0.5, 1e-12));
  const TreeNode& left = t.nodes[static_cast<std::size_t>(t.nodes[0].left)];
  const TreeNode& right = t.nodes[static_cast<std::size_t>(t.nodes[0].right)];
  CHECK_THAT(left.value, WithinAbs(-5.0, 1e-12));
  CHECK_THAT(right.value, WithinAbs(5.0, 1e-12));
  CHECK_THAT(m.predict({0.0}), WithinAbs(0.0, 1e-12));
  CHECK_THAT(m.predict({1.0}), WithinAbs(10.0, 1e-12));
}

TEST_CASE("root split agrees with a brute-force oracle") {
  Rng rng(421);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(8, 60));
    const std::size_t f = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const Matrix x = random_matrix(rng, n, f);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.uniform(-20.0, 20.0);

    TrainParams p;
    p.learning_rate = 1.0;
    p.n_estimators = 1;
    p.max_depth = 1;
    p.min_child_samples = static_cast<int>(rng.uniform_int(1, 4));
    p.gamma = rng.uniform(0.0, 0.5);
    p.reg_alpha = rng.uniform(0.0, 1.0);
    p.reg_lambda = rng.uniform(0.0, 2.0);
    p.early_stopping_rounds = 0;

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = mean - y[i];

    const OracleSplit want = oracle_best_split(x, g, p);
    const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p);

    if (want.feature < 0) {
      // No admissible split anywhere: the single tree must be a bare leaf.
      REQUIRE(m.trees.size() == 1);
      CHECK(m.trees[0].nodes[0].is_leaf());
    } else {
      REQUIRE(!m.trees.empty());
      const TreeNode& root = m.trees[0].nodes[0];
      REQUIRE(!root.is_leaf());
      // The engine's winning gain must equal the oracle maximum; with random
      // real-valued gains the argmax is unique, so feature and threshold
      // match too.
      CHECK(root.feature == want.feature);
      CHECK_THAT(root.threshold, WithinAbs(want.threshold, 1e-9));
    }
  }
}

TEST_CASE("training MSE is non-increasing over 200 full-sample rounds") {
  Rng rng(77);
  const Matrix x = random_matrix(rng, 120, 4);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = 3.0 * x[i][0] - 2.0 * std::abs(x[i][1]) + 0.5 * x[i][2] * x[i][3] +
           rng.normal(0.0, 0.5);

  TrainParams p;
  p.n_estimators = 200;
  p.learning_rate = 0.1;
  p.max_depth = 3;
  p.min_child_samples = 2;
  p.early_stopping_rounds = 0;

  const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p, Metric::kMse);
  REQUIRE(m.log.train.size() == 200);
  for (std::size_t r = 1; r < m.log.train.size(); ++r)
    CHECK(m.log.train[r] <= m.log.train[r - 1] + 1e-9);
}

TEST_CASE("an unrestricted tree drives the training residual to zero") {
  Rng rng(88);
  const std::size_t n = 100;
  Matrix x(n, std::vector<double>(1));
  std::vector<double> y(n);
  std::set<double> seen;
  for (std::size_t i = 0; i < n; ++i) {
    double v = rng.uniform(-50.0, 50.0);
    while (seen.count(v)) v = rng.uniform(-50.0, 50.0);
    seen.insert(v);
    x[i][0] = v;
    y[i] = rng.uniform(-10.0, 10.0);
  }

  TrainParams p;
  p.max_depth = 0;  // unlimited
  p.min_child_samples = 1;
  p.num_leaves = static_cast<int>(n) + 1;
  p.reg_lambda = 0.0;

  const Tree t = fit_cart(x, y, p);
  for (std::size_t i = 0; i < n; ++i) CHECK_THAT(t.predict(x[i]), WithinAbs(y[i], 1e-9));
}

TEST_CASE("cart leaves hold plain node means") {
  const Matrix x = {{0.0}, {1.0}, {2.0}, {3.0}};
  const std::vector<double> y = {1.0, 3.0, 11.0, 13.0};
  TrainParams p;
  p.max_depth = 1;
  p.min_child_samples = 1;
  const Tree t = fit_cart(x, y, p);
  REQUIRE(!t.nodes[0].is_leaf());
  CHECK_THAT(t.nodes[0].threshold, WithinAbs(1.5, 1e-12));
  CHECK_THAT(t.predict({0.0}), WithinAbs(2.0, 1e-12));
  CHECK_THAT(t.predict({3.0}), WithinAbs(12.0, 1e-12));
  // Internal nodes carry their own sample mean.
  CHECK_THAT(t.nodes[0].value, WithinAbs(7.0, 1e-12));
  CHECK(t.nodes[0].n_samples == 4);
}

TEST_CASE("early stopping halts exactly patience rounds after the best round") {
  // Validation targets are swapped so every boosting round makes the
  // validation error strictly worse; the first round is the best one.
  const Matrix x = {{0.0}, {1.0}};
  const std::vector<double> y = {0.0, 10.0};
  const std::vector<double> y_swapped = {10.0, 0.0};

  TrainParams p;
  p.learning_rate = 0.1;
  p.n_estimators = 200;
  p.max_depth = 1;
  p.min_child_samples = 1;
  p.early_stopping_rounds = 20;

  const GbdtModel m = fit_gbdt(x, y, &x, &y_swapped, p);
  CHECK(m.best_iteration == 0);
  CHECK(m.trees.size() == 21);  // best round + patience further rounds
  CHECK(m.log.valid.size() == 21);
  for (std::size_t r = 1; r < m.log.valid.size(); ++r) CHECK(m.log.valid[r] > m.log.valid[r - 1]);

  // Prediction uses only the trees up to the best iteration.
  GbdtModel first_only = m;
  first_only.trees.resize(1);
  first_only.best_iteration = 0;
  CHECK(m.predict({0.0}) == first_only.predict({0.0}));
  CHECK(m.predict({1.0}) == first_only.predict({1.0}));
}

TEST_CASE("without early stopping all rounds train and the last tree counts") {
  const Matrix x = {{0.0}, {1.0}};
  const std::vector<double> y = {0.0, 10.0};
  TrainParams p;
  p.n_estimators = 17;
  p.max_depth = 1;
  p.min_child_samples = 1;
  p.early_stopping_rounds = 0;
  const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p);
  CHECK(m.trees.size() == 17);
  CHECK(m.best_iteration == 16);
}

TEST_CASE("early stopping keeps improving sequences to the end") {
  Rng rng(5150);
  const Matrix x = random_matrix(rng, 80, 3);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i][0] * 2.0 + x[i][1];

  TrainParams p;
  p.n_estimators = 40;
  p.max_depth = 3;
  p.min_child_samples = 2;
  p.early_stopping_rounds = 20;

  // Validation equals training data, so the metric keeps improving and no
  // stop fires before the round budget.
  const GbdtModel m = fit_gbdt(x, y, &x, &y, p);
  CHECK(m.trees.size() == 40);
}

TEST_CASE("nonlinear regression beats the mean predictor by half") {
  Rng rng(2024);
  const std::size_t n = 2000;
  Matrix x = random_matrix(rng, n, 5);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = std::sin(x[i][0]) * 4.0 + x[i][1] * x[i][2] + std::abs(x[i][3]) +
           rng.normal(0.0, 0.3);

  const std::size_t n_train = 1400;
  Matrix x_train(x.begin(), x.begin() + n_train);
  Matrix x_test(x.begin() + n_train, x.end());
  std::vector<double> y_train(y.begin(), y.begin() + n_train);
  std::vector<double> y_test(y.begin() + n_train, y.end());

  TrainParams p;
  p.n_estimators = 300;
  p.early_stopping_rounds = 0;
  p.min_child_samples = 5;

  const GbdtModel m = fit_gbdt(x_train, y_train, nullptr, nullptr, p);

  double mean = 0.0;
  for (double v : y_train) mean += v;
  mean /= static_cast<double>(n_train);

  double model_mae = 0.0, mean_mae = 0.0;
  for (std::size_t i = 0; i < x_test.size(); ++i) {
    model_mae += std::abs(m.predict(x_test[i]) - y_test[i]);
    mean_mae += std::abs(mean - y_test[i]);
  }
  CHECK(model_mae < 0.5 * mean_mae);
}

TEST_CASE("huge L1 regularization collapses every leaf to zero") {
  Rng rng(9);
  const Matrix x = random_matrix(rng, 50, 3);
  std::vector<double> y(x.size());
  for (auto& v : y) v = rng.uniform(0.0, 10.0);

  TrainParams p;
  p.n_estimators = 10;
  p.reg_alpha = 1e9;
  p.min_child_samples = 1;

  const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(m.predict(x[i]) == m.base_score);
}

TEST_CASE("gamma prunes weak splits") {
  const Matrix x = {{0.0}, {1.0}, {2.0}, {3.0}};
  const std::vector<double> y = {1.0, 1.1, 0.9, 1.0};
  TrainParams p;
  p.n_estimators = 1;
  p.min_child_samples = 1;
  p.gamma = 100.0;
  const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p);
  CHECK(m.trees[0].nodes[0].is_leaf());
}

TEST_CASE("min_child_samples rejects undersized children") {
  const Matrix x = {{0.0}, {1.0}, {2.0}, {3.0}};
  const std::vector<double> y = {0.0, 0.0, 10.0, 10.0};
  TrainParams p;
  p.n_estimators = 1;
  p.learning_rate = 1.0;

  p.min_child_samples = 3;  // any split leaves one side with < 3 rows
  CHECK(fit_gbdt(x, y, nullptr, nullptr, p).trees[0].nodes[0].is_leaf());

  p.min_child_samples = 2;
  CHECK_FALSE(fit_gbdt(x, y, nullptr, nullptr, p).trees[0].nodes[0].is_leaf());
}

TEST_CASE("missing values route along the learned default direction") {
  // Missing rows share the low-target side, so the default direction must
  // learn to send missing left.
  const double kNan = kMissing;
  const Matrix x = {{0.0}, {0.5}, {1.0}, {1.5}, {kNan}, {kNan}};
  const std::vector<double> y = {0.0, 0.0, 10.0, 10.0, 0.0, 0.0};
  TrainParams p;
  p.learning_rate = 1.0;
  p.n_estimators = 1;
  p.max_depth = 1;
  p.min_child_samples = 1;
  p.reg_lambda = 0.0;

  const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p);
  const TreeNode& root = m.trees[0].nodes[0];
  REQUIRE(!root.is_leaf());
  CHECK(root.default_left);
  CHECK_THAT(m.predict({kNan}), WithinAbs(0.0, 1e-9));

  // Flip the missing rows to the high-target side and the direction follows.
  const std::vector<double> y2 = {0.0, 0.0, 10.0, 10.0, 10.0, 10.0};
  const GbdtModel m2 = fit_gbdt(x, y2, nullptr, nullptr, p);
  REQUIRE(!m2.trees[0].nodes[0].is_leaf());
  CHECK_FALSE(m2.trees[0].nodes[0].default_left);
  CHECK_THAT(m2.predict({kNan}), WithinAbs(10.0, 1e-9));
}

TEST_CASE("growth policies respect their structural budgets") {
  Rng rng(303);
  const Matrix x = random_matrix(rng, 200, 4);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = x[i][0] * x[i][1] + std::sin(x[i][2] * 2.0) * 3.0;

  TrainParams p;
  p.n_estimators = 5;
  p.max_depth = 4;
  p.num_leaves = 6;
  p.min_child_samples = 1;

  SECTION("depth-wise trees obey depth and leaf caps") {
    p.growth = Growth::kDepthWise;
    const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p);
    for (const auto& t : m.trees) {
      CHECK(tree_depth(t) <= p.max_depth);
      CHECK(count_leaves(t) <= static_cast<std::size_t>(p.num_leaves));
    }
  }
  SECTION("leaf-wise trees obey depth and leaf caps") {
    p.growth = Growth::kLeafWise;
    const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p);
    for (const auto& t : m.trees) {
      CHECK(tree_depth(t) <= p.max_depth);
      CHECK(count_leaves(t) <= static_cast<std::size_t>(p.num_leaves));
    }
  }
  SECTION("leaf-wise fits no worse than depth-wise at equal leaf budget") {
    p.max_depth = 12;
    p.num_leaves = 8;
    p.growth = Growth::kDepthWise;
    const GbdtModel dw = fit_gbdt(x, y, nullptr, nullptr, p, Metric::kMse);
    p.growth = Growth::kLeafWise;
    const GbdtModel lw = fit_gbdt(x, y, nullptr, nullptr, p, Metric::kMse);
    CHECK(lw.log.train.back() <= dw.log.train.back() + 1e-9);
  }
}

TEST_CASE("row and feature subsampling stay within bounds and deterministic") {
  Rng rng(404);
  const Matrix x = random_matrix(rng, 100, 6);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i][0] - x[i][5];

  TrainParams p;
  p.n_estimators = 10;
  p.subsample = 0.6;
  p.colsample_bytree = 0.5;
  p.min_child_samples = 1;
  p.seed = 12345;

  const GbdtModel a = fit_gbdt(x, y, nullptr, nullptr, p);
  const GbdtModel b = fit_gbdt(x, y, nullptr, nullptr, p);
  REQUIRE(a.trees.size() == b.trees.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(a.predict(x[i]) == b.predict(x[i]));

  // At most ceil(0.5 * 6) = 3 distinct features per tree.
  for (const auto& t : a.trees) {
    std::set<int> used;
    for (const auto& nd : t.nodes)
      if (!nd.is_leaf()) used.insert(nd.feature);
    CHECK(used.size() <= 3);
  }

  p.seed = 54321;
  const GbdtModel c = fit_gbdt(x, y, nullptr, nullptr, p);
  bool any_differs = false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (a.predict(x[i]) != c.predict(x[i])) any_differs = true;
  CHECK(any_differs);
}

TEST_CASE("split-count importance tallies decisions per feature") {
  const Matrix x = {{0.0, 5.0}, {1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}};
  const std::vector<double> y = {0.0, 1.0, 10.0, 11.0};
  TrainParams p;
  p.n_estimators = 4;
  p.max_depth = 2;
  p.min_child_samples = 1;
  p.learning_rate = 0.5;
  const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p, Metric::kMae,
                               {"width", "constant"});
  const auto imp = split_count_importance(m);
  REQUIRE(imp.count("width") == 1);
  REQUIRE(imp.count("constant") == 1);
  CHECK(imp.at("constant") == 0.0);
  CHECK(imp.at("width") > 0.0);
  double total = 0.0;
  for (const auto& [name, share] : imp) total += share;
  CHECK_THAT(total, WithinAbs(1.0, 1e-12));
}

TEST_CASE("model JSON round trip preserves predictions bit for bit") {
  Rng rng(606);
  const Matrix x = random_matrix(rng, 150, 5);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = std::sin(x[i][0]) + x[i][1] * 0.3 + (x[i][2] > 0 ? 2.0 : -1.0);

  TrainParams p;
  p.n_estimators = 25;
  p.max_depth = 4;
  p.subsample = 0.8;
  p.colsample_bytree = 0.8;
  p.reg_alpha = 0.1;
  p.seed = 99;

  const GbdtModel m =
      fit_gbdt(x, y, nullptr, nullptr, p, Metric::kMape, {"a", "b", "c", "d", "e"});
  const GbdtModel back = gbdt_from_json(gbdt_to_json(m));

  CHECK(back.base_score == m.base_score);
  CHECK(back.shrinkage == m.shrinkage);
  CHECK(back.best_iteration == m.best_iteration);
  CHECK(back.schema == m.schema);
  CHECK(back.metric == m.metric);
  REQUIRE(back.trees.size() == m.trees.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(back.predict(x[i]) == m.predict(x[i]));

  // Serialization itself is stable: dump(parse(dump)) is identical text.
  const std::string once = gbdt_to_json(m).dump();
  const std::string twice = gbdt_to_json(back).dump();
  CHECK(once == twice);
}

TEST_CASE("named prediction aligns features through the schema") {
  const Matrix x = {{0.0, 1.0}, {1.0, 0.0}, {2.0, 1.0}, {3.0, 0.0}};
  const std::vector<double> y = {0.0, 2.0, 10.0, 12.0};
  TrainParams p;
  p.n_estimators = 5;
  p.min_child_samples = 1;
  const GbdtModel m = fit_gbdt(x, y, nullptr, nullptr, p, Metric::kMae, {"size", "flag"});

  CHECK(m.predict({{"size", 2.0}, {"flag", 1.0}}) == m.predict(std::vector<double>{2.0, 1.0}));
  // Unknown names are ignored; absent names are treated as missing.
  CHECK(m.predict({{"size", 2.0}, {"flag", 1.0}, {"bogus", 9.0}}) ==
        m.predict(std::vector<double>{2.0, 1.0}));
  CHECK(m.predict({{"size", 2.0}}) == m.predict(std::vector<double>{2.0, kMissing}));
}

TEST_CASE("parameter validation rejects out-of-range values") {
  TrainParams p;
  p.learning_rate = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = TrainParams{};
  p.subsample = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = TrainParams{};
  p.max_depth = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_NOTHROW(p.validate(true));
  p = TrainParams{};
  p.num_leaves = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = TrainParams{};
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("degenerate training inputs are rejected") {
  CHECK_THROWS_AS(fit_gbdt({}, {}, nullptr, nullptr, TrainParams{}), std::invalid_argument);
  CHECK_THROWS_AS(fit_gbdt({{1.0}}, {1.0, 2.0}, nullptr, nullptr, TrainParams{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_gbdt({{1.0}}, {std::nan("")}, nullptr, nullptr, TrainParams{}),
                  std::invalid_argument);
}

TEST_CASE("train params JSON round trip") {
  TrainParams p;
  p.learning_rate = 0.07;
  p.max_depth = 9;
  p.num_leaves = 33;
  p.growth = Growth::kLeafWise;
  p.reg_alpha = 0.25;
  const TrainParams back = train_params_from_json(train_params_to_json(p));
  CHECK(back.learning_rate == p.learning_rate);
  CHECK(back.max_depth == p.max_depth);
  CHECK(back.num_leaves == p.num_leaves);
  CHECK(back.growth == p.growth);
  CHECK(back.reg_alpha == p.reg_alpha);
}
