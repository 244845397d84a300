#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dxfcost/common.hpp"
#include "dxfcost/gbdt.hpp"
#include "dxfcost/metrics.hpp"
#include "dxfcost/pipeline.hpp"
#include "dxfcost/rng.hpp"
#include "dxfcost/split.hpp"

namespace dxfcost {

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
};

// Tuned hyperparameter ranges; n_estimators and early stopping stay fixed.
struct SearchSpace {
  RealRange learning_rate{0.01, 0.30, true};
  IntRange max_depth{3, 10};
  RealRange subsample{0.5, 1.0};
  RealRange colsample_bytree{0.3, 1.0};
  RealRange gamma{0.0, 1.0};
  RealRange reg_alpha{0.0, 5.0};
  RealRange reg_lambda{0.0, 5.0};
  IntRange num_leaves{15, 64};
  IntRange min_child_samples{5, 30};
  std::vector<Growth> growth_options{Growth::kDepthWise, Growth::kLeafWise};

  void validate() const {
    const auto check_real = [](const RealRange& r, const char* name) {
      if (!(r.lo <= r.hi)) throw std::invalid_argument(std::string("search range ") + name);
      if (r.log_scale && r.lo <= 0.0)
        throw std::invalid_argument(std::string("log-scale range needs lo > 0: ") + name);
    };
    const auto check_int = [](const IntRange& r, const char* name) {
      if (r.lo > r.hi) throw std::invalid_argument(std::string("search range ") + name);
    };
    check_real(learning_rate, "learning_rate");
    check_int(max_depth, "max_depth");
    check_real(subsample, "subsample");
    check_real(colsample_bytree, "colsample_bytree");
    check_real(gamma, "gamma");
    check_real(reg_alpha, "reg_alpha");
    check_real(reg_lambda, "reg_lambda");
    check_int(num_leaves, "num_leaves");
    check_int(min_child_samples, "min_child_samples");
    if (growth_options.empty()) throw std::invalid_argument("no growth options");
  }
};

namespace detail {

inline double sample_real(const RealRange& r, Rng& rng) {
  if (r.lo == r.hi) return r.lo;
  if (r.log_scale) return std::exp(rng.uniform(std::log(r.lo), std::log(r.hi)));
  return rng.uniform(r.lo, r.hi);
}

inline int sample_int(const IntRange& r, Rng& rng) {
  return static_cast<int>(rng.uniform_int(r.lo, r.hi));
}

}  // namespace detail

inline TrainParams sample_params(const SearchSpace& space, const TrainParams& base, Rng& rng) {
  TrainParams p = base;
  p.learning_rate = detail::sample_real(space.learning_rate, rng);
  p.max_depth = detail::sample_int(space.max_depth, rng);
  p.subsample = detail::sample_real(space.subsample, rng);
  p.colsample_bytree = detail::sample_real(space.colsample_bytree, rng);
  p.gamma = detail::sample_real(space.gamma, rng);
  p.reg_alpha = detail::sample_real(space.reg_alpha, rng);
  p.reg_lambda = detail::sample_real(space.reg_lambda, rng);
  p.num_leaves = detail::sample_int(space.num_leaves, rng);
  p.min_child_samples = detail::sample_int(space.min_child_samples, rng);
  p.growth = space.growth_options[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(space.growth_options.size()) - 1))];
  return p;
}

// ---------------------------------------------------------------------------
// Cross-validation over a corpus. Each fold refits every group reference on
// its own training rows, so no bin statistics leak from the held-out rows.

namespace detail {

struct FoldModels {
  std::map<std::string, GroupModel> groups;
  std::map<std::string, FeatureSchema> schemas;
  double fallback = 0.0;
};

inline FoldModels fit_fold(const Corpus& corpus, const std::vector<std::size_t>& train_ids,
                           const std::vector<std::size_t>& valid_ids, const TrainParams& params,
                           Metric metric) {
  FoldModels out;
  double sum = 0.0;
  for (std::size_t r : train_ids) sum += corpus.rows[r].cost;
  out.fallback = train_ids.empty() ? 0.0 : sum / static_cast<double>(train_ids.size());

  const auto by_group = group_rows(corpus, train_ids);
  const auto valid_by_group = group_rows(corpus, valid_ids);
  for (const auto& [group, rows] : by_group) {
    std::vector<QuantitySet> train_qs;
    for (std::size_t r : rows) train_qs.push_back(corpus.rows[r].qs);
    GroupReference ref = fit_group_reference(group, train_qs, corpus.lexicon);
    const FeatureSchema schema = make_schema(ref.vocabulary);

    Matrix x_train, x_valid;
    std::vector<double> y_train, y_valid;
    for (std::size_t r : rows) {
      x_train.push_back(featurize(corpus.rows[r].qs, &ref, schema).values);
      y_train.push_back(corpus.rows[r].cost);
    }
    auto vit = valid_by_group.find(group);
    if (vit != valid_by_group.end()) {
      for (std::size_t r : vit->second) {
        x_valid.push_back(featurize(corpus.rows[r].qs, &ref, schema).values);
        y_valid.push_back(corpus.rows[r].cost);
      }
    }
    GbdtModel model = fit_gbdt(x_train, y_train, x_valid.empty() ? nullptr : &x_valid,
                               y_valid.empty() ? nullptr : &y_valid, params, metric,
                               schema.names);
    out.schemas.emplace(group, schema);
    out.groups.emplace(group, GroupModel{std::move(ref), std::move(model)});
  }
  return out;
}

inline double fold_predict(const FoldModels& models, const Corpus& corpus, std::size_t row) {
  auto it = models.groups.find(corpus.rows[row].group);
  if (it == models.groups.end()) return models.fallback;
  const FeatureSchema& schema = models.schemas.at(corpus.rows[row].group);
  const FeatureVector fv = featurize(corpus.rows[row].qs, &it->second.reference, schema);
  return it->second.model.predict(fv.values);
}

}  // namespace detail

// Mean held-out metric over k folds.
inline double cv_objective(const Corpus& corpus, const std::vector<std::size_t>& row_ids,
                           const TrainParams& params, Metric metric, std::size_t k,
                           std::uint64_t seed) {
  const auto folds = kfold(row_ids, k, seed);
  double total = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_ids;
    for (std::size_t j = 0; j < folds.size(); ++j)
      if (j != f) train_ids.insert(train_ids.end(), folds[j].begin(), folds[j].end());
    const detail::FoldModels models =
        detail::fit_fold(corpus, train_ids, folds[f], params, metric);
    std::vector<double> y, yhat;
    for (std::size_t r : folds[f]) {
      y.push_back(corpus.rows[r].cost);
      yhat.push_back(detail::fold_predict(models, corpus, r));
    }
    total += metric_value(metric, y, yhat);
  }
  return total / static_cast<double>(folds.size());
}

// ---------------------------------------------------------------------------
// Grid search (max_depth x learning_rate, CV MAE objective)

struct GridCell {
  int max_depth = 0;
  double learning_rate = 0.0;
  double mean_mae = 0.0;
};

struct GridResult {
  std::vector<GridCell> cells;  // row-major: depths outer, rates inner
  std::size_t best_index = 0;
};

inline GridResult grid_search(const Corpus& corpus, const std::vector<std::size_t>& row_ids,
                              const std::vector<int>& depths, const std::vector<double>& rates,
                              const TrainParams& base, std::size_t k, std::uint64_t seed) {
  if (depths.empty() || rates.empty())
    throw std::invalid_argument("grid_search: empty value lists");
  GridResult result;
  for (int depth : depths) {
    for (double lr : rates) {
      TrainParams p = base;
      p.max_depth = depth;
      p.learning_rate = lr;
      GridCell cell;
      cell.max_depth = depth;
      cell.learning_rate = lr;
      cell.mean_mae = cv_objective(corpus, row_ids, p, Metric::kMae, k, seed);
      result.cells.push_back(cell);
    }
  }
  for (std::size_t i = 1; i < result.cells.size(); ++i) {
    const GridCell& c = result.cells[i];
    const GridCell& b = result.cells[result.best_index];
    if (c.mean_mae < b.mean_mae ||
        (c.mean_mae == b.mean_mae &&
         (c.max_depth < b.max_depth ||
          (c.max_depth == b.max_depth && c.learning_rate < b.learning_rate))))
      result.best_index = i;
  }
  return result;
}

inline void write_grid_csv(const GridResult& grid, std::ostream& os) {
  os << "max_depth,learning_rate,mean_mae\n";
  for (const auto& cell : grid.cells)
    os << cell.max_depth << ',' << format_double(cell.learning_rate) << ','
       << format_double(cell.mean_mae) << '\n';
}

// ---------------------------------------------------------------------------
// Random search (CV MAPE objective)

struct Trial {
  TrainParams params;
  double objective = 0.0;
};

struct RandomSearchResult {
  std::vector<Trial> trials;
  std::size_t best_index = 0;
};

inline RandomSearchResult random_search(const Corpus& corpus,
                                        const std::vector<std::size_t>& row_ids,
                                        const SearchSpace& space, const TrainParams& base,
                                        int n_trials, std::size_t k, std::uint64_t seed) {
  if (n_trials < 1) throw std::invalid_argument("random_search: n_trials must be >= 1");
  space.validate();
  Rng rng(seed);
  RandomSearchResult result;
  for (int t = 0; t < n_trials; ++t) {
    Trial trial;
    trial.params = sample_params(space, base, rng);
    trial.params.seed = seed;
    trial.objective = cv_objective(corpus, row_ids, trial.params, Metric::kMape, k, seed);
    result.trials.push_back(std::move(trial));
    if (result.trials[result.best_index].objective > result.trials.back().objective)
      result.best_index = result.trials.size() - 1;
  }
  return result;
}

inline void write_trials_csv(const RandomSearchResult& result, std::ostream& os) {
  os << "trial,learning_rate,max_depth,subsample,colsample_bytree,gamma,reg_alpha,reg_lambda,"
        "num_leaves,min_child_samples,growth,cv_mape\n";
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const TrainParams& p = result.trials[i].params;
    os << i << ',' << format_double(p.learning_rate) << ',' << p.max_depth << ','
       << format_double(p.subsample) << ',' << format_double(p.colsample_bytree) << ','
       << format_double(p.gamma) << ',' << format_double(p.reg_alpha) << ','
       << format_double(p.reg_lambda) << ',' << p.num_leaves << ',' << p.min_child_samples
       << ',' << growth_name(p.growth) << ',' << format_double(result.trials[i].objective)
       << '\n';
  }
}

}  // namespace dxfcost
