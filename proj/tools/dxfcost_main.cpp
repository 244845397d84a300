// dxfcost: DXF feature extraction, cost-model training, and explanation in
// one binary. Every subcommand writes plain file artifacts (CSV/JSON/DOT) and
// funnels all randomness through --seed, so reruns are byte-identical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dxfcost/dxfcost.hpp"

namespace {

using namespace dxfcost;

// Values from --config override flags.
class ConfigFile {
 public:
  void load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + path);
    try {
      in >> j_;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
    if (!j_.is_object()) throw SchemaError("config must be a JSON object: " + path);
    loaded_ = true;
  }

  template <typename T>
  void get(const char* key, T& var) const {
    if (!loaded_ || !j_.contains(key)) return;
    try {
      var = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("config key '") + key + "': " + e.what());
    }
  }

  bool loaded() const { return loaded_; }
  const nlohmann::json& json() const { return j_; }

 private:
  nlohmann::json j_;
  bool loaded_ = false;
};

struct ParamFlags {
  TrainParams base;
  std::string growth_str = "depth_wise";

  void attach(CLI::App* cmd) {
    cmd->add_option("--learning-rate", base.learning_rate, "Shrinkage per boosting round");
    cmd->add_option("--max-depth", base.max_depth, "Maximum tree depth");
    cmd->add_option("--n-estimators", base.n_estimators, "Maximum boosting rounds");
    cmd->add_option("--subsample", base.subsample, "Row fraction per round");
    cmd->add_option("--colsample-bytree", base.colsample_bytree, "Feature fraction per tree");
    cmd->add_option("--gamma", base.gamma, "Minimum split gain");
    cmd->add_option("--reg-alpha", base.reg_alpha, "L1 leaf regularization");
    cmd->add_option("--reg-lambda", base.reg_lambda, "L2 leaf regularization");
    cmd->add_option("--early-stopping-rounds", base.early_stopping_rounds,
                    "Patience in rounds; 0 disables");
    cmd->add_option("--num-leaves", base.num_leaves, "Maximum leaves per tree");
    cmd->add_option("--min-child-samples", base.min_child_samples, "Minimum rows per leaf");
    cmd->add_option("--growth", growth_str, "Tree growth: depth_wise or leaf_wise");
  }

  void from_config(const ConfigFile& cfg) {
    cfg.get("learning_rate", base.learning_rate);
    cfg.get("max_depth", base.max_depth);
    cfg.get("n_estimators", base.n_estimators);
    cfg.get("subsample", base.subsample);
    cfg.get("colsample_bytree", base.colsample_bytree);
    cfg.get("gamma", base.gamma);
    cfg.get("reg_alpha", base.reg_alpha);
    cfg.get("reg_lambda", base.reg_lambda);
    cfg.get("early_stopping_rounds", base.early_stopping_rounds);
    cfg.get("num_leaves", base.num_leaves);
    cfg.get("min_child_samples", base.min_child_samples);
    cfg.get("growth", growth_str);
  }

  TrainParams resolve(std::uint64_t seed) const {
    TrainParams p = base;
    p.growth = growth_from_name(growth_str);
    p.seed = seed;
    p.validate();
    return p;
  }
};

struct SplitFlags {
  double train = 0.70;
  double valid = 0.15;
  double test = 0.15;

  void attach(CLI::App* cmd) {
    cmd->add_option("--train-ratio", train, "Training split fraction");
    cmd->add_option("--valid-ratio", valid, "Validation split fraction");
    cmd->add_option("--test-ratio", test, "Test split fraction");
  }

  void from_config(const ConfigFile& cfg) {
    cfg.get("train_ratio", train);
    cfg.get("valid_ratio", valid);
    cfg.get("test_ratio", test);
  }

  SplitSpec resolve(std::uint64_t seed) const {
    SplitSpec s;
    s.train = train;
    s.valid = valid;
    s.test = test;
    s.seed = seed;
    s.validate();
    return s;
  }
};

MaterialLexicon resolve_lexicon(const std::string& path) {
  if (!path.empty()) return MaterialLexicon::from_file(path);
  return lexicon_from_config(default_synth_config());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void report_diagnostics(const std::vector<FileDiagnostic>& diags, const std::string& log_path) {
  std::ostringstream os;
  for (const auto& d : diags) os << d.file << ": " << d.message << "\n";
  if (!diags.empty()) std::cerr << os.str();
  if (!log_path.empty()) write_text_file(log_path, os.str());
}

// Reference for a row's group: exact name match, else the sole reference in
// the file (covers unlabeled featurize runs against a one-group reference).
const GroupReference* pick_ref(const std::map<std::string, GroupReference>& refs,
                               const std::string& group) {
  if (refs.empty()) return nullptr;
  auto it = refs.find(group);
  if (it != refs.end()) return &it->second;
  if (refs.size() == 1) return &refs.begin()->second;
  return nullptr;
}

std::vector<std::string> union_vocabulary(const std::map<std::string, GroupReference>& refs,
                                          const MaterialLexicon& lexicon) {
  std::set<std::string> seen;
  for (const auto& [name, ref] : refs)
    for (const auto& m : ref.vocabulary) seen.insert(m);
  std::vector<std::string> out;
  for (const auto& name : lexicon.names())
    if (seen.count(name)) out.push_back(name);
  return out;
}

// ---------------------------------------------------------------------------
// featurize

struct FeaturizeOpts {
  std::string dxf_dir, lexicon, labels, refs, fit_refs, out, log, config;
  std::uint64_t seed = 0;
};

int cmd_featurize(FeaturizeOpts opt) {
  ConfigFile cfg;
  if (!opt.config.empty()) {
    cfg.load(opt.config);
    cfg.get("dxf", opt.dxf_dir);
    cfg.get("lexicon", opt.lexicon);
    cfg.get("labels", opt.labels);
    cfg.get("refs", opt.refs);
    cfg.get("fit_refs", opt.fit_refs);
    cfg.get("out", opt.out);
    cfg.get("log", opt.log);
    cfg.get("seed", opt.seed);
  }
  const MaterialLexicon lexicon = resolve_lexicon(opt.lexicon);
  std::optional<std::map<std::string, LabelEntry>> labels;
  if (!opt.labels.empty()) labels = load_labels(opt.labels);

  std::vector<FileDiagnostic> diags;
  const Corpus corpus =
      load_corpus(opt.dxf_dir, lexicon, labels ? &*labels : nullptr, diags);
  report_diagnostics(diags, opt.log);
  if (corpus.rows.empty()) {
    bool any_dxf = false;
    for (const auto& e : std::filesystem::directory_iterator(opt.dxf_dir))
      if (e.path().extension() == ".dxf") any_dxf = true;
    if (!any_dxf) throw IoError("no .dxf files in " + opt.dxf_dir);
    throw ParseError("no parseable .dxf files in " + opt.dxf_dir);
  }

  std::map<std::string, GroupReference> refs;
  if (!opt.refs.empty())
    refs = load_refs(opt.refs);
  else if (!opt.fit_refs.empty()) {
    refs = fit_all_references(corpus, all_row_ids(corpus));
    save_refs(refs, opt.fit_refs);
  }

  const std::vector<std::string> vocab =
      refs.empty() ? lexicon.names() : union_vocabulary(refs, lexicon);
  const FeatureSchema schema = make_schema(vocab);

  FeatureTable table;
  table.schema = schema;
  for (const auto& row : corpus.rows) {
    FeatureVector fv = featurize(row.qs, pick_ref(refs, row.group), schema);
    fv.group = row.group;
    fv.cost = row.cost;
    fv.source_id = row.source_id;
    table.rows.push_back(std::move(fv));
  }
  write_feature_table(table, opt.out);
  std::cout << "wrote " << table.rows.size() << " feature rows to " << opt.out << " ("
            << diags.size() << " diagnostics)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string features, labels, refs, out, report, metric = "mae", config;
  std::uint64_t seed = 0;
  ParamFlags params;
  SplitFlags split;
};

void join_labels(FeatureTable& table, const std::map<std::string, LabelEntry>& labels) {
  for (auto& row : table.rows) {
    auto it = labels.find(row.source_id);
    if (it == labels.end()) continue;
    row.group = it->second.group;
    row.cost = it->second.cost;
  }
}

int cmd_train(TrainOpts opt) {
  ConfigFile cfg;
  if (!opt.config.empty()) {
    cfg.load(opt.config);
    cfg.get("features", opt.features);
    cfg.get("labels", opt.labels);
    cfg.get("refs", opt.refs);
    cfg.get("out", opt.out);
    cfg.get("report", opt.report);
    cfg.get("metric", opt.metric);
    cfg.get("seed", opt.seed);
    opt.params.from_config(cfg);
    opt.split.from_config(cfg);
  }
  FeatureTable table = read_feature_table(opt.features);
  if (!opt.labels.empty()) join_labels(table, load_labels(opt.labels));

  std::optional<std::map<std::string, GroupReference>> refs;
  if (!opt.refs.empty()) refs = load_refs(opt.refs);

  const TrainParams params = opt.params.resolve(opt.seed);
  const SplitSpec split = opt.split.resolve(opt.seed);
  const Metric metric = metric_from_name(opt.metric);

  TrainResult result =
      train_bundle_from_table(std::move(table), params, split, metric, refs ? &*refs : nullptr);
  save_bundle(result.bundle, opt.out);

  if (!opt.report.empty()) {
    std::ostringstream eval_os, scatter_os;
    write_eval_csv(result.report, eval_os);
    write_scatter_csv(result.report, scatter_os);
    write_text_file(opt.report + "_eval.csv", eval_os.str());
    write_text_file(opt.report + "_scatter.csv", scatter_os.str());
    write_text_file(opt.report + "_summary.txt", eval_summary_text(result.report));
  }
  std::cout << eval_summary_text(result.report);
  std::cout << "model bundle written to " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOpts {
  std::string model, features, group, lexicon, out, config;
  std::vector<std::string> dxf_files;
  int top_k = 0;
};

std::string resolve_group(const Bundle& bundle, const std::string& row_group,
                          const std::string& flag_group) {
  if (!flag_group.empty()) {
    if (!bundle.groups.count(flag_group))
      throw SchemaError("group '" + flag_group + "' is not in the model bundle");
    return flag_group;
  }
  if (!row_group.empty() && bundle.groups.count(row_group)) return row_group;
  if (bundle.groups.size() == 1) return bundle.groups.begin()->first;
  throw SchemaError("bundle holds " + std::to_string(bundle.groups.size()) +
                    " groups; pass --group to choose one");
}

int cmd_predict(PredictOpts opt) {
  ConfigFile cfg;
  if (!opt.config.empty()) {
    cfg.load(opt.config);
    cfg.get("model", opt.model);
    cfg.get("features", opt.features);
    cfg.get("group", opt.group);
    cfg.get("lexicon", opt.lexicon);
    cfg.get("out", opt.out);
    cfg.get("top_k", opt.top_k);
    cfg.get("dxf", opt.dxf_files);
  }
  if (opt.dxf_files.empty() && opt.features.empty())
    throw SchemaError("predict needs --dxf files or a --features csv");

  const Bundle bundle = load_bundle(opt.model);
  const MaterialLexicon lexicon =
      opt.lexicon.empty() ? MaterialLexicon(bundle.lexicon) : MaterialLexicon::from_file(opt.lexicon);

  std::ostringstream os;
  os << "source_id,group,predicted\n";
  std::set<std::string> groups_used;

  for (const auto& path : opt.dxf_files) {
    const Drawing d = parse_drawing(tokenize_dxf(read_text_file(path)), "",
                                    std::filesystem::path(path).stem().string());
    const QuantitySet qs = extract_quantities(d, lexicon);
    const std::string group = resolve_group(bundle, "", opt.group);
    const double predicted = predict_quantities(bundle, qs, group);
    groups_used.insert(group);
    os << d.source_id << ',' << group << ',' << format_double(predicted) << '\n';
  }
  if (!opt.features.empty()) {
    const FeatureTable table = read_feature_table(opt.features);
    for (const auto& row : table.rows) {
      std::string group = row.group;
      double predicted;
      if (opt.group.empty() && !group.empty() && !bundle.groups.count(group)) {
        predicted = bundle.fallback_cost;  // unseen group: global training mean
      } else {
        group = resolve_group(bundle, group, opt.group);
        std::map<std::string, double> named;
        for (std::size_t i = 0; i < table.schema.size(); ++i)
          if (!is_missing(row.values[i])) named[table.schema.names[i]] = row.values[i];
        predicted = bundle.groups.at(group).model.predict(named);
        groups_used.insert(group);
      }
      os << row.source_id << ',' << group << ',' << format_double(predicted) << '\n';
    }
  }
  std::cout << os.str();
  if (!opt.out.empty()) write_text_file(opt.out, os.str());

  if (opt.top_k > 0) {
    for (const auto& group : groups_used) {
      const auto weights = split_count_importance(bundle.groups.at(group).model);
      std::vector<std::pair<std::string, double>> entries(weights.begin(), weights.end());
      std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      std::cout << "# top drivers for " << group << " (split count)\n";
      for (std::size_t i = 0; i < entries.size() && i < static_cast<std::size_t>(opt.top_k); ++i)
        std::cout << "#   " << entries[i].first << " " << format_double(entries[i].second)
                  << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOpts {
  std::string dxf_dir, labels, lexicon, out, model_out, metric = "mae", config;
  std::uint64_t seed = 0;
  ParamFlags params;
  SplitFlags split;
};

int cmd_evaluate(EvaluateOpts opt) {
  ConfigFile cfg;
  if (!opt.config.empty()) {
    cfg.load(opt.config);
    cfg.get("dxf", opt.dxf_dir);
    cfg.get("labels", opt.labels);
    cfg.get("lexicon", opt.lexicon);
    cfg.get("out", opt.out);
    cfg.get("model_out", opt.model_out);
    cfg.get("metric", opt.metric);
    cfg.get("seed", opt.seed);
    opt.params.from_config(cfg);
    opt.split.from_config(cfg);
  }
  const MaterialLexicon lexicon = resolve_lexicon(opt.lexicon);
  const auto labels = load_labels(opt.labels);
  std::vector<FileDiagnostic> diags;
  const Corpus corpus = load_corpus(opt.dxf_dir, lexicon, &labels, diags);
  report_diagnostics(diags, "");
  if (corpus.rows.empty()) throw IoError("no parseable .dxf files in " + opt.dxf_dir);

  const TrainParams params = opt.params.resolve(opt.seed);
  const SplitSpec split = opt.split.resolve(opt.seed);
  const TrainResult result = train_bundle(corpus, params, split, metric_from_name(opt.metric));

  if (!opt.out.empty()) {
    std::ostringstream eval_os, scatter_os;
    write_eval_csv(result.report, eval_os);
    write_scatter_csv(result.report, scatter_os);
    write_text_file(opt.out + "_eval.csv", eval_os.str());
    write_text_file(opt.out + "_scatter.csv", scatter_os.str());
    write_text_file(opt.out + "_summary.txt", eval_summary_text(result.report));
  }
  if (!opt.model_out.empty()) save_bundle(result.bundle, opt.model_out);
  std::cout << eval_summary_text(result.report);
  return 0;
}

// ---------------------------------------------------------------------------
// tune

struct TuneOpts {
  std::string dxf_dir, labels, lexicon, out, config;
  int trials = 30;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  ParamFlags params;
};

std::vector<std::size_t> labeled_rows(const Corpus& corpus) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < corpus.rows.size(); ++r)
    if (!is_missing(corpus.rows[r].cost)) out.push_back(r);
  return out;
}

int cmd_tune(TuneOpts opt) {
  ConfigFile cfg;
  if (!opt.config.empty()) {
    cfg.load(opt.config);
    cfg.get("dxf", opt.dxf_dir);
    cfg.get("labels", opt.labels);
    cfg.get("lexicon", opt.lexicon);
    cfg.get("out", opt.out);
    cfg.get("trials", opt.trials);
    cfg.get("k", opt.k);
    cfg.get("seed", opt.seed);
    opt.params.from_config(cfg);
  }
  const MaterialLexicon lexicon = resolve_lexicon(opt.lexicon);
  const auto labels = load_labels(opt.labels);
  std::vector<FileDiagnostic> diags;
  const Corpus corpus = load_corpus(opt.dxf_dir, lexicon, &labels, diags);
  report_diagnostics(diags, "");
  const auto rows = labeled_rows(corpus);
  if (rows.empty()) throw SchemaError("tune: no labeled rows");

  const TrainParams base = opt.params.resolve(opt.seed);
  SearchSpace space;
  const RandomSearchResult result =
      random_search(corpus, rows, space, base, opt.trials, opt.k, opt.seed);

  if (!opt.out.empty()) {
    std::ostringstream os;
    write_trials_csv(result, os);
    write_text_file(opt.out + "_trials.csv", os.str());
    const auto& best = result.trials[result.best_index].params;
    write_text_file(opt.out + "_best_params.json", train_params_to_json(best).dump(2) + "\n");
  }
  const Trial& best = result.trials[result.best_index];
  std::cout << "best trial " << result.best_index << ": cv mape "
            << format_double(best.objective) << "%\n"
            << train_params_to_json(best.params).dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// grid

struct GridOpts {
  std::string dxf_dir, labels, lexicon, out, config;
  std::string depths = "3,5,7,10";
  std::string rates = "0.01,0.05,0.1,0.2";
  std::size_t k = 5;
  std::uint64_t seed = 0;
  ParamFlags params;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = std::string(trim(item));
    if (t.empty()) continue;
    double v = 0.0;
    if (!try_parse_double(t, v)) throw SchemaError(std::string("bad ") + what + " value: " + t);
    out.push_back(static_cast<T>(v));
  }
  if (out.empty()) throw SchemaError(std::string("empty ") + what + " list");
  return out;
}

int cmd_grid(GridOpts opt) {
  ConfigFile cfg;
  if (!opt.config.empty()) {
    cfg.load(opt.config);
    cfg.get("dxf", opt.dxf_dir);
    cfg.get("labels", opt.labels);
    cfg.get("lexicon", opt.lexicon);
    cfg.get("out", opt.out);
    cfg.get("depths", opt.depths);
    cfg.get("rates", opt.rates);
    cfg.get("k", opt.k);
    cfg.get("seed", opt.seed);
    opt.params.from_config(cfg);
  }
  const MaterialLexicon lexicon = resolve_lexicon(opt.lexicon);
  const auto labels = load_labels(opt.labels);
  std::vector<FileDiagnostic> diags;
  const Corpus corpus = load_corpus(opt.dxf_dir, lexicon, &labels, diags);
  report_diagnostics(diags, "");
  const auto rows = labeled_rows(corpus);
  if (rows.empty()) throw SchemaError("grid: no labeled rows");

  const TrainParams base = opt.params.resolve(opt.seed);
  const GridResult result =
      grid_search(corpus, rows, parse_list<int>(opt.depths, "depth"),
                  parse_list<double>(opt.rates, "learning rate"), base, opt.k, opt.seed);

  std::ostringstream os;
  write_grid_csv(result, os);
  if (!opt.out.empty()) write_text_file(opt.out, os.str());
  std::cout << os.str();
  const GridCell& best = result.cells[result.best_index];
  std::cout << "best cell: max_depth=" << best.max_depth
            << " learning_rate=" << format_double(best.learning_rate)
            << " mean_mae=" << format_double(best.mean_mae) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// explain

struct ExplainOpts {
  std::string model, dxf_dir, labels, lexicon, group, shap_id, out = "explain", config;
  int repeats = 5;
  int top = 20;
  int tree_depth = 3;
  std::uint64_t seed = 0;
};

int cmd_explain(ExplainOpts opt) {
  ConfigFile cfg;
  if (!opt.config.empty()) {
    cfg.load(opt.config);
    cfg.get("model", opt.model);
    cfg.get("dxf", opt.dxf_dir);
    cfg.get("labels", opt.labels);
    cfg.get("lexicon", opt.lexicon);
    cfg.get("group", opt.group);
    cfg.get("shap", opt.shap_id);
    cfg.get("out", opt.out);
    cfg.get("repeats", opt.repeats);
    cfg.get("top", opt.top);
    cfg.get("tree_depth", opt.tree_depth);
    cfg.get("seed", opt.seed);
  }
  const Bundle bundle = load_bundle(opt.model);
  if (bundle.groups.empty()) throw SchemaError("bundle holds no group models");
  const std::string group = resolve_group(bundle, "", opt.group);
  const GroupModel& gm = bundle.groups.at(group);

  {
    const auto weights = split_count_importance(gm.model);
    ImportanceReport report = average_importance({weights});
    report.method = "split_count";
    std::ostringstream os;
    write_importance_csv(report, os);
    write_text_file(opt.out + "_split_count.csv", os.str());
    std::cout << "top split-count features for " << group << ":\n";
    for (std::size_t i = 0; i < report.entries.size() && i < static_cast<std::size_t>(opt.top);
         ++i)
      std::cout << "  " << report.entries[i].first << " "
                << format_double(report.entries[i].second) << "\n";
  }
  {
    std::vector<std::map<std::string, double>> all;
    for (const auto& [name, g] : bundle.groups) all.push_back(split_count_importance(g.model));
    const ImportanceReport avg = average_importance(all);
    std::ostringstream os;
    write_importance_csv(avg, os);
    write_text_file(opt.out + "_average.csv", os.str());
  }

  if (opt.dxf_dir.empty()) {
    std::cout << "wrote " << opt.out << "_split_count.csv and " << opt.out
              << "_average.csv (pass --dxf/--labels for permutation, shapley, tree)\n";
    return 0;
  }

  const MaterialLexicon lexicon =
      opt.lexicon.empty() ? MaterialLexicon(bundle.lexicon) : MaterialLexicon::from_file(opt.lexicon);
  std::optional<std::map<std::string, LabelEntry>> labels;
  if (!opt.labels.empty()) labels = load_labels(opt.labels);
  std::vector<FileDiagnostic> diags;
  const Corpus corpus = load_corpus(opt.dxf_dir, lexicon, labels ? &*labels : nullptr, diags);
  report_diagnostics(diags, "");

  const FeatureSchema schema = make_schema(vocabulary_from_schema(gm.model.schema));
  Matrix x;
  std::vector<double> y;
  std::vector<std::string> ids;
  for (const auto& row : corpus.rows) {
    if (row.group != group || is_missing(row.cost)) continue;
    x.push_back(featurize(row.qs, &gm.reference, schema).values);
    y.push_back(row.cost);
    ids.push_back(row.source_id);
  }
  if (x.empty()) throw SchemaError("no labeled rows of group '" + group + "' in " + opt.dxf_dir);

  {
    const ImportanceReport report =
        permutation_importance(gm.model, x, y, Metric::kMae, opt.repeats, opt.seed);
    std::ostringstream os;
    write_importance_csv(report, os);
    write_text_file(opt.out + "_permutation.csv", os.str());
    std::cout << "top permutation features for " << group << ":\n";
    for (std::size_t i = 0; i < report.entries.size() && i < static_cast<std::size_t>(opt.top);
         ++i)
      std::cout << "  " << report.entries[i].first << " "
                << format_double(report.entries[i].second) << "\n";
  }

  if (!opt.shap_id.empty()) {
    std::size_t row_idx = ids.size();
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == opt.shap_id) row_idx = i;
    if (row_idx == ids.size())
      throw SchemaError("source id '" + opt.shap_id + "' not found in group '" + group + "'");

    // Active set: the up-to-12 most split-on features.
    const auto weights = split_count_importance(gm.model);
    std::vector<std::pair<std::string, double>> entries(weights.begin(), weights.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    std::vector<std::size_t> active;
    for (const auto& [name, w] : entries) {
      if (active.size() >= 12) break;
      active.push_back(schema.index_of(name));
    }
    if (active.empty()) throw SchemaError("model has no splits to attribute");

    const Matrix background = shapley_background(x, 256, opt.seed);
    const auto shap = exact_shapley(gm.model, x[row_idx], background, active);
    std::ostringstream os;
    os << "feature,shapley\n";
    for (const auto& [name, v] : shap) os << name << ',' << format_double(v) << '\n';
    write_text_file(opt.out + "_shapley.csv", os.str());
    std::cout << "shapley attribution for " << opt.shap_id << ":\n" << os.str();
  }

  if (opt.tree_depth > 0) {
    TrainParams cart_params;
    cart_params.max_depth = opt.tree_depth;
    cart_params.min_child_samples = 5;
    cart_params.seed = opt.seed;
    const Tree tree = fit_cart(x, y, cart_params);
    write_text_file(opt.out + "_tree.dot", export_tree_dot(tree, schema.names));
    write_text_file(opt.out + "_tree.txt", export_tree_text(tree, schema.names));
  }
  std::cout << "explanation artifacts written with prefix " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOpts {
  std::string out, config;
  int n = 800;
  double noise = 0.05;
  std::uint64_t seed = 0;
};

int cmd_synth(SynthOpts opt) {
  SynthConfig config = default_synth_config();
  config.n_drawings = opt.n;
  config.noise_pct = opt.noise;
  config.seed = opt.seed;
  if (!opt.config.empty()) {
    nlohmann::json j;
    std::ifstream in(opt.config, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + opt.config);
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("invalid JSON in " + opt.config + ": " + e.what());
    }
    config = synth_config_from_json(j);
  }
  const SynthCorpus corpus = write_corpus(config, opt.out);
  std::cout << "wrote " << corpus.drawings.size() << " drawings, labels.csv and manifest.json to "
            << opt.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DXF drawing cost estimation: features, boosted trees, explanations"};
  app.require_subcommand(1);

  FeaturizeOpts fo;
  auto* featurize_cmd = app.add_subcommand("featurize", "Extract feature CSV from a DXF directory");
  featurize_cmd->add_option("--dxf", fo.dxf_dir, "Directory of .dxf files")->required();
  featurize_cmd->add_option("--lexicon", fo.lexicon, "Material lexicon file (one name per line)");
  featurize_cmd->add_option("--labels", fo.labels, "labels.csv to join (source_id,group,cost)");
  auto* refs_opt = featurize_cmd->add_option("--refs", fo.refs, "Group-reference JSON to apply");
  featurize_cmd->add_option("--fit-refs", fo.fit_refs, "Fit references on this corpus and write them here")
      ->excludes(refs_opt);
  featurize_cmd->add_option("--out", fo.out, "Output feature CSV")->required();
  featurize_cmd->add_option("--log", fo.log, "Write per-file diagnostics here");
  featurize_cmd->add_option("--seed", fo.seed, "Random seed");
  featurize_cmd->add_option("--config", fo.config, "JSON config; values override flags");

  TrainOpts to;
  auto* train_cmd = app.add_subcommand("train", "Train per-group cost models from a feature CSV");
  train_cmd->add_option("--features", to.features, "Feature CSV")->required();
  train_cmd->add_option("--labels", to.labels, "labels.csv to join before training");
  train_cmd->add_option("--refs", to.refs, "Reference JSON supplying histogram bin edges");
  train_cmd->add_option("--out", to.out, "Output model bundle JSON")->required();
  train_cmd->add_option("--report", to.report, "Report file prefix");
  train_cmd->add_option("--metric", to.metric, "mae, mape or mse");
  train_cmd->add_option("--seed", to.seed, "Random seed");
  train_cmd->add_option("--config", to.config, "JSON config; values override flags");
  to.params.attach(train_cmd);
  to.split.attach(train_cmd);

  PredictOpts po;
  auto* predict_cmd = app.add_subcommand("predict", "Predict unit cost for drawings or feature rows");
  predict_cmd->add_option("--model", po.model, "Model bundle JSON")->required();
  predict_cmd->add_option("--dxf", po.dxf_files, "One or more .dxf files");
  predict_cmd->add_option("--features", po.features, "Feature CSV to predict row-by-row");
  predict_cmd->add_option("--group", po.group, "Product group to use");
  predict_cmd->add_option("--lexicon", po.lexicon, "Material lexicon override");
  predict_cmd->add_option("--top-k", po.top_k, "Also print top-k split-count drivers");
  predict_cmd->add_option("--out", po.out, "Write predictions CSV here");
  predict_cmd->add_option("--config", po.config, "JSON config; values override flags");

  EvaluateOpts eo;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Train and evaluate end-to-end from DXF files (70:15:15)");
  evaluate_cmd->add_option("--dxf", eo.dxf_dir, "Directory of .dxf files")->required();
  evaluate_cmd->add_option("--labels", eo.labels, "labels.csv (source_id,group,cost)")->required();
  evaluate_cmd->add_option("--lexicon", eo.lexicon, "Material lexicon file");
  evaluate_cmd->add_option("--out", eo.out, "Report file prefix");
  evaluate_cmd->add_option("--model-out", eo.model_out, "Also save the trained bundle here");
  evaluate_cmd->add_option("--metric", eo.metric, "mae, mape or mse");
  evaluate_cmd->add_option("--seed", eo.seed, "Random seed");
  evaluate_cmd->add_option("--config", eo.config, "JSON config; values override flags");
  eo.params.attach(evaluate_cmd);
  eo.split.attach(evaluate_cmd);

  TuneOpts uo;
  auto* tune_cmd = app.add_subcommand("tune", "Random-search hyperparameters with k-fold CV");
  tune_cmd->add_option("--dxf", uo.dxf_dir, "Directory of .dxf files")->required();
  tune_cmd->add_option("--labels", uo.labels, "labels.csv")->required();
  tune_cmd->add_option("--lexicon", uo.lexicon, "Material lexicon file");
  tune_cmd->add_option("--trials", uo.trials, "Number of random trials");
  tune_cmd->add_option("--k", uo.k, "Cross-validation folds");
  tune_cmd->add_option("--seed", uo.seed, "Random seed");
  tune_cmd->add_option("--out", uo.out, "Output file prefix");
  tune_cmd->add_option("--config", uo.config, "JSON config; values override flags");
  uo.params.attach(tune_cmd);

  GridOpts go;
  auto* grid_cmd = app.add_subcommand("grid", "Grid search over max_depth and learning_rate");
  grid_cmd->add_option("--dxf", go.dxf_dir, "Directory of .dxf files")->required();
  grid_cmd->add_option("--labels", go.labels, "labels.csv")->required();
  grid_cmd->add_option("--lexicon", go.lexicon, "Material lexicon file");
  grid_cmd->add_option("--depths", go.depths, "Comma list of max_depth values");
  grid_cmd->add_option("--rates", go.rates, "Comma list of learning_rate values");
  grid_cmd->add_option("--k", go.k, "Cross-validation folds");
  grid_cmd->add_option("--seed", go.seed, "Random seed");
  grid_cmd->add_option("--out", go.out, "Output grid CSV");
  grid_cmd->add_option("--config", go.config, "JSON config; values override flags");
  go.params.attach(grid_cmd);

  ExplainOpts xo;
  auto* explain_cmd = app.add_subcommand("explain", "Importance reports, Shapley values, tree export");
  explain_cmd->add_option("--model", xo.model, "Model bundle JSON")->required();
  explain_cmd->add_option("--dxf", xo.dxf_dir, "DXF directory for data-dependent explainers");
  explain_cmd->add_option("--labels", xo.labels, "labels.csv");
  explain_cmd->add_option("--lexicon", xo.lexicon, "Material lexicon override");
  explain_cmd->add_option("--group", xo.group, "Product group to explain");
  explain_cmd->add_option("--shap", xo.shap_id, "Source id to attribute with exact Shapley values");
  explain_cmd->add_option("--repeats", xo.repeats, "Permutation repeats");
  explain_cmd->add_option("--top", xo.top, "Rows to print");
  explain_cmd->add_option("--tree-depth", xo.tree_depth, "Depth of the exported CART (0 skips)");
  explain_cmd->add_option("--seed", xo.seed, "Random seed");
  explain_cmd->add_option("--out", xo.out, "Output file prefix");
  explain_cmd->add_option("--config", xo.config, "JSON config; values override flags");

  SynthOpts so;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic DXF corpus");
  synth_cmd->add_option("--out", so.out, "Output directory")->required();
  synth_cmd->add_option("--n", so.n, "Number of drawings");
  synth_cmd->add_option("--noise", so.noise, "Relative cost noise std");
  synth_cmd->add_option("--seed", so.seed, "Random seed");
  synth_cmd->add_option("--config", so.config, "Synth config JSON; overrides flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 4;
  }

  try {
    if (*featurize_cmd) return cmd_featurize(std::move(fo));
    if (*train_cmd) return cmd_train(std::move(to));
    if (*predict_cmd) return cmd_predict(std::move(po));
    if (*evaluate_cmd) return cmd_evaluate(std::move(eo));
    if (*tune_cmd) return cmd_tune(std::move(uo));
    if (*grid_cmd) return cmd_grid(std::move(go));
    if (*explain_cmd) return cmd_explain(std::move(xo));
    if (*synth_cmd) return cmd_synth(std::move(so));
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 4;
}
