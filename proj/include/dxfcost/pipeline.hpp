#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dxfcost/common.hpp"
#include "dxfcost/csv.hpp"
#include "dxfcost/dxf.hpp"
#include "dxfcost/features.hpp"
#include "dxfcost/gbdt.hpp"
#include "dxfcost/group_reference.hpp"
#include "dxfcost/metrics.hpp"
#include "dxfcost/quantities.hpp"
#include "dxfcost/split.hpp"
#include "dxfcost/table.hpp"

namespace dxfcost {

struct CorpusRow {
  QuantitySet qs;
  std::string group;
  std::string source_id;
  double cost = kMissing;
};

struct Corpus {
  std::vector<CorpusRow> rows;
  MaterialLexicon lexicon;
};

struct FileDiagnostic {
  std::string file;
  std::string message;
};

struct LabelEntry {
  std::string group;
  double cost = kMissing;
};

// labels.csv: source_id,group,cost
inline std::map<std::string, LabelEntry> load_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  const CsvTable csv = parse_csv(in);
  if (csv.header != std::vector<std::string>{"source_id", "group", "cost"})
    throw SchemaError(path + ": labels header must be source_id,group,cost");
  std::map<std::string, LabelEntry> out;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& cells = csv.rows[r];
    if (cells.size() != 3)
      throw SchemaError(path + ": row " + std::to_string(r + 2) + " has wrong cell count");
    LabelEntry entry;
    entry.group = cells[1];
    if (!cells[2].empty()) {
      double cost = 0.0;
      if (!try_parse_double(cells[2], cost))
        throw SchemaError(path + ": row " + std::to_string(r + 2) + ": cost is not a number");
      if (cost <= 0.0)
        throw SchemaError(path + ": row " + std::to_string(r + 2) + ": cost must be positive");
      entry.cost = cost;
    }
    out[cells[0]] = std::move(entry);
  }
  return out;
}

// Parses every .dxf file under `dir` (sorted by name, so output order is
// stable). Files that fail to parse become diagnostics, not errors.
inline Corpus load_corpus(const std::string& dir, const MaterialLexicon& lexicon,
                          const std::map<std::string, LabelEntry>* labels,
                          std::vector<FileDiagnostic>& diagnostics) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".dxf")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());

  Corpus corpus;
  corpus.lexicon = lexicon;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      diagnostics.push_back({path.string(), "cannot open"});
      continue;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    CorpusRow row;
    row.source_id = path.stem().string();
    try {
      Drawing d = parse_drawing(tokenize_dxf(buf.str()), "", row.source_id);
      for (const auto& diag : d.diagnostics)
        diagnostics.push_back({path.string(), diag.entity_type + ": " + diag.message});
      row.qs = extract_quantities(d, lexicon);
    } catch (const ParseError& e) {
      diagnostics.push_back({path.string(), e.what()});
      continue;
    }
    if (labels) {
      auto it = labels->find(row.source_id);
      if (it != labels->end()) {
        row.group = it->second.group;
        row.cost = it->second.cost;
      }
    }
    if (row.group.empty()) row.group = "default";
    corpus.rows.push_back(std::move(row));
  }
  return corpus;
}

inline std::map<std::string, std::vector<std::size_t>> group_rows(
    const Corpus& corpus, const std::vector<std::size_t>& row_ids) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t r : row_ids) out[corpus.rows[r].group].push_back(r);
  return out;
}

inline std::vector<std::size_t> all_row_ids(const Corpus& corpus) {
  std::vector<std::size_t> ids(corpus.rows.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return ids;
}

// ---------------------------------------------------------------------------
// Bundle: one reference + one model per product group, plus a fallback for
// rows whose group was never seen in training.

struct GroupModel {
  GroupReference reference;
  GbdtModel model;
};

struct Bundle {
  std::vector<std::string> lexicon;
  double fallback_cost = 0.0;
  std::map<std::string, GroupModel> groups;
};

inline std::vector<std::string> vocabulary_from_schema(const std::vector<std::string>& names) {
  std::vector<std::string> vocab;
  for (const auto& n : names)
    if (n.rfind("mat_", 0) == 0) vocab.push_back(n.substr(4));
  return vocab;
}

inline double predict_quantities(const Bundle& bundle, const QuantitySet& qs,
                                 const std::string& group) {
  auto it = bundle.groups.find(group);
  if (it == bundle.groups.end()) return bundle.fallback_cost;
  const GroupModel& gm = it->second;
  FeatureSchema schema = make_schema(vocabulary_from_schema(gm.model.schema));
  const FeatureVector fv = featurize(qs, &gm.reference, schema);
  return gm.model.predict(fv.values);
}

// ---------------------------------------------------------------------------
// Corpus-level training (leak-free: references are fit on training rows only)

struct SplitMetrics {
  std::size_t n = 0;
  double mae_value = kMissing;
  double mape_value = kMissing;
};

struct GroupEval {
  std::string group;
  SplitMetrics train, valid, test;
  int best_iteration = -1;
  int n_trees = 0;
};

struct EvalReport {
  std::vector<GroupEval> groups;
  SplitMetrics overall_test;
  std::vector<double> test_actual;  // pooled test rows, for scatter output
  std::vector<double> test_predicted;
  std::vector<std::string> test_group;
};

namespace detail {

inline SplitMetrics compute_split_metrics(const std::vector<double>& y,
                                          const std::vector<double>& yhat) {
  SplitMetrics m;
  m.n = y.size();
  if (!y.empty()) {
    m.mae_value = mae(y, yhat);
    m.mape_value = mape(y, yhat);
  }
  return m;
}

}  // namespace detail

struct TrainResult {
  Bundle bundle;
  EvalReport report;
};

// Per group: 70:15:15 split, reference fit on the train rows, featurize,
// boost with early stopping on the validation rows, score the test rows.
// Groups with fewer than 3 labeled rows fall back to the global mean.
inline TrainResult train_bundle(const Corpus& corpus, const TrainParams& params,
                                const SplitSpec& split, Metric metric = Metric::kMae) {
  TrainResult result;
  result.bundle.lexicon = corpus.lexicon.names();

  std::vector<std::size_t> labeled;
  for (std::size_t r = 0; r < corpus.rows.size(); ++r)
    if (!is_missing(corpus.rows[r].cost)) labeled.push_back(r);
  if (labeled.empty()) throw SchemaError("train: no labeled rows (missing costs)");

  double global_sum = 0.0;
  for (std::size_t r : labeled) global_sum += corpus.rows[r].cost;
  result.bundle.fallback_cost = global_sum / static_cast<double>(labeled.size());

  for (const auto& [group, rows] : group_rows(corpus, labeled)) {
    if (rows.size() < 3) continue;
    const DatasetSplit parts = split_dataset(rows.size(), split);
    const auto pick = [&](const std::vector<std::size_t>& local) {
      std::vector<std::size_t> out;
      for (std::size_t i : local) out.push_back(rows[i]);
      return out;
    };
    const auto train_ids = pick(parts.train);
    const auto valid_ids = pick(parts.valid);
    const auto test_ids = pick(parts.test);

    std::vector<QuantitySet> train_qs;
    for (std::size_t r : train_ids) train_qs.push_back(corpus.rows[r].qs);
    GroupReference ref = fit_group_reference(group, train_qs, corpus.lexicon);
    const FeatureSchema schema = make_schema(ref.vocabulary);

    const auto featurize_ids = [&](const std::vector<std::size_t>& ids, Matrix& x,
                                   std::vector<double>& y) {
      for (std::size_t r : ids) {
        x.push_back(featurize(corpus.rows[r].qs, &ref, schema).values);
        y.push_back(corpus.rows[r].cost);
      }
    };
    Matrix x_train, x_valid, x_test;
    std::vector<double> y_train, y_valid, y_test;
    featurize_ids(train_ids, x_train, y_train);
    featurize_ids(valid_ids, x_valid, y_valid);
    featurize_ids(test_ids, x_test, y_test);

    GbdtModel model = fit_gbdt(x_train, y_train, x_valid.empty() ? nullptr : &x_valid,
                               y_valid.empty() ? nullptr : &y_valid, params, metric,
                               schema.names);

    GroupEval ev;
    ev.group = group;
    ev.best_iteration = model.best_iteration;
    ev.n_trees = static_cast<int>(model.trees.size());
    const auto score = [&](const Matrix& x, const std::vector<double>& y) {
      std::vector<double> yhat;
      for (const auto& row : x) yhat.push_back(model.predict(row));
      return std::pair(detail::compute_split_metrics(y, yhat), yhat);
    };
    ev.train = score(x_train, y_train).first;
    ev.valid = score(x_valid, y_valid).first;
    auto [test_metrics, test_pred] = score(x_test, y_test);
    ev.test = test_metrics;
    result.report.groups.push_back(ev);

    for (std::size_t i = 0; i < y_test.size(); ++i) {
      result.report.test_actual.push_back(y_test[i]);
      result.report.test_predicted.push_back(test_pred[i]);
      result.report.test_group.push_back(group);
    }
    result.bundle.groups.emplace(group, GroupModel{std::move(ref), std::move(model)});
  }

  if (!result.report.test_actual.empty())
    result.report.overall_test =
        detail::compute_split_metrics(result.report.test_actual, result.report.test_predicted);
  return result;
}

// ---------------------------------------------------------------------------
// Table-level training for pre-featurized CSVs. Bin edges are not recoverable
// from a table, so references are refit as mean-bin-only references (their
// edges can be supplied from a previously fitted reference file). Distance
// features are recomputed against the train-split means so validation and
// test rows never leak into the reference.

namespace detail {

inline std::vector<double> row_norm_bins(const FeatureVector& fv, const FeatureSchema& schema,
                                         std::size_t q) {
  // Layout from make_schema: descriptors (9*10), then per histogram quantity
  // 12 raw + 12 normalized bins.
  const std::size_t base = quantity_names().size() * descriptor_suffixes().size() + q * 24 + 12;
  std::vector<double> bins(12);
  for (std::size_t b = 0; b < 12; ++b) bins[b] = fv.values[base + b];
  (void)schema;
  return bins;
}

inline bool row_has_quantity(const FeatureVector& fv, std::size_t q) {
  const std::size_t count_idx = q * descriptor_suffixes().size();
  const double c = fv.values[count_idx];
  return !is_missing(c) && c > 0.0;
}

}  // namespace detail

// Refit of one group's reference from feature rows alone (train split only).
inline GroupReference refit_reference_from_rows(const std::string& group,
                                                const FeatureTable& table,
                                                const std::vector<std::size_t>& train_ids,
                                                const GroupReference* edges_source) {
  GroupReference ref;
  ref.group = group;
  ref.n_train = static_cast<std::int64_t>(train_ids.size());
  for (std::size_t q = 0; q < kHistogramQuantities; ++q) {
    auto& qr = ref.quantities[q];
    if (edges_source) {
      qr.edges = edges_source->quantities[q].edges;
      qr.has_edges = edges_source->quantities[q].has_edges;
    } else {
      qr.has_edges = false;
    }
    qr.mean_bins.fill(0.0);
    for (std::size_t r : train_ids) {
      if (!detail::row_has_quantity(table.rows[r], q)) continue;
      const auto bins = detail::row_norm_bins(table.rows[r], table.schema, q);
      for (std::size_t b = 0; b < 12; ++b) qr.mean_bins[b] += bins[b];
      ++qr.n_nonempty;
    }
    if (qr.n_nonempty > 0)
      for (auto& b : qr.mean_bins) b /= static_cast<double>(qr.n_nonempty);
  }
  // Vocabulary: materials actually flagged in the training rows.
  for (const auto& name : table.schema.vocabulary) {
    const std::size_t idx = table.schema.index_of("mat_" + name);
    for (std::size_t r : train_ids) {
      const double v = table.rows[r].values[idx];
      if (!is_missing(v) && v != 0.0) {
        ref.vocabulary.push_back(name);
        break;
      }
    }
  }
  return ref;
}

// Overwrites the distance features of `row_ids` using `ref`'s mean bins.
inline void recompute_distances(FeatureTable& table, const std::vector<std::size_t>& row_ids,
                                const GroupReference& ref) {
  const std::size_t dist_base =
      quantity_names().size() * descriptor_suffixes().size() + kHistogramQuantities * 24;
  for (std::size_t r : row_ids) {
    FeatureVector& fv = table.rows[r];
    for (std::size_t q = 0; q < kHistogramQuantities; ++q) {
      double& euc = fv.values[dist_base + 2 * q];
      double& kl = fv.values[dist_base + 2 * q + 1];
      if (!detail::row_has_quantity(fv, q)) {
        euc = kMissing;
        kl = kMissing;
        continue;
      }
      const auto bins = detail::row_norm_bins(fv, table.schema, q);
      const std::vector<double> mean(ref.quantities[q].mean_bins.begin(),
                                     ref.quantities[q].mean_bins.end());
      euc = euclidean_distance(bins, mean);
      kl = kl_divergence(bins, mean, ref.epsilon);
    }
  }
}

inline TrainResult train_bundle_from_table(FeatureTable table, const TrainParams& params,
                                           const SplitSpec& split, Metric metric,
                                           const std::map<std::string, GroupReference>* refs) {
  TrainResult result;
  result.bundle.lexicon = table.schema.vocabulary;

  std::map<std::string, std::vector<std::size_t>> by_group;
  std::vector<std::size_t> labeled;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (is_missing(table.rows[r].cost)) continue;
    labeled.push_back(r);
    by_group[table.rows[r].group.empty() ? "default" : table.rows[r].group].push_back(r);
  }
  if (labeled.empty()) throw SchemaError("train: no labeled rows (missing costs)");
  double global_sum = 0.0;
  for (std::size_t r : labeled) global_sum += table.rows[r].cost;
  result.bundle.fallback_cost = global_sum / static_cast<double>(labeled.size());

  for (const auto& [group, rows] : by_group) {
    if (rows.size() < 3) continue;
    const DatasetSplit parts = split_dataset(rows.size(), split);
    const auto pick = [&](const std::vector<std::size_t>& local) {
      std::vector<std::size_t> out;
      for (std::size_t i : local) out.push_back(rows[i]);
      return out;
    };
    const auto train_ids = pick(parts.train);
    const auto valid_ids = pick(parts.valid);
    const auto test_ids = pick(parts.test);

    const GroupReference* edges_source = nullptr;
    if (refs) {
      auto it = refs->find(group);
      if (it != refs->end()) edges_source = &it->second;
    }
    GroupReference ref = refit_reference_from_rows(group, table, train_ids, edges_source);
    recompute_distances(table, rows, ref);

    const auto collect = [&](const std::vector<std::size_t>& ids, Matrix& x,
                             std::vector<double>& y) {
      for (std::size_t r : ids) {
        x.push_back(table.rows[r].values);
        y.push_back(table.rows[r].cost);
      }
    };
    Matrix x_train, x_valid, x_test;
    std::vector<double> y_train, y_valid, y_test;
    collect(train_ids, x_train, y_train);
    collect(valid_ids, x_valid, y_valid);
    collect(test_ids, x_test, y_test);

    GbdtModel model = fit_gbdt(x_train, y_train, x_valid.empty() ? nullptr : &x_valid,
                               y_valid.empty() ? nullptr : &y_valid, params, metric,
                               table.schema.names);

    GroupEval ev;
    ev.group = group;
    ev.best_iteration = model.best_iteration;
    ev.n_trees = static_cast<int>(model.trees.size());
    const auto score = [&](const Matrix& x, const std::vector<double>& y) {
      std::vector<double> yhat;
      for (const auto& row : x) yhat.push_back(model.predict(row));
      return std::pair(detail::compute_split_metrics(y, yhat), yhat);
    };
    ev.train = score(x_train, y_train).first;
    ev.valid = score(x_valid, y_valid).first;
    auto [test_metrics, test_pred] = score(x_test, y_test);
    ev.test = test_metrics;
    result.report.groups.push_back(ev);
    for (std::size_t i = 0; i < y_test.size(); ++i) {
      result.report.test_actual.push_back(y_test[i]);
      result.report.test_predicted.push_back(test_pred[i]);
      result.report.test_group.push_back(group);
    }
    result.bundle.groups.emplace(group, GroupModel{std::move(ref), std::move(model)});
  }

  if (!result.report.test_actual.empty())
    result.report.overall_test =
        detail::compute_split_metrics(result.report.test_actual, result.report.test_predicted);
  return result;
}

// ---------------------------------------------------------------------------
// Reference-file persistence (one file holding every group's reference)

inline nlohmann::json refs_to_json(const std::map<std::string, GroupReference>& refs) {
  nlohmann::json j;
  j["format"] = "dxfcost-refs-v1";
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [name, ref] : refs) groups[name] = group_reference_to_json(ref);
  j["groups"] = std::move(groups);
  return j;
}

inline std::map<std::string, GroupReference> refs_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "dxfcost-refs-v1")
    throw SchemaError("not a group-reference file (missing or wrong format tag)");
  std::map<std::string, GroupReference> refs;
  try {
    for (const auto& [name, entry] : j.at("groups").items())
      refs.emplace(name, group_reference_from_json(entry));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed reference file: ") + e.what());
  }
  return refs;
}

inline void save_refs(const std::map<std::string, GroupReference>& refs,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << refs_to_json(refs).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline std::map<std::string, GroupReference> load_refs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return refs_from_json(j);
}

// Fit references for every group over the given rows.
inline std::map<std::string, GroupReference> fit_all_references(
    const Corpus& corpus, const std::vector<std::size_t>& row_ids) {
  std::map<std::string, GroupReference> refs;
  for (const auto& [group, rows] : group_rows(corpus, row_ids)) {
    std::vector<QuantitySet> qs;
    for (std::size_t r : rows) qs.push_back(corpus.rows[r].qs);
    refs.emplace(group, fit_group_reference(group, qs, corpus.lexicon));
  }
  return refs;
}

// ---------------------------------------------------------------------------
// Bundle persistence

inline nlohmann::json bundle_to_json(const Bundle& bundle) {
  nlohmann::json j;
  j["format"] = "dxfcost-bundle-v1";
  j["lexicon"] = bundle.lexicon;
  j["fallback_cost"] = bundle.fallback_cost;
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [name, gm] : bundle.groups) {
    nlohmann::json entry;
    entry["reference"] = group_reference_to_json(gm.reference);
    entry["model"] = gbdt_to_json(gm.model);
    groups[name] = std::move(entry);
  }
  j["groups"] = std::move(groups);
  return j;
}

inline Bundle bundle_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "dxfcost-bundle-v1")
    throw SchemaError("not a model bundle file (missing or wrong format tag)");
  Bundle bundle;
  try {
    bundle.lexicon = j.at("lexicon").get<std::vector<std::string>>();
    bundle.fallback_cost = j.at("fallback_cost").get<double>();
    for (const auto& [name, entry] : j.at("groups").items()) {
      GroupModel gm;
      gm.reference = group_reference_from_json(entry.at("reference"));
      gm.model = gbdt_from_json(entry.at("model"));
      bundle.groups.emplace(name, std::move(gm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed bundle file: ") + e.what());
  }
  return bundle;
}

inline void save_bundle(const Bundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << bundle_to_json(bundle).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline Bundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return bundle_from_json(j);
}

// ---------------------------------------------------------------------------
// Report writers

inline void write_eval_csv(const EvalReport& report, std::ostream& os) {
  os << "group,model,n,mae,mape\n";
  for (const auto& g : report.groups) {
    os << g.group << ",gbdt," << g.test.n << ','
       << (is_missing(g.test.mae_value) ? "" : format_double(g.test.mae_value)) << ','
       << (is_missing(g.test.mape_value) ? "" : format_double(g.test.mape_value)) << '\n';
  }
  if (report.overall_test.n > 0)
    os << "overall,gbdt," << report.overall_test.n << ','
       << format_double(report.overall_test.mae_value) << ','
       << format_double(report.overall_test.mape_value) << '\n';
}

inline void write_scatter_csv(const EvalReport& report, std::ostream& os) {
  os << "actual,predicted,group\n";
  for (std::size_t i = 0; i < report.test_actual.size(); ++i)
    os << format_double(report.test_actual[i]) << ',' << format_double(report.test_predicted[i])
       << ',' << report.test_group[i] << '\n';
}

inline std::string eval_summary_text(const EvalReport& report) {
  std::ostringstream os;
  const auto line = [&](const std::string& group, const char* split, const SplitMetrics& m) {
    if (m.n == 0) return;
    os << group << " " << split << ": n=" << m.n << " mae=" << format_double(m.mae_value)
       << " mape=" << format_double(m.mape_value) << "%\n";
  };
  for (const auto& g : report.groups) {
    line(g.group, "train", g.train);
    line(g.group, "valid", g.valid);
    line(g.group, "test", g.test);
    os << g.group << " trees=" << g.n_trees << " best_iteration=" << g.best_iteration << "\n";
  }
  line("overall", "test", report.overall_test);
  return os.str();
}

}  // namespace dxfcost
