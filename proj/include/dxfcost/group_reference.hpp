#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dxfcost/common.hpp"
#include "dxfcost/quantities.hpp"
#include "dxfcost/stats.hpp"

namespace dxfcost {

constexpr double kKlEpsilon = 1e-10;

inline double euclidean_distance(const std::vector<double>& bins_dwg,
                                 const std::vector<double>& bins_mean) {
  if (bins_dwg.size() != bins_mean.size())
    throw std::invalid_argument("euclidean_distance: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < bins_dwg.size(); ++i) {
    const double d = bins_dwg[i] - bins_mean[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

// D_KL = sum_i mean_i * ln((mean_i + eps) / (dwg_i + eps)). The reference
// distribution sits in the leading coefficient; identical inputs give 0
// exactly because every ratio is 1.
inline double kl_divergence(const std::vector<double>& bins_dwg,
                            const std::vector<double>& bins_mean,
                            double epsilon = kKlEpsilon) {
  if (bins_dwg.size() != bins_mean.size())
    throw std::invalid_argument("kl_divergence: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < bins_dwg.size(); ++i) {
    if (bins_dwg[i] < 0.0 || bins_mean[i] < 0.0)
      throw std::invalid_argument("kl_divergence: negative bin value");
    if (bins_mean[i] == bins_dwg[i]) continue;
    sum += bins_mean[i] * std::log((bins_mean[i] + epsilon) / (bins_dwg[i] + epsilon));
  }
  return sum;
}

struct QuantityReference {
  std::array<double, 13> edges{};
  std::array<double, 12> mean_bins{};
  std::int64_t n_nonempty = 0;  // training drawings that had data for this quantity
  // False for references refit from a feature table, where the original bin
  // edges are unrecoverable; such references still supply mean_bins.
  bool has_edges = true;
};

struct GroupReference {
  std::string group;
  double epsilon = kKlEpsilon;
  std::int64_t n_train = 0;
  std::array<QuantityReference, kHistogramQuantities> quantities;
  std::vector<std::string> vocabulary;
};

inline GroupReference fit_group_reference(const std::string& group,
                                          const std::vector<QuantitySet>& training,
                                          const MaterialLexicon& lexicon) {
  if (training.empty())
    throw std::invalid_argument("fit_group_reference: empty training set for group " + group);

  GroupReference ref;
  ref.group = group;
  ref.n_train = static_cast<std::int64_t>(training.size());

  for (std::size_t q = 0; q < kHistogramQuantities; ++q) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& qs : training) {
      for (double v : quantity_values(qs, q)) {
        if (!any) {
          lo = hi = v;
          any = true;
        } else {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    auto& qr = ref.quantities[q];
    qr.edges = any ? equal_width_edges(lo, hi) : equal_width_edges(0.0, 1.0);
    qr.mean_bins.fill(0.0);
    for (const auto& qs : training) {
      const auto& values = quantity_values(qs, q);
      if (values.empty()) continue;
      const Histogram12 h = build_histogram(values, qr.edges);
      for (std::size_t i = 0; i < 12; ++i) qr.mean_bins[i] += h.norm[i];
      ++qr.n_nonempty;
    }
    if (qr.n_nonempty > 0)
      for (auto& b : qr.mean_bins) b /= static_cast<double>(qr.n_nonempty);
  }

  // Vocabulary keeps lexicon order so feature columns are reproducible.
  std::set<std::string> observed;
  for (const auto& qs : training)
    for (const auto& m : qs.materials) observed.insert(m);
  for (const auto& name : lexicon.names())
    if (observed.count(name)) ref.vocabulary.push_back(name);
  return ref;
}

// ---------------------------------------------------------------------------
// JSON persistence

inline nlohmann::json group_reference_to_json(const GroupReference& ref) {
  nlohmann::json j;
  j["format"] = "dxfcost-group-reference-v1";
  j["group"] = ref.group;
  j["epsilon"] = ref.epsilon;
  j["n_train"] = ref.n_train;
  j["vocabulary"] = ref.vocabulary;
  nlohmann::json q = nlohmann::json::object();
  for (std::size_t i = 0; i < kHistogramQuantities; ++i) {
    const auto& qr = ref.quantities[i];
    nlohmann::json entry;
    entry["edges"] = std::vector<double>(qr.edges.begin(), qr.edges.end());
    entry["mean_bins"] = std::vector<double>(qr.mean_bins.begin(), qr.mean_bins.end());
    entry["n_nonempty"] = qr.n_nonempty;
    entry["has_edges"] = qr.has_edges;
    q[quantity_names()[i]] = std::move(entry);
  }
  j["quantities"] = std::move(q);
  return j;
}

inline GroupReference group_reference_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "dxfcost-group-reference-v1")
    throw SchemaError("not a group-reference file (missing or wrong format tag)");
  GroupReference ref;
  try {
    ref.group = j.at("group").get<std::string>();
    ref.epsilon = j.at("epsilon").get<double>();
    ref.n_train = j.at("n_train").get<std::int64_t>();
    ref.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < kHistogramQuantities; ++i) {
      const auto& entry = j.at("quantities").at(quantity_names()[i]);
      const auto edges = entry.at("edges").get<std::vector<double>>();
      const auto bins = entry.at("mean_bins").get<std::vector<double>>();
      if (edges.size() != 13 || bins.size() != 12)
        throw SchemaError("group-reference quantity arrays have wrong length");
      auto& qr = ref.quantities[i];
      std::copy(edges.begin(), edges.end(), qr.edges.begin());
      std::copy(bins.begin(), bins.end(), qr.mean_bins.begin());
      qr.n_nonempty = entry.value("n_nonempty", std::int64_t{0});
      qr.has_edges = entry.value("has_edges", true);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed group-reference file: ") + e.what());
  }
  return ref;
}

}  // namespace dxfcost
