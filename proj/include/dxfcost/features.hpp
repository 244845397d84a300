#pragma once

#include <map>
#include <string>
#include <vector>

#include "dxfcost/common.hpp"
#include "dxfcost/group_reference.hpp"
#include "dxfcost/quantities.hpp"
#include "dxfcost/stats.hpp"

namespace dxfcost {

// Canonical feature column order. Only the material block depends on the
// vocabulary; everything else is fixed.
struct FeatureSchema {
  std::vector<std::string> names;
  std::vector<std::string> vocabulary;

  std::size_t size() const { return names.size(); }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw SchemaError("unknown feature name: " + name);
  }
};

inline const std::vector<std::string>& descriptor_suffixes() {
  static const std::vector<std::string> kSuffixes = {
      "count", "min", "max", "range", "mean", "median", "mode", "std", "skewness", "kurtosis",
  };
  return kSuffixes;
}

inline FeatureSchema make_schema(const std::vector<std::string>& vocabulary) {
  FeatureSchema schema;
  schema.vocabulary = vocabulary;
  for (const auto& q : quantity_names())
    for (const auto& s : descriptor_suffixes()) schema.names.push_back(q + "_" + s);
  for (std::size_t q = 0; q < kHistogramQuantities; ++q) {
    const auto& name = quantity_names()[q];
    for (int b = 1; b <= 12; ++b) schema.names.push_back(name + "_bin" + std::to_string(b));
    for (int b = 1; b <= 12; ++b)
      schema.names.push_back("norm_" + name + "_bin" + std::to_string(b));
  }
  for (std::size_t q = 0; q < kHistogramQuantities; ++q) {
    const auto& name = quantity_names()[q];
    schema.names.push_back(name + "_euc_dist");
    schema.names.push_back(name + "_kl_div");
  }
  schema.names.push_back("ellipse_count");
  schema.names.push_back("spline_count");
  for (const auto& m : vocabulary) schema.names.push_back("mat_" + m);
  return schema;
}

struct FeatureVector {
  std::vector<double> values;  // aligned with a FeatureSchema; kMissing = absent
  std::string group;
  double cost = kMissing;  // optional target
  std::string source_id;
};

inline std::map<std::string, double> material_onehot(const std::vector<std::string>& materials,
                                                     const std::vector<std::string>& vocabulary) {
  std::map<std::string, double> out;
  for (const auto& name : vocabulary) out["mat_" + name] = 0.0;
  for (const auto& m : materials) {
    auto it = out.find("mat_" + m);
    if (it != out.end()) it->second = 1.0;
  }
  return out;
}

// Assembles the full feature row for one drawing. Histogram edges come from
// the group reference when given (so bins are comparable across drawings) and
// from the drawing's own min-max otherwise. Distance features need both a
// reference and non-empty data; they stay missing in every other case.
inline FeatureVector featurize(const QuantitySet& qs, const GroupReference* ref,
                               const FeatureSchema& schema) {
  FeatureVector fv;
  fv.values.reserve(schema.size());

  for (std::size_t q = 0; q < quantity_names().size(); ++q) {
    const DescriptorSet d = describe(quantity_values(qs, q));
    fv.values.push_back(static_cast<double>(d.count));
    fv.values.push_back(d.min);
    fv.values.push_back(d.max);
    fv.values.push_back(d.range);
    fv.values.push_back(d.mean);
    fv.values.push_back(d.median);
    fv.values.push_back(d.mode);
    fv.values.push_back(d.std_dev);
    fv.values.push_back(d.skewness);
    fv.values.push_back(d.kurtosis);
  }

  std::array<Histogram12, kHistogramQuantities> hists;
  for (std::size_t q = 0; q < kHistogramQuantities; ++q) {
    const auto& values = quantity_values(qs, q);
    std::array<double, 13> edges;
    if (ref) {
      if (!ref->quantities[q].has_edges)
        throw SchemaError("group reference for '" + ref->group +
                          "' lacks bin edges; it was refit from a feature table and cannot "
                          "featurize raw drawings");
      edges = ref->quantities[q].edges;
    } else if (!values.empty()) {
      double lo = values[0], hi = values[0];
      for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      edges = equal_width_edges(lo, hi);
    } else {
      edges = equal_width_edges(0.0, 1.0);
    }
    hists[q] = build_histogram(values, edges);
    for (std::size_t b = 0; b < 12; ++b)
      fv.values.push_back(static_cast<double>(hists[q].counts[b]));
    for (std::size_t b = 0; b < 12; ++b) fv.values.push_back(hists[q].norm[b]);
  }

  for (std::size_t q = 0; q < kHistogramQuantities; ++q) {
    if (ref && !quantity_values(qs, q).empty()) {
      const std::vector<double> dwg(hists[q].norm.begin(), hists[q].norm.end());
      const std::vector<double> mean(ref->quantities[q].mean_bins.begin(),
                                     ref->quantities[q].mean_bins.end());
      fv.values.push_back(euclidean_distance(dwg, mean));
      fv.values.push_back(kl_divergence(dwg, mean, ref->epsilon));
    } else {
      fv.values.push_back(kMissing);
      fv.values.push_back(kMissing);
    }
  }

  fv.values.push_back(static_cast<double>(qs.ellipse_count));
  fv.values.push_back(static_cast<double>(qs.spline_count));

  const auto mats = material_onehot(qs.materials, schema.vocabulary);
  for (const auto& name : schema.vocabulary) fv.values.push_back(mats.at("mat_" + name));

  if (fv.values.size() != schema.size())
    throw SchemaError("featurize produced a row that does not match the schema");
  return fv;
}

}  // namespace dxfcost
