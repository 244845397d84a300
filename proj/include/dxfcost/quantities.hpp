#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "dxfcost/common.hpp"
#include "dxfcost/dxf.hpp"

namespace dxfcost {

// Ordered list of recognizable material names. Matching is case-insensitive
// on whitespace/punctuation-delimited tokens of the drawing texts.
class MaterialLexicon {
 public:
  MaterialLexicon() = default;

  explicit MaterialLexicon(std::vector<std::string> names) {
    for (auto& n : names) add(trim(n));
  }

  static MaterialLexicon from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open material lexicon: " + path);
    MaterialLexicon lex;
    std::string line;
    while (std::getline(in, line)) {
      const std::string name = std::string(trim(line));
      if (!name.empty() && name[0] != '#') lex.add(name);
    }
    return lex;
  }

  void add(std::string_view name) {
    if (name.empty()) return;
    const std::string key = to_upper(name);
    for (const auto& existing : names_)
      if (to_upper(existing) == key) return;
    names_.emplace_back(name);
  }

  const std::vector<std::string>& names() const { return names_; }
  bool empty() const { return names_.empty(); }

  // Canonical names (lexicon order) whose uppercased form appears as a token
  // in any of the texts.
  std::vector<std::string> match(const std::vector<std::string>& texts) const {
    std::set<std::string> seen;
    for (const auto& text : texts)
      for (const auto& token : alnum_tokens(text)) seen.insert(token);
    std::vector<std::string> out;
    for (const auto& name : names_)
      if (seen.count(to_upper(name))) out.push_back(name);
    return out;
  }

 private:
  std::vector<std::string> names_;
};

// Raw per-drawing quantity lists, already in real-world units.
struct QuantitySet {
  std::vector<double> line_lengths;
  std::vector<double> arc_lengths;
  std::vector<double> arc_angles;  // degrees, never rescaled
  std::vector<double> circle_radii;
  std::vector<double> rotated_measurements;
  std::vector<double> angular_measurements;
  std::vector<double> diametric_measurements;
  std::vector<double> radial_measurements;
  std::vector<double> tolerances;
  std::int64_t ellipse_count = 0;
  std::int64_t spline_count = 0;
  std::vector<std::string> materials;
  double scale = 1.0;
};

// Names used for per-quantity features; the first five also carry histograms.
inline const std::vector<std::string>& quantity_names() {
  static const std::vector<std::string> kNames = {
      "line",   "arc",     "arc_angle", "circle",    "rotated",
      "angular", "diameter", "radial",   "tolerance",
  };
  return kNames;
}

constexpr std::size_t kHistogramQuantities = 5;

inline const std::vector<double>& quantity_values(const QuantitySet& qs, std::size_t index) {
  switch (index) {
    case 0: return qs.line_lengths;
    case 1: return qs.arc_lengths;
    case 2: return qs.arc_angles;
    case 3: return qs.circle_radii;
    case 4: return qs.rotated_measurements;
    case 5: return qs.angular_measurements;
    case 6: return qs.diametric_measurements;
    case 7: return qs.radial_measurements;
    case 8: return qs.tolerances;
    default: throw std::out_of_range("quantity index");
  }
}

inline QuantitySet extract_quantities(const Drawing& d, const MaterialLexicon& lexicon) {
  QuantitySet qs;
  qs.scale = compute_scale(d);
  for (const auto& e : d.lines) qs.line_lengths.push_back(qs.scale * e.length());
  for (const auto& e : d.arcs) {
    qs.arc_lengths.push_back(qs.scale * arc_length(e));
    qs.arc_angles.push_back(arc_span_degrees(e));
  }
  for (const auto& e : d.circles) qs.circle_radii.push_back(qs.scale * e.radius);
  for (const auto& dim : d.dimensions) {
    switch (dim.kind) {
      case DimensionKind::kRotated: qs.rotated_measurements.push_back(dim.measurement); break;
      case DimensionKind::kAngular: qs.angular_measurements.push_back(dim.measurement); break;
      case DimensionKind::kDiametric: qs.diametric_measurements.push_back(dim.measurement); break;
      case DimensionKind::kRadial: qs.radial_measurements.push_back(dim.measurement); break;
      case DimensionKind::kOther: break;
    }
    if (dim.tolerance) qs.tolerances.push_back(*dim.tolerance);
  }
  qs.ellipse_count = static_cast<std::int64_t>(d.ellipses.size());
  qs.spline_count = static_cast<std::int64_t>(d.splines.size());
  qs.materials = lexicon.match(d.texts);
  return qs;
}

}  // namespace dxfcost
