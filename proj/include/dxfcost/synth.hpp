#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "dxfcost/common.hpp"
#include "dxfcost/dxf.hpp"
#include "dxfcost/quantities.hpp"
#include "dxfcost/rng.hpp"
#include "dxfcost/stats.hpp"

namespace dxfcost {

struct MaterialSpec {
  std::string name;
  double multiplier = 1.0;
};

// Ranges are inclusive; real-unit magnitudes are converted to drawing units
// through the per-drawing scale factor when geometry is emitted.
//
// The geometry model keeps the labeled cost drivers identifiable: arc radii
// are derived from independently drawn arc lengths (so length statistics say
// nothing about span statistics), two sentinel arcs pin the span extremes
// (so only the span mean tracks the per-drawing span location), and circle
// radii switch between spread shapes of equal std (so the radius std is the
// one spread statistic that predicts cost cleanly).
struct GroupTemplate {
  std::string name;
  int lines_min = 4, lines_max = 10;
  int arcs_min = 10, arcs_max = 14;  // excludes the two sentinel arcs
  int circles_min = 8, circles_max = 12;
  int ellipses_min = 0, ellipses_max = 3;
  int splines_min = 0, splines_max = 2;
  int extra_rotated_min = 1, extra_rotated_max = 3;
  int diametric_min = 0, diametric_max = 2;
  int radial_min = 0, radial_max = 2;
  int angular_min = 0, angular_max = 2;
  double line_len_min = 5.0, line_len_max = 50.0;
  double arc_len_min = 5.0, arc_len_max = 60.0;
  double arc_span_min = 40.0, arc_span_max = 340.0;
  double circle_center_min = 10.0, circle_center_max = 20.0;
  double circle_sigma_min = 0.2, circle_sigma_max = 5.0;
  double main_dim_min = 50.0, main_dim_max = 120.0;
  double scale_min = 0.5, scale_max = 2.0;
};

struct SynthConfig {
  int n_drawings = 800;
  std::vector<GroupTemplate> groups;
  double noise_pct = 0.05;
  std::vector<MaterialSpec> materials;
  double base = 2.0;
  double coef_rotated_max = 0.15;
  double coef_arc_angle_mean = 0.03;
  double coef_ellipse_count = 1.2;
  double coef_circle_radius_std = 0.8;
  double cost_floor = 0.50;
  double cost_ceiling = 50.00;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_drawings < 1) throw std::invalid_argument("synth: n_drawings must be >= 1");
    if (noise_pct < 0.0) throw std::invalid_argument("synth: noise_pct must be >= 0");
    if (groups.empty()) throw std::invalid_argument("synth: no group templates");
    if (materials.empty()) throw std::invalid_argument("synth: no materials");
    for (const auto& m : materials)
      if (m.multiplier <= 0.0) throw std::invalid_argument("synth: multiplier must be > 0");
    if (!(cost_floor > 0.0 && cost_ceiling > cost_floor))
      throw std::invalid_argument("synth: bad cost clamp bounds");
  }
};

inline SynthConfig default_synth_config() {
  SynthConfig cfg;
  cfg.groups.push_back(GroupTemplate{"bracket"});
  GroupTemplate housing{"housing"};
  housing.lines_min = 6;
  housing.lines_max = 14;
  housing.arcs_min = 11;
  housing.arcs_max = 15;
  housing.circles_min = 9;
  housing.circles_max = 13;
  housing.ellipses_max = 4;
  housing.splines_max = 3;
  housing.extra_rotated_max = 4;
  housing.diametric_min = 1;
  housing.diametric_max = 3;
  housing.radial_max = 3;
  housing.line_len_min = 10.0;
  housing.line_len_max = 80.0;
  housing.arc_len_min = 8.0;
  housing.arc_len_max = 70.0;
  housing.circle_center_min = 12.0;
  housing.circle_center_max = 22.0;
  housing.circle_sigma_min = 0.3;
  housing.circle_sigma_max = 5.5;
  housing.main_dim_min = 80.0;
  housing.main_dim_max = 150.0;
  housing.scale_min = 1.0;
  housing.scale_max = 4.0;
  cfg.groups.push_back(housing);
  cfg.materials = {{"S235", 1.00}, {"ALMG3", 1.02}, {"C45", 1.03}, {"TPU", 1.05}};
  return cfg;
}

inline MaterialLexicon lexicon_from_config(const SynthConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& m : cfg.materials) names.push_back(m.name);
  return MaterialLexicon(names);
}

// ---------------------------------------------------------------------------
// Cost function

namespace detail {

inline double list_max(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

inline double list_mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double list_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = list_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace detail

inline double material_multiplier(const SynthConfig& cfg, const std::string& material) {
  for (const auto& m : cfg.materials)
    if (m.name == material) return m.multiplier;
  throw std::invalid_argument("synth: unknown material " + material);
}

// Pre-noise label: linear drivers, clamped to the configured currency range,
// then scaled by the material multiplier.
inline double true_cost_mean(const QuantitySet& qs, const std::string& material,
                             const SynthConfig& cfg) {
  double cost = cfg.base;
  cost += cfg.coef_rotated_max * detail::list_max(qs.rotated_measurements);
  cost += cfg.coef_arc_angle_mean * detail::list_mean(qs.arc_angles);
  cost += cfg.coef_ellipse_count * static_cast<double>(qs.ellipse_count);
  cost += cfg.coef_circle_radius_std * detail::list_std(qs.circle_radii);
  cost = std::clamp(cost, cfg.cost_floor, cfg.cost_ceiling);
  return cost * material_multiplier(cfg, material);
}

inline double true_cost(const QuantitySet& qs, const std::string& material,
                        const SynthConfig& cfg, double noise) {
  return true_cost_mean(qs, material, cfg) * (1.0 + noise);
}

// ---------------------------------------------------------------------------
// Drawing generation

struct SynthDrawing {
  Drawing drawing;
  QuantitySet truth;
  std::string material;
  double noise = 0.0;
  double cost = 0.0;
};

// All randomness flows through `rng` in a fixed draw order, so one seed pins
// the whole corpus byte-for-byte.
inline SynthDrawing generate_drawing(const GroupTemplate& tpl, const SynthConfig& cfg,
                                     Rng& rng) {
  SynthDrawing out;
  Drawing& d = out.drawing;
  QuantitySet& qs = out.truth;
  d.group = tpl.name;

  const double scale = rng.uniform(tpl.scale_min, tpl.scale_max);
  qs.scale = scale;
  const auto coord = [&] { return rng.uniform(0.0, 200.0); };

  const int n_lines = static_cast<int>(rng.uniform_int(tpl.lines_min, tpl.lines_max));
  for (int i = 0; i < n_lines; ++i) {
    const double x = coord(), y = coord();
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double len_real = rng.uniform(tpl.line_len_min, tpl.line_len_max);
    const double len = len_real / scale;
    LineEntity e;
    e.start = {x, y};
    e.end = {x + std::cos(angle) * len, y + std::sin(angle) * len};
    d.lines.push_back(e);
    qs.line_lengths.push_back(distance(e.start, e.end) * scale);
  }

  // Spans sit in a fixed-width window around a per-drawing location; the two
  // sentinel arcs keep min/max/range near-constant across the corpus. Radii
  // come from independently drawn lengths, so length stats are span-blind.
  const auto add_arc = [&](double span, double len_real) {
    span = std::clamp(span, 1.0, 359.0);
    ArcEntity e;
    e.center = {coord(), coord()};
    e.radius = len_real * 180.0 / (std::numbers::pi * span) / scale;
    e.start_angle = rng.uniform(0.0, 360.0);
    e.end_angle = e.start_angle + span;
    d.arcs.push_back(e);
    qs.arc_lengths.push_back(e.radius * scale * span * std::numbers::pi / 180.0);
    qs.arc_angles.push_back(span);
  };
  const auto arc_len = [&] { return rng.uniform(tpl.arc_len_min, tpl.arc_len_max); };
  const double span_range = tpl.arc_span_max - tpl.arc_span_min;
  const double span_band = 0.0125 * span_range;
  const double span_jitter = 0.2 * span_range;
  add_arc(tpl.arc_span_min + rng.uniform(0.0, span_band), arc_len());
  add_arc(tpl.arc_span_max - rng.uniform(0.0, span_band), arc_len());
  const int n_arcs = static_cast<int>(rng.uniform_int(tpl.arcs_min, tpl.arcs_max));
  const double span_loc = rng.uniform(tpl.arc_span_min + span_jitter + 2.0 * span_band,
                                      tpl.arc_span_max - span_jitter - 2.0 * span_band);
  for (int i = 0; i < n_arcs; ++i)
    add_arc(span_loc + rng.uniform(-span_jitter, span_jitter), arc_len());

  // Radii spread around a per-drawing center with one of three shapes chosen
  // per drawing (uniform band, symmetric two-point, single outlier). The
  // shapes share the same std for a given sigma but differ in range and
  // extremes, so the std is the only spread statistic that tracks sigma.
  const int n_circles = static_cast<int>(rng.uniform_int(tpl.circles_min, tpl.circles_max));
  const double circle_center = rng.uniform(tpl.circle_center_min, tpl.circle_center_max);
  const double circle_sigma = rng.uniform(tpl.circle_sigma_min, tpl.circle_sigma_max);
  const auto circle_shape = rng.uniform_int(0, 2);
  for (int i = 0; i < n_circles; ++i) {
    double offset = 0.0;
    if (circle_shape == 0) {
      offset = rng.uniform(-std::numbers::sqrt3 * circle_sigma,
                           std::numbers::sqrt3 * circle_sigma);
    } else if (circle_shape == 1) {
      offset = (i % 2 == 0) ? circle_sigma : -circle_sigma;
    } else if (i == 0 && n_circles > 1) {
      const auto k = static_cast<double>(n_circles);
      offset = circle_sigma * k / std::sqrt(k - 1.0);
    }
    CircleEntity e;
    e.center = {coord(), coord()};
    const double r_real = std::max(0.2, circle_center + offset);
    e.radius = r_real / scale;
    d.circles.push_back(e);
    qs.circle_radii.push_back(e.radius * scale);
  }

  const int n_ellipses = static_cast<int>(rng.uniform_int(tpl.ellipses_min, tpl.ellipses_max));
  for (int i = 0; i < n_ellipses; ++i) {
    EllipseEntity e;
    e.center = {coord(), coord()};
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double len = rng.uniform(2.0, 30.0);
    e.major_axis = {std::cos(angle) * len, std::sin(angle) * len};
    e.axis_ratio = rng.uniform(0.2, 0.9);
    d.ellipses.push_back(e);
  }
  qs.ellipse_count = n_ellipses;

  const int n_splines = static_cast<int>(rng.uniform_int(tpl.splines_min, tpl.splines_max));
  for (int i = 0; i < n_splines; ++i) {
    SplineEntity e;
    e.degree = 3;
    const int n_ctrl = static_cast<int>(rng.uniform_int(4, 7));
    for (int p = 0; p < n_ctrl; ++p) e.control_points.push_back({coord(), coord()});
    d.splines.push_back(e);
  }
  qs.spline_count = n_splines;

  // One rotated dimension carries the true scale; extras stay strictly below
  // the main dimension so rotated_max always reflects part size.
  const auto add_rotated = [&](double measurement) {
    DimensionEntity dim;
    dim.kind = DimensionKind::kRotated;
    dim.measurement = measurement;
    const double y = coord();
    const double x = coord();
    dim.def_point_a = Point2{x, y};
    dim.def_point_b = Point2{x + measurement / scale, y};
    if (rng.next_unit() < 0.5) {
      const double tol = 0.05 * static_cast<double>(rng.uniform_int(1, 10));
      dim.text_override = format_double(measurement) + "\xc2\xb1" + format_double(tol);
      dim.tolerance = tol;
      qs.tolerances.push_back(tol);
    }
    d.dimensions.push_back(dim);
    qs.rotated_measurements.push_back(measurement);
  };
  add_rotated(rng.uniform(tpl.main_dim_min, tpl.main_dim_max));
  const int n_extra =
      static_cast<int>(rng.uniform_int(tpl.extra_rotated_min, tpl.extra_rotated_max));
  for (int i = 0; i < n_extra; ++i) add_rotated(rng.uniform(5.0, 45.0));

  const int n_angular = static_cast<int>(rng.uniform_int(tpl.angular_min, tpl.angular_max));
  for (int i = 0; i < n_angular; ++i) {
    DimensionEntity dim;
    dim.kind = DimensionKind::kAngular;
    dim.measurement = rng.uniform(10.0, 170.0);
    d.dimensions.push_back(dim);
    qs.angular_measurements.push_back(dim.measurement);
  }
  const int n_diam = static_cast<int>(rng.uniform_int(tpl.diametric_min, tpl.diametric_max));
  for (int i = 0; i < n_diam; ++i) {
    DimensionEntity dim;
    dim.kind = DimensionKind::kDiametric;
    dim.measurement = rng.uniform(2.0, 80.0);
    d.dimensions.push_back(dim);
    qs.diametric_measurements.push_back(dim.measurement);
  }
  const int n_radial = static_cast<int>(rng.uniform_int(tpl.radial_min, tpl.radial_max));
  for (int i = 0; i < n_radial; ++i) {
    DimensionEntity dim;
    dim.kind = DimensionKind::kRadial;
    dim.measurement = rng.uniform(1.0, 40.0);
    d.dimensions.push_back(dim);
    qs.radial_measurements.push_back(dim.measurement);
  }

  out.material = cfg.materials[rng.uniform_int(0, cfg.materials.size() - 1)].name;
  d.texts.push_back("Material: " + out.material);
  qs.materials = {out.material};

  // Relative noise clamped to half so the label stays positive.
  out.noise = std::clamp(rng.normal(0.0, cfg.noise_pct), -0.5, 0.5);
  out.cost = true_cost(qs, out.material, cfg, out.noise);
  return out;
}

// ---------------------------------------------------------------------------
// Corpus generation

struct SynthRecord {
  std::string source_id;
  std::string group;
  std::string material;
  double scale = 0.0;
  double noise = 0.0;
  double cost = 0.0;
  double rotated_max = 0.0;
  double arc_angle_mean = 0.0;
  double ellipse_count = 0.0;
  double circle_radius_std = 0.0;
};

struct SynthCorpus {
  std::vector<SynthDrawing> drawings;
  std::vector<SynthRecord> records;
};

inline std::uint64_t drawing_seed(std::uint64_t corpus_seed, int index) {
  return corpus_seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1);
}

inline SynthCorpus generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  SynthCorpus corpus;
  for (int i = 0; i < cfg.n_drawings; ++i) {
    const GroupTemplate& tpl = cfg.groups[static_cast<std::size_t>(i) % cfg.groups.size()];
    Rng rng(drawing_seed(cfg.seed, i));
    SynthDrawing sd = generate_drawing(tpl, cfg, rng);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04d", tpl.name.c_str(), i);
    sd.drawing.source_id = buf;

    SynthRecord rec;
    rec.source_id = sd.drawing.source_id;
    rec.group = tpl.name;
    rec.material = sd.material;
    rec.scale = sd.truth.scale;
    rec.noise = sd.noise;
    rec.cost = sd.cost;
    rec.rotated_max = detail::list_max(sd.truth.rotated_measurements);
    rec.arc_angle_mean = detail::list_mean(sd.truth.arc_angles);
    rec.ellipse_count = static_cast<double>(sd.truth.ellipse_count);
    rec.circle_radius_std = detail::list_std(sd.truth.circle_radii);
    corpus.records.push_back(std::move(rec));
    corpus.drawings.push_back(std::move(sd));
  }
  return corpus;
}

inline nlohmann::json synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::json j;
  j["format"] = "dxfcost-synth-config-v1";
  j["n_drawings"] = cfg.n_drawings;
  j["noise_pct"] = cfg.noise_pct;
  j["seed"] = cfg.seed;
  j["base"] = cfg.base;
  j["coef_rotated_max"] = cfg.coef_rotated_max;
  j["coef_arc_angle_mean"] = cfg.coef_arc_angle_mean;
  j["coef_ellipse_count"] = cfg.coef_ellipse_count;
  j["coef_circle_radius_std"] = cfg.coef_circle_radius_std;
  j["cost_floor"] = cfg.cost_floor;
  j["cost_ceiling"] = cfg.cost_ceiling;
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& m : cfg.materials) mats.push_back({{"name", m.name}, {"multiplier", m.multiplier}});
  j["materials"] = std::move(mats);
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : cfg.groups) {
    nlohmann::json t;
    t["name"] = g.name;
    t["lines"] = {g.lines_min, g.lines_max};
    t["arcs"] = {g.arcs_min, g.arcs_max};
    t["circles"] = {g.circles_min, g.circles_max};
    t["ellipses"] = {g.ellipses_min, g.ellipses_max};
    t["splines"] = {g.splines_min, g.splines_max};
    t["extra_rotated"] = {g.extra_rotated_min, g.extra_rotated_max};
    t["diametric"] = {g.diametric_min, g.diametric_max};
    t["radial"] = {g.radial_min, g.radial_max};
    t["angular"] = {g.angular_min, g.angular_max};
    t["line_len"] = {g.line_len_min, g.line_len_max};
    t["arc_len"] = {g.arc_len_min, g.arc_len_max};
    t["arc_span"] = {g.arc_span_min, g.arc_span_max};
    t["circle_center"] = {g.circle_center_min, g.circle_center_max};
    t["circle_sigma"] = {g.circle_sigma_min, g.circle_sigma_max};
    t["main_dim"] = {g.main_dim_min, g.main_dim_max};
    t["scale"] = {g.scale_min, g.scale_max};
    groups.push_back(std::move(t));
  }
  j["groups"] = std::move(groups);
  return j;
}

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "dxfcost-synth-config-v1")
    throw SchemaError("not a synth config file (missing or wrong format tag)");
  SynthConfig cfg = default_synth_config();
  try {
    cfg.n_drawings = j.value("n_drawings", cfg.n_drawings);
    cfg.noise_pct = j.value("noise_pct", cfg.noise_pct);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.base = j.value("base", cfg.base);
    cfg.coef_rotated_max = j.value("coef_rotated_max", cfg.coef_rotated_max);
    cfg.coef_arc_angle_mean = j.value("coef_arc_angle_mean", cfg.coef_arc_angle_mean);
    cfg.coef_ellipse_count = j.value("coef_ellipse_count", cfg.coef_ellipse_count);
    cfg.coef_circle_radius_std = j.value("coef_circle_radius_std", cfg.coef_circle_radius_std);
    cfg.cost_floor = j.value("cost_floor", cfg.cost_floor);
    cfg.cost_ceiling = j.value("cost_ceiling", cfg.cost_ceiling);
    if (j.contains("materials")) {
      cfg.materials.clear();
      for (const auto& m : j.at("materials"))
        cfg.materials.push_back({m.at("name").get<std::string>(), m.at("multiplier").get<double>()});
    }
    if (j.contains("groups")) {
      const auto pair_of = [](const nlohmann::json& t, const char* key, double& lo, double& hi) {
        if (!t.contains(key)) return;
        lo = t.at(key).at(0).get<double>();
        hi = t.at(key).at(1).get<double>();
      };
      const auto ipair_of = [](const nlohmann::json& t, const char* key, int& lo, int& hi) {
        if (!t.contains(key)) return;
        lo = t.at(key).at(0).get<int>();
        hi = t.at(key).at(1).get<int>();
      };
      cfg.groups.clear();
      for (const auto& t : j.at("groups")) {
        GroupTemplate g;
        g.name = t.at("name").get<std::string>();
        ipair_of(t, "lines", g.lines_min, g.lines_max);
        ipair_of(t, "arcs", g.arcs_min, g.arcs_max);
        ipair_of(t, "circles", g.circles_min, g.circles_max);
        ipair_of(t, "ellipses", g.ellipses_min, g.ellipses_max);
        ipair_of(t, "splines", g.splines_min, g.splines_max);
        ipair_of(t, "extra_rotated", g.extra_rotated_min, g.extra_rotated_max);
        ipair_of(t, "diametric", g.diametric_min, g.diametric_max);
        ipair_of(t, "radial", g.radial_min, g.radial_max);
        ipair_of(t, "angular", g.angular_min, g.angular_max);
        pair_of(t, "line_len", g.line_len_min, g.line_len_max);
        pair_of(t, "arc_len", g.arc_len_min, g.arc_len_max);
        pair_of(t, "arc_span", g.arc_span_min, g.arc_span_max);
        pair_of(t, "circle_center", g.circle_center_min, g.circle_center_max);
        pair_of(t, "circle_sigma", g.circle_sigma_min, g.circle_sigma_max);
        pair_of(t, "main_dim", g.main_dim_min, g.main_dim_max);
        pair_of(t, "scale", g.scale_min, g.scale_max);
        cfg.groups.push_back(std::move(g));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed synth config: ") + e.what());
  }
  return cfg;
}

// Writes <source_id>.dxf per drawing plus labels.csv and manifest.json.
inline SynthCorpus write_corpus(const SynthConfig& cfg, const std::string& out_dir) {
  SynthCorpus corpus = generate_corpus(cfg);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory: " + out_dir);

  for (const auto& sd : corpus.drawings) {
    const fs::path path = fs::path(out_dir) / (sd.drawing.source_id + ".dxf");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << write_dxf(sd.drawing);
    if (!out) throw IoError("write failed: " + path.string());
  }

  {
    std::ofstream labels(fs::path(out_dir) / "labels.csv", std::ios::binary);
    if (!labels) throw IoError("cannot open for writing: labels.csv");
    labels << "source_id,group,cost\n";
    for (const auto& rec : corpus.records)
      labels << rec.source_id << ',' << rec.group << ',' << format_double(rec.cost) << '\n';
  }
  {
    nlohmann::json manifest;
    manifest["format"] = "dxfcost-synth-manifest-v1";
    manifest["config"] = synth_config_to_json(cfg);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& rec : corpus.records) {
      nlohmann::json r;
      r["source_id"] = rec.source_id;
      r["group"] = rec.group;
      r["material"] = rec.material;
      r["scale"] = rec.scale;
      r["noise"] = rec.noise;
      r["cost"] = rec.cost;
      r["rotated_max"] = rec.rotated_max;
      r["arc_angle_mean"] = rec.arc_angle_mean;
      r["ellipse_count"] = rec.ellipse_count;
      r["circle_radius_std"] = rec.circle_radius_std;
      rows.push_back(std::move(r));
    }
    manifest["drawings"] = std::move(rows);
    std::ofstream mf(fs::path(out_dir) / "manifest.json", std::ios::binary);
    if (!mf) throw IoError("cannot open for writing: manifest.json");
    mf << manifest.dump(2) << '\n';
  }
  return corpus;
}

}  // namespace dxfcost
