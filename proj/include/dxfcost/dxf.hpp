#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dxfcost/common.hpp"

namespace dxfcost {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

// One (group code, value) pair of an ASCII DXF stream.
struct DxfTag {
  int code = 0;
  std::string value;
};

struct LineEntity {
  Point2 start;
  Point2 end;
  double length() const { return distance(start, end); }
};

struct CircleEntity {
  Point2 center;
  double radius = 0.0;
};

struct ArcEntity {
  Point2 center;
  double radius = 0.0;
  double start_angle = 0.0;  // degrees
  double end_angle = 0.0;    // degrees
};

struct SplineEntity {
  int degree = 1;
  std::vector<Point2> control_points;
  std::vector<Point2> fit_points;
};

struct EllipseEntity {
  Point2 center;
  Point2 major_axis;       // vector from center to major-axis endpoint
  double axis_ratio = 1.0; // minor/major, in (0, 1]
};

enum class DimensionKind { kRotated, kAngular, kDiametric, kRadial, kOther };

inline const char* dimension_kind_name(DimensionKind k) {
  switch (k) {
    case DimensionKind::kRotated: return "rotated";
    case DimensionKind::kAngular: return "angular";
    case DimensionKind::kDiametric: return "diametric";
    case DimensionKind::kRadial: return "radial";
    default: return "other";
  }
}

struct DimensionEntity {
  DimensionKind kind = DimensionKind::kOther;
  std::optional<std::string> text_override;
  double measurement = 0.0;  // length units; degrees for angular dimensions
  std::optional<double> tolerance;
  std::optional<Point2> def_point_a;
  std::optional<Point2> def_point_b;
};

// A supported entity that had to be rejected (missing/malformed field).
struct Diagnostic {
  std::string entity_type;
  std::string message;
};

struct Drawing {
  std::vector<LineEntity> lines;
  std::vector<CircleEntity> circles;
  std::vector<ArcEntity> arcs;
  std::vector<SplineEntity> splines;
  std::vector<EllipseEntity> ellipses;
  std::vector<DimensionEntity> dimensions;
  std::vector<std::string> texts;
  std::string source_id;
  std::string group;

  std::vector<Diagnostic> diagnostics;
  std::map<std::string, std::int64_t> unsupported_counts;

  std::size_t accepted_entities() const {
    return lines.size() + circles.size() + arcs.size() + splines.size() + ellipses.size() +
           dimensions.size() + texts.size();
  }
};

// ---------------------------------------------------------------------------
// Tokenizer

inline std::vector<DxfTag> tokenize_dxf(std::string_view text) {
  if (text.starts_with("AutoCAD Binary DXF"))
    throw ParseError("binary DXF is not supported; export as ASCII DXF");
  if (text.starts_with("AC10") || text.starts_with("AC1."))
    throw ParseError("DWG is not supported; convert to ASCII DXF first");

  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      pos = text.size();
    } else {
      lines.push_back(text.substr(pos, nl - pos));
      pos = nl + 1;
    }
  }

  std::vector<DxfTag> tags;
  tags.reserve(lines.size() / 2);
  for (std::size_t i = 0; i < lines.size(); i += 2) {
    long long code = 0;
    if (!try_parse_int(lines[i], code))
      throw ParseError("DXF parse error at line " + std::to_string(i + 1) +
                       ": group code is not an integer");
    if (code < 0)
      throw ParseError("DXF parse error at line " + std::to_string(i + 1) +
                       ": negative group code");
    if (i + 1 >= lines.size())
      throw ParseError("DXF parse error at line " + std::to_string(i + 2) +
                       ": group code without a value line");
    std::string_view value = lines[i + 1];
    if (value.ends_with('\r')) value.remove_suffix(1);
    tags.push_back({static_cast<int>(code), std::string(value)});
  }
  return tags;
}

// ---------------------------------------------------------------------------
// Entity parsing

namespace detail {

struct EntityChunk {
  std::string type;
  std::vector<DxfTag> body;
};

class FieldReader {
 public:
  explicit FieldReader(const EntityChunk& chunk) : chunk_(chunk) {}

  // First occurrence of `code`, parsed as double. ok stays true only while
  // every requested field parses cleanly.
  std::optional<double> number(int code) {
    for (const auto& tag : chunk_.body) {
      if (tag.code != code) continue;
      double v = 0.0;
      if (!try_parse_double(tag.value, v)) {
        fail("code " + std::to_string(code) + " is not a number");
        return std::nullopt;
      }
      return v;
    }
    return std::nullopt;
  }

  std::optional<long long> integer(int code) {
    for (const auto& tag : chunk_.body) {
      if (tag.code != code) continue;
      long long v = 0;
      if (!try_parse_int(tag.value, v)) {
        fail("code " + std::to_string(code) + " is not an integer");
        return std::nullopt;
      }
      return v;
    }
    return std::nullopt;
  }

  std::optional<std::string> text(int code) const {
    for (const auto& tag : chunk_.body)
      if (tag.code == code) return tag.value;
    return std::nullopt;
  }

  std::vector<double> numbers(int code) {
    std::vector<double> out;
    for (const auto& tag : chunk_.body) {
      if (tag.code != code) continue;
      double v = 0.0;
      if (!try_parse_double(tag.value, v)) {
        fail("code " + std::to_string(code) + " is not a number");
        return {};
      }
      out.push_back(v);
    }
    return out;
  }

  double require(int code) {
    auto v = number(code);
    if (!v && error_.empty()) fail("missing mandatory code " + std::to_string(code));
    return v.value_or(0.0);
  }

  void fail(std::string msg) {
    if (error_.empty()) error_ = std::move(msg);
  }
  bool ok() const { return error_.empty(); }
  const std::string& error() const { return error_; }

 private:
  const EntityChunk& chunk_;
  std::string error_;
};

// "±<number>" anywhere in the dimension text; anything else means no tolerance.
inline std::optional<double> parse_tolerance(const std::string& text) {
  static const std::string kPlusMinus = "\xc2\xb1";  // UTF-8 ±
  const auto pos = text.find(kPlusMinus);
  if (pos == std::string::npos) return std::nullopt;
  std::size_t start = pos + kPlusMinus.size();
  while (start < text.size() && text[start] == ' ') ++start;
  std::size_t end = start;
  while (end < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '.'))
    ++end;
  double v = 0.0;
  if (end == start || !try_parse_double(std::string_view(text).substr(start, end - start), v))
    return std::nullopt;
  if (v < 0.0) return std::nullopt;
  return v;
}

inline std::optional<Point2> optional_point(FieldReader& f, int x_code, int y_code) {
  auto x = f.number(x_code);
  auto y = f.number(y_code);
  if (x && y) return Point2{*x, *y};
  return std::nullopt;
}

inline void parse_entity(const EntityChunk& chunk, Drawing& out) {
  FieldReader f(chunk);
  const auto reject = [&](const std::string& msg) {
    out.diagnostics.push_back({chunk.type, msg});
  };

  if (chunk.type == "LINE") {
    LineEntity e;
    e.start = {f.require(10), f.require(20)};
    e.end = {f.require(11), f.require(21)};
    if (!f.ok()) return reject(f.error());
    out.lines.push_back(e);
  } else if (chunk.type == "CIRCLE") {
    CircleEntity e;
    e.center = {f.require(10), f.require(20)};
    e.radius = f.require(40);
    if (!f.ok()) return reject(f.error());
    if (e.radius <= 0.0) return reject("non-positive radius");
    out.circles.push_back(e);
  } else if (chunk.type == "ARC") {
    ArcEntity e;
    e.center = {f.require(10), f.require(20)};
    e.radius = f.require(40);
    e.start_angle = f.require(50);
    e.end_angle = f.require(51);
    if (!f.ok()) return reject(f.error());
    if (e.radius <= 0.0) return reject("non-positive radius");
    out.arcs.push_back(e);
  } else if (chunk.type == "SPLINE") {
    SplineEntity e;
    auto degree = f.integer(71);
    if (!f.ok()) return reject(f.error());
    if (!degree) return reject("missing mandatory code 71");
    if (*degree < 1) return reject("degree must be >= 1");
    e.degree = static_cast<int>(*degree);
    auto cx = f.numbers(10), cy = f.numbers(20);
    auto fx = f.numbers(11), fy = f.numbers(21);
    if (!f.ok()) return reject(f.error());
    if (cx.size() != cy.size()) return reject("unpaired control-point coordinates");
    if (fx.size() != fy.size()) return reject("unpaired fit-point coordinates");
    for (std::size_t i = 0; i < cx.size(); ++i) e.control_points.push_back({cx[i], cy[i]});
    for (std::size_t i = 0; i < fx.size(); ++i) e.fit_points.push_back({fx[i], fy[i]});
    if (e.control_points.empty() && e.fit_points.empty()) return reject("spline has no points");
    out.splines.push_back(e);
  } else if (chunk.type == "ELLIPSE") {
    EllipseEntity e;
    e.center = {f.require(10), f.require(20)};
    e.major_axis = {f.require(11), f.require(21)};
    e.axis_ratio = f.require(40);
    if (!f.ok()) return reject(f.error());
    if (std::hypot(e.major_axis.x, e.major_axis.y) <= 0.0) return reject("zero major axis");
    if (e.axis_ratio <= 0.0 || e.axis_ratio > 1.0) return reject("axis ratio outside (0, 1]");
    out.ellipses.push_back(e);
  } else if (chunk.type == "TEXT") {
    auto body = f.text(1);
    if (!body) return reject("missing mandatory code 1");
    out.texts.push_back(*body);
  } else if (chunk.type == "MTEXT") {
    std::string body;
    bool any = false;
    for (const auto& tag : chunk.body) {
      if (tag.code == 1 || tag.code == 3) {
        body += tag.value;
        any = true;
      }
    }
    if (!any) return reject("missing text content (codes 1/3)");
    out.texts.push_back(body);
  } else if (chunk.type == "DIMENSION") {
    DimensionEntity e;
    auto flags = f.integer(70);
    if (!f.ok()) return reject(f.error());
    if (!flags) return reject("missing mandatory code 70");
    switch (*flags & 7) {  // block/ordinate flag bits masked off
      case 0: e.kind = DimensionKind::kRotated; break;
      case 2: e.kind = DimensionKind::kAngular; break;
      case 3: e.kind = DimensionKind::kDiametric; break;
      case 4: e.kind = DimensionKind::kRadial; break;
      default: e.kind = DimensionKind::kOther; break;
    }
    auto measurement = f.number(42);
    if (!f.ok()) return reject(f.error());
    if (!measurement) return reject("missing mandatory code 42");
    e.measurement = *measurement;
    e.text_override = f.text(1);
    if (e.text_override) e.tolerance = parse_tolerance(*e.text_override);
    e.def_point_a = optional_point(f, 13, 23);
    e.def_point_b = optional_point(f, 14, 24);
    if (!f.ok()) return reject(f.error());
    out.dimensions.push_back(std::move(e));
  } else {
    ++out.unsupported_counts[chunk.type];
  }
}

}  // namespace detail

// Builds the entity model from a token stream. Individual malformed entities
// land in drawing.diagnostics; only structural problems (no ENTITIES section,
// unterminated section) throw.
inline Drawing parse_drawing(const std::vector<DxfTag>& tags, std::string group,
                             std::string source_id) {
  Drawing out;
  out.group = std::move(group);
  out.source_id = std::move(source_id);

  std::size_t i = 0;
  bool found = false;
  for (; i + 1 < tags.size(); ++i) {
    if (tags[i].code == 0 && trim(tags[i].value) == "SECTION" && tags[i + 1].code == 2 &&
        trim(tags[i + 1].value) == "ENTITIES") {
      i += 2;
      found = true;
      break;
    }
  }
  if (!found) throw ParseError("no ENTITIES section in DXF stream");

  bool terminated = false;
  detail::EntityChunk chunk;
  const auto flush = [&] {
    if (!chunk.type.empty()) detail::parse_entity(chunk, out);
    chunk.type.clear();
    chunk.body.clear();
  };
  for (; i < tags.size(); ++i) {
    const auto& tag = tags[i];
    if (tag.code == 0) {
      if (trim(tag.value) == "ENDSEC") {
        terminated = true;
        break;
      }
      flush();
      chunk.type = to_upper(trim(tag.value));
    } else if (!chunk.type.empty()) {
      chunk.body.push_back(tag);
    } else {
      out.diagnostics.push_back({"", "stray tag before first entity"});
    }
  }
  if (!terminated) throw ParseError("ENTITIES section not terminated by ENDSEC");
  flush();
  return out;
}

// ---------------------------------------------------------------------------
// Writer

namespace detail {

inline void emit(std::ostream& os, int code, std::string_view value) {
  os << code << '\n' << value << '\n';
}

inline void emit(std::ostream& os, int code, double value) {
  os << code << '\n' << format_double(value) << '\n';
}

}  // namespace detail

// Minimal ASCII DXF (ENTITIES section only) that parse_drawing reads back
// exactly: numbers are written in shortest round-trip form.
inline std::string write_dxf(const Drawing& d) {
  std::ostringstream os;
  using detail::emit;
  emit(os, 0, "SECTION");
  emit(os, 2, "ENTITIES");
  for (const auto& e : d.lines) {
    emit(os, 0, "LINE");
    emit(os, 10, e.start.x);
    emit(os, 20, e.start.y);
    emit(os, 11, e.end.x);
    emit(os, 21, e.end.y);
  }
  for (const auto& e : d.circles) {
    emit(os, 0, "CIRCLE");
    emit(os, 10, e.center.x);
    emit(os, 20, e.center.y);
    emit(os, 40, e.radius);
  }
  for (const auto& e : d.arcs) {
    emit(os, 0, "ARC");
    emit(os, 10, e.center.x);
    emit(os, 20, e.center.y);
    emit(os, 40, e.radius);
    emit(os, 50, e.start_angle);
    emit(os, 51, e.end_angle);
  }
  for (const auto& e : d.splines) {
    emit(os, 0, "SPLINE");
    emit(os, 71, static_cast<double>(e.degree));
    for (const auto& p : e.control_points) {
      emit(os, 10, p.x);
      emit(os, 20, p.y);
    }
    for (const auto& p : e.fit_points) {
      emit(os, 11, p.x);
      emit(os, 21, p.y);
    }
  }
  for (const auto& e : d.ellipses) {
    emit(os, 0, "ELLIPSE");
    emit(os, 10, e.center.x);
    emit(os, 20, e.center.y);
    emit(os, 11, e.major_axis.x);
    emit(os, 21, e.major_axis.y);
    emit(os, 40, e.axis_ratio);
  }
  for (const auto& e : d.dimensions) {
    emit(os, 0, "DIMENSION");
    int flags = 6;  // maps back to kOther
    switch (e.kind) {
      case DimensionKind::kRotated: flags = 0; break;
      case DimensionKind::kAngular: flags = 2; break;
      case DimensionKind::kDiametric: flags = 3; break;
      case DimensionKind::kRadial: flags = 4; break;
      case DimensionKind::kOther: flags = 6; break;
    }
    emit(os, 70, std::string_view(std::to_string(flags)));
    if (e.text_override) emit(os, 1, *e.text_override);
    emit(os, 42, e.measurement);
    if (e.def_point_a) {
      emit(os, 13, e.def_point_a->x);
      emit(os, 23, e.def_point_a->y);
    }
    if (e.def_point_b) {
      emit(os, 14, e.def_point_b->x);
      emit(os, 24, e.def_point_b->y);
    }
  }
  for (const auto& t : d.texts) {
    emit(os, 0, "TEXT");
    emit(os, 1, t);
  }
  emit(os, 0, "ENDSEC");
  emit(os, 0, "EOF");
  return os.str();
}

// ---------------------------------------------------------------------------
// Geometry

// Angular span in degrees, in (0, 360]. Equal start/end means a full circle.
inline double arc_span_degrees(const ArcEntity& arc) {
  double span = std::fmod(arc.end_angle - arc.start_angle, 360.0);
  if (span < 0.0) span += 360.0;
  if (span == 0.0) span = 360.0;
  return span;
}

inline double arc_length(const ArcEntity& arc) {
  return arc.radius * arc_span_degrees(arc) * std::numbers::pi / 180.0;
}

// Scale factor converting drawing units to real-world units, recovered as the
// median measurement/def-point-distance ratio over rotated dimensions.
// Falls back to 1.0 when no usable rotated dimension exists.
inline double compute_scale(const Drawing& d) {
  std::vector<double> ratios;
  for (const auto& dim : d.dimensions) {
    if (dim.kind != DimensionKind::kRotated) continue;
    if (!dim.def_point_a || !dim.def_point_b) continue;
    const double dist = distance(*dim.def_point_a, *dim.def_point_b);
    if (dist <= 1e-9) continue;
    const double ratio = dim.measurement / dist;
    if (std::isfinite(ratio) && ratio > 0.0) ratios.push_back(ratio);
  }
  if (ratios.empty()) return 1.0;
  std::sort(ratios.begin(), ratios.end());
  const std::size_t half = ratios.size() / 2;
  return (ratios.size() % 2 == 1) ? ratios[half] : (ratios[half - 1] + ratios[half]) / 2.0;
}

}  // namespace dxfcost
