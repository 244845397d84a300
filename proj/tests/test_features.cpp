#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "dxfcost/features.hpp"
#include "dxfcost/rng.hpp"
#include "dxfcost/table.hpp"

using namespace dxfcost;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

QuantitySet sample_quantities() {
  QuantitySet qs;
  qs.line_lengths = {1.0, 2.0, 3.0};
  qs.arc_lengths = {4.0, 5.0};
  qs.arc_angles = {90.0, 180.0};
  qs.circle_radii = {2.0};
  qs.rotated_measurements = {60.0, 20.0};
  qs.angular_measurements = {45.0};
  qs.diametric_measurements = {};
  qs.radial_measurements = {3.0};
  qs.tolerances = {0.1};
  qs.ellipse_count = 2;
  qs.spline_count = 1;
  qs.materials = {"C45"};
  return qs;
}

}  // namespace

TEST_CASE("schema ordering is canonical") {
  const FeatureSchema s = make_schema({"S235", "C45"});
  // 9 quantities x 10 descriptors, 5 x 24 histogram cells, 5 x 2 distances,
  // 2 entity counts, then one-hot materials.
  REQUIRE(s.size() == 90 + 120 + 10 + 2 + 2);

  CHECK(s.names[0] == "line_count");
  CHECK(s.names[1] == "line_min");
  CHECK(s.names[2] == "line_max");
  CHECK(s.names[3] == "line_range");
  CHECK(s.names[4] == "line_mean");
  CHECK(s.names[5] == "line_median");
  CHECK(s.names[6] == "line_mode");
  CHECK(s.names[7] == "line_std");
  CHECK(s.names[8] == "line_skewness");
  CHECK(s.names[9] == "line_kurtosis");
  CHECK(s.names[10] == "arc_count");
  CHECK(s.names[20] == "arc_angle_count");
  CHECK(s.names[30] == "circle_count");
  CHECK(s.names[40] == "rotated_count");
  CHECK(s.names[50] == "angular_count");
  CHECK(s.names[60] == "diameter_count");
  CHECK(s.names[70] == "radial_count");
  CHECK(s.names[80] == "tolerance_count");

  CHECK(s.names[90] == "line_bin1");
  CHECK(s.names[101] == "line_bin12");
  CHECK(s.names[102] == "norm_line_bin1");
  CHECK(s.names[113] == "norm_line_bin12");
  CHECK(s.names[114] == "arc_bin1");
  CHECK(s.names[90 + 2 * 24] == "arc_angle_bin1");
  CHECK(s.names[90 + 3 * 24] == "circle_bin1");
  CHECK(s.names[90 + 4 * 24] == "rotated_bin1");

  CHECK(s.names[210] == "line_euc_dist");
  CHECK(s.names[211] == "line_kl_div");
  CHECK(s.names[212] == "arc_euc_dist");
  CHECK(s.names[218] == "rotated_euc_dist");
  CHECK(s.names[219] == "rotated_kl_div");

  CHECK(s.names[220] == "ellipse_count");
  CHECK(s.names[221] == "spline_count");
  CHECK(s.names[222] == "mat_S235");
  CHECK(s.names[223] == "mat_C45");

  CHECK(s.index_of("norm_circle_bin7") == 90 + 3 * 24 + 12 + 6);
  CHECK_THROWS_AS(s.index_of("nope"), SchemaError);
}

TEST_CASE("featurize fills descriptors, histograms, counts and one-hots") {
  const FeatureSchema schema = make_schema({"S235", "C45"});
  const QuantitySet qs = sample_quantities();
  const FeatureVector fv = featurize(qs, nullptr, schema);
  REQUIRE(fv.values.size() == schema.size());

  CHECK(fv.values[schema.index_of("line_count")] == 3.0);
  CHECK(fv.values[schema.index_of("line_min")] == 1.0);
  CHECK(fv.values[schema.index_of("line_max")] == 3.0);
  CHECK(fv.values[schema.index_of("line_mean")] == 2.0);
  CHECK(fv.values[schema.index_of("rotated_max")] == 60.0);

  // Empty quantity: count is 0 and every other descriptor stays missing.
  CHECK(fv.values[schema.index_of("diameter_count")] == 0.0);
  CHECK(is_missing(fv.values[schema.index_of("diameter_mean")]));
  CHECK(is_missing(fv.values[schema.index_of("diameter_std")]));

  // Histogram cells sum to the list count; normalized cells sum to one.
  double raw = 0.0, norm = 0.0;
  for (int b = 1; b <= 12; ++b) {
    raw += fv.values[schema.index_of("line_bin" + std::to_string(b))];
    norm += fv.values[schema.index_of("norm_line_bin" + std::to_string(b))];
  }
  CHECK(raw == 3.0);
  CHECK_THAT(norm, WithinAbs(1.0, 1e-12));

  // Without a reference the distance features stay missing.
  CHECK(is_missing(fv.values[schema.index_of("line_euc_dist")]));
  CHECK(is_missing(fv.values[schema.index_of("line_kl_div")]));

  CHECK(fv.values[schema.index_of("ellipse_count")] == 2.0);
  CHECK(fv.values[schema.index_of("spline_count")] == 1.0);
  CHECK(fv.values[schema.index_of("mat_C45")] == 1.0);
  CHECK(fv.values[schema.index_of("mat_S235")] == 0.0);
}

TEST_CASE("featurize against a reference uses its edges and fills distances") {
  const MaterialLexicon lex({"S235", "C45"});
  const QuantitySet qs = sample_quantities();
  QuantitySet other;
  other.line_lengths = {0.5, 9.0};
  other.materials = {"S235"};
  const GroupReference ref = fit_group_reference("g", {qs, other}, lex);
  const FeatureSchema schema = make_schema(ref.vocabulary);

  const FeatureVector fv = featurize(qs, &ref, schema);

  // Distances recompute from the drawing's normalized bins vs the mean bins.
  const Histogram12 h = build_histogram(qs.line_lengths, ref.quantities[0].edges);
  const std::vector<double> dwg(h.norm.begin(), h.norm.end());
  const std::vector<double> mean(ref.quantities[0].mean_bins.begin(),
                                 ref.quantities[0].mean_bins.end());
  CHECK_THAT(fv.values[schema.index_of("line_euc_dist")],
             WithinAbs(euclidean_distance(dwg, mean), 1e-12));
  CHECK_THAT(fv.values[schema.index_of("line_kl_div")],
             WithinAbs(kl_divergence(dwg, mean), 1e-12));

  // Quantities with no data keep missing distances even with a reference.
  QuantitySet empty;
  const FeatureVector fe = featurize(empty, &ref, schema);
  CHECK(is_missing(fe.values[schema.index_of("line_euc_dist")]));
  CHECK(fe.values[schema.index_of("line_count")] == 0.0);
}

TEST_CASE("references without edges cannot featurize raw drawings") {
  const MaterialLexicon lex({"S235"});
  GroupReference ref = fit_group_reference("g", {sample_quantities()}, lex);
  ref.quantities[0].has_edges = false;
  const FeatureSchema schema = make_schema(ref.vocabulary);
  CHECK_THROWS_MATCHES(featurize(sample_quantities(), &ref, schema), SchemaError,
                       Catch::Matchers::MessageMatches(ContainsSubstring("bin edges")));
}

TEST_CASE("material one-hot covers the vocabulary") {
  const auto oh = material_onehot({"C45", "UNKNOWN"}, {"S235", "C45"});
  REQUIRE(oh.size() == 2);
  CHECK(oh.at("mat_S235") == 0.0);
  CHECK(oh.at("mat_C45") == 1.0);
}

TEST_CASE("feature table round trips through CSV exactly") {
  Rng rng(31);
  const FeatureSchema schema = make_schema({"S235", "C45"});
  FeatureTable table;
  table.schema = schema;
  for (int r = 0; r < 20; ++r) {
    FeatureVector fv;
    fv.values.resize(schema.size());
    for (auto& v : fv.values)
      v = rng.next_unit() < 0.2 ? kMissing : rng.uniform(-100.0, 100.0);
    fv.group = r % 2 == 0 ? "flanges" : "shafts";
    fv.cost = rng.uniform(0.5, 50.0);
    fv.source_id = "dwg_" + std::to_string(r);
    table.rows.push_back(std::move(fv));
  }

  std::ostringstream os;
  write_feature_table(table, os);
  std::istringstream is(os.str());
  const FeatureTable back = read_feature_table(is);

  REQUIRE(back.schema.names == table.schema.names);
  REQUIRE(back.schema.vocabulary == table.schema.vocabulary);
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    CHECK(back.rows[r].group == table.rows[r].group);
    CHECK(back.rows[r].source_id == table.rows[r].source_id);
    CHECK(back.rows[r].cost == table.rows[r].cost);
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (is_missing(table.rows[r].values[i]))
        CHECK(is_missing(back.rows[r].values[i]));
      else
        CHECK(back.rows[r].values[i] == table.rows[r].values[i]);
    }
  }
}

TEST_CASE("feature table header is strictly validated") {
  const FeatureSchema schema = make_schema({"S235"});
  FeatureTable table;
  table.schema = schema;
  FeatureVector fv;
  fv.values.assign(schema.size(), 1.0);
  fv.group = "g";
  fv.cost = 2.0;
  fv.source_id = "a";
  table.rows.push_back(fv);
  std::ostringstream os;
  write_feature_table(table, os);
  const std::string good = os.str();

  SECTION("shuffled column order is rejected") {
    std::string bad = good;
    const auto pos = bad.find("line_count,line_min");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 19, "line_min,line_count");
    std::istringstream is(bad);
    CHECK_THROWS_AS(read_feature_table(is), SchemaError);
  }
  SECTION("missing trailing metadata columns are rejected") {
    std::string bad = good;
    const auto pos = bad.find(",group,cost,source_id");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 22, ",group,source_id");
    std::istringstream is(bad);
    CHECK_THROWS_AS(read_feature_table(is), SchemaError);
  }
  SECTION("non-positive cost is rejected") {
    std::string bad = good;
    const auto pos = bad.rfind(",2,");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 3, ",-2,");
    std::istringstream is(bad);
    CHECK_THROWS_MATCHES(read_feature_table(is), SchemaError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("cost")));
  }
  SECTION("unparseable numeric cell is rejected") {
    std::string bad = good;
    const auto pos = bad.find("\n") + 1;  // first data row
    bad.replace(pos, 1, "x");
    std::istringstream is(bad);
    CHECK_THROWS_AS(read_feature_table(is), SchemaError);
  }
  SECTION("the untouched table reads back cleanly") {
    std::istringstream is(good);
    const FeatureTable t = read_feature_table(is);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].values[0] == 1.0);
  }
}
