#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "dxfcost/rng.hpp"
#include "dxfcost/stats.hpp"

using namespace dxfcost;
using Catch::Matchers::WithinAbs;

namespace {

// Brute-force moment oracle: long double accumulators, two-pass central
// moments, median by full sort, mode by explicit linear-scan binning.
struct OracleDescriptors {
  double min = 0, max = 0, range = 0, mean = 0, median = 0, mode = 0;
  double std_dev = 0, skewness = 0, kurtosis = 0;
};

OracleDescriptors oracle_describe(std::vector<double> v) {
  OracleDescriptors o;
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  o.min = v.front();
  o.max = v.back();
  o.range = o.max - o.min;

  long double sum = 0.0L;
  for (double x : v) sum += x;
  o.mean = static_cast<double>(sum / static_cast<long double>(n));

  o.median = (n % 2 == 1) ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;

  if (n == 1 || o.range == 0.0) {
    o.mode = v[0];
  } else {
    double edges[13];
    for (int i = 0; i <= 12; ++i)
      edges[i] = o.min + (o.max - o.min) * (static_cast<double>(i) / 12.0);
    int counts[12] = {};
    for (double x : v) {
      int bin = 11;
      for (int i = 0; i < 12; ++i)
        if (x >= edges[i] && x < edges[i + 1]) {
          bin = i;
          break;
        }
      if (x < edges[0]) bin = 0;
      ++counts[bin];
    }
    int best = 0;
    for (int i = 1; i < 12; ++i)
      if (counts[i] > counts[best]) best = i;
    o.mode = (edges[best] + edges[best + 1]) / 2.0;
  }

  long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L;
  for (double x : v) {
    const long double d = static_cast<long double>(x) - static_cast<long double>(o.mean);
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<long double>(n);
  m3 /= static_cast<long double>(n);
  m4 /= static_cast<long double>(n);
  o.std_dev = static_cast<double>(std::sqrt(m2));
  if (n < 3 || m2 < 1e-12L) {
    o.skewness = 0.0;
    o.kurtosis = 0.0;
  } else {
    o.skewness = static_cast<double>(m3 / std::pow(m2, 1.5L));
    o.kurtosis = static_cast<double>(m4 / (m2 * m2) - 3.0L);
  }
  return o;
}

}  // namespace

TEST_CASE("descriptors match a brute-force moment oracle on random lists") {
  Rng rng(20240817);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 200));
    std::vector<double> v(n);
    const double spread = rng.uniform(0.5, 500.0);
    for (auto& x : v) x = rng.uniform(-spread, spread);

    const DescriptorSet got = describe(v);
    const OracleDescriptors want = oracle_describe(v);

    REQUIRE(got.count == static_cast<std::int64_t>(n));
    CHECK_THAT(got.min, WithinAbs(want.min, 1e-9));
    CHECK_THAT(got.max, WithinAbs(want.max, 1e-9));
    CHECK_THAT(got.range, WithinAbs(want.range, 1e-9));
    CHECK_THAT(got.mean, WithinAbs(want.mean, 1e-9));
    CHECK_THAT(got.median, WithinAbs(want.median, 1e-9));
    CHECK_THAT(got.mode, WithinAbs(want.mode, 1e-9));
    CHECK_THAT(got.std_dev, WithinAbs(want.std_dev, 1e-9));
    CHECK_THAT(got.skewness, WithinAbs(want.skewness, 1e-9));
    CHECK_THAT(got.kurtosis, WithinAbs(want.kurtosis, 1e-9));
  }
}

TEST_CASE("descriptor edge cases") {
  SECTION("empty input leaves every statistic missing") {
    const DescriptorSet d = describe(std::vector<double>{});
    CHECK(d.count == 0);
    CHECK(is_missing(d.min));
    CHECK(is_missing(d.max));
    CHECK(is_missing(d.range));
    CHECK(is_missing(d.mean));
    CHECK(is_missing(d.median));
    CHECK(is_missing(d.mode));
    CHECK(is_missing(d.std_dev));
    CHECK(is_missing(d.skewness));
    CHECK(is_missing(d.kurtosis));
  }
  SECTION("single value") {
    const DescriptorSet d = describe(std::vector<double>{7.25});
    CHECK(d.count == 1);
    CHECK(d.min == 7.25);
    CHECK(d.max == 7.25);
    CHECK(d.range == 0.0);
    CHECK(d.mean == 7.25);
    CHECK(d.median == 7.25);
    CHECK(d.mode == 7.25);
    CHECK(d.std_dev == 0.0);
    CHECK(d.skewness == 0.0);
    CHECK(d.kurtosis == 0.0);
  }
  SECTION("even-length median is the midpoint of the middle pair") {
    CHECK(describe(std::vector<double>{4.0, 1.0, 3.0, 2.0}).median == 2.5);
  }
  SECTION("odd-length median is the middle element") {
    CHECK(describe(std::vector<double>{3.0, 1.0, 2.0}).median == 2.0);
  }
  SECTION("mode ties resolve to the lowest bin") {
    // Two values in bin 1 of 12, two clamped into bin 12; the tie picks bin 1.
    const DescriptorSet d = describe(std::vector<double>{0.0, 0.0, 1.0, 1.0});
    CHECK_THAT(d.mode, WithinAbs(1.0 / 24.0, 1e-15));
  }
  SECTION("constant list yields zero spread and no shape statistics") {
    const DescriptorSet d = describe(std::vector<double>{5.0, 5.0, 5.0, 5.0});
    CHECK(d.mode == 5.0);
    CHECK(d.std_dev == 0.0);
    CHECK(d.skewness == 0.0);
    CHECK(d.kurtosis == 0.0);
  }
  SECTION("hand-computed skewness") {
    const DescriptorSet d = describe(std::vector<double>{0.0, 0.0, 0.0, 1.0});
    CHECK_THAT(d.skewness, WithinAbs(2.0 / std::sqrt(3.0), 1e-12));
  }
  SECTION("hand-computed excess kurtosis") {
    const DescriptorSet d = describe(std::vector<double>{-1.0, 1.0, -1.0, 1.0});
    CHECK_THAT(d.kurtosis, WithinAbs(-2.0, 1e-12));
  }
  SECTION("two values have defined spread but zero shape statistics") {
    const DescriptorSet d = describe(std::vector<double>{0.0, 2.0});
    CHECK(d.std_dev == 1.0);
    CHECK(d.skewness == 0.0);
    CHECK(d.kurtosis == 0.0);
  }
  SECTION("non-finite input is rejected") {
    CHECK_THROWS_AS(describe(std::vector<double>{1.0, std::nan("")}), std::invalid_argument);
  }
}

TEST_CASE("equal-width edges") {
  SECTION("13 strictly ascending edges spanning the range") {
    const auto e = equal_width_edges(2.0, 26.0);
    CHECK(e.front() == 2.0);
    CHECK(e.back() == 26.0);
    for (int i = 0; i < 12; ++i) {
      CHECK(e[static_cast<std::size_t>(i)] < e[static_cast<std::size_t>(i) + 1]);
      CHECK_THAT(e[static_cast<std::size_t>(i)], WithinAbs(2.0 + 2.0 * i, 1e-12));
    }
  }
  SECTION("degenerate range expands to a unit window around the value") {
    const auto e = equal_width_edges(3.0, 3.0);
    CHECK_THAT(e.front(), WithinAbs(2.5, 1e-12));
    CHECK_THAT(e.back(), WithinAbs(3.5, 1e-12));
    for (std::size_t i = 0; i < 12; ++i) CHECK(e[i] < e[i + 1]);
  }
}

TEST_CASE("histogram counts match a linear-scan oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const double lo = rng.uniform(-100.0, 100.0);
    const double hi = lo + rng.uniform(0.1, 200.0);
    const auto edges = equal_width_edges(lo, hi);
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 300));
    std::vector<double> v(n);
    // Deliberately overshoot the range so clamping is exercised.
    for (auto& x : v) x = rng.uniform(lo - 20.0, hi + 20.0);

    const Histogram12 h = build_histogram(v, edges);

    std::int64_t oracle[12] = {};
    for (double x : v) {
      int bin = 11;
      if (x < edges[0]) {
        bin = 0;
      } else {
        for (int i = 0; i < 12; ++i)
          if (x >= edges[static_cast<std::size_t>(i)] &&
              x < edges[static_cast<std::size_t>(i) + 1]) {
            bin = i;
            break;
          }
      }
      ++oracle[bin];
    }
    for (std::size_t b = 0; b < 12; ++b) REQUIRE(h.counts[b] == oracle[b]);

    double norm_sum = 0.0;
    for (std::size_t b = 0; b < 12; ++b) norm_sum += h.norm[b];
    CHECK_THAT(norm_sum, WithinAbs(1.0, 1e-12));
    CHECK(h.total() == static_cast<std::int64_t>(n));
  }
}

TEST_CASE("histogram boundary and empty-input behavior") {
  const auto edges = equal_width_edges(0.0, 12.0);
  SECTION("interior edge value belongs to the upper bin") {
    const Histogram12 h = build_histogram(std::vector<double>{3.0}, edges);
    CHECK(h.counts[3] == 1);
  }
  SECTION("value at the last edge clamps into bin 12") {
    const Histogram12 h = build_histogram(std::vector<double>{12.0}, edges);
    CHECK(h.counts[11] == 1);
  }
  SECTION("values outside the range clamp to the end bins") {
    const Histogram12 h = build_histogram(std::vector<double>{-5.0, 40.0}, edges);
    CHECK(h.counts[0] == 1);
    CHECK(h.counts[11] == 1);
  }
  SECTION("empty input leaves counts and normalized bins at zero") {
    const Histogram12 h = build_histogram(std::vector<double>{}, edges);
    for (std::size_t b = 0; b < 12; ++b) {
      CHECK(h.counts[b] == 0);
      CHECK(h.norm[b] == 0.0);
    }
  }
  SECTION("non-ascending edges are rejected") {
    auto bad = edges;
    bad[5] = bad[4];
    CHECK_THROWS_AS(build_histogram(std::vector<double>{1.0}, bad), std::invalid_argument);
  }
}
