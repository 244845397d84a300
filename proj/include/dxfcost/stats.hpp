#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dxfcost/common.hpp"

namespace dxfcost {

// The ten per-quantity summary statistics. All fields except count are
// kMissing when the sample is empty.
struct DescriptorSet {
  std::int64_t count = 0;
  double min = kMissing;
  double max = kMissing;
  double range = kMissing;
  double mean = kMissing;
  double median = kMissing;
  double mode = kMissing;
  double std_dev = kMissing;
  double skewness = kMissing;
  double kurtosis = kMissing;
};

struct Histogram12 {
  std::array<double, 13> edges{};
  std::array<std::int64_t, 12> counts{};
  std::array<double, 12> norm{};

  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

// 13 ascending boundaries for 12 equal-width bins over [lo, hi]. A degenerate
// range collapses to a unit-width band centered on the value.
inline std::array<double, 13> equal_width_edges(double lo, double hi) {
  std::array<double, 13> edges{};
  if (!(hi > lo)) {
    const double mid = lo;
    lo = mid - 0.5;
    hi = mid + 0.5;
  }
  for (int i = 0; i <= 12; ++i)
    edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * (static_cast<double>(i) / 12.0);
  edges[0] = lo;
  edges[12] = hi;
  for (int i = 0; i < 12; ++i) {
    if (!(edges[static_cast<std::size_t>(i)] < edges[static_cast<std::size_t>(i) + 1])) {
      // fp underflow squashed a boundary; fall back to the unit band
      return equal_width_edges((lo + hi) / 2.0, (lo + hi) / 2.0);
    }
  }
  return edges;
}

// Values land in bin i where edges[i] <= v < edges[i+1]; out-of-range values
// clamp to the first/last bin.
inline Histogram12 build_histogram(std::span<const double> values,
                                   const std::array<double, 13>& edges) {
  for (int i = 0; i < 12; ++i)
    if (!(edges[static_cast<std::size_t>(i)] < edges[static_cast<std::size_t>(i) + 1]))
      throw std::invalid_argument("histogram edges must be strictly ascending");

  Histogram12 h;
  h.edges = edges;
  for (double v : values) {
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    auto idx = static_cast<std::int64_t>(it - edges.begin()) - 1;
    idx = std::clamp<std::int64_t>(idx, 0, 11);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  const auto total = h.total();
  if (total > 0)
    for (int i = 0; i < 12; ++i)
      h.norm[static_cast<std::size_t>(i)] =
          static_cast<double>(h.counts[static_cast<std::size_t>(i)]) / static_cast<double>(total);
  return h;
}

// Summary statistics with pinned conventions: population (1/n) moments,
// Fisher skewness, excess kurtosis, midpoint median for even n, and the mode
// of a continuous sample taken as the center of the most populated of 12
// equal-width bins over [min, max] (ties resolve to the lowest bin).
inline DescriptorSet describe(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("describe: non-finite input value");

  DescriptorSet d;
  d.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return d;

  const auto n = static_cast<double>(values.size());
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  d.min = *mn_it;
  d.max = *mx_it;
  d.range = d.max - d.min;

  double sum = 0.0;
  for (double v : values) sum += v;
  d.mean = sum / n;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t half = sorted.size() / 2;
  d.median = (sorted.size() % 2 == 1) ? sorted[half] : (sorted[half - 1] + sorted[half]) / 2.0;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double c = v - d.mean;
    const double c2 = c * c;
    m2 += c2;
    m3 += c2 * c;
    m4 += c2 * c2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  d.std_dev = std::sqrt(m2);
  if (m2 < 1e-12 || values.size() < 3) {
    d.skewness = 0.0;
    d.kurtosis = 0.0;
  } else {
    d.skewness = m3 / std::pow(m2, 1.5);
    d.kurtosis = m4 / (m2 * m2) - 3.0;
  }

  if (values.size() == 1 || d.range == 0.0) {
    d.mode = d.min;
  } else {
    const auto hist = build_histogram(values, equal_width_edges(d.min, d.max));
    std::size_t best = 0;
    for (std::size_t i = 1; i < 12; ++i)
      if (hist.counts[i] > hist.counts[best]) best = i;
    d.mode = (hist.edges[best] + hist.edges[best + 1]) / 2.0;
  }
  return d;
}

}  // namespace dxfcost
