#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dxfcost/rng.hpp"

namespace dxfcost {

struct SplitSpec {
  double train = 0.70;
  double valid = 0.15;
  double test = 0.15;
  std::uint64_t seed = 0;

  void validate() const {
    if (train <= 0.0 || valid < 0.0 || test < 0.0)
      throw std::invalid_argument("split ratios must be nonnegative with train > 0");
    if (std::fabs(train + valid + test - 1.0) > 1e-9)
      throw std::invalid_argument("split ratios must sum to 1");
  }
};

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

// Seeded shuffle then contiguous cut. Valid/test take their rounded shares;
// train absorbs the remainder.
inline DatasetSplit split_dataset(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 3) throw std::invalid_argument("split_dataset: need at least 3 rows");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  rng.shuffle(order);

  auto n_valid = static_cast<std::size_t>(std::llround(spec.valid * static_cast<double>(n)));
  auto n_test = static_cast<std::size_t>(std::llround(spec.test * static_cast<double>(n)));
  if (n_valid + n_test >= n) {  // degenerate rounding on tiny n; keep train non-empty
    while (n_valid + n_test >= n && n_test > 0) --n_test;
    while (n_valid + n_test >= n && n_valid > 0) --n_valid;
  }
  const std::size_t n_train = n - n_valid - n_test;

  DatasetSplit out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.valid.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                   order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), order.end());
  return out;
}

// Seeded shuffle, then k contiguous folds whose sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> kfold(const std::vector<std::size_t>& indices,
                                                   std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be at least 2");
  if (k > indices.size()) throw std::invalid_argument("kfold: k exceeds number of rows");

  std::vector<std::size_t> order = indices;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = order.size() / k;
  const std::size_t extra = order.size() % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

}  // namespace dxfcost
