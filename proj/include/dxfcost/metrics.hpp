#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dxfcost {

enum class Metric { kMae, kMape, kMse };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::kMae: return "mae";
    case Metric::kMape: return "mape";
    default: return "mse";
  }
}

inline Metric metric_from_name(const std::string& name) {
  if (name == "mae") return Metric::kMae;
  if (name == "mape") return Metric::kMape;
  if (name == "mse") return Metric::kMse;
  throw std::invalid_argument("unknown metric: " + name);
}

inline void check_pair(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("metric: length mismatch");
  if (y.empty()) throw std::invalid_argument("metric: empty input");
}

inline double mae(const std::vector<double>& y, const std::vector<double>& yhat) {
  check_pair(y, yhat);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::fabs(y[i] - yhat[i]);
  return sum / static_cast<double>(y.size());
}

constexpr double kMapeGuard = 1e-9;

// Percent error; targets with |y| <= 1e-9 are excluded from the mean.
inline double mape(const std::vector<double>& y, const std::vector<double>& yhat) {
  check_pair(y, yhat);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::fabs(y[i]) <= kMapeGuard) continue;
    sum += std::fabs(y[i] - yhat[i]) / std::fabs(y[i]);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("mape: every target is below the zero guard");
  return 100.0 * sum / static_cast<double>(n);
}

inline double mse(const std::vector<double>& y, const std::vector<double>& yhat) {
  check_pair(y, yhat);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - yhat[i];
    sum += d * d;
  }
  return sum / static_cast<double>(y.size());
}

inline double metric_value(Metric m, const std::vector<double>& y,
                           const std::vector<double>& yhat) {
  switch (m) {
    case Metric::kMae: return mae(y, yhat);
    case Metric::kMape: return mape(y, yhat);
    default: return mse(y, yhat);
  }
}

}  // namespace dxfcost
