#ifndef OGTT_DIAGNOSTICS_HPP
#define OGTT_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "ogtt/error.hpp"

namespace ogtt {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of an empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double stddev(std::span<const double> x) {
  const double m = mean(x);
  if (x.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / double(x.size() - 1));
}

/// Quantile of sorted data by linear interpolation between order statistics; p in [0, 1].
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty series");
  const double pos = std::clamp(p, 0.0, 1.0) * double(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - double(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  return quantile_sorted(x, p);
}

/// Integrated autocorrelation time 1 + 2 sum_k rho(k).
///
/// The sum is truncated with Geyer's initial positive sequence: autocovariances
/// are summed in adjacent pairs gamma(2m) + gamma(2m+1) until the first
/// non-positive pair.
inline double iat(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw InvalidArgument("IAT needs at least 100 values");
  const double m = mean(series);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = series[i] - m;
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += c[t] * c[t + lag];
    return s / double(n);
  };
  const double gamma0 = autocov(0);
  const double scale = std::max(1.0, m * m);
  if (!(gamma0 > 1e-24 * scale)) throw UndefinedIat("IAT is undefined for a constant series");
  double pair_sum = 0.0;
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    const double pair = autocov(lag) + autocov(lag + 1);
    if (pair <= 0.0) break;
    pair_sum += pair;
  }
  return std::max((-gamma0 + 2.0 * pair_sum) / gamma0, 0.0);
}

}  // namespace ogtt

#endif  // OGTT_DIAGNOSTICS_HPP
