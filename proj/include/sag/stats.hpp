#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

// Small shared statistics helpers: Wilson score intervals for binomial rates
// and summary statistics for dissemination-time samples.

namespace sag {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% Wilson score interval by default (z = 1.96). Well-behaved at rates
// near 0 and 1, unlike the normal approximation.
inline Interval wilson_interval(long long successes, long long trials, double z = 1.959963984540054) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // At the extremes the bound is exactly the observed rate; snap it there
  // rather than leave round-off residue.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Sample standard deviation (n-1 denominator); 0 for fewer than two samples.
inline double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

// Nearest-rank quantile on a sorted copy: q(p) = sorted[floor(p * (k-1))].
inline double quantile_of(std::vector<double> xs, double p) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const auto idx = static_cast<std::size_t>(p * static_cast<double>(xs.size() - 1));
  return xs[std::min(idx, xs.size() - 1)];
}

}  // namespace sag
