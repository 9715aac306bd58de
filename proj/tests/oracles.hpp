#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace groundrisk::oracle {

/// P(Bin(n, r) <= x) by direct summation of the pmf in long double.
inline long double binomial_cdf(std::size_t n, std::size_t x, long double r) {
  if (r <= 0.0L) return 1.0L;
  if (r >= 1.0L) return x >= n ? 1.0L : 0.0L;
  const long double log_r = std::log(r);
  const long double log_q = std::log1p(-r);
  long double sum = 0.0L;
  for (std::size_t k = 0; k <= x; ++k) {
    const long double log_choose = std::lgamma(static_cast<long double>(n) + 1) -
                                   std::lgamma(static_cast<long double>(k) + 1) -
                                   std::lgamma(static_cast<long double>(n - k) + 1);
    sum += std::exp(log_choose + static_cast<long double>(k) * log_r +
                    static_cast<long double>(n - k) * log_q);
  }
  return sum;
}

/// sup{R : P(Bin(n, R) <= x) >= delta} by bisection on the tail sum.
inline double binomial_upper_bound(std::size_t n, std::size_t x, double delta) {
  if (x >= n) return 1.0;
  long double lo = 0.0L, hi = 1.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (binomial_cdf(n, x, mid) >= delta)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<double>(lo);
}

/// Threshold search by testing every observed value independently. The
/// bound check uses the binomial dual: bound(X, n) <= alpha exactly when
/// P(Bin(n, alpha) <= X) <= delta.
inline std::optional<double> brute_force_threshold(std::span<const double> u, std::span<const std::uint8_t> err,
                                                   double alpha, double delta) {
  std::optional<double> best;
  for (double tau : u) {
    std::size_t n = 0, x = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u[i] <= tau) {
        ++n;
        x += err[i];
      }
    const bool ok = x < n && binomial_cdf(n, x, alpha) <= delta;
    if (ok && (!best || tau > *best)) best = tau;
  }
  return best;
}

/// O(n^2) pairwise AUROC: inadmissible above admissible, ties half.
inline double pairwise_auroc(std::span<const double> u, std::span<const std::uint8_t> adm) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (adm[i] != 0) continue;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (adm[j] != 1) continue;
      pairs += 1.0;
      if (u[i] > u[j])
        wins += 1.0;
      else if (u[i] == u[j])
        wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Recursive flood fill over the strictly thresholded mask. Returns the set
/// of regions, each a sorted set of row-major indices.
inline std::set<std::set<std::size_t>> flood_fill_regions(const std::vector<double>& values, int h, int w,
                                                          double beta) {
  const double p_max = *std::max_element(values.begin(), values.end());
  std::vector<int> label(values.size(), -1);
  std::set<std::set<std::size_t>> regions;
  auto keep = [&](int r, int c) { return values[static_cast<std::size_t>(r * w + c)] > beta * p_max; };
  for (int r0 = 0; r0 < h; ++r0)
    for (int c0 = 0; c0 < w; ++c0) {
      if (!keep(r0, c0) || label[static_cast<std::size_t>(r0 * w + c0)] >= 0) continue;
      std::set<std::size_t> region;
      std::vector<std::pair<int, int>> stack{{r0, c0}};
      while (!stack.empty()) {
        auto [r, c] = stack.back();
        stack.pop_back();
        if (r < 0 || c < 0 || r >= h || c >= w) continue;
        const auto idx = static_cast<std::size_t>(r * w + c);
        if (!keep(r, c) || label[idx] >= 0) continue;
        label[idx] = 1;
        region.insert(idx);
        stack.push_back({r + 1, c});
        stack.push_back({r - 1, c});
        stack.push_back({r, c + 1});
        stack.push_back({r, c - 1});
      }
      regions.insert(std::move(region));
    }
  return regions;
}

}  // namespace groundrisk::oracle
