#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they are used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "rocklab/extreal.hpp"
#include "rocklab/numeric.hpp"

namespace oracle {

using rocklab::ExtReal;
using rocklab::Vec;

// Brute-force conjugate sup_{z in grid} <y,z> - h(z) over a product grid.
inline double conjugate_grid_sup(const std::function<ExtReal(const Vec&)>& h, const Vec& y, double lo,
                                 double hi, std::size_t count) {
  const std::size_t m = y.size();
  std::vector<std::size_t> idx(m, 0);
  Vec z(m);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t j = 0; j < m; ++j)
      z[j] = lo + (hi - lo) * static_cast<double>(idx[j]) / static_cast<double>(count - 1);
    ExtReal hv = h(z);
    if (hv.is_finite()) {
      double v = -hv.value();
      for (std::size_t j = 0; j < m; ++j) v += y[j] * z[j];
      best = std::max(best, v);
    }
    std::size_t j = 0;
    while (j < m) {
      if (++idx[j] < count) break;
      idx[j] = 0;
      ++j;
    }
    if (j == m) break;
  }
  return best;
}

// Scans candidate scalars v and returns the interval of those satisfying
// the convex subgradient inequality h(x) >= h(z) + v (x - z) on a grid.
struct Interval1 {
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
};

inline Interval1 subgradient_scan(const std::function<ExtReal(double)>& h, double z, double v_lo, double v_hi,
                                  std::size_t v_count, double x_lo, double x_hi, std::size_t x_count) {
  const double hz = h(z).finite_value();
  Interval1 out;
  for (std::size_t i = 0; i < v_count; ++i) {
    const double v = v_lo + (v_hi - v_lo) * static_cast<double>(i) / static_cast<double>(v_count - 1);
    bool ok = true;
    for (std::size_t k = 0; k < x_count && ok; ++k) {
      const double x = x_lo + (x_hi - x_lo) * static_cast<double>(k) / static_cast<double>(x_count - 1);
      ExtReal hx = h(x);
      if (hx.is_pos_inf()) continue;
      if (hx.value() < hz + v * (x - z) - 1e-9) ok = false;
    }
    if (ok) {
      if (std::isnan(out.lo)) out.lo = v;
      out.hi = v;
    }
  }
  return out;
}

// Sorting-based superquantile: mean of the worst (1 - alpha) fraction.
inline double superquantile_sorted(Vec losses, Vec probs, double alpha) {
  std::vector<std::size_t> order(losses.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
  double cum = 0.0;
  double tail = 0.0;
  double var = losses[order.back()];
  bool found = false;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double p = probs[order[k]];
    if (!found && cum + p >= alpha - 1e-15) {
      var = losses[order[k]];
      tail += (cum + p - alpha) * var;
      found = true;
    } else if (found) {
      tail += p * losses[order[k]];
    }
    cum += p;
  }
  return tail / (1.0 - alpha);
}

inline std::mt19937 rng(unsigned seed) { return std::mt19937(seed); }

}  // namespace oracle
