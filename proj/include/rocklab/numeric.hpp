#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rocklab {

using Vec = std::vector<double>;

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double norm_inf(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

inline double dist2(std::span<const double> a, std::span<const double> b) {
  require_dim(a.size(), b.size(), "dist2");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double dist_inf(std::span<const double> a, std::span<const double> b) {
  require_dim(a.size(), b.size(), "dist_inf");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

// Uniform grid with both endpoints included; count >= 2.
inline Vec linspace(double lo, double hi, std::size_t count) {
  if (count < 2) throw std::invalid_argument("linspace: count must be >= 2");
  Vec out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

}  // namespace rocklab
