#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rocklab/numeric.hpp"

namespace rocklab {

// Smooth map R^n -> R^m where every output is a sum of monomials
// coef * prod_j x_j^{e_j}. Exponents are nonnegative integers except in
// outputs tagged `inverse`, which may carry negative exponents (n == 1,
// valid on a positive ray only). Jacobians are exact.
struct PolyTerm {
  double coef = 0.0;
  std::vector<int> exps;
};

struct PolyOutput {
  std::vector<PolyTerm> terms;
  bool inverse = false;
};

class PolyMap {
public:
  PolyMap(std::size_t n, std::vector<PolyOutput> outputs) : n_(n), outputs_(std::move(outputs)) {
    for (const auto& out : outputs_) {
      for (const auto& t : out.terms) {
        require_dim(t.exps.size(), n_, "PolyMap term");
        for (int e : t.exps) {
          if (e < 0 && !out.inverse) throw std::invalid_argument("PolyMap: negative exponent in plain output");
          if (e < 0 && n_ != 1) throw std::invalid_argument("PolyMap: inverse outputs need n == 1");
        }
      }
    }
  }

  // Univariate convenience: one output per list of (coef, exponent) pairs.
  static PolyMap univariate(std::vector<std::vector<std::pair<double, int>>> per_output, bool inverse = false) {
    std::vector<PolyOutput> outs;
    for (auto& terms : per_output) {
      PolyOutput o;
      o.inverse = inverse;
      for (auto& [c, e] : terms) o.terms.push_back(PolyTerm{c, {e}});
      outs.push_back(std::move(o));
    }
    return PolyMap(1, std::move(outs));
  }

  std::size_t input_dim() const { return n_; }
  std::size_t output_dim() const { return outputs_.size(); }
  const std::vector<PolyOutput>& outputs() const { return outputs_; }

  bool in_domain(std::span<const double> x) const {
    require_dim(x.size(), n_, "PolyMap::in_domain");
    for (const auto& out : outputs_)
      if (out.inverse && x[0] <= 0.0) return false;
    return true;
  }

  double eval_output(std::size_t i, std::span<const double> x) const {
    const PolyOutput& out = outputs_[i];
    double s = 0.0;
    for (const auto& t : out.terms) {
      double prod = t.coef;
      for (std::size_t j = 0; j < n_; ++j) prod *= ipow(x[j], t.exps[j]);
      s += prod;
    }
    return s;
  }

  Vec eval(std::span<const double> x) const {
    require_dim(x.size(), n_, "PolyMap::eval");
    if (!in_domain(x)) throw std::domain_error("PolyMap: x outside domain of inverse output");
    Vec out(outputs_.size());
    for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = eval_output(i, x);
    return out;
  }

  // Row-major m x n Jacobian.
  std::vector<Vec> jacobian(std::span<const double> x) const {
    require_dim(x.size(), n_, "PolyMap::jacobian");
    if (!in_domain(x)) throw std::domain_error("PolyMap: x outside domain of inverse output");
    std::vector<Vec> J(outputs_.size(), Vec(n_, 0.0));
    for (std::size_t i = 0; i < outputs_.size(); ++i) {
      for (const auto& t : outputs_[i].terms) {
        for (std::size_t j = 0; j < n_; ++j) {
          if (t.exps[j] == 0) continue;
          double d = t.coef * static_cast<double>(t.exps[j]) * ipow(x[j], t.exps[j] - 1);
          for (std::size_t k = 0; k < n_; ++k)
            if (k != j) d *= ipow(x[k], t.exps[k]);
          J[i][j] += d;
        }
      }
    }
    return J;
  }

private:
  static double ipow(double base, int e) {
    if (e == 0) return 1.0;
    const bool neg = e < 0;
    unsigned long k = neg ? static_cast<unsigned long>(-(long)e) : static_cast<unsigned long>(e);
    double r = 1.0, b = base;
    while (k) {
      if (k & 1UL) r *= b;
      b *= b;
      k >>= 1UL;
    }
    return neg ? 1.0 / r : r;
  }

  std::size_t n_;
  std::vector<PolyOutput> outputs_;
};

// Central finite-difference validation of the analytic Jacobian.
struct GradCheckEntry {
  std::size_t output, input;
  double analytic, fd, rel_error;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
};

inline GradCheckReport grad_check(const PolyMap& map, std::span<const double> x, double step = 1e-6) {
  if (!map.in_domain(x)) throw std::domain_error("grad_check: x outside domain");
  GradCheckReport rep;
  const auto J = map.jacobian(x);
  Vec xp(x.begin(), x.end()), xm(x.begin(), x.end());
  for (std::size_t j = 0; j < map.input_dim(); ++j) {
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    const Vec fp = map.eval(xp);
    const Vec fm = map.eval(xm);
    for (std::size_t i = 0; i < map.output_dim(); ++i) {
      const double fd = (fp[i] - fm[i]) / (2.0 * step);
      const double a = J[i][j];
      const double rel = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
      rep.entries.push_back({i, j, a, fd, rel});
      rep.max_rel_error = std::max(rep.max_rel_error, rel);
    }
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return rep;
}

}  // namespace rocklab
