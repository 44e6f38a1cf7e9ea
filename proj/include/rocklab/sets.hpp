#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rocklab/numeric.hpp"

namespace rocklab {

// Coordinate cone tags. A normal cone of every set in the catalog is a
// product of these per-coordinate cones.
enum class CoordCone { Zero, NonnegRay, NonposRay, All };

struct ConeDesc {
  std::vector<CoordCone> coords;

  std::size_t dim() const { return coords.size(); }

  // Euclidean distance from v to the cone (product structure makes it
  // coordinate-wise).
  double distance(std::span<const double> v) const {
    require_dim(v.size(), coords.size(), "ConeDesc::distance");
    double s = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
      double r = 0.0;
      switch (coords[i]) {
        case CoordCone::Zero: r = std::abs(v[i]); break;
        case CoordCone::NonnegRay: r = std::max(0.0, -v[i]); break;
        case CoordCone::NonposRay: r = std::max(0.0, v[i]); break;
        case CoordCone::All: r = 0.0; break;
      }
      s += r * r;
    }
    return std::sqrt(s);
  }

  bool contains(std::span<const double> v, double tol) const { return distance(v) <= tol; }
};

// Boundary-detection tolerance: a coordinate counts as "at bound" when
// within this absolute distance. Overridable per call.
inline constexpr double kBoundTol = 1e-9;

struct WholeSpace {
  std::size_t n;
};
struct Box {
  Vec lower, upper;  // entries may be +-inf
};
struct NonposOrthant {
  std::size_t n;
};
struct SingletonZero {
  std::size_t n;
};
struct FinitePointSet {
  std::vector<Vec> points;
};
struct PositiveRay {
  double eps;  // {x in R : x >= eps}, eps > 0
};

class FeasibleSet {
public:
  using Variant = std::variant<WholeSpace, Box, NonposOrthant, SingletonZero, FinitePointSet, PositiveRay>;

  FeasibleSet(Variant v) : v_(std::move(v)) { validate(); }

  static FeasibleSet whole(std::size_t n) { return FeasibleSet(WholeSpace{n}); }
  static FeasibleSet box(Vec lower, Vec upper) { return FeasibleSet(Box{std::move(lower), std::move(upper)}); }
  static FeasibleSet nonpos(std::size_t n) { return FeasibleSet(NonposOrthant{n}); }
  static FeasibleSet zero(std::size_t n) { return FeasibleSet(SingletonZero{n}); }
  static FeasibleSet finite(std::vector<Vec> pts) { return FeasibleSet(FinitePointSet{std::move(pts)}); }
  static FeasibleSet positive_ray(double eps) { return FeasibleSet(PositiveRay{eps}); }

  const Variant& variant() const { return v_; }

  std::size_t dim() const {
    return std::visit(
        [](const auto& s) -> std::size_t {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, WholeSpace> || std::is_same_v<T, NonposOrthant> ||
                        std::is_same_v<T, SingletonZero>)
            return s.n;
          else if constexpr (std::is_same_v<T, Box>)
            return s.lower.size();
          else if constexpr (std::is_same_v<T, FinitePointSet>)
            return s.points.front().size();
          else
            return 1;
        },
        v_);
  }

private:
  void validate() const {
    if (const auto* b = std::get_if<Box>(&v_)) {
      require_dim(b->upper.size(), b->lower.size(), "Box");
      for (std::size_t i = 0; i < b->lower.size(); ++i)
        if (!(b->lower[i] <= b->upper[i])) throw std::invalid_argument("Box: lower > upper");
    } else if (const auto* f = std::get_if<FinitePointSet>(&v_)) {
      if (f->points.empty()) throw std::invalid_argument("FinitePointSet: empty");
      for (const auto& p : f->points) require_dim(p.size(), f->points.front().size(), "FinitePointSet");
    } else if (const auto* r = std::get_if<PositiveRay>(&v_)) {
      if (!(r->eps > 0.0)) throw std::invalid_argument("PositiveRay: eps must be > 0");
    }
  }

  Variant v_;
};

// Euclidean projection onto X. Coordinate-wise clamp for the box-like
// variants; nearest member (lowest index on ties) for finite point sets.
inline Vec project(const FeasibleSet& X, std::span<const double> x) {
  require_dim(x.size(), X.dim(), "project");
  Vec out(x.begin(), x.end());
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          // identity
        } else if constexpr (std::is_same_v<T, Box>) {
          for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], s.lower[i], s.upper[i]);
        } else if constexpr (std::is_same_v<T, NonposOrthant>) {
          for (double& v : out) v = std::min(v, 0.0);
        } else if constexpr (std::is_same_v<T, SingletonZero>) {
          std::fill(out.begin(), out.end(), 0.0);
        } else if constexpr (std::is_same_v<T, FinitePointSet>) {
          std::size_t best = 0;
          double best_d = std::numeric_limits<double>::infinity();
          for (std::size_t k = 0; k < s.points.size(); ++k) {
            const double d = dist2(s.points[k], x);
            if (d < best_d) {
              best_d = d;
              best = k;
            }
          }
          out = s.points[best];
        } else if constexpr (std::is_same_v<T, PositiveRay>) {
          out[0] = std::max(out[0], s.eps);
        }
      },
      X.variant());
  return out;
}

// Membership within tol in the sup-norm.
inline bool contains(const FeasibleSet& X, std::span<const double> x, double tol) {
  require_dim(x.size(), X.dim(), "contains");
  if (tol < 0.0) throw std::invalid_argument("contains: tol must be >= 0");
  if (std::holds_alternative<FinitePointSet>(X.variant())) {
    const auto& pts = std::get<FinitePointSet>(X.variant()).points;
    for (const auto& p : pts)
      if (dist_inf(p, x) <= tol) return true;
    return false;
  }
  const Vec proj = project(X, x);
  return dist_inf(proj, x) <= tol;
}

// Normal cone N_X(x) as per-coordinate cone tags. A coordinate at its
// upper bound contributes [0,inf), at its lower bound (-inf,0], a pinned
// coordinate all of R, and interior coordinates {0}. Isolated points get
// all of R in every coordinate.
inline ConeDesc normal_cone(const FeasibleSet& X, std::span<const double> x, double tol,
                            double bound_tol = kBoundTol) {
  if (!contains(X, x, tol)) throw std::invalid_argument("normal_cone: x not in X within tol");
  const std::size_t n = X.dim();
  ConeDesc cone;
  cone.coords.assign(n, CoordCone::Zero);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          // {0} everywhere
        } else if constexpr (std::is_same_v<T, Box>) {
          for (std::size_t i = 0; i < n; ++i) {
            const bool at_lo = s.lower[i] > -std::numeric_limits<double>::infinity() &&
                               std::abs(x[i] - s.lower[i]) <= bound_tol;
            const bool at_hi = s.upper[i] < std::numeric_limits<double>::infinity() &&
                               std::abs(x[i] - s.upper[i]) <= bound_tol;
            if (at_lo && at_hi)
              cone.coords[i] = CoordCone::All;
            else if (at_hi)
              cone.coords[i] = CoordCone::NonnegRay;
            else if (at_lo)
              cone.coords[i] = CoordCone::NonposRay;
          }
        } else if constexpr (std::is_same_v<T, NonposOrthant>) {
          for (std::size_t i = 0; i < n; ++i)
            if (std::abs(x[i]) <= bound_tol) cone.coords[i] = CoordCone::NonnegRay;
        } else if constexpr (std::is_same_v<T, SingletonZero>) {
          std::fill(cone.coords.begin(), cone.coords.end(), CoordCone::All);
        } else if constexpr (std::is_same_v<T, FinitePointSet>) {
          std::fill(cone.coords.begin(), cone.coords.end(), CoordCone::All);
        } else if constexpr (std::is_same_v<T, PositiveRay>) {
          if (std::abs(x[0] - s.eps) <= bound_tol) cone.coords[0] = CoordCone::NonposRay;
        }
      },
      X.variant());
  return cone;
}

inline std::string to_string(CoordCone c) {
  switch (c) {
    case CoordCone::Zero: return "{0}";
    case CoordCone::NonnegRay: return "[0,inf)";
    case CoordCone::NonposRay: return "(-inf,0]";
    case CoordCone::All: return "R";
  }
  return "?";
}

}  // namespace rocklab
