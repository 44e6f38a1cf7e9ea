#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "rocklab/extreal.hpp"
#include "rocklab/numeric.hpp"
#include "rocklab/sets.hpp"

namespace rocklab {

// Closed interval with +-inf endpoints allowed; payload never NaN.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  bool is_point() const { return lo == hi; }
};

// Subdifferential (or cone) description: a per-coordinate box, the empty
// set, or the whole space. Every catalog monitoring function is separable
// except the max-of-coordinates variant, whose subdifferential is a box
// face intersected with the hyperplane sum(y) = 1; that extra constraint
// is carried by the sum_to_one flag.
struct SubdiffSet {
  enum class Kind { Empty, All, Box };

  Kind kind = Kind::Empty;
  std::vector<Interval> box;  // valid when kind == Box
  std::size_t dimension = 0;
  bool sum_to_one = false;

  static SubdiffSet empty(std::size_t dim) { return SubdiffSet{Kind::Empty, {}, dim, false}; }
  static SubdiffSet all(std::size_t dim) { return SubdiffSet{Kind::All, {}, dim, false}; }
  static SubdiffSet boxed(std::vector<Interval> b, bool simplex = false) {
    SubdiffSet s{Kind::Box, std::move(b), 0, simplex};
    s.dimension = s.box.size();
    return s;
  }

  std::size_t dim() const { return kind == Kind::Box ? box.size() : dimension; }

  bool contains(std::span<const double> y, double tol = 0.0) const {
    if (kind == Kind::Empty) return false;
    if (kind == Kind::All) return y.size() == dimension;
    require_dim(y.size(), box.size(), "SubdiffSet::contains");
    for (std::size_t i = 0; i < box.size(); ++i)
      if (!box[i].contains(y[i], tol)) return false;
    if (sum_to_one) {
      double s = 0.0;
      for (double v : y) s += v;
      if (std::abs(s - 1.0) > std::max(tol, 1e-12)) return false;
    }
    return true;
  }
};

// Interprets a SubdiffSet whose intervals are cones as per-coordinate
// cone tags. Used for domain normal cones.
inline ConeDesc to_cone(const SubdiffSet& s) {
  ConeDesc c;
  if (s.kind == SubdiffSet::Kind::All) {
    c.coords.assign(s.dim(), CoordCone::All);
    return c;
  }
  if (s.kind == SubdiffSet::Kind::Empty) throw std::invalid_argument("to_cone: empty set");
  const double inf = std::numeric_limits<double>::infinity();
  for (const Interval& iv : s.box) {
    if (iv.lo == 0.0 && iv.hi == 0.0)
      c.coords.push_back(CoordCone::Zero);
    else if (iv.lo == 0.0 && iv.hi == inf)
      c.coords.push_back(CoordCone::NonnegRay);
    else if (iv.lo == -inf && iv.hi == 0.0)
      c.coords.push_back(CoordCone::NonposRay);
    else if (iv.lo == -inf && iv.hi == inf)
      c.coords.push_back(CoordCone::All);
    else
      throw std::invalid_argument("to_cone: interval is not a cone");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Monitoring-function catalog. All variants are proper, lsc and convex.

struct MonitoringFn;

// iota_{ {0}^m }: equality requirements F(x) = 0.
struct IndicatorZero {
  std::size_t m;
};

// iota_{ (-inf,0]^q }: inequality requirements F(x) <= 0.
struct IndicatorNonpos {
  std::size_t q;
};

// z -> sum_i theta_i * max{0, z_i - tau_i}; per-unit penalty above goal.
struct GoalPenalty {
  Vec theta;  // weights, >= 0
  Vec tau;    // goals
};

// z -> <p, z>.
struct WeightedSum {
  Vec p;
};

// Piecewise-affine max applied per coordinate and summed:
// z -> sum_coord max_i (slope_i * z_coord + intercept_i).
// Pieces strictly sorted by slope, no duplicates.
struct PwaMax {
  struct Piece {
    double slope;
    double intercept;
  };
  std::vector<Piece> pieces;
  std::size_t m = 1;
};

// z -> max_i z_i. Not separable: its subdifferential is the simplex face
// spanned by active coordinates.
struct MaxOfCoords {
  std::size_t m;
};

// Product of scalar monitoring functions, one per coordinate.
struct Separable {
  std::vector<MonitoringFn> parts;
};

struct MonitoringFn {
  using Variant =
      std::variant<IndicatorZero, IndicatorNonpos, GoalPenalty, WeightedSum, PwaMax, MaxOfCoords, Separable>;
  Variant v;

  MonitoringFn(Variant var) : v(std::move(var)) {}

  static MonitoringFn indicator_zero(std::size_t m) { return MonitoringFn(IndicatorZero{m}); }
  static MonitoringFn indicator_nonpos(std::size_t q) { return MonitoringFn(IndicatorNonpos{q}); }
  static MonitoringFn goal_penalty(Vec theta, Vec tau) {
    require_dim(tau.size(), theta.size(), "GoalPenalty");
    for (double t : theta)
      if (!(t >= 0.0)) throw std::invalid_argument("GoalPenalty: weights must be >= 0");
    return MonitoringFn(GoalPenalty{std::move(theta), std::move(tau)});
  }
  static MonitoringFn weighted_sum(Vec p) { return MonitoringFn(WeightedSum{std::move(p)}); }
  static MonitoringFn pwa_max(std::vector<PwaMax::Piece> pieces, std::size_t m = 1) {
    if (pieces.empty()) throw std::invalid_argument("PwaMax: needs at least one piece");
    for (std::size_t i = 1; i < pieces.size(); ++i)
      if (!(pieces[i - 1].slope < pieces[i].slope))
        throw std::invalid_argument("PwaMax: pieces must be strictly sorted by slope");
    return MonitoringFn(PwaMax{std::move(pieces), m});
  }
  static MonitoringFn max_of_coords(std::size_t m) { return MonitoringFn(MaxOfCoords{m}); }
  static MonitoringFn separable(std::vector<MonitoringFn> parts) {
    return MonitoringFn(Separable{std::move(parts)});
  }
};

inline std::size_t dim(const MonitoringFn& h) {
  return std::visit(
      [](const auto& f) -> std::size_t {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IndicatorZero>) return f.m;
        if constexpr (std::is_same_v<T, IndicatorNonpos>) return f.q;
        if constexpr (std::is_same_v<T, GoalPenalty>) return f.theta.size();
        if constexpr (std::is_same_v<T, WeightedSum>) return f.p.size();
        if constexpr (std::is_same_v<T, PwaMax>) return f.m;
        if constexpr (std::is_same_v<T, MaxOfCoords>) return f.m;
        if constexpr (std::is_same_v<T, Separable>) return f.parts.size();
        return 0;
      },
      h.v);
}

inline bool real_valued(const MonitoringFn& h) {
  return std::visit(
      [](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IndicatorZero> || std::is_same_v<T, IndicatorNonpos>) return false;
        if constexpr (std::is_same_v<T, Separable>) {
          for (const auto& p : f.parts)
            if (!real_valued(p)) return false;
          return true;
        }
        return true;
      },
      h.v);
}

namespace detail {
inline double pwa_value(const PwaMax& f, double z) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& pc : f.pieces) best = std::max(best, pc.slope * z + pc.intercept);
  return best;
}
}  // namespace detail

inline ExtReal h_eval(const MonitoringFn& h, std::span<const double> z) {
  require_dim(z.size(), dim(h), "h_eval");
  return std::visit(
      [&](const auto& f) -> ExtReal {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IndicatorZero>) {
          for (double v : z)
            if (v != 0.0) return ExtReal::pos_inf();
          return ExtReal(0.0);
        } else if constexpr (std::is_same_v<T, IndicatorNonpos>) {
          for (double v : z)
            if (v > 0.0) return ExtReal::pos_inf();
          return ExtReal(0.0);
        } else if constexpr (std::is_same_v<T, GoalPenalty>) {
          double s = 0.0;
          for (std::size_t i = 0; i < z.size(); ++i) s += f.theta[i] * std::max(0.0, z[i] - f.tau[i]);
          return ExtReal(s);
        } else if constexpr (std::is_same_v<T, WeightedSum>) {
          return ExtReal(dot(f.p, z));
        } else if constexpr (std::is_same_v<T, PwaMax>) {
          double s = 0.0;
          for (double v : z) s += detail::pwa_value(f, v);
          return ExtReal(s);
        } else if constexpr (std::is_same_v<T, MaxOfCoords>) {
          double best = z[0];
          for (double v : z) best = std::max(best, v);
          return ExtReal(best);
        } else {
          ExtReal s(0.0);
          for (std::size_t i = 0; i < f.parts.size(); ++i) s += h_eval(f.parts[i], z.subspan(i, 1));
          return s;
        }
      },
      h.v);
}

// Subdifferential of h at z (z must be in dom h). Kink detection uses the
// absolute tolerance active_tol.
inline SubdiffSet h_subdiff(const MonitoringFn& h, std::span<const double> z, double active_tol = 1e-9) {
  require_dim(z.size(), dim(h), "h_subdiff");
  if (!h_eval(h, z).is_finite()) throw std::invalid_argument("h_subdiff: z outside dom h");
  const double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& f) -> SubdiffSet {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IndicatorZero>) {
          return SubdiffSet::all(f.m);
        } else if constexpr (std::is_same_v<T, IndicatorNonpos>) {
          std::vector<Interval> b(f.q);
          for (std::size_t i = 0; i < f.q; ++i)
            b[i] = (z[i] >= -active_tol) ? Interval{0.0, inf} : Interval{0.0, 0.0};
          return SubdiffSet::boxed(std::move(b));
        } else if constexpr (std::is_same_v<T, GoalPenalty>) {
          std::vector<Interval> b(z.size());
          for (std::size_t i = 0; i < z.size(); ++i) {
            const double d = z[i] - f.tau[i];
            if (std::abs(d) <= active_tol)
              b[i] = Interval{0.0, f.theta[i]};
            else
              b[i] = (d > 0.0) ? Interval{f.theta[i], f.theta[i]} : Interval{0.0, 0.0};
          }
          return SubdiffSet::boxed(std::move(b));
        } else if constexpr (std::is_same_v<T, WeightedSum>) {
          std::vector<Interval> b(z.size());
          for (std::size_t i = 0; i < z.size(); ++i) b[i] = Interval{f.p[i], f.p[i]};
          return SubdiffSet::boxed(std::move(b));
        } else if constexpr (std::is_same_v<T, PwaMax>) {
          std::vector<Interval> b(z.size());
          for (std::size_t i = 0; i < z.size(); ++i) {
            const double val = detail::pwa_value(f, z[i]);
            const double tol = active_tol * (1.0 + std::abs(val));
            double lo = inf, hi = -inf;
            for (const auto& pc : f.pieces)
              if (pc.slope * z[i] + pc.intercept >= val - tol) {
                lo = std::min(lo, pc.slope);
                hi = std::max(hi, pc.slope);
              }
            b[i] = Interval{lo, hi};
          }
          return SubdiffSet::boxed(std::move(b));
        } else if constexpr (std::is_same_v<T, MaxOfCoords>) {
          double best = z[0];
          for (double v : z) best = std::max(best, v);
          std::vector<Interval> b(z.size());
          for (std::size_t i = 0; i < z.size(); ++i)
            b[i] = (z[i] >= best - active_tol) ? Interval{0.0, 1.0} : Interval{0.0, 0.0};
          return SubdiffSet::boxed(std::move(b), /*simplex=*/true);
        } else {
          std::vector<Interval> b;
          b.reserve(f.parts.size());
          for (std::size_t i = 0; i < f.parts.size(); ++i) {
            SubdiffSet part = h_subdiff(f.parts[i], z.subspan(i, 1), active_tol);
            if (part.kind == SubdiffSet::Kind::All)
              b.push_back(Interval{-inf, inf});
            else
              b.push_back(part.box[0]);
          }
          return SubdiffSet::boxed(std::move(b));
        }
      },
      h.v);
}

namespace detail {
// Conjugate of a scalar piecewise-affine max: the lower convex envelope of
// the points (slope_i, -intercept_i) on [min slope, max slope], +inf
// outside. Dominated pieces sit above the envelope and drop out.
inline ExtReal pwa_conjugate(const PwaMax& f, double v) {
  struct Pt {
    double x, y;
  };
  std::vector<Pt> pts;
  pts.reserve(f.pieces.size());
  for (const auto& pc : f.pieces) pts.push_back({pc.slope, -pc.intercept});
  // lower hull, points already sorted by x strictly increasing
  std::vector<Pt> hull;
  for (const Pt& p : pts) {
    while (hull.size() >= 2) {
      const Pt& a = hull[hull.size() - 2];
      const Pt& b = hull[hull.size() - 1];
      const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      if (cross <= 0.0)
        hull.pop_back();  // b is above or on segment a-p
      else
        break;
    }
    hull.push_back(p);
  }
  if (v < hull.front().x || v > hull.back().x) return ExtReal::pos_inf();
  auto it = std::lower_bound(hull.begin(), hull.end(), v, [](const Pt& p, double x) { return p.x < x; });
  if (it != hull.end() && it->x == v) return ExtReal(it->y);
  const Pt& b = *it;
  const Pt& a = *(it - 1);
  const double t = (v - a.x) / (b.x - a.x);
  return ExtReal(a.y + t * (b.y - a.y));
}
}  // namespace detail

// Convex conjugate h*(y) = sup_z { <y,z> - h(z) }, in closed form per
// variant.
inline ExtReal h_conjugate(const MonitoringFn& h, std::span<const double> y) {
  require_dim(y.size(), dim(h), "h_conjugate");
  return std::visit(
      [&](const auto& f) -> ExtReal {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IndicatorZero>) {
          return ExtReal(0.0);
        } else if constexpr (std::is_same_v<T, IndicatorNonpos>) {
          for (double v : y)
            if (v < 0.0) return ExtReal::pos_inf();
          return ExtReal(0.0);
        } else if constexpr (std::is_same_v<T, GoalPenalty>) {
          double s = 0.0;
          for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] < 0.0 || y[i] > f.theta[i]) return ExtReal::pos_inf();
            s += f.tau[i] * y[i];
          }
          return ExtReal(s);
        } else if constexpr (std::is_same_v<T, WeightedSum>) {
          for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] != f.p[i]) return ExtReal::pos_inf();
          return ExtReal(0.0);
        } else if constexpr (std::is_same_v<T, PwaMax>) {
          ExtReal s(0.0);
          for (double v : y) s += detail::pwa_conjugate(f, v);
          return s;
        } else if constexpr (std::is_same_v<T, MaxOfCoords>) {
          double s = 0.0;
          for (double v : y) {
            if (v < -1e-12) return ExtReal::pos_inf();
            s += v;
          }
          return (std::abs(s - 1.0) <= 1e-12) ? ExtReal(0.0) : ExtReal::pos_inf();
        } else {
          ExtReal s(0.0);
          for (std::size_t i = 0; i < f.parts.size(); ++i) s += h_conjugate(f.parts[i], y.subspan(i, 1));
          return s;
        }
      },
      h.v);
}

// Normal cone of dom h at z. Real-valued variants are locally Lipschitz,
// so the cone is {0} everywhere.
inline SubdiffSet h_domain_normal(const MonitoringFn& h, std::span<const double> z, double active_tol = 1e-9) {
  require_dim(z.size(), dim(h), "h_domain_normal");
  if (!h_eval(h, z).is_finite()) throw std::invalid_argument("h_domain_normal: z outside dom h");
  const double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& f) -> SubdiffSet {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IndicatorZero>) {
          return SubdiffSet::all(f.m);
        } else if constexpr (std::is_same_v<T, IndicatorNonpos>) {
          std::vector<Interval> b(f.q);
          for (std::size_t i = 0; i < f.q; ++i)
            b[i] = (z[i] >= -active_tol) ? Interval{0.0, inf} : Interval{0.0, 0.0};
          return SubdiffSet::boxed(std::move(b));
        } else if constexpr (std::is_same_v<T, Separable>) {
          std::vector<Interval> b;
          b.reserve(f.parts.size());
          for (std::size_t i = 0; i < f.parts.size(); ++i) {
            SubdiffSet part = h_domain_normal(f.parts[i], z.subspan(i, 1), active_tol);
            if (part.kind == SubdiffSet::Kind::All)
              b.push_back(Interval{-inf, inf});
            else
              b.push_back(part.box[0]);
          }
          return SubdiffSet::boxed(std::move(b));
        } else {
          std::vector<Interval> b(z.size(), Interval{0.0, 0.0});
          return SubdiffSet::boxed(std::move(b));
        }
      },
      h.v);
}

}  // namespace rocklab
