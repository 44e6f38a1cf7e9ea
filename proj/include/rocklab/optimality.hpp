#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rocklab/composite.hpp"
#include "rocklab/monitoring.hpp"
#include "rocklab/numeric.hpp"
#include "rocklab/sets.hpp"

namespace rocklab {

enum class KktStatus { MultiplierFound, NoMultiplier, QualificationFailed, InfeasiblePoint };

inline const char* to_string(KktStatus s) {
  switch (s) {
    case KktStatus::MultiplierFound: return "multiplier-found";
    case KktStatus::NoMultiplier: return "no-multiplier";
    case KktStatus::QualificationFailed: return "qualification-failed";
    case KktStatus::InfeasiblePoint: return "infeasible-point";
  }
  return "?";
}

struct MultiplierFinding {
  KktStatus status = KktStatus::InfeasiblePoint;
  Vec y;
  double residual = std::numeric_limits<double>::infinity();
  std::string active_set;
};

// Flat key=value rendering for the CLI `check` subcommand.
inline std::string to_kv(const MultiplierFinding& f) {
  std::ostringstream os;
  os << "status=" << to_string(f.status) << "\n";
  for (std::size_t i = 0; i < f.y.size(); ++i) os << "y_" << (i + 1) << "=" << to_string(ExtReal(f.y[i])) << "\n";
  os << "residual=" << to_string(ExtReal(f.residual)) << "\n";
  os << "active=" << f.active_set << "\n";
  return os.str();
}

namespace detail {

// Pulls z onto dom h when it is within tol in every offending coordinate;
// numerically certified minimizers sit a solver-tolerance away from the
// boundary and must still see the boundary cone.
inline std::optional<Vec> snap_to_domain(const MonitoringFn& h, Vec z, double tol) {
  return std::visit(
      [&](const auto& f) -> std::optional<Vec> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IndicatorZero>) {
          for (auto& v : z) {
            if (std::abs(v) > tol) return std::nullopt;
            v = 0.0;
          }
          return z;
        } else if constexpr (std::is_same_v<T, IndicatorNonpos>) {
          for (auto& v : z) {
            if (v > tol) return std::nullopt;
            if (v > 0.0) v = 0.0;
          }
          return z;
        } else if constexpr (std::is_same_v<T, Separable>) {
          for (std::size_t i = 0; i < f.parts.size(); ++i) {
            auto part = snap_to_domain(f.parts[i], Vec{z[i]}, tol);
            if (!part) return std::nullopt;
            z[i] = (*part)[0];
          }
          return z;
        } else {
          return z;  // real-valued variants: dom h = R^m
        }
      },
      h.v);
}

struct SearchCoord {
  double lo, hi;     // current window (finite)
  bool lo_capped, hi_capped;  // window end is artificial, not a true bound
};

// Deterministic box search: a 17-point grid per free coordinate plus
// shrinking refinement rounds around the incumbent. Unbounded interval
// ends are capped and the cap grows when the incumbent presses against it.
template <typename Objective>
std::pair<Vec, double> minimize_over_box(const std::vector<Interval>& box, bool sum_to_one,
                                         const Objective& obj, std::size_t grid_pts = 17,
                                         std::size_t refine_rounds = 8, double cap = 16.0,
                                         std::size_t cap_expansions = 4) {
  const std::size_t m = box.size();
  const double inf = std::numeric_limits<double>::infinity();

  for (std::size_t expansion = 0;; ++expansion) {
    std::vector<SearchCoord> window(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double lo = box[i].lo, hi = box[i].hi;
      SearchCoord w{};
      if (std::isfinite(lo) && std::isfinite(hi)) {
        w = {lo, hi, false, false};
      } else if (std::isfinite(lo)) {
        w = {lo, lo + cap, false, true};
      } else if (std::isfinite(hi)) {
        w = {hi - cap, hi, true, false};
      } else {
        w = {-cap, cap, true, true};
      }
      window[i] = w;
    }

    Vec best_y(m, 0.0);
    double best_r = inf;

    auto consider = [&](const Vec& y) {
      const double r = obj(y);
      if (r < best_r) {
        best_r = r;
        best_y = y;
      }
    };

    auto scan = [&](const std::vector<SearchCoord>& win) {
      if (sum_to_one) {
        // Active coordinates form a simplex face; inactive ones are pinned
        // at a point (lo == hi == 0 for the catalog variants).
        std::vector<std::size_t> active;
        Vec y(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
          if (box[i].is_point())
            y[i] = box[i].lo;
          else
            active.push_back(i);
        }
        if (active.empty()) {
          consider(y);
          return;
        }
        if (active.size() == 1) {
          y[active[0]] = 1.0;
          for (std::size_t i = 0; i < m; ++i)
            if (box[i].is_point()) y[i] = box[i].lo;
          consider(y);
          return;
        }
        // grid over all but the last active coordinate
        const std::size_t k = active.size() - 1;
        std::vector<std::size_t> idx(k, 0);
        while (true) {
          double s = 0.0;
          for (std::size_t j = 0; j < k; ++j) {
            const SearchCoord& w = win[active[j]];
            y[active[j]] = w.lo + (w.hi - w.lo) * static_cast<double>(idx[j]) / static_cast<double>(grid_pts - 1);
            s += y[active[j]];
          }
          const double last = 1.0 - s;
          if (last >= box[active[k]].lo - 1e-12 && last <= box[active[k]].hi + 1e-12) {
            y[active[k]] = last;
            consider(y);
          }
          std::size_t j = 0;
          while (j < k) {
            if (++idx[j] < grid_pts) break;
            idx[j] = 0;
            ++j;
          }
          if (j == k) break;
        }
        return;
      }
      std::vector<std::size_t> free_idx;
      Vec y(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (box[i].is_point())
          y[i] = box[i].lo;
        else
          free_idx.push_back(i);
      }
      if (free_idx.empty()) {
        consider(y);
        return;
      }
      std::vector<std::size_t> idx(free_idx.size(), 0);
      while (true) {
        for (std::size_t j = 0; j < free_idx.size(); ++j) {
          const SearchCoord& w = win[free_idx[j]];
          y[free_idx[j]] = w.lo + (w.hi - w.lo) * static_cast<double>(idx[j]) / static_cast<double>(grid_pts - 1);
        }
        consider(y);
        std::size_t j = 0;
        while (j < free_idx.size()) {
          if (++idx[j] < grid_pts) break;
          idx[j] = 0;
          ++j;
        }
        if (j == free_idx.size()) break;
      }
    };

    scan(window);

    // shrink around the incumbent
    std::vector<SearchCoord> win = window;
    for (std::size_t round = 0; round < refine_rounds; ++round) {
      std::vector<SearchCoord> next(m);
      for (std::size_t i = 0; i < m; ++i) {
        const double span = (win[i].hi - win[i].lo) / static_cast<double>(grid_pts - 1);
        double lo = std::max(window[i].lo, best_y[i] - span);
        double hi = std::min(window[i].hi, best_y[i] + span);
        if (box[i].is_point()) {
          lo = hi = box[i].lo;
        }
        next[i] = {lo, hi, false, false};
      }
      win = next;
      scan(win);
    }

    // expand artificial caps that the incumbent presses against
    bool pressed = false;
    for (std::size_t i = 0; i < m; ++i) {
      const double span = window[i].hi - window[i].lo;
      if (window[i].hi_capped && best_y[i] >= window[i].hi - 1e-6 * span) pressed = true;
      if (window[i].lo_capped && best_y[i] <= window[i].lo + 1e-6 * span) pressed = true;
    }
    if (!pressed || expansion >= cap_expansions) return {best_y, best_r};
    cap *= 4.0;
  }
}

}  // namespace detail

// Multiplier extraction for the composite optimality condition: find
// y in subdiff h(F(x)+u) minimizing the cone residual of
// -grad f0(x) - J_F(x)^T y against N_X(x).
inline MultiplierFinding composite_kkt(const Rockafellian& R, std::span<const double> u,
                                       std::span<const double> x, double tol) {
  const CompositeProblem& P = R.problem;
  require_dim(u.size(), P.m(), "composite_kkt u");
  require_dim(x.size(), P.n(), "composite_kkt x");
  MultiplierFinding out;
  if (!contains(P.X, x, tol) || !P.F.in_domain(x)) {
    out.status = KktStatus::InfeasiblePoint;
    return out;
  }
  Vec z = P.F.eval(x);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += u[i] - R.anchor[i];
  auto snapped = detail::snap_to_domain(P.h, z, tol);
  if (!snapped) {
    out.status = KktStatus::InfeasiblePoint;
    return out;
  }
  const SubdiffSet sd = h_subdiff(P.h, *snapped, std::max(tol, 1e-9));
  const ConeDesc cone = normal_cone(P.X, x, tol, std::max(tol, kBoundTol));
  const auto J = P.F.jacobian(x);
  const Vec g0 = P.f0.jacobian(x)[0];

  auto residual = [&](const Vec& y) {
    Vec v(P.n());
    for (std::size_t j = 0; j < P.n(); ++j) {
      v[j] = -g0[j];
      for (std::size_t i = 0; i < P.m(); ++i) v[j] -= J[i][j] * y[i];
    }
    return cone.distance(v);
  };

  std::vector<Interval> box;
  if (sd.kind == SubdiffSet::Kind::All)
    box.assign(P.m(), Interval{-std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::infinity()});
  else
    box = sd.box;

  auto [y, r] = detail::minimize_over_box(box, sd.sum_to_one, residual);
  out.y = y;
  out.residual = r;
  out.status = (r <= tol) ? KktStatus::MultiplierFound : KktStatus::NoMultiplier;

  std::ostringstream active;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (box[i].is_point()) continue;
    if (std::isfinite(box[i].lo) && std::abs(y[i] - box[i].lo) <= 10 * tol) active << "y_" << (i + 1) << "@lo ";
    if (std::isfinite(box[i].hi) && std::abs(y[i] - box[i].hi) <= 10 * tol) active << "y_" << (i + 1) << "@hi ";
  }
  for (std::size_t j = 0; j < cone.coords.size(); ++j)
    if (cone.coords[j] != CoordCone::Zero) active << "N_X[" << (j + 1) << "]=" << to_string(cone.coords[j]) << " ";
  out.active_set = active.str();
  return out;
}

inline MultiplierFinding composite_kkt(const CompositeProblem& P, std::span<const double> u,
                                       std::span<const double> x, double tol) {
  return composite_kkt(Rockafellian(P), u, x, tol);
}

// ---------------------------------------------------------------------------
// Constraint qualification: only y = 0 may satisfy
// y in N_{dom h}(F(x)+u) with -J_F(x)^T y in N_X(x).

struct QualificationResult {
  bool qualified = true;
  Vec witness;  // nonzero direction violating the qualification, when found
};

namespace detail {

// Null-space basis of the linear map y -> sum_i y_i a_i via Gaussian
// elimination on the Gram matrix; columns a_i are the rows of J.
inline std::vector<Vec> gram_null_space(const std::vector<Vec>& a, double pivot_tol = 1e-10) {
  const std::size_t k = a.size();
  std::vector<Vec> G(k, Vec(k));
  double scale = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      G[i][j] = dot(a[i], a[j]);
      scale = std::max(scale, std::abs(G[i][j]));
    }
  if (scale == 0.0) scale = 1.0;
  std::vector<std::size_t> pivot_col;
  std::size_t row = 0;
  std::vector<Vec> M = G;
  std::vector<bool> is_pivot(k, false);
  for (std::size_t col = 0; col < k && row < k; ++col) {
    std::size_t best = row;
    for (std::size_t r = row + 1; r < k; ++r)
      if (std::abs(M[r][col]) > std::abs(M[best][col])) best = r;
    if (std::abs(M[best][col]) <= pivot_tol * scale) continue;
    std::swap(M[best], M[row]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == row) continue;
      const double f = M[r][col] / M[row][col];
      for (std::size_t c = 0; c < k; ++c) M[r][c] -= f * M[row][c];
    }
    pivot_col.push_back(col);
    is_pivot[col] = true;
    ++row;
  }
  std::vector<Vec> basis;
  for (std::size_t col = 0; col < k; ++col) {
    if (is_pivot[col]) continue;
    Vec v(k, 0.0);
    v[col] = 1.0;
    for (std::size_t r = 0; r < pivot_col.size(); ++r) v[pivot_col[r]] = -M[r][col] / M[r][pivot_col[r]];
    const double nrm = norm2(v);
    for (auto& x : v) x /= nrm;
    basis.push_back(v);
  }
  return basis;
}

}  // namespace detail

inline QualificationResult qualification_check(const Rockafellian& R, std::span<const double> u,
                                               std::span<const double> x, double tol) {
  const CompositeProblem& P = R.problem;
  QualificationResult out;
  if (!contains(P.X, x, tol)) throw std::invalid_argument("qualification_check: infeasible x");
  Vec z = P.F.eval(x);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += u[i] - R.anchor[i];
  auto snapped = detail::snap_to_domain(P.h, z, tol);
  if (!snapped) throw std::invalid_argument("qualification_check: x infeasible for f(u,.)");

  const ConeDesc dom_cone = to_cone(h_domain_normal(P.h, *snapped, std::max(tol, 1e-9)));
  const bool all_zero = std::all_of(dom_cone.coords.begin(), dom_cone.coords.end(),
                                    [](CoordCone c) { return c == CoordCone::Zero; });
  if (all_zero) return out;  // locally Lipschitz monitoring: cone is {0}

  const ConeDesc x_cone = normal_cone(P.X, x, tol, std::max(tol, kBoundTol));
  const auto J = P.F.jacobian(x);
  const std::size_t m = P.m(), n = P.n();

  auto violates = [&](const Vec& y) {
    if (!dom_cone.contains(y, 1e-12)) return false;
    Vec v(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < m; ++i) v[j] -= J[i][j] * y[i];
    return x_cone.distance(v) <= tol;
  };

  std::vector<Vec> candidates;
  // extreme rays of the coordinate cone
  for (std::size_t i = 0; i < m; ++i) {
    if (dom_cone.coords[i] == CoordCone::Zero) continue;
    Vec e(m, 0.0);
    if (dom_cone.coords[i] == CoordCone::NonnegRay || dom_cone.coords[i] == CoordCone::All) {
      e[i] = 1.0;
      candidates.push_back(e);
    }
    if (dom_cone.coords[i] == CoordCone::NonposRay || dom_cone.coords[i] == CoordCone::All) {
      e[i] = -1.0;
      candidates.push_back(e);
    }
  }
  // whole-space faces admit mixed-sign witnesses: take null-space
  // directions of the restricted gradient system
  {
    std::vector<std::size_t> full;
    for (std::size_t i = 0; i < m; ++i)
      if (dom_cone.coords[i] == CoordCone::All) full.push_back(i);
    if (!full.empty()) {
      std::vector<Vec> rows;
      for (std::size_t i : full) rows.push_back(J[i]);
      for (const Vec& nsv : detail::gram_null_space(rows)) {
        Vec y(m, 0.0);
        for (std::size_t j = 0; j < full.size(); ++j) y[full[j]] = nsv[j];
        candidates.push_back(y);
        Vec yn = y;
        for (auto& v : yn) v = -v;
        candidates.push_back(yn);
      }
    }
  }
  // deterministic sphere sweep for low-dimensional mixed cones
  if (m == 2) {
    for (int k = 0; k < 720; ++k) {
      const double a = 2.0 * M_PI * k / 720.0;
      candidates.push_back({std::cos(a), std::sin(a)});
    }
  } else if (m == 3) {
    for (int k = 0; k < 2000; ++k) {  // spherical Fibonacci points
      const double t = (k + 0.5) / 2000.0;
      const double phi = std::acos(1.0 - 2.0 * t);
      const double theta = M_PI * (1.0 + std::sqrt(5.0)) * k;
      candidates.push_back({std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi)});
    }
  }

  for (const Vec& y : candidates) {
    if (norm2(y) < 1e-12) continue;
    if (violates(y)) {
      out.qualified = false;
      out.witness = y;
      return out;
    }
  }
  return out;
}

inline QualificationResult qualification_check(const CompositeProblem& P, std::span<const double> u,
                                               std::span<const double> x, double tol) {
  return qualification_check(Rockafellian(P), u, x, tol);
}

// Fermat rule on an assembled subdifferential box: 0 in the box within tol.
inline bool fermat_check(const SubdiffSet& sd, double tol) {
  if (sd.kind == SubdiffSet::Kind::Empty) return false;
  if (sd.kind == SubdiffSet::Kind::All) return true;
  for (const Interval& iv : sd.box)
    if (!iv.contains(0.0, tol)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Classical equality-constrained Lagrange system:
// grad f0(x) + sum_i y_i grad f_i(x) = 0, F(x) = 0.

inline MultiplierFinding lagrange_equality(const CompositeProblem& P, std::span<const double> x, double tol) {
  if (!std::holds_alternative<IndicatorZero>(P.h.v))
    throw std::invalid_argument("lagrange_equality: monitoring function must be iota_{{0}^m}");
  MultiplierFinding out;
  const Vec Fx = P.F.eval(x);
  if (norm_inf(Fx) > tol) {
    out.status = KktStatus::InfeasiblePoint;
    return out;
  }
  const auto J = P.F.jacobian(x);  // rows grad f_i
  const Vec g0 = P.f0.jacobian(x)[0];
  const std::size_t m = P.m();

  // normal equations (J J^T) y = -J g0 with partial pivoting
  std::vector<Vec> A(m, Vec(m + 1, 0.0));
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      A[i][j] = dot(J[i], J[j]);
      scale = std::max(scale, std::abs(A[i][j]));
    }
    A[i][m] = -dot(J[i], g0);
  }
  if (scale == 0.0) scale = 1.0;

  bool rank_deficient = false;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t best = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(A[r][col]) > std::abs(A[best][col])) best = r;
    std::swap(A[best], A[col]);
    if (std::abs(A[col][col]) <= 1e-10 * scale) {
      rank_deficient = true;
      continue;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c <= m; ++c) A[r][c] -= f * A[col][c];
    }
  }
  Vec y(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (std::abs(A[i][i]) > 1e-10 * scale) y[i] = A[i][m] / A[i][i];

  // back out the solution order (rows were swapped in place; the system is
  // symmetric so diagonal solves suffice after full elimination)
  Vec res(g0);
  for (std::size_t j = 0; j < res.size(); ++j)
    for (std::size_t i = 0; i < m; ++i) res[j] += J[i][j] * y[i];

  out.y = y;
  out.residual = norm2(res);
  if (rank_deficient)
    out.status = KktStatus::QualificationFailed;
  else
    out.status = (out.residual <= tol) ? KktStatus::MultiplierFound : KktStatus::NoMultiplier;
  return out;
}

// ---------------------------------------------------------------------------
// Subgradient estimates for the min-value function p at u_bar: multipliers
// from the composite condition over P(u_bar), a central finite-difference
// gradient, and an affine-minorant check over a sweep grid.

enum class FdKind { TwoSided, OneSidedBelow, OneSidedAbove, Undefined };

struct FdCoordinate {
  FdKind kind = FdKind::Undefined;
  double slope = 0.0;  // two-sided or the available one-sided slope
};

struct MinorantCheck {
  bool ok = true;
  double worst_violation = 0.0;  // max over grid of (p(u_bar) + <y,u-u_bar>) - p(u)
};

struct MinValueSubgradReport {
  std::vector<Vec> multipliers;            // from composite_kkt at argmin representatives
  std::vector<FdCoordinate> fd;            // per u-coordinate
  std::optional<Vec> fd_gradient;          // set when every coordinate is two-sided
  bool vertical_flag = false;              // some one-sided slope exceeds the threshold
  std::optional<MinorantCheck> minorant;   // present when a sweep grid was supplied
  double agreement = std::numeric_limits<double>::infinity();  // max |fd - best multiplier|
};

inline MinValueSubgradReport min_value_subgrad(const Rockafellian& R, std::span<const double> u_bar,
                                               const SolverCfg& cfg, double fd_step = 1e-4,
                                               double kkt_tol = 1e-6,
                                               const std::vector<Vec>& minorant_grid = {},
                                               double minorant_tol = 1e-6,
                                               double vertical_threshold = 1e2) {
  MinValueSubgradReport rep;
  const std::size_t m = R.problem.m();
  InnerSolveResult at_bar = inner_solve(R, u_bar, cfg);
  if (!at_bar.value.is_finite())
    throw std::invalid_argument("min_value_subgrad: p(u_bar) is not finite");

  for (const Vec& xr : at_bar.minimizers) {
    MultiplierFinding f = composite_kkt(R, u_bar, xr, kkt_tol);
    if (f.status == KktStatus::MultiplierFound) rep.multipliers.push_back(f.y);
  }

  rep.fd.resize(m);
  Vec grad(m, 0.0);
  bool all_two_sided = true;
  for (std::size_t i = 0; i < m; ++i) {
    Vec up(u_bar.begin(), u_bar.end()), dn(u_bar.begin(), u_bar.end());
    up[i] += fd_step;
    dn[i] -= fd_step;
    const ExtReal pu = inner_solve(R, up, cfg).value;
    const ExtReal pd = inner_solve(R, dn, cfg).value;
    FdCoordinate fc;
    if (pu.is_finite() && pd.is_finite()) {
      fc.kind = FdKind::TwoSided;
      fc.slope = (pu.value() - pd.value()) / (2.0 * fd_step);
    } else if (pd.is_finite()) {
      fc.kind = FdKind::OneSidedBelow;
      fc.slope = (at_bar.value.value() - pd.value()) / fd_step;
      all_two_sided = false;
    } else if (pu.is_finite()) {
      fc.kind = FdKind::OneSidedAbove;
      fc.slope = (pu.value() - at_bar.value.value()) / fd_step;
      all_two_sided = false;
    } else {
      fc.kind = FdKind::Undefined;
      all_two_sided = false;
    }
    if (fc.kind != FdKind::Undefined && fc.kind != FdKind::TwoSided &&
        std::abs(fc.slope) > vertical_threshold)
      rep.vertical_flag = true;
    grad[i] = fc.slope;
    rep.fd[i] = fc;
  }
  if (all_two_sided) rep.fd_gradient = grad;

  if (!rep.multipliers.empty() && rep.fd_gradient) {
    for (const Vec& y : rep.multipliers)
      rep.agreement = std::min(rep.agreement, dist_inf(y, *rep.fd_gradient));
  }

  if (!minorant_grid.empty() && !rep.multipliers.empty()) {
    MinorantCheck chk;
    const Vec& y = rep.multipliers.front();
    for (const Vec& u : minorant_grid) {
      const ExtReal pu = inner_solve(R, u, cfg).value;
      if (pu.is_pos_inf()) continue;  // p(u) = inf satisfies any minorant
      double aff = at_bar.value.value();
      for (std::size_t i = 0; i < m; ++i) aff += y[i] * (u[i] - u_bar[i]);
      const double viol = aff - pu.value();
      chk.worst_violation = std::max(chk.worst_violation, viol);
      if (viol > minorant_tol) chk.ok = false;
    }
    rep.minorant = chk;
  }
  return rep;
}

}  // namespace rocklab
