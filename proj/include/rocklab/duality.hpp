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
#include "rocklab/epi.hpp"
#include "rocklab/monitoring.hpp"
#include "rocklab/numeric.hpp"

namespace rocklab {

// Lagrangian l(x,y) = inf_u { f(u,x) - <y,u> } of the standard composite
// Rockafellian. Two closed forms are carried:
//   EqIneq:             i_X(x) + f0(x) + <F(x)-anchor, y>, with y >= 0 on
//                       inequality coordinates and -inf off that region;
//   CompositeConjugate: i_X(x) + f0(x) + <F(x)-anchor, y> - h*(y).
// Both agree where they overlap; the sign bookkeeping differs.
struct LagrangianForm {
  enum class Kind { EqIneq, CompositeConjugate };

  Kind kind;
  Rockafellian rock;
  std::vector<bool> nonneg;  // per-coordinate sign restriction (EqIneq)

  static std::vector<bool> sign_mask(const MonitoringFn& h) {
    std::vector<bool> mask;
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, IndicatorZero>)
            mask.assign(f.m, false);
          else if constexpr (std::is_same_v<T, IndicatorNonpos>)
            mask.assign(f.q, true);
          else if constexpr (std::is_same_v<T, Separable>) {
            for (const auto& part : f.parts) {
              auto sub = sign_mask(part);
              mask.insert(mask.end(), sub.begin(), sub.end());
            }
          } else
            throw std::invalid_argument("EqIneq Lagrangian needs indicator monitoring");
        },
        h.v);
    return mask;
  }

  static LagrangianForm eq_ineq(Rockafellian R) {
    auto mask = sign_mask(R.problem.h);
    return LagrangianForm{Kind::EqIneq, std::move(R), std::move(mask)};
  }
  static LagrangianForm conjugate_form(Rockafellian R) {
    return LagrangianForm{Kind::CompositeConjugate, std::move(R), {}};
  }
};

inline ExtReal lagrangian_eval(const LagrangianForm& L, std::span<const double> x, std::span<const double> y) {
  const CompositeProblem& P = L.rock.problem;
  require_dim(x.size(), P.n(), "lagrangian_eval x");
  require_dim(y.size(), P.m(), "lagrangian_eval y");
  if (!contains(P.X, x, 0.0) || !P.F.in_domain(x)) return ExtReal::pos_inf();
  Vec Feff = P.F.eval(x);
  for (std::size_t i = 0; i < Feff.size(); ++i) Feff[i] -= L.rock.anchor[i];
  const ExtReal base = ExtReal(P.f0.eval_output(0, x) + dot(Feff, y));
  if (L.kind == LagrangianForm::Kind::EqIneq) {
    for (std::size_t i = 0; i < y.size(); ++i)
      if (L.nonneg[i] && y[i] < 0.0) return ExtReal::neg_inf();
    return base;
  }
  return ext_add(base, ext_neg(h_conjugate(P.h, y)));
}

// ---------------------------------------------------------------------------
// Dual function psi(y) = inf_x l(x,y).

struct DualValue {
  ExtReal value = ExtReal::pos_inf();  // exact value, or the best grid estimate
  std::optional<Vec> minimizer;        // an inner minimizer, when available
  bool exact = false;                  // true for closed-form / exact oracles
  bool declared_neg_inf = false;       // numerical -inf judgment
  Vec box_value_trace;                 // inner minima across expanding boxes
};

using DualOracle = std::function<DualValue(std::span<const double> y)>;

struct DualEvalCfg {
  SolverCfg inner;                 // box B and resolution for the x-grid
  std::size_t expansions = 3;      // number of box enlargements probed
  double expansion_scale = 10.0;   // each probe scales B by this factor
  double neg_inf_floor = -1e12;    // inner value below this declares psi = -inf
};

// Grid estimate of psi(y). The grid minimum over a box upper-bounds the
// true inner infimum, so the returned value is an upper estimate unless
// the escape detector fires, in which case -inf is declared (a numerical
// judgment, recorded as such).
inline DualValue dual_eval(const LagrangianForm& L, std::span<const double> y, const DualEvalCfg& cfg) {
  cfg.inner.validate(L.rock.problem.n());
  DualValue out;
  ExtReal best = ExtReal::pos_inf();
  Vec best_x;
  for (std::size_t k = 0; k <= cfg.expansions; ++k) {
    SolverCfg scaled = cfg.inner;
    const double s = std::pow(cfg.expansion_scale, static_cast<double>(k));
    for (std::size_t j = 0; j < scaled.box_lo.size(); ++j) {
      const double mid = 0.5 * (cfg.inner.box_lo[j] + cfg.inner.box_hi[j]);
      const double half = 0.5 * (cfg.inner.box_hi[j] - cfg.inner.box_lo[j]) * s;
      scaled.box_lo[j] = mid - half;
      scaled.box_hi[j] = mid + half;
    }
    ExtReal box_best = ExtReal::pos_inf();
    detail::for_each_grid_point(scaled, [&](const Vec& x) {
      ExtReal v = lagrangian_eval(L, x, y);
      if (v < box_best) box_best = v;
      if (v < best) {
        best = v;
        best_x = x;
      }
    });
    out.box_value_trace.push_back(box_best.is_finite() ? box_best.value()
                                                       : (box_best.is_pos_inf()
                                                              ? std::numeric_limits<double>::infinity()
                                                              : -std::numeric_limits<double>::infinity()));
    if (best.is_neg_inf() || (best.is_finite() && best.value() <= cfg.neg_inf_floor)) {
      out.declared_neg_inf = true;
      out.value = ExtReal::neg_inf();
      return out;
    }
  }
  out.value = best;
  if (!best_x.empty()) out.minimizer = best_x;
  return out;
}

inline DualOracle numeric_dual_oracle(const LagrangianForm& L, const DualEvalCfg& cfg) {
  return [L, cfg](std::span<const double> y) { return dual_eval(L, y, cfg); };
}

// ---------------------------------------------------------------------------
// Projected supergradient ascent on the concave dual.

struct StepRule {
  enum class Kind { Diminishing, Polyak };
  Kind kind = Kind::Diminishing;
  double t0 = 0.25;             // diminishing: t_k = t0 / (1 + k)
  double polyak_upper = 0.0;    // Polyak: t_k = (ub - psi) / ||g||^2

  static StepRule diminishing(double t0_) { return StepRule{Kind::Diminishing, t0_, 0.0}; }
  static StepRule polyak(double upper) { return StepRule{Kind::Polyak, 0.0, upper}; }
};

struct DualState {
  Vec y;                               // final iterate
  ExtReal best_bound = ExtReal::neg_inf();
  std::vector<Vec> y_history;
  std::vector<ExtReal> psi_history;
  std::vector<ExtReal> best_history;   // monotone nondecreasing
  std::vector<Vec> supergradients;
  std::size_t iterations = 0;
  bool halted = false;
  std::string halt_reason;
};

struct AscentProblem {
  DualOracle inner;                                   // psi estimate + inner minimizer
  std::function<Vec(const Vec& x_min, std::span<const double> y)> supergradient;
  std::vector<bool> nonneg;                           // projection mask (sign restrictions)
  std::vector<Interval> domain_box;                   // dom psi when boxed, else empty
  bool simplex = false;                               // dom psi is the probability simplex
};

// dom h* per monitoring variant; iterates must stay inside it or the dual
// value collapses to -inf.
inline SubdiffSet dual_domain(const MonitoringFn& h) {
  const double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& f) -> SubdiffSet {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IndicatorZero>) {
          return SubdiffSet::all(f.m);
        } else if constexpr (std::is_same_v<T, IndicatorNonpos>) {
          return SubdiffSet::boxed(std::vector<Interval>(f.q, Interval{0.0, inf}));
        } else if constexpr (std::is_same_v<T, GoalPenalty>) {
          std::vector<Interval> b(f.theta.size());
          for (std::size_t i = 0; i < f.theta.size(); ++i) b[i] = Interval{0.0, f.theta[i]};
          return SubdiffSet::boxed(std::move(b));
        } else if constexpr (std::is_same_v<T, WeightedSum>) {
          std::vector<Interval> b(f.p.size());
          for (std::size_t i = 0; i < f.p.size(); ++i) b[i] = Interval{f.p[i], f.p[i]};
          return SubdiffSet::boxed(std::move(b));
        } else if constexpr (std::is_same_v<T, PwaMax>) {
          const Interval iv{f.pieces.front().slope, f.pieces.back().slope};
          return SubdiffSet::boxed(std::vector<Interval>(f.m, iv));
        } else if constexpr (std::is_same_v<T, MaxOfCoords>) {
          return SubdiffSet::boxed(std::vector<Interval>(f.m, Interval{0.0, 1.0}), /*simplex=*/true);
        } else {
          std::vector<Interval> b;
          for (const auto& part : f.parts) {
            SubdiffSet sub = dual_domain(part);
            b.push_back(sub.kind == SubdiffSet::Kind::All ? Interval{-inf, inf} : sub.box[0]);
          }
          return SubdiffSet::boxed(std::move(b));
        }
      },
      h.v);
}

// Euclidean projection onto the probability simplex.
inline Vec project_simplex(Vec y) {
  Vec sorted = y;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cum += sorted[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) {
      theta = t;
      k = i + 1;
    }
  }
  (void)k;
  for (auto& v : y) v = std::max(0.0, v - theta);
  return y;
}

// Supergradient of psi for the composite Lagrangian at y with inner
// minimizer x: the perturbation residual F(x) - anchor.
inline AscentProblem ascent_problem(const LagrangianForm& L, const DualEvalCfg& cfg) {
  AscentProblem ap;
  ap.inner = numeric_dual_oracle(L, cfg);
  Rockafellian R = L.rock;
  ap.supergradient = [R](const Vec& x, std::span<const double>) {
    Vec g = R.problem.F.eval(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= R.anchor[i];
    return g;
  };
  if (L.kind == LagrangianForm::Kind::EqIneq) {
    ap.nonneg = L.nonneg;
  } else {
    SubdiffSet dom = dual_domain(L.rock.problem.h);
    ap.nonneg.assign(L.rock.problem.m(), false);
    if (dom.kind == SubdiffSet::Kind::Box) {
      ap.domain_box = dom.box;
      ap.simplex = dom.sum_to_one;
    }
  }
  return ap;
}

inline DualState dual_ascent(const AscentProblem& prob, Vec y0, const StepRule& rule, std::size_t iters) {
  DualState st;
  st.y = std::move(y0);
  auto project = [&](Vec& y) {
    for (std::size_t i = 0; i < y.size(); ++i)
      if (i < prob.nonneg.size() && prob.nonneg[i]) y[i] = std::max(0.0, y[i]);
    for (std::size_t i = 0; i < y.size() && i < prob.domain_box.size(); ++i) {
      if (std::isfinite(prob.domain_box[i].lo)) y[i] = std::max(y[i], prob.domain_box[i].lo);
      if (std::isfinite(prob.domain_box[i].hi)) y[i] = std::min(y[i], prob.domain_box[i].hi);
    }
    if (prob.simplex) y = project_simplex(std::move(y));
  };
  project(st.y);
  for (std::size_t k = 0; k < iters; ++k) {
    DualValue dv = prob.inner(st.y);
    st.psi_history.push_back(dv.value);
    st.y_history.push_back(st.y);
    if (dv.value.is_neg_inf() || dv.declared_neg_inf) {
      st.halted = true;
      st.halt_reason = "psi = -inf at iterate " + std::to_string(k);
      st.best_history.push_back(st.best_bound);
      st.iterations = k + 1;
      return st;
    }
    if (dv.value > st.best_bound) st.best_bound = dv.value;
    st.best_history.push_back(st.best_bound);
    if (!dv.minimizer) {
      st.halted = true;
      st.halt_reason = "inner oracle returned no minimizer";
      st.iterations = k + 1;
      return st;
    }
    Vec g = prob.supergradient(*dv.minimizer, st.y);
    st.supergradients.push_back(g);
    const double gn2 = dot(g, g);
    if (gn2 == 0.0) {
      st.halted = true;
      st.halt_reason = "zero supergradient: dual optimal";
      st.iterations = k + 1;
      return st;
    }
    double t = 0.0;
    if (rule.kind == StepRule::Kind::Diminishing)
      t = rule.t0 / (1.0 + static_cast<double>(k));
    else
      t = std::max(0.0, rule.polyak_upper - dv.value.value()) / gn2;
    for (std::size_t i = 0; i < st.y.size(); ++i) st.y[i] += t * g[i];
    project(st.y);
  }
  st.iterations = iters;
  return st;
}

// Ascent trace CSV: iter,y_1..y_q,psi,best_bound
inline std::string to_csv(const DualState& st) {
  std::ostringstream os;
  os << "iter";
  const std::size_t q = st.y_history.empty() ? st.y.size() : st.y_history.front().size();
  for (std::size_t i = 0; i < q; ++i) os << ",y_" << (i + 1);
  os << ",psi,best_bound\n";
  for (std::size_t k = 0; k < st.y_history.size(); ++k) {
    os << k;
    for (double v : st.y_history[k]) os << "," << to_string(ExtReal(v));
    os << "," << to_string(st.psi_history[k]) << "," << to_string(st.best_history[k]) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Duality gap bookkeeping.

enum class GapVerdict { Strong, Weak, Infinite };

struct GapReport {
  ExtReal gap = ExtReal::pos_inf();
  GapVerdict verdict = GapVerdict::Infinite;
  bool weak_duality_violated = false;  // dual bound exceeded the primal value
};

inline GapReport duality_gap(ExtReal primal_best, ExtReal dual_best, double tol = 1e-9) {
  GapReport rep;
  rep.gap = ext_sub(primal_best, dual_best);
  if (!rep.gap.is_finite())
    rep.verdict = GapVerdict::Infinite;
  else if (std::abs(rep.gap.value()) <= tol)
    rep.verdict = GapVerdict::Strong;
  else
    rep.verdict = GapVerdict::Weak;
  if (rep.gap.is_finite() && rep.gap.value() < -tol) rep.weak_duality_violated = true;
  return rep;
}

// ---------------------------------------------------------------------------
// Strong-duality probe along a perturbation sequence: epi-convergence of
// the slices, bounded argmins, liminf <y^nu, u^nu> <= 0 and per-nu zero
// gaps. Evidence only, never a proof.

struct PerNuDual {
  double sup_value = 0.0;  // sup psi^nu, from the entry's perturbed dual oracle
  Vec y;                   // a maximizer y^nu
};

struct StrongDualityInputs {
  ParametricFamily family;
  Vec u_bar;                    // anchor (0 for the catalog entries)
  std::vector<Vec> u_seq;
  SolverCfg inner;
  Vec epi_grid;
  std::function<PerNuDual(const Vec& u_nu)> per_nu_dual;
  std::optional<double> interior_ball;  // check p finite on this u-ball
  double tol = 1e-6;
};

struct StrongDualityReport {
  bool epi_converged = false;      // (a)
  bool argmin_bounded = false;     // (b)
  double max_argmin_norm = 0.0;
  bool liminf_ok = false;          // (c)
  std::string liminf_route;        // "computed" or "undetermined"
  bool per_nu_zero_gap = false;    // (d)
  double worst_nu_gap = 0.0;
  bool interior_certified = false; // p finite on the sampled ball
  bool verdict = false;            // all of (a)-(d)
  std::vector<double> inner_products;  // <y^nu, u^nu>
};

inline StrongDualityReport strong_duality_probe(const StrongDualityInputs& in) {
  StrongDualityReport rep;
  // (a)
  auto probes = default_epi_probes(in.family, in.u_bar, in.epi_grid);
  EpiProbeReport epi = epi_conv_probe(in.family, in.u_seq, in.u_bar, probes, in.epi_grid);
  rep.epi_converged = epi.all_converged;
  // (b) + (d)
  bool bounded = true;
  double worst_gap = 0.0;
  bool zero_gap = in.per_nu_dual != nullptr;
  std::vector<PerNuDual> duals;
  for (const Vec& u : in.u_seq) {
    InnerSolveResult r = inner_solve(in.family, u, in.inner);
    if (r.minimizers.empty() || r.boundary_hit) bounded = false;
    for (const Vec& x : r.minimizers) rep.max_argmin_norm = std::max(rep.max_argmin_norm, norm2(x));
    if (in.per_nu_dual) {
      PerNuDual d = in.per_nu_dual(u);
      duals.push_back(d);
      if (r.value.is_finite()) {
        worst_gap = std::max(worst_gap, std::abs(r.value.value() - d.sup_value));
        if (std::abs(r.value.value() - d.sup_value) > std::max(in.tol, 2.0 * r.certificate)) zero_gap = false;
      } else {
        zero_gap = false;
      }
    }
  }
  rep.argmin_bounded = bounded;
  rep.per_nu_zero_gap = zero_gap;
  rep.worst_nu_gap = worst_gap;
  // (c)
  if (!duals.empty()) {
    double liminf = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < duals.size(); ++k) {
      Vec shifted = in.u_seq[k];
      for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] -= in.u_bar[i];
      const double ip = dot(duals[k].y, shifted);
      rep.inner_products.push_back(ip);
      if (k + 3 >= duals.size()) liminf = std::min(liminf, ip);
    }
    rep.liminf_ok = liminf <= in.tol;
    rep.liminf_route = "computed";
  } else {
    rep.liminf_route = "undetermined";
  }
  // interior-of-dom-p evidence
  if (in.interior_ball) {
    bool finite = true;
    const double r = *in.interior_ball;
    for (std::size_t i = 0; i < in.family.u_dim && finite; ++i) {
      for (double s : {-r, r}) {
        Vec u = in.u_bar;
        u[i] += s;
        if (!inner_solve(in.family, u, in.inner).value.is_finite()) finite = false;
      }
    }
    rep.interior_certified = finite;
  }
  rep.verdict = rep.epi_converged && rep.argmin_bounded && rep.liminf_ok && rep.per_nu_zero_gap;
  return rep;
}

}  // namespace rocklab
