#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rocklab/extreal.hpp"
#include "rocklab/monitoring.hpp"
#include "rocklab/numeric.hpp"
#include "rocklab/polymap.hpp"
#include "rocklab/sets.hpp"

namespace rocklab {

// minimize_{x in X} f0(x) + h(F(x))
struct CompositeProblem {
  FeasibleSet X;
  PolyMap f0;  // single output
  PolyMap F;   // m outputs
  MonitoringFn h;

  CompositeProblem(FeasibleSet X_, PolyMap f0_, PolyMap F_, MonitoringFn h_)
      : X(std::move(X_)), f0(std::move(f0_)), F(std::move(F_)), h(std::move(h_)) {
    if (f0.output_dim() != 1) throw std::invalid_argument("CompositeProblem: f0 must have one output");
    require_dim(f0.input_dim(), X.dim(), "CompositeProblem f0");
    require_dim(F.input_dim(), X.dim(), "CompositeProblem F");
    require_dim(dim(h), F.output_dim(), "CompositeProblem h");
  }

  std::size_t n() const { return X.dim(); }
  std::size_t m() const { return F.output_dim(); }
};

// Perturbation embedding f(u,x) = i_X(x) + f0(x) + h(F(x) + u - anchor).
// At u = anchor this is the composite objective itself.
struct Rockafellian {
  CompositeProblem problem;
  Vec anchor;

  Rockafellian(CompositeProblem p, Vec anchor_ = {}) : problem(std::move(p)), anchor(std::move(anchor_)) {
    if (anchor.empty()) anchor.assign(problem.m(), 0.0);
    require_dim(anchor.size(), problem.m(), "Rockafellian anchor");
  }
};

inline ExtReal rock_eval(const Rockafellian& R, std::span<const double> u, std::span<const double> x) {
  const CompositeProblem& P = R.problem;
  require_dim(u.size(), P.m(), "rock_eval u");
  require_dim(x.size(), P.n(), "rock_eval x");
  if (!contains(P.X, x, 0.0)) return ExtReal::pos_inf();
  if (!P.F.in_domain(x) || !P.f0.in_domain(x)) return ExtReal::pos_inf();
  Vec z = P.F.eval(x);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += u[i] - R.anchor[i];
  return ext_add(ExtReal(P.f0.eval_output(0, x)), h_eval(P.h, z));
}

// A family of minimization problems indexed by the perturbation u. Both
// composite Rockafellians and the closed-form catalog entries reduce to
// this shape, which is what the solvers and the epigraph probes consume.
struct ParametricFamily {
  std::size_t u_dim = 0;
  std::size_t x_dim = 0;
  std::function<ExtReal(std::span<const double> u, std::span<const double> x)> eval;
};

inline ParametricFamily to_family(const Rockafellian& R) {
  return ParametricFamily{R.problem.m(), R.problem.n(),
                          [R](std::span<const double> u, std::span<const double> x) { return rock_eval(R, u, x); }};
}

struct SolverCfg {
  enum class Method { GridBruteForce, ProjectedGradient, GoldenSection };

  Method method = Method::GridBruteForce;
  Vec box_lo, box_hi;            // compact search box B; existence is assumed, so the user supplies it
  std::size_t resolution = 2001;  // grid points per dimension
  std::size_t max_iters = 200;    // iterations for the iterative methods
  double eps = 1e-9;              // near-minimizer band
  std::size_t refine_iters = 80;  // golden-section polish steps after a grid scan (1-d)
  double pg_step = 0.1;           // initial step for projected (sub)gradient

  void validate(std::size_t x_dim) const {
    if (resolution < 2) throw std::invalid_argument("SolverCfg: resolution must be >= 2");
    if (!(eps >= 0.0)) throw std::invalid_argument("SolverCfg: eps must be >= 0");
    require_dim(box_lo.size(), x_dim, "SolverCfg box_lo");
    require_dim(box_hi.size(), x_dim, "SolverCfg box_hi");
    for (std::size_t i = 0; i < box_lo.size(); ++i) {
      if (!std::isfinite(box_lo[i]) || !std::isfinite(box_hi[i]) || !(box_lo[i] <= box_hi[i]))
        throw std::invalid_argument("SolverCfg: B must be a compact box");
    }
  }

  static SolverCfg grid1d(double lo, double hi, std::size_t res, double eps_ = 1e-9) {
    SolverCfg c;
    c.box_lo = {lo};
    c.box_hi = {hi};
    c.resolution = res;
    c.eps = eps_;
    return c;
  }
};

struct InnerSolveResult {
  ExtReal value = ExtReal::pos_inf();
  std::vector<Vec> minimizers;       // one representative per cluster (cluster minimum)
  std::vector<Vec> near_minimizers;  // every probed x with f(u,x) <= value + eps
  bool boundary_hit = false;         // best point sits on the boundary of B
  double certificate = std::numeric_limits<double>::infinity();  // grid step * local Lipschitz estimate
  std::size_t evals = 0;
};

namespace detail {

struct Golden1d {
  // Golden-section over [a,b] assuming extended-valued unimodality; tracks
  // the best probed point so plateaus and +inf regions stay safe.
  template <typename F>
  static std::pair<double, ExtReal> minimize(F&& f, double a, double b, std::size_t iters) {
    static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double best_x = a;
    ExtReal best_v = f(a);
    auto consider = [&](double x) {
      ExtReal v = f(x);
      if (v < best_v) {
        best_v = v;
        best_x = x;
      }
      return v;
    };
    consider(b);
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    ExtReal fc = consider(c), fd = consider(d);
    for (std::size_t it = 0; it < iters; ++it) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - invphi * (b - a);
        fc = consider(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + invphi * (b - a);
        fd = consider(d);
      }
    }
    consider(0.5 * (a + b));
    return {best_x, best_v};
  }
};

inline void for_each_grid_point(const SolverCfg& cfg, const std::function<void(const Vec&)>& fn) {
  const std::size_t n = cfg.box_lo.size();
  std::vector<std::size_t> idx(n, 0);
  Vec x(n);
  const double res1 = static_cast<double>(cfg.resolution - 1);
  while (true) {
    for (std::size_t j = 0; j < n; ++j)
      x[j] = cfg.box_lo[j] + (cfg.box_hi[j] - cfg.box_lo[j]) * static_cast<double>(idx[j]) / res1;
    fn(x);
    std::size_t j = 0;
    while (j < n) {
      if (++idx[j] < cfg.resolution) break;
      idx[j] = 0;
      ++j;
    }
    if (j == n) break;
  }
}

}  // namespace detail

// Minimizes f(u, .) over B (and implicitly over X through the +inf values).
// The grid scan is the deterministic reference; an optional golden-section
// polish sharpens the certified value for 1-d problems. Returns
// (+inf, {}, {}) when no probe is feasible: the argmin of an improper
// problem is empty.
inline InnerSolveResult inner_solve(const ParametricFamily& fam, std::span<const double> u, const SolverCfg& cfg) {
  cfg.validate(fam.x_dim);
  require_dim(u.size(), fam.u_dim, "inner_solve u");
  InnerSolveResult res;

  auto f = [&](std::span<const double> x) { return fam.eval(u, x); };

  if (cfg.method == SolverCfg::Method::GoldenSection) {
    if (fam.x_dim != 1) throw std::invalid_argument("inner_solve: golden-section needs x_dim == 1");
    const double lo = cfg.box_lo[0], hi = cfg.box_hi[0];
    auto [bx, bv] = detail::Golden1d::minimize([&](double x) { Vec xx{x}; ++res.evals; return f(xx); },
                                               lo, hi, cfg.max_iters);
    if (bv.is_pos_inf()) return res;
    res.value = bv;
    res.minimizers = {{bx}};
    res.near_minimizers = {{bx}};
    res.certificate = (hi - lo) * std::pow(0.618, static_cast<double>(cfg.max_iters));
    const double edge = 1e-12 * (1.0 + hi - lo);
    res.boundary_hit = (bx - lo <= edge || hi - bx <= edge);
    return res;
  }

  // Reference path: brute-force grid.
  ExtReal best = ExtReal::pos_inf();
  Vec best_x;
  detail::for_each_grid_point(cfg, [&](const Vec& x) {
    ++res.evals;
    ExtReal v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  });
  if (best.is_pos_inf()) return res;  // empty feasible set over B

  double step = 0.0;
  for (std::size_t j = 0; j < fam.x_dim; ++j)
    step = std::max(step, (cfg.box_hi[j] - cfg.box_lo[j]) / static_cast<double>(cfg.resolution - 1));

  // Local Lipschitz estimate around the best point, from its neighborhood.
  double lip = 0.0;
  {
    Vec xx = best_x;
    for (std::size_t j = 0; j < fam.x_dim; ++j) {
      for (double s : {-1.0, 1.0}) {
        xx[j] = best_x[j] + s * step;
        if (xx[j] < cfg.box_lo[j] || xx[j] > cfg.box_hi[j]) continue;
        ExtReal v = f(xx);
        if (v.is_finite() && best.is_finite()) lip = std::max(lip, std::abs(v.value() - best.value()) / step);
      }
      xx[j] = best_x[j];
    }
  }

  ExtReal refined = best;
  Vec refined_x = best_x;
  if (cfg.refine_iters > 0 && fam.x_dim == 1) {
    const double a = std::max(cfg.box_lo[0], best_x[0] - step);
    const double b = std::min(cfg.box_hi[0], best_x[0] + step);
    auto [bx, bv] =
        detail::Golden1d::minimize([&](double x) { Vec xx{x}; ++res.evals; return f(xx); }, a, b, cfg.refine_iters);
    if (bv < refined) {
      refined = bv;
      refined_x = {bx};
    }
  }

  res.value = refined;
  res.certificate = step * std::max(lip, 1.0);

  // Near-minimizers against the certified value.
  detail::for_each_grid_point(cfg, [&](const Vec& x) {
    ExtReal v = f(x);
    if (v.is_finite() && v.value() <= ext_add(refined, ExtReal(cfg.eps)).value()) res.near_minimizers.push_back(x);
  });
  if (res.near_minimizers.empty()) res.near_minimizers.push_back(refined_x);

  // Cluster by 2x grid-step proximity; representative = cluster minimum.
  std::sort(res.near_minimizers.begin(), res.near_minimizers.end());
  res.minimizers.clear();
  const double cluster_gap = 2.0 * step;
  for (std::size_t i = 0; i < res.near_minimizers.size(); ++i) {
    if (i == 0 || dist_inf(res.near_minimizers[i], res.near_minimizers[i - 1]) > cluster_gap)
      res.minimizers.push_back(res.near_minimizers[i]);
  }
  // The polish point replaces the representative of its own cluster.
  if (refined_x != best_x) {
    for (auto& rep : res.minimizers)
      if (dist_inf(rep, refined_x) <= cluster_gap) {
        rep = std::min(rep, refined_x);
        break;
      }
  }
  for (std::size_t j = 0; j < fam.x_dim; ++j)
    if (refined_x[j] <= cfg.box_lo[j] + 1e-12 || refined_x[j] >= cfg.box_hi[j] - 1e-12) res.boundary_hit = true;
  return res;
}

inline InnerSolveResult inner_solve(const Rockafellian& R, std::span<const double> u, const SolverCfg& cfg) {
  return inner_solve(to_family(R), u, cfg);
}

// Projected (sub)gradient accelerator for real-valued monitoring variants.
// Output is meant to be validated against the grid reference.
inline InnerSolveResult inner_solve_pg(const Rockafellian& R, std::span<const double> u, const SolverCfg& cfg) {
  cfg.validate(R.problem.n());
  if (!real_valued(R.problem.h))
    throw std::invalid_argument("inner_solve_pg: monitoring function must be real-valued");
  const auto& P = R.problem;
  InnerSolveResult res;
  Vec x(P.n());
  for (std::size_t j = 0; j < P.n(); ++j) x[j] = 0.5 * (cfg.box_lo[j] + cfg.box_hi[j]);
  x = project(P.X, x);
  auto clamp_box = [&](Vec& v) {
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::clamp(v[j], cfg.box_lo[j], cfg.box_hi[j]);
  };
  clamp_box(x);
  ExtReal best = rock_eval(R, u, x);
  Vec best_x = x;
  for (std::size_t k = 0; k < cfg.max_iters; ++k) {
    Vec z = P.F.eval(x);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += u[i] - R.anchor[i];
    SubdiffSet sd = h_subdiff(P.h, z);
    Vec v(P.m());
    double simplex_sum = 0.0;
    for (std::size_t i = 0; i < P.m(); ++i) {
      const Interval& iv = sd.box[i];
      const double lo = std::isfinite(iv.lo) ? iv.lo : -1.0;
      const double hi = std::isfinite(iv.hi) ? iv.hi : 1.0;
      v[i] = 0.5 * (lo + hi);
      simplex_sum += v[i];
    }
    if (sd.sum_to_one && simplex_sum > 0.0)
      for (double& vi : v) vi /= simplex_sum;
    const auto J = P.F.jacobian(x);
    const auto g0 = P.f0.jacobian(x)[0];
    Vec g = g0;
    for (std::size_t i = 0; i < P.m(); ++i)
      for (std::size_t j = 0; j < P.n(); ++j) g[j] += J[i][j] * v[i];
    const double t = cfg.pg_step / (1.0 + static_cast<double>(k));
    for (std::size_t j = 0; j < P.n(); ++j) x[j] -= t * g[j];
    x = project(P.X, x);
    clamp_box(x);
    ExtReal val = rock_eval(R, u, x);
    ++res.evals;
    if (val < best) {
      best = val;
      best_x = x;
    }
  }
  res.value = best;
  res.minimizers = {best_x};
  res.near_minimizers = {best_x};
  return res;
}

// ---------------------------------------------------------------------------
// Min-value sweeps p(u) = inf f(u, .)

struct MinValuePoint {
  Vec u;
  ExtReal p = ExtReal::pos_inf();
  std::vector<Vec> argmin;  // cluster representatives; empty when P(u) is empty
  bool boundary_hit = false;
  double certificate = std::numeric_limits<double>::infinity();
};

struct MinValueCurve {
  std::size_t u_dim = 0;
  std::size_t x_dim = 0;
  std::vector<MinValuePoint> points;
};

inline MinValueCurve pu_sweep(const ParametricFamily& fam, const std::vector<Vec>& u_grid, const SolverCfg& cfg) {
  if (u_grid.empty()) throw std::invalid_argument("pu_sweep: empty grid");
  MinValueCurve curve;
  curve.u_dim = fam.u_dim;
  curve.x_dim = fam.x_dim;
  curve.points.reserve(u_grid.size());
  for (const Vec& u : u_grid) {
    InnerSolveResult r = inner_solve(fam, u, cfg);
    MinValuePoint pt;
    pt.u = u;
    pt.p = r.value;
    pt.argmin = r.minimizers;
    pt.boundary_hit = r.boundary_hit;
    pt.certificate = r.certificate;
    curve.points.push_back(std::move(pt));
  }
  return curve;
}

inline MinValueCurve pu_sweep(const Rockafellian& R, const std::vector<Vec>& u_grid, const SolverCfg& cfg) {
  return pu_sweep(to_family(R), u_grid, cfg);
}

// CSV rendering: u_1,...,u_k,p,argmin_1,...,argmin_n with "inf"/"-inf"
// literals and empty argmin cells when P(u) is empty.
inline std::string to_csv(const MinValueCurve& curve) {
  std::ostringstream os;
  for (std::size_t j = 0; j < curve.u_dim; ++j) os << "u_" << (j + 1) << ",";
  os << "p";
  for (std::size_t j = 0; j < curve.x_dim; ++j) os << ",argmin_" << (j + 1);
  os << "\n";
  for (const auto& pt : curve.points) {
    for (std::size_t j = 0; j < curve.u_dim; ++j) os << to_string(ExtReal(pt.u[j])) << ",";
    os << to_string(pt.p);
    for (std::size_t j = 0; j < curve.x_dim; ++j) {
      os << ",";
      if (!pt.argmin.empty()) os << to_string(ExtReal(pt.argmin.front()[j]));
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Penalty homotopy: replaces hard inequality constraints with growing
// linear penalties and tracks whether theta^nu * max{0, max_i u_i^nu}
// vanishes, the rate condition that makes the penalized minimizers
// approach the constrained ones.

struct PenaltyStep {
  Vec u;
  double theta = 0.0;
  ExtReal value = ExtReal::pos_inf();
  Vec minimizer;
  double rate_product = 0.0;         // theta * max{0, max_i u_i}
  double dist_to_constrained = std::numeric_limits<double>::infinity();
};

struct PenaltyHomotopyReport {
  std::vector<PenaltyStep> steps;
  ExtReal constrained_value = ExtReal::pos_inf();
  std::vector<Vec> constrained_argmin;
  bool rate_condition_ok = false;  // trailing rate products vanish
  double final_rate_product = 0.0;
};

inline PenaltyHomotopyReport penalty_homotopy(const CompositeProblem& base,
                                              const std::vector<std::pair<Vec, double>>& schedule,
                                              const SolverCfg& cfg, double rate_tol = 1e-6) {
  if (!std::holds_alternative<IndicatorNonpos>(base.h.v))
    throw std::invalid_argument("penalty_homotopy: base problem must monitor with iota_{(-inf,0]^m}");
  if (schedule.empty()) throw std::invalid_argument("penalty_homotopy: empty schedule");
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (!(schedule[k].second > schedule[k - 1].second))
      throw std::invalid_argument("penalty_homotopy: theta must increase to infinity");

  const std::size_t m = base.m();
  PenaltyHomotopyReport rep;

  Rockafellian constrained(base);
  Vec zero_u(m, 0.0);
  InnerSolveResult ref = inner_solve(constrained, zero_u, cfg);
  rep.constrained_value = ref.value;
  rep.constrained_argmin = ref.minimizers;

  for (const auto& [u, theta] : schedule) {
    require_dim(u.size(), m, "penalty_homotopy schedule u");
    CompositeProblem pen(base.X, base.f0, base.F,
                         MonitoringFn::goal_penalty(Vec(m, theta), Vec(m, 0.0)));
    Rockafellian R(std::move(pen));
    InnerSolveResult r = inner_solve(R, u, cfg);
    PenaltyStep st;
    st.u = u;
    st.theta = theta;
    st.value = r.value;
    if (!r.minimizers.empty()) {
      st.minimizer = r.minimizers.front();
      for (const Vec& cx : rep.constrained_argmin)
        st.dist_to_constrained = std::min(st.dist_to_constrained, dist2(st.minimizer, cx));
    }
    double umax = 0.0;
    for (double ui : u) umax = std::max(umax, ui);
    st.rate_product = theta * umax;
    rep.steps.push_back(std::move(st));
  }
  rep.final_rate_product = rep.steps.back().rate_product;
  rep.rate_condition_ok = rep.final_rate_product <= rate_tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Superquantile (CVaR) machinery for finite scenario sets.

inline void validate_probs(std::span<const double> probs) {
  double s = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("probabilities must be nonnegative");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");
}

// gamma + 1/(1-alpha) * sum_xi p_xi max{0, g_xi - gamma}
inline double superquantile_objective(std::span<const double> g_values, std::span<const double> probs,
                                      double alpha, double gamma) {
  require_dim(probs.size(), g_values.size(), "superquantile_objective");
  validate_probs(probs);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  double s = 0.0;
  for (std::size_t i = 0; i < g_values.size(); ++i) s += probs[i] * std::max(0.0, g_values[i] - gamma);
  return gamma + s / (1.0 - alpha);
}

struct SuperquantileMin {
  std::size_t best_candidate = 0;
  double gamma_lo = 0.0, gamma_hi = 0.0;  // minimizing gamma interval endpoints seen in the scan
  double value = 0.0;
};

// Joint minimization over candidates and gamma; the inner gamma problem is
// solved exactly by scanning the scenario losses, where the optimum is
// attained.
inline SuperquantileMin superquantile_minimize(const std::vector<Vec>& losses_per_candidate,
                                               std::span<const double> probs, double alpha) {
  if (losses_per_candidate.empty()) throw std::invalid_argument("superquantile_minimize: no candidates");
  SuperquantileMin out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < losses_per_candidate.size(); ++c) {
    const Vec& g = losses_per_candidate[c];
    Vec gammas(g.begin(), g.end());
    std::sort(gammas.begin(), gammas.end());
    gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
    double cand_best = std::numeric_limits<double>::infinity();
    double glo = 0.0, ghi = 0.0;
    for (double gamma : gammas) {
      const double v = superquantile_objective(g, probs, alpha, gamma);
      const double tol = 1e-12 * (1.0 + std::abs(cand_best));
      if (!std::isfinite(cand_best) || v < cand_best - tol) {
        cand_best = v;
        glo = ghi = gamma;
      } else if (std::abs(v - cand_best) <= tol) {
        glo = std::min(glo, gamma);
        ghi = std::max(ghi, gamma);
      }
    }
    if (!std::isfinite(best) || cand_best < best - 1e-12 * (1.0 + std::abs(best))) {
      best = cand_best;
      out.best_candidate = c;
      out.gamma_lo = glo;
      out.gamma_hi = ghi;
      out.value = cand_best;
    }
  }
  return out;
}

}  // namespace rocklab
