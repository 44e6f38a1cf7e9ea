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

#include "rocklab/composite.hpp"
#include "rocklab/extreal.hpp"
#include "rocklab/numeric.hpp"

namespace rocklab {

// Distance from z = (x_bar, alpha_bar) to the epigraph of phi, evaluated
// over a bounded x-grid. For a fixed x' the nearest epigraph point above
// it has ordinate max(phi(x'), alpha_bar), which reduces the search to
// the grid. Returns +inf when phi is identically +inf on the grid: the
// epigraph is empty there and dist(., empty) = inf.
inline ExtReal epi_dist(const std::function<ExtReal(std::span<const double>)>& phi,
                        std::span<const double> x_bar, double alpha_bar, const std::vector<Vec>& grid) {
  if (grid.empty()) throw std::invalid_argument("epi_dist: empty grid");
  double best = std::numeric_limits<double>::infinity();
  bool any_finite = false;
  for (const Vec& x : grid) {
    require_dim(x.size(), x_bar.size(), "epi_dist grid point");
    const ExtReal v = phi(x);
    if (v.is_pos_inf()) continue;
    any_finite = true;
    const double vert = v.is_neg_inf() ? 0.0 : std::max(v.value(), alpha_bar) - alpha_bar;
    const double horiz = dist2(x, x_bar);
    best = std::min(best, std::sqrt(horiz * horiz + vert * vert));
  }
  return any_finite ? ExtReal(best) : ExtReal::pos_inf();
}

// 1-d convenience overload.
inline ExtReal epi_dist(const std::function<ExtReal(double)>& phi, double x_bar, double alpha_bar,
                        const Vec& grid) {
  std::vector<Vec> pts;
  pts.reserve(grid.size());
  for (double g : grid) pts.push_back({g});
  return epi_dist([&](std::span<const double> x) { return phi(x[0]); }, Vec{x_bar}, alpha_bar, pts);
}

enum class ProbeVerdict { Converged, Diverged, Infinite };

inline const char* to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::Converged: return "converged";
    case ProbeVerdict::Diverged: return "diverged";
    case ProbeVerdict::Infinite: return "infinite";
  }
  return "?";
}

struct ProbeTrace {
  Vec x_bar;
  double alpha_bar = 0.0;
  std::vector<ExtReal> dists;  // dist(z, epi f(u^nu, .)) per nu
  ExtReal target = ExtReal::pos_inf();
  ProbeVerdict verdict = ProbeVerdict::Diverged;
};

struct PointwiseCheck {
  Vec x;
  bool ok = true;  // liminf / limsup inequality satisfied on the recorded tail
};

// Numerical epi-convergence report: probe-distance traces plus spot checks
// of the liminf condition along argmin trajectories and the limsup
// condition along constant sequences. Verdicts are evidence derived from
// the recorded numbers only, never proofs.
struct EpiProbeReport {
  std::vector<ProbeTrace> traces;
  std::vector<PointwiseCheck> liminf_checks;   // along argmin trajectories
  std::vector<PointwiseCheck> limsup_checks;   // constant sequences
  bool all_converged = false;
  bool liminf_ok = true;
  bool limsup_ok = true;
  double tol = 1e-2;
};

namespace detail {
inline double deviation(ExtReal d, ExtReal target) {
  if (d.is_pos_inf() && target.is_pos_inf()) return 0.0;
  if (d.is_pos_inf() || target.is_pos_inf()) return std::numeric_limits<double>::infinity();
  return std::abs(d.value() - target.value());
}
}  // namespace detail

// Default probe lattice: 5x5 points spanning the bounding box of the
// anchor slice's epigraph boundary over the grid (1-d slices).
inline std::vector<std::pair<Vec, double>> default_epi_probes(const ParametricFamily& fam,
                                                              std::span<const double> u_bar, const Vec& grid) {
  if (fam.x_dim != 1) throw std::invalid_argument("default_epi_probes: 1-d slices only");
  double xlo = grid.front(), xhi = grid.back();
  double vlo = std::numeric_limits<double>::infinity();
  double vhi = -std::numeric_limits<double>::infinity();
  for (double g : grid) {
    Vec x{g};
    ExtReal v = fam.eval(u_bar, x);
    if (v.is_finite()) {
      vlo = std::min(vlo, v.value());
      vhi = std::max(vhi, v.value());
    }
  }
  if (!(vlo < vhi)) {
    vlo = std::isfinite(vlo) ? vlo - 1.0 : -1.0;
    vhi = vlo + 2.0;
  }
  std::vector<std::pair<Vec, double>> probes;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      probes.push_back({Vec{xlo + (xhi - xlo) * i / 4.0}, vlo + (vhi - vlo) * j / 4.0});
  return probes;
}

inline EpiProbeReport epi_conv_probe(const ParametricFamily& fam, const std::vector<Vec>& u_seq,
                                     std::span<const double> u_bar,
                                     const std::vector<std::pair<Vec, double>>& probes, const Vec& grid,
                                     double tol = 1e-2) {
  if (u_seq.size() < 3) throw std::invalid_argument("epi_conv_probe: need at least 3 sequence elements");
  for (std::size_t k = 1; k < u_seq.size(); ++k) {
    Vec d0(u_seq[k - 1]), d1(u_seq[k]);
    for (std::size_t j = 0; j < d0.size(); ++j) {
      d0[j] -= u_bar[j];
      d1[j] -= u_bar[j];
    }
    if (!(norm2(d1) < norm2(d0) + 1e-15))
      throw std::invalid_argument("epi_conv_probe: ||u^nu - u_bar|| must decrease");
  }

  std::vector<Vec> grid_pts;
  grid_pts.reserve(grid.size());
  for (double g : grid) grid_pts.push_back({g});

  auto slice = [&](std::span<const double> u) {
    return [&fam, u](std::span<const double> x) { return fam.eval(u, x); };
  };

  EpiProbeReport rep;
  rep.tol = tol;
  const std::size_t tail = std::min<std::size_t>(3, u_seq.size());

  for (const auto& [zx, za] : probes) {
    ProbeTrace tr;
    tr.x_bar = zx;
    tr.alpha_bar = za;
    tr.target = epi_dist(slice(u_bar), zx, za, grid_pts);
    for (const Vec& u : u_seq) tr.dists.push_back(epi_dist(slice(u), zx, za, grid_pts));

    bool conv = true, any_inf = false;
    for (std::size_t k = u_seq.size() - tail; k < u_seq.size(); ++k) {
      const double dev = detail::deviation(tr.dists[k], tr.target);
      if (!(dev < tol)) conv = false;
      if (tr.dists[k].is_pos_inf() && !tr.target.is_pos_inf()) any_inf = true;
    }
    tr.verdict = conv ? ProbeVerdict::Converged : (any_inf ? ProbeVerdict::Infinite : ProbeVerdict::Diverged);
    rep.traces.push_back(std::move(tr));
  }
  rep.all_converged =
      std::all_of(rep.traces.begin(), rep.traces.end(),
                  [](const ProbeTrace& t) { return t.verdict == ProbeVerdict::Converged; });

  // liminf spot check along the grid-argmin trajectory: for x^nu in
  // argmin f(u^nu, .) approaching x_hat, f(u^nu, x^nu) must not fall
  // below f(u_bar, x_hat) in the tail.
  {
    std::vector<std::optional<Vec>> traj;
    for (const Vec& u : u_seq) {
      ExtReal best = ExtReal::pos_inf();
      std::optional<Vec> arg;
      for (const Vec& x : grid_pts) {
        ExtReal v = fam.eval(u, x);
        if (v < best) {
          best = v;
          arg = x;
        }
      }
      traj.push_back(arg);
    }
    if (traj.back().has_value()) {
      const Vec& x_hat = *traj.back();
      ExtReal fx = fam.eval(u_bar, x_hat);
      PointwiseCheck chk;
      chk.x = x_hat;
      for (std::size_t k = u_seq.size() - tail; k < u_seq.size(); ++k) {
        if (!traj[k].has_value()) continue;
        ExtReal fnu = fam.eval(u_seq[k], *traj[k]);
        if (fx.is_finite() && fnu.is_finite() && fnu.value() < fx.value() - tol) chk.ok = false;
        if (fx.is_pos_inf() && !fnu.is_pos_inf()) chk.ok = false;
      }
      rep.liminf_checks.push_back(chk);
    }
  }

  // limsup spot check with constant sequences x^nu = x at 5 sample grid
  // points: f(u^nu, x) must not exceed f(u_bar, x) in the tail.
  for (int s = 0; s < 5; ++s) {
    const Vec& x = grid_pts[(grid_pts.size() - 1) * s / 4];
    ExtReal fx = fam.eval(u_bar, x);
    PointwiseCheck chk;
    chk.x = x;
    if (!fx.is_pos_inf()) {
      for (std::size_t k = u_seq.size() - tail; k < u_seq.size(); ++k) {
        ExtReal fnu = fam.eval(u_seq[k], x);
        if (fnu.is_pos_inf() || fnu.value() > fx.value() + tol) chk.ok = false;
      }
    }
    rep.limsup_checks.push_back(chk);
  }
  for (const auto& c : rep.liminf_checks) rep.liminf_ok = rep.liminf_ok && c.ok;
  for (const auto& c : rep.limsup_checks) rep.limsup_ok = rep.limsup_ok && c.ok;
  return rep;
}

// CSV rendering: probe_id,nu,dist,target,verdict
inline std::string to_csv(const EpiProbeReport& rep) {
  std::ostringstream os;
  os << "probe_id,nu,dist,target,verdict\n";
  for (std::size_t p = 0; p < rep.traces.size(); ++p) {
    const ProbeTrace& tr = rep.traces[p];
    for (std::size_t k = 0; k < tr.dists.size(); ++k)
      os << p << "," << (k + 1) << "," << to_string(tr.dists[k]) << "," << to_string(tr.target) << ","
         << to_string(tr.verdict) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Stability: does (p(u^nu), P(u^nu)) approach (p(u_bar), P(u_bar))?

struct StabilityStep {
  Vec u;
  ExtReal p = ExtReal::pos_inf();
  double value_dev = std::numeric_limits<double>::infinity();
  double argmin_dist = std::numeric_limits<double>::infinity();
};

struct StabilityReport {
  ExtReal p_target = ExtReal::pos_inf();
  std::vector<StabilityStep> steps;
  bool stable = false;
  std::string offending;            // which trace broke, when unstable
  double max_successive_jump = 0.0; // largest |p^{nu+1} - p^nu|
};

inline StabilityReport stability_check(const ParametricFamily& fam, std::span<const double> u_bar,
                                       const std::vector<Vec>& u_seq, const SolverCfg& cfg,
                                       double value_tol = 1e-2, double arg_tol = 1e-2) {
  if (u_seq.empty()) throw std::invalid_argument("stability_check: empty sequence");
  for (std::size_t k = 1; k < u_seq.size(); ++k) {
    Vec d0(u_seq[k - 1]), d1(u_seq[k]);
    for (std::size_t j = 0; j < d0.size(); ++j) {
      d0[j] -= u_bar[j];
      d1[j] -= u_bar[j];
    }
    if (!(norm2(d1) < norm2(d0) + 1e-15))
      throw std::invalid_argument("stability_check: ||u^nu - u_bar|| must decrease");
  }
  StabilityReport rep;
  InnerSolveResult ref = inner_solve(fam, u_bar, cfg);
  rep.p_target = ref.value;

  for (const Vec& u : u_seq) {
    InnerSolveResult r = inner_solve(fam, u, cfg);
    StabilityStep st;
    st.u = u;
    st.p = r.value;
    st.value_dev = detail::deviation(r.value, ref.value);
    if (r.minimizers.empty() && ref.minimizers.empty())
      st.argmin_dist = 0.0;
    else if (!r.minimizers.empty() && !ref.minimizers.empty()) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec& x : r.minimizers)
        for (const Vec& t : ref.near_minimizers) best = std::min(best, dist2(x, t));
      st.argmin_dist = best;
    }
    rep.steps.push_back(std::move(st));
  }
  for (std::size_t k = 1; k < rep.steps.size(); ++k)
    rep.max_successive_jump =
        std::max(rep.max_successive_jump, detail::deviation(rep.steps[k].p, rep.steps[k - 1].p));

  const std::size_t tail = std::min<std::size_t>(3, rep.steps.size());
  bool value_ok = true, arg_ok = true;
  for (std::size_t k = rep.steps.size() - tail; k < rep.steps.size(); ++k) {
    if (!(rep.steps[k].value_dev < value_tol)) value_ok = false;
    if (!(rep.steps[k].argmin_dist < arg_tol)) arg_ok = false;
  }
  rep.stable = value_ok && arg_ok;
  if (!value_ok)
    rep.offending = "minimum value trace";
  else if (!arg_ok)
    rep.offending = "minimizer trace";
  return rep;
}

inline StabilityReport stability_check(const Rockafellian& R, std::span<const double> u_bar,
                                       const std::vector<Vec>& u_seq, const SolverCfg& cfg,
                                       double value_tol = 1e-2, double arg_tol = 1e-2) {
  return stability_check(to_family(R), u_bar, u_seq, cfg, value_tol, arg_tol);
}

}  // namespace rocklab
