#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle_utils.hpp"
#include "rocklab/catalog.hpp"
#include "rocklab/cli.hpp"

using namespace rocklab;

namespace {

TEST(ConjugateAscent, IteratesStayInsideTheConjugateDomain) {
  // goal-penalty monitoring of (x-2)(x-4): dom h* = [0, 3], and leaving it
  // would collapse the dual value to -inf
  CompositeProblem P(FeasibleSet::box({-5}, {5}), PolyMap::univariate({{{1, 2}, {1, 0}}}),
                     PolyMap::univariate({{{1, 2}, {-6, 1}, {8, 0}}}),
                     MonitoringFn::goal_penalty({3.0}, {0.0}));
  Rockafellian R(std::move(P));
  LagrangianForm L = LagrangianForm::conjugate_form(R);
  DualEvalCfg cfg;
  cfg.inner = SolverCfg::grid1d(-5.0, 5.0, 20001);
  AscentProblem ap = ascent_problem(L, cfg);
  ASSERT_EQ(ap.domain_box.size(), 1u);
  EXPECT_DOUBLE_EQ(ap.domain_box[0].lo, 0.0);
  EXPECT_DOUBLE_EQ(ap.domain_box[0].hi, 3.0);
  DualState st = dual_ascent(ap, Vec{0.0}, StepRule::diminishing(2.0), 60);
  EXPECT_FALSE(st.halted);
  for (const Vec& y : st.y_history) {
    EXPECT_GE(y[0], -1e-12);
    EXPECT_LE(y[0], 3.0 + 1e-12);
  }
  // weak duality against the primal optimum of the penalized problem
  SolverCfg pcfg = SolverCfg::grid1d(-5.0, 5.0, 40001, 1e-9);
  InnerSolveResult primal = inner_solve(R, Vec{0.0}, pcfg);
  EXPECT_LE(st.best_bound.value(), primal.value.value() + 1e-9);
  EXPECT_GT(st.best_bound.value(), primal.value.value() - 0.75);  // the relaxation is informative
}

TEST(ConjugateAscent, SimplexDomainProjection) {
  Rockafellian R = build_eoq();
  LagrangianForm L = LagrangianForm::conjugate_form(R);
  DualEvalCfg cfg;
  cfg.inner = SolverCfg::grid1d(1.0, 200.0, 20001);
  AscentProblem ap = ascent_problem(L, cfg);
  EXPECT_TRUE(ap.simplex);
  DualState st = dual_ascent(ap, Vec{1.0, 0.0}, StepRule::diminishing(0.01), 40);
  EXPECT_FALSE(st.halted);
  for (const Vec& y : st.y_history) {
    EXPECT_NEAR(y[0] + y[1], 1.0, 1e-9);
    EXPECT_GE(y[0], -1e-12);
    EXPECT_GE(y[1], -1e-12);
  }
  // psi(y) = min_x <F(x), y> is maximized at the balanced multipliers;
  // strong duality makes the (grid-upper-estimated) bound meet the primal
  // up to the inner grid error
  SolverCfg pcfg = SolverCfg::grid1d(1.0, 200.0, 20001, 1e-9);
  InnerSolveResult primal = inner_solve(R, Vec{0.0, 0.0}, pcfg);
  EXPECT_LE(st.best_bound.value(), primal.value.value() + 1e-4);
  EXPECT_GE(st.best_bound.value(), primal.value.value() - 1.0);
}

TEST(ProjectSimplex, KnownValues) {
  Vec p = project_simplex({0.5, 0.5});
  EXPECT_NEAR(p[0], 0.5, 1e-12);
  p = project_simplex({2.0, 0.0});
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  p = project_simplex({0.8, 0.6});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  EXPECT_NEAR(p[0] - p[1], 0.2, 1e-12);
  p = project_simplex({-1.0, -2.0});
  EXPECT_NEAR(p[0], 1.0, 1e-12);
}

TEST(InnerSolve, GoldenSectionMethodOnUnimodalObjective) {
  Rockafellian R = build_eoq();
  SolverCfg cfg;
  cfg.method = SolverCfg::Method::GoldenSection;
  cfg.box_lo = {1.0};
  cfg.box_hi = {200.0};
  cfg.max_iters = 200;
  InnerSolveResult r = inner_solve(R, Vec{0.0, 0.0}, cfg);
  EXPECT_NEAR(r.minimizers.front()[0], std::sqrt(4000.0), 1e-6);
  EXPECT_NEAR(r.value.value(), 12.5 * std::sqrt(4000.0), 1e-6);
  EXPECT_FALSE(r.boundary_hit);
}

TEST(InnerSolve, NearMinimizerBand) {
  // f = x^2 on [-2, 2]: the eps-argmin is the interval [-sqrt(eps), sqrt(eps)]
  ParametricFamily fam;
  fam.u_dim = 0;
  fam.x_dim = 1;
  fam.eval = [](std::span<const double>, std::span<const double> x) { return ExtReal(x[0] * x[0]); };
  SolverCfg cfg = SolverCfg::grid1d(-2.0, 2.0, 4001, 0.25);
  cfg.refine_iters = 0;
  InnerSolveResult r = inner_solve(fam, {}, cfg);
  ASSERT_FALSE(r.near_minimizers.empty());
  EXPECT_NEAR(r.near_minimizers.front()[0], -0.5, 2e-3);
  EXPECT_NEAR(r.near_minimizers.back()[0], 0.5, 2e-3);
  for (const Vec& x : r.near_minimizers) EXPECT_LE(x[0] * x[0], 0.25 + 1e-12);
  // one cluster, represented by its smallest coordinate
  EXPECT_EQ(r.minimizers.size(), 1u);
  EXPECT_NEAR(r.minimizers.front()[0], -0.5, 2e-3);
}

TEST(PuSweep, TwoDimensionalGridAndCsv) {
  Rockafellian R = build_eoq();
  SolverCfg cfg = SolverCfg::grid1d(1.0, 200.0, 4001, 1e-9);
  std::vector<Vec> grid;
  for (double u1 : {-1.0, 0.0, 1.0})
    for (double u2 : {-1.0, 0.0, 1.0}) grid.push_back({u1, u2});
  MinValueCurve curve = pu_sweep(R, grid, cfg);
  EXPECT_EQ(curve.u_dim, 2u);
  EXPECT_EQ(curve.points.size(), 9u);
  // p is concave-monotone in each u coordinate here: shifting both goals
  // up by one raises the value by one
  const double base = curve.points[4].p.value();   // (0,0)
  const double both = curve.points[8].p.value();   // (1,1)
  EXPECT_NEAR(both - base, 1.0, 1e-6);
  const std::string csv = to_csv(curve);
  EXPECT_NE(csv.find("u_1,u_2,p,argmin_1"), std::string::npos);
}

TEST(Sets, ConeClosedUnderNonnegativeScaling) {
  FeasibleSet X = FeasibleSet::box({0, 0}, {1, 1});
  ConeDesc cone = normal_cone(X, Vec{1.0, 0.0}, 0.0);
  std::mt19937 gen(71);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::uniform_real_distribution<double> scale(0.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    Vec v{d(gen), d(gen)};
    if (!cone.contains(v, 1e-12)) continue;
    const double t = scale(gen);
    Vec tv{t * v[0], t * v[1]};
    EXPECT_TRUE(cone.contains(tv, 1e-12));
  }
}

TEST(CompositeKkt, OrderQuantityMultiplierInsideSimplexFace) {
  Rockafellian R = build_eoq();
  const double x_star = std::sqrt(4000.0);
  MultiplierFinding f = composite_kkt(R, Vec{0.0, 0.0}, Vec{x_star}, 1e-6);
  Vec z = R.problem.F.eval(Vec{x_star});
  SubdiffSet sd = h_subdiff(R.problem.h, z, 1e-6);
  EXPECT_TRUE(sd.sum_to_one);
  EXPECT_TRUE(sd.contains(f.y, 1e-9));
}

TEST(Monitoring, FenchelYoungEqualityIffAcrossVariants) {
  struct Case {
    MonitoringFn h;
    double z;
  };
  std::vector<Case> cases = {{MonitoringFn::goal_penalty({2}, {0}), 0.0},
                             {MonitoringFn::pwa_max({{-2, 0}, {1, 0}}), 0.0},
                             {MonitoringFn::pwa_max({{-5, -1}, {-1, 0}, {0, -0.4}}), -0.25},
                             {MonitoringFn::indicator_nonpos(1), -1.0},
                             {MonitoringFn::indicator_nonpos(1), 0.0}};
  for (const auto& [h, z] : cases) {
    SubdiffSet sd = h_subdiff(h, Vec{z});
    const double lo = sd.box[0].lo;
    const double hi = std::isfinite(sd.box[0].hi) ? sd.box[0].hi : lo + 5.0;
    // equality at subgradients
    for (double t : {0.0, 0.5, 1.0}) {
      const double y = lo + t * (hi - lo);
      ExtReal cy = h_conjugate(h, Vec{y});
      if (!cy.is_finite()) continue;  // box endpoint capped for the ray case
      const double gap = h_eval(h, Vec{z}).value() + cy.value() - y * z;
      EXPECT_NEAR(gap, 0.0, 1e-9) << "z=" << z << " y=" << y;
    }
    // strict inequality a safe distance outside the subdifferential
    for (double y = -6.0; y <= 6.0; y += 0.25) {
      if (sd.box[0].contains(y, 0.1)) continue;
      ExtReal cy = h_conjugate(h, Vec{y});
      if (!cy.is_finite()) continue;  // infinite conjugate: inequality trivial
      const double gap = h_eval(h, Vec{z}).value() + cy.value() - y * z;
      EXPECT_GT(gap, 1e-9) << "z=" << z << " y=" << y;
    }
  }
}

TEST(EpiConv, LimsupSpotCheckFailsAboveTheAnchor) {
  Rockafellian R = build_constraint_perturbation();
  auto fam = to_family(R);
  std::vector<Vec> u_seq;
  for (int nu = 1; nu <= 6; ++nu) u_seq.push_back({1.0 + 1.0 / (nu * nu)});
  const Vec grid = linspace(-1.0, 7.0, 8001);
  EpiProbeReport rep = epi_conv_probe(fam, u_seq, Vec{1.0}, {{Vec{1.0}, 5.0}}, grid);
  // the constant sequence at x = 3 has f(u^nu, 3) = +inf > f(1, 3) = 10
  EXPECT_FALSE(rep.limsup_ok);
}

TEST(Stability, RejectsNonConvergentSequence) {
  Rockafellian R = build_slater();
  SolverCfg cfg = SolverCfg::grid1d(-5.0, 5.0, 1001);
  std::vector<Vec> bad = {{0.5}, {0.9}};
  EXPECT_THROW(stability_check(R, Vec{0.0}, bad, cfg), std::invalid_argument);
}

TEST(Cli, SelftestJson) {
  std::vector<const char*> argv = {"rocklab", "selftest", "--json"};
  std::ostringstream captured;
  auto* old = std::cout.rdbuf(captured.rdbuf());
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  EXPECT_EQ(rc, 0);
  auto j = nlohmann::json::parse(captured.str());
  EXPECT_EQ(j.size(), catalog().size());
  for (const auto& entry : j) EXPECT_TRUE(entry["pass"].get<bool>());
}

}  // namespace
