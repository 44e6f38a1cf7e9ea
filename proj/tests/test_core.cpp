#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "oracle_utils.hpp"
#include "rocklab/composite.hpp"
#include "rocklab/extreal.hpp"
#include "rocklab/monitoring.hpp"
#include "rocklab/polymap.hpp"
#include "rocklab/sets.hpp"

using namespace rocklab;

namespace {

const ExtReal kInf = ExtReal::pos_inf();
const ExtReal kNegInf = ExtReal::neg_inf();

// --------------------------------------------------------------------------
// extreal

TEST(ExtReal, AdditionConvention) {
  EXPECT_EQ(ext_add(ExtReal(5.0), kInf), kInf);
  EXPECT_EQ(ext_add(kNegInf, kInf), kInf);
  EXPECT_EQ(ext_add(kInf, kNegInf), kInf);
  EXPECT_EQ(ext_add(ExtReal(2.0), ExtReal(3.0)), ExtReal(5.0));
  EXPECT_EQ(ext_add(ExtReal(2.0), kNegInf), kNegInf);
}

TEST(ExtReal, ExhaustiveTriples) {
  const std::array<ExtReal, 3> vals = {kNegInf, ExtReal(2.0), kInf};
  for (ExtReal a : vals)
    for (ExtReal b : vals) {
      EXPECT_EQ(ext_add(a, b), ext_add(b, a));
      for (ExtReal c : vals)
        EXPECT_EQ(ext_add(a, ext_add(b, c)), ext_add(ext_add(a, b), c));
    }
}

TEST(ExtReal, OrderingMonotoneUnderAdd) {
  const std::array<ExtReal, 4> vals = {kNegInf, ExtReal(-1.0), ExtReal(3.0), kInf};
  for (ExtReal a : vals)
    for (ExtReal b : vals)
      for (ExtReal c : vals) {
        if (!(a <= b)) continue;
        const bool guard = !c.is_pos_inf() || (a.is_finite() && b.is_finite());
        if (guard) {
          EXPECT_LE(ext_add(a, c), ext_add(b, c));
        }
      }
}

TEST(ExtReal, Scaling) {
  EXPECT_EQ(ext_scale(0.0, kInf), ExtReal(0.0));
  EXPECT_EQ(ext_scale(2.0, ExtReal(3.0)), ExtReal(6.0));
  EXPECT_EQ(ext_scale(3.0, kNegInf), kNegInf);
  EXPECT_THROW(ext_scale(-1.0, ExtReal(1.0)), std::invalid_argument);
}

TEST(ExtReal, RenderParseRoundTrip) {
  EXPECT_EQ(to_string(kInf), "inf");
  EXPECT_EQ(to_string(kNegInf), "-inf");
  EXPECT_EQ(parse_ext_real("inf"), kInf);
  EXPECT_EQ(parse_ext_real("-inf"), kNegInf);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> mag(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const double v = std::ldexp(mag(gen), i % 40 - 20);
    const ExtReal r(v);
    EXPECT_EQ(parse_ext_real(to_string(r)).value(), v);  // bit-identical
  }
  EXPECT_THROW(parse_ext_real("zzz"), std::invalid_argument);
}

// --------------------------------------------------------------------------
// sets

TEST(Sets, Contains) {
  EXPECT_TRUE(contains(FeasibleSet::box({0, 0}, {1, 1}), Vec{0.5, 1.0}, 0.0));
  EXPECT_TRUE(contains(FeasibleSet::nonpos(1), Vec{1e-7}, 1e-6));
  EXPECT_FALSE(contains(FeasibleSet::finite({{0, 1}}), Vec{0, 0}, 1e-6));
  EXPECT_THROW(contains(FeasibleSet::nonpos(2), Vec{0.0}, 0.0), std::invalid_argument);
}

TEST(Sets, Project) {
  EXPECT_EQ(project(FeasibleSet::box({0}, {1}), Vec{2.0}), (Vec{1.0}));
  EXPECT_EQ(project(FeasibleSet::whole(2), Vec{3.0, -4.0}), (Vec{3.0, -4.0}));
  EXPECT_EQ(project(FeasibleSet::finite({{0}, {3}}), Vec{2.0}), (Vec{3.0}));
  // tie broken by lowest index
  EXPECT_EQ(project(FeasibleSet::finite({{0}, {2}}), Vec{1.0}), (Vec{0.0}));
}

TEST(Sets, NormalCone) {
  ConeDesc c1 = normal_cone(FeasibleSet::nonpos(1), Vec{0.0}, 0.0);
  EXPECT_EQ(c1.coords[0], CoordCone::NonnegRay);
  ConeDesc c2 = normal_cone(FeasibleSet::whole(3), Vec{1, 2, 3}, 0.0);
  for (auto t : c2.coords) EXPECT_EQ(t, CoordCone::Zero);
  ConeDesc c3 = normal_cone(FeasibleSet::box({0}, {1}), Vec{0.5}, 0.0);
  EXPECT_EQ(c3.coords[0], CoordCone::Zero);
  EXPECT_THROW(normal_cone(FeasibleSet::nonpos(1), Vec{1.0}, 1e-3), std::invalid_argument);
}

TEST(Sets, ProjectIsIdempotentAndMember) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  std::vector<FeasibleSet> sets = {FeasibleSet::box({-1, 0}, {1, 2}), FeasibleSet::nonpos(2),
                                   FeasibleSet::zero(2), FeasibleSet::finite({{0, 0}, {1, 1}, {2, 0}})};
  for (const auto& X : sets) {
    for (int i = 0; i < 100; ++i) {
      Vec x{d(gen), d(gen)};
      Vec p = project(X, x);
      EXPECT_TRUE(contains(X, p, 1e-12));
      EXPECT_LE(dist_inf(project(X, p), p), 1e-12);
    }
  }
}

TEST(Sets, ProjectionVariationalInequality) {
  // <x - proj(x), z - proj(x)> <= 0 for z in X (convex members only).
  std::mt19937 gen(13);
  std::uniform_real_distribution<double> d(-4.0, 4.0);
  FeasibleSet X = FeasibleSet::box({-1, -1}, {2, 0.5});
  for (int i = 0; i < 100; ++i) {
    Vec x{d(gen), d(gen)};
    Vec p = project(X, x);
    Vec z = project(X, Vec{d(gen), d(gen)});
    double ip = 0.0;
    for (int j = 0; j < 2; ++j) ip += (x[j] - p[j]) * (z[j] - p[j]);
    EXPECT_LE(ip, 1e-9);
  }
}

TEST(Sets, NormalConeInequality) {
  // sampled v in N_X(x) satisfies <v, z - x> <= 0 for z in X.
  FeasibleSet X = FeasibleSet::box({0, 0}, {1, 1});
  Vec x{1.0, 0.0};  // corner: upper in coord 0, lower in coord 1
  ConeDesc cone = normal_cone(X, x, 0.0);
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Vec v(2);
    for (int j = 0; j < 2; ++j) {
      switch (cone.coords[j]) {
        case CoordCone::Zero: v[j] = 0.0; break;
        case CoordCone::NonnegRay: v[j] = scale(gen); break;
        case CoordCone::NonposRay: v[j] = -scale(gen); break;
        case CoordCone::All: v[j] = scale(gen) - 1.5; break;
      }
    }
    Vec z{d(gen), d(gen)};
    double ip = 0.0;
    for (int j = 0; j < 2; ++j) ip += v[j] * (z[j] - x[j]);
    EXPECT_LE(ip, 1e-9);
  }
}

// --------------------------------------------------------------------------
// monitoring

TEST(Monitoring, Eval) {
  auto gp = MonitoringFn::goal_penalty({1, 2}, {0, 0});
  EXPECT_EQ(h_eval(gp, Vec{-1, 3}), ExtReal(6.0));
  auto nonpos = MonitoringFn::indicator_nonpos(2);
  EXPECT_EQ(h_eval(nonpos, Vec{0, -1}), ExtReal(0.0));
  EXPECT_EQ(h_eval(nonpos, Vec{0.1, -1}), kInf);
  EXPECT_THROW(h_eval(nonpos, Vec{0.0}), std::invalid_argument);
  auto mx = MonitoringFn::max_of_coords(2);
  EXPECT_EQ(h_eval(mx, Vec{-1, 3}), ExtReal(3.0));
}

TEST(Monitoring, SubdiffPwaMax) {
  auto h = MonitoringFn::pwa_max({{-2, 0}, {1, 0}});
  SubdiffSet at_kink = h_subdiff(h, Vec{0.0});
  EXPECT_DOUBLE_EQ(at_kink.box[0].lo, -2.0);
  EXPECT_DOUBLE_EQ(at_kink.box[0].hi, 1.0);
  SubdiffSet smooth = h_subdiff(h, Vec{1.0});
  EXPECT_DOUBLE_EQ(smooth.box[0].lo, 1.0);
  EXPECT_DOUBLE_EQ(smooth.box[0].hi, 1.0);
}

TEST(Monitoring, SubdiffGoalPenaltyAgainstScan) {
  auto h = MonitoringFn::goal_penalty({2}, {0});
  SubdiffSet sd = h_subdiff(h, Vec{0.0});
  EXPECT_DOUBLE_EQ(sd.box[0].lo, 0.0);
  EXPECT_DOUBLE_EQ(sd.box[0].hi, 2.0);
  // brute-force the convex subgradient inequality over a grid of candidates
  auto scalar = [&](double z) { return h_eval(h, Vec{z}); };
  auto iv = oracle::subgradient_scan(scalar, 0.0, -4.0, 6.0, 1001, -10.0, 10.0, 2001);
  EXPECT_NEAR(iv.lo, 0.0, 0.02);
  EXPECT_NEAR(iv.hi, 2.0, 0.02);
}

TEST(Monitoring, SubdiffIndicators) {
  auto nonpos = MonitoringFn::indicator_nonpos(2);
  SubdiffSet sd = h_subdiff(nonpos, Vec{0.0, -1.0});
  EXPECT_DOUBLE_EQ(sd.box[0].lo, 0.0);
  EXPECT_TRUE(std::isinf(sd.box[0].hi));
  EXPECT_DOUBLE_EQ(sd.box[1].lo, 0.0);
  EXPECT_DOUBLE_EQ(sd.box[1].hi, 0.0);
  EXPECT_THROW(h_subdiff(nonpos, Vec{1.0, 0.0}), std::invalid_argument);
  auto zero = MonitoringFn::indicator_zero(3);
  EXPECT_EQ(h_subdiff(zero, Vec{0, 0, 0}).kind, SubdiffSet::Kind::All);
}

TEST(Monitoring, SubdiffMaxOfCoords) {
  auto h = MonitoringFn::max_of_coords(2);
  SubdiffSet tie = h_subdiff(h, Vec{1.0, 1.0});
  EXPECT_TRUE(tie.sum_to_one);
  EXPECT_DOUBLE_EQ(tie.box[0].hi, 1.0);
  EXPECT_DOUBLE_EQ(tie.box[1].hi, 1.0);
  EXPECT_TRUE(tie.contains(Vec{0.5, 0.5}, 0.0));
  EXPECT_FALSE(tie.contains(Vec{0.5, 0.2}, 1e-6));
  SubdiffSet single = h_subdiff(h, Vec{2.0, 1.0});
  EXPECT_TRUE(single.contains(Vec{1.0, 0.0}, 0.0));
  EXPECT_FALSE(single.contains(Vec{0.0, 1.0}, 1e-6));
}

TEST(Monitoring, ConjugateClosedForms) {
  auto nonpos = MonitoringFn::indicator_nonpos(2);
  EXPECT_EQ(h_conjugate(nonpos, Vec{1, 0}), ExtReal(0.0));
  EXPECT_EQ(h_conjugate(nonpos, Vec{-1, 0}), kInf);
  auto gp = MonitoringFn::goal_penalty({2}, {0});
  EXPECT_EQ(h_conjugate(gp, Vec{1.0}), ExtReal(0.0));
  EXPECT_EQ(h_conjugate(gp, Vec{3.0}), kInf);
  auto zero = MonitoringFn::indicator_zero(2);
  EXPECT_EQ(h_conjugate(zero, Vec{5, -7}), ExtReal(0.0));
  auto ws = MonitoringFn::weighted_sum({0.25, 0.75});
  EXPECT_EQ(h_conjugate(ws, Vec{0.25, 0.75}), ExtReal(0.0));
  EXPECT_EQ(h_conjugate(ws, Vec{0.3, 0.75}), kInf);
}

TEST(Monitoring, ConjugateGoalPenaltyGridOracle) {
  auto gp = MonitoringFn::goal_penalty({2}, {0});
  auto eval = [&](const Vec& z) { return h_eval(gp, z); };
  // dense scan over u in [-100, 100], step 1e-3
  const double grid = oracle::conjugate_grid_sup(eval, Vec{1.0}, -100.0, 100.0, 200001);
  EXPECT_NEAR(grid, h_conjugate(gp, Vec{1.0}).value(), 2e-3);
}

TEST(Monitoring, ConjugatePwaMaxGridOracle) {
  // includes a dominated middle piece, which must drop out of the hull
  auto h = MonitoringFn::pwa_max({{-2, 0}, {0, -5}, {1, 0}});
  auto eval = [&](const Vec& z) { return h_eval(h, z); };
  for (double y : {-2.0, -1.0, -0.5, 0.0, 0.77, 1.0}) {
    const double grid = oracle::conjugate_grid_sup(eval, Vec{y}, -30.0, 30.0, 60001);
    EXPECT_NEAR(grid, h_conjugate(h, Vec{y}).value(), 2e-3) << "y=" << y;
  }
  EXPECT_TRUE(h_conjugate(h, Vec{1.5}).is_pos_inf());
  EXPECT_TRUE(h_conjugate(h, Vec{-2.5}).is_pos_inf());
}

TEST(Monitoring, DomainNormal) {
  auto zero = MonitoringFn::indicator_zero(2);
  EXPECT_EQ(h_domain_normal(zero, Vec{0, 0}).kind, SubdiffSet::Kind::All);
  auto gp = MonitoringFn::goal_penalty({1, 2}, {0, 0});
  SubdiffSet n = h_domain_normal(gp, Vec{3, -1});
  for (const auto& iv : n.box) {
    EXPECT_DOUBLE_EQ(iv.lo, 0.0);
    EXPECT_DOUBLE_EQ(iv.hi, 0.0);
  }
  auto nonpos = MonitoringFn::indicator_nonpos(1);
  SubdiffSet c = h_domain_normal(nonpos, Vec{0.0});
  EXPECT_DOUBLE_EQ(c.box[0].lo, 0.0);
  EXPECT_TRUE(std::isinf(c.box[0].hi));
}

std::vector<MonitoringFn> catalog_variants() {
  return {MonitoringFn::indicator_zero(2),
          MonitoringFn::indicator_nonpos(2),
          MonitoringFn::goal_penalty({1.0, 2.5}, {0.5, -1.0}),
          MonitoringFn::weighted_sum({0.25, 0.75}),
          MonitoringFn::pwa_max({{-5, -1}, {-1, 0}, {0, -0.4}}, 2),
          MonitoringFn::max_of_coords(2),
          MonitoringFn::separable({MonitoringFn::goal_penalty({2}, {0}), MonitoringFn::indicator_nonpos(1)})};
}

// samples a point of dom h (all variants here have domains that are
// products of {0}, (-inf,0] or R)
Vec sample_domain_point(const MonitoringFn& h, std::mt19937& gen) {
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  Vec z(dim(h));
  for (auto& v : z) v = d(gen);
  if (std::holds_alternative<IndicatorZero>(h.v)) std::fill(z.begin(), z.end(), 0.0);
  if (std::holds_alternative<IndicatorNonpos>(h.v))
    for (auto& v : z) v = -std::abs(v);
  if (const auto* sep = std::get_if<Separable>(&h.v)) {
    for (std::size_t i = 0; i < sep->parts.size(); ++i) {
      if (std::holds_alternative<IndicatorZero>(sep->parts[i].v)) z[i] = 0.0;
      if (std::holds_alternative<IndicatorNonpos>(sep->parts[i].v)) z[i] = -std::abs(z[i]);
    }
  }
  return z;
}

TEST(Monitoring, MidpointConvexity) {
  std::mt19937 gen(23);
  for (const auto& h : catalog_variants()) {
    for (int i = 0; i < 200; ++i) {
      Vec z1 = sample_domain_point(h, gen);
      Vec z2 = sample_domain_point(h, gen);
      Vec mid(z1.size());
      for (std::size_t j = 0; j < z1.size(); ++j) mid[j] = 0.5 * (z1[j] + z2[j]);
      const double lhs = h_eval(h, mid).finite_value();
      const double rhs = 0.5 * (h_eval(h, z1).finite_value() + h_eval(h, z2).finite_value());
      EXPECT_LE(lhs, rhs + 1e-12);
    }
  }
}

TEST(Monitoring, SubgradientInequality) {
  std::mt19937 gen(29);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& h : catalog_variants()) {
    for (int rep = 0; rep < 10; ++rep) {
      Vec z = sample_domain_point(h, gen);
      SubdiffSet sd = h_subdiff(h, z);
      Vec v(dim(h), 0.0);
      if (sd.kind == SubdiffSet::Kind::Box) {
        double ssum = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
          const double lo = std::isfinite(sd.box[j].lo) ? sd.box[j].lo : -10.0;
          const double hi = std::isfinite(sd.box[j].hi) ? sd.box[j].hi : lo + 10.0;
          v[j] = lo + unit(gen) * (hi - lo);
          ssum += v[j];
        }
        if (sd.sum_to_one) {
          // renormalize within the simplex face
          if (ssum <= 0.0) {
            for (std::size_t j = 0; j < v.size(); ++j) v[j] = sd.box[j].hi;
            ssum = 0.0;
            for (double x : v) ssum += x;
          }
          for (auto& x : v) x /= ssum;
        }
      }
      const double hz = h_eval(h, z).finite_value();
      for (int probe = 0; probe < 100; ++probe) {
        Vec x(dim(h));
        std::uniform_real_distribution<double> d(-5.0, 5.0);
        for (auto& xx : x) xx = d(gen);
        ExtReal hx = h_eval(h, x);
        if (hx.is_pos_inf()) continue;
        EXPECT_GE(hx.value(), hz + dot(v, x) - dot(v, z) - 1e-9);
      }
    }
  }
}

TEST(Monitoring, FenchelYoung) {
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> d(-4.0, 4.0);
  for (const auto& h : catalog_variants()) {
    for (int rep = 0; rep < 200; ++rep) {
      Vec z = sample_domain_point(h, gen);
      Vec y(dim(h));
      for (auto& v : y) v = d(gen);
      ExtReal hz = h_eval(h, z);
      ExtReal hy = h_conjugate(h, y);
      ExtReal lhs = ext_add(hz, hy);
      if (lhs.is_finite()) {
        EXPECT_GE(lhs.value(), dot(y, z) - 1e-9);
      }
    }
  }
}

TEST(Monitoring, FenchelYoungEqualityIffSubgradient) {
  auto h = MonitoringFn::goal_penalty({2}, {0});
  // equality at subgradients
  for (double z : {-1.0, 0.0, 1.5}) {
    SubdiffSet sd = h_subdiff(h, Vec{z});
    for (double t : {0.0, 0.5, 1.0}) {
      const double y = sd.box[0].lo + t * (sd.box[0].hi - sd.box[0].lo);
      const double gap = h_eval(h, Vec{z}).value() + h_conjugate(h, Vec{y}).value() - y * z;
      EXPECT_NEAR(gap, 0.0, 1e-9) << "z=" << z << " y=" << y;
    }
  }
  // strict inequality at a safe distance from the subdifferential
  for (double z : {-1.0, 1.5}) {
    SubdiffSet sd = h_subdiff(h, Vec{z});
    for (double y = 0.0; y <= 2.0; y += 0.1) {
      if (sd.box[0].contains(y, 0.05)) continue;
      const double gap = h_eval(h, Vec{z}).value() + h_conjugate(h, Vec{y}).value() - y * z;
      EXPECT_GT(gap, 1e-9) << "z=" << z << " y=" << y;
    }
  }
}

// --------------------------------------------------------------------------
// polymap

TEST(PolyMap, GradCheck) {
  PolyMap sq = PolyMap::univariate({{{1, 2}}});
  auto rep = grad_check(sq, Vec{3.0});
  EXPECT_NEAR(rep.entries[0].analytic, 6.0, 1e-12);
  EXPECT_NEAR(rep.entries[0].fd, 6.0, 1e-6);

  // (x-2)(x-4) = x^2 - 6x + 8
  PolyMap g = PolyMap::univariate({{{1, 2}, {-6, 1}, {8, 0}}});
  auto rep2 = grad_check(g, Vec{2.0});
  EXPECT_NEAR(rep2.entries[0].analytic, -2.0, 1e-12);
  EXPECT_NEAR(rep2.entries[0].fd, -2.0, 1e-6);

  PolyMap inv = PolyMap::univariate({{{50000.0, -1}}}, /*inverse=*/true);
  auto rep3 = grad_check(inv, Vec{10.0});
  EXPECT_NEAR(rep3.entries[0].analytic, -500.0, 1e-9);
  EXPECT_NEAR(rep3.entries[0].fd, -500.0, 1e-4);
  EXPECT_THROW(grad_check(inv, Vec{-1.0}), std::domain_error);
}

TEST(PolyMap, MultivariateJacobian) {
  // F(x1,x2) = (x1*x2, x1^2 + 3 x2)
  std::vector<PolyOutput> outs(2);
  outs[0].terms = {PolyTerm{1.0, {1, 1}}};
  outs[1].terms = {PolyTerm{1.0, {2, 0}}, PolyTerm{3.0, {0, 1}}};
  PolyMap F(2, outs);
  auto rep = grad_check(F, Vec{2.0, -1.5});
  EXPECT_LT(rep.max_rel_error, 1e-7);
  auto J = F.jacobian(Vec{2.0, -1.5});
  EXPECT_DOUBLE_EQ(J[0][0], -1.5);
  EXPECT_DOUBLE_EQ(J[0][1], 2.0);
  EXPECT_DOUBLE_EQ(J[1][0], 4.0);
  EXPECT_DOUBLE_EQ(J[1][1], 3.0);
}

}  // namespace
