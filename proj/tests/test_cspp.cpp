#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle_utils.hpp"
#include "rocklab/cspp.hpp"

using namespace rocklab;

namespace {

const char* kToyText = R"(# two-route reference instance
p cspp 4 4 1
s 1
t 4
b 4
a 1 2 1 3
a 1 3 2 1
a 2 4 1 3
a 3 4 2 1
)";

// Bellman-Ford oracle: plain relaxation, cost only.
double bellman_ford_cost(const WeightedGraph& G, const Vec& costs) {
  const double inf = std::numeric_limits<double>::infinity();
  Vec dist(G.num_vertices, inf);
  dist[G.s] = 0.0;
  for (std::size_t round = 0; round + 1 < G.num_vertices; ++round)
    for (std::size_t e = 0; e < G.num_edges(); ++e)
      if (dist[G.edges[e].tail] + costs[e] < dist[G.edges[e].head])
        dist[G.edges[e].head] = dist[G.edges[e].tail] + costs[e];
  return dist[G.t];
}

Vec plain_costs(const WeightedGraph& G) {
  Vec c(G.num_edges());
  for (std::size_t e = 0; e < G.num_edges(); ++e) c[e] = G.edges[e].c;
  return c;
}

WeightedGraph random_instance(unsigned seed) {
  std::mt19937 gen(seed);
  const std::size_t V = 4 + gen() % 5;  // 4..8
  const std::size_t q = 1 + gen() % 2;
  WeightedGraph G;
  G.num_vertices = V;
  G.s = 0;
  G.t = static_cast<int>(V - 1);
  auto rint = [&](int lo, int hi) { return lo + static_cast<int>(gen() % (hi - lo + 1)); };
  auto add_edge = [&](int a, int b) {
    GraphEdge e;
    e.tail = a;
    e.head = b;
    e.c = rint(0, 9);
    for (std::size_t k = 0; k < q; ++k) e.D.push_back(rint(0, 9));
    G.edges.push_back(std::move(e));
  };
  // backbone path through a shuffled subset keeps t reachable
  std::vector<int> mids;
  for (std::size_t v = 1; v + 1 < V; ++v) mids.push_back(static_cast<int>(v));
  std::shuffle(mids.begin(), mids.end(), gen);
  const std::size_t keep = mids.size() ? gen() % (mids.size() + 1) : 0;
  std::vector<int> chain = {G.s};
  for (std::size_t i = 0; i < keep; ++i) chain.push_back(mids[i]);
  chain.push_back(G.t);
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) add_edge(chain[i], chain[i + 1]);
  while (G.edges.size() < 14) {
    const int a = rint(0, static_cast<int>(V) - 1);
    const int b = rint(0, static_cast<int>(V) - 1);
    if (a == b) continue;
    add_edge(a, b);
    if (gen() % 3 == 0) break;
  }
  for (std::size_t k = 0; k < q; ++k) G.budgets.push_back(rint(0, 25));
  return G;
}

TEST(Parse, ToyInstance) {
  WeightedGraph G = parse_graph(kToyText);
  EXPECT_EQ(G.num_vertices, 4u);
  EXPECT_EQ(G.num_edges(), 4u);
  EXPECT_EQ(G.q(), 1u);
  EXPECT_EQ(G.s, 0);
  EXPECT_EQ(G.t, 3);
  EXPECT_EQ(G.budgets[0], 4.0);
  // canonical serialization round-trips
  WeightedGraph G2 = parse_graph(to_text(G));
  EXPECT_EQ(to_text(G), to_text(G2));
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse_graph("p cspp 2 1 1\ns 1\nt 2\nb 1\na 1 1 1 1\n"), std::invalid_argument);  // self-loop
  EXPECT_THROW(parse_graph("p cspp 3 1 1\ns 1\nt 3\nb 1\na 1 2 1 1\n"), std::invalid_argument);  // t unreachable
  EXPECT_THROW(parse_graph("p cspp 2 1 1\ns 1\nt 2\nb 1\na 1 2 -1 1\n"), std::invalid_argument); // negative cost
  EXPECT_THROW(parse_graph("p cspp 2 2 1\ns 1\nt 2\nb 1\na 1 2 1 1\n"), std::invalid_argument);  // edge count
  EXPECT_THROW(parse_graph("s 1\n"), std::invalid_argument);                                     // header first
  try {
    parse_graph("p cspp 2 1 1\ns 1\nt 2\nb 1\na 1 1 1 1\n");
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
  }
}

TEST(Dijkstra, ToyShortestAndTieBreak) {
  WeightedGraph G = parse_graph(kToyText);
  PathSolution p0 = dijkstra(G, plain_costs(G));
  EXPECT_DOUBLE_EQ(p0.cost, 2.0);
  EXPECT_EQ(p0.vertex_seq, (std::vector<int>{0, 1, 3}));

  // at y = 0.5 both routes cost 5; lexicographic tie-break picks s->2->t
  Vec mod(G.num_edges());
  for (std::size_t e = 0; e < G.num_edges(); ++e) mod[e] = G.edges[e].c + 0.5 * G.edges[e].D[0];
  PathSolution ptie = dijkstra(G, mod);
  EXPECT_DOUBLE_EQ(ptie.cost, 5.0);
  EXPECT_EQ(ptie.vertex_seq, (std::vector<int>{0, 1, 3}));

  WeightedGraph single = parse_graph("p cspp 2 1 1\ns 1\nt 2\nb 5\na 1 2 3 1\n");
  PathSolution ps = dijkstra(single, plain_costs(single));
  EXPECT_EQ(ps.edge_seq, (std::vector<std::size_t>{0}));
  EXPECT_THROW(dijkstra(single, Vec{-1.0}), std::invalid_argument);
}

TEST(DualBound, ToyValues) {
  WeightedGraph G = parse_graph(kToyText);
  DualBound b0 = cspp_dual_bound(G, Vec{0.0});
  EXPECT_DOUBLE_EQ(b0.bound, 2.0);
  EXPECT_DOUBLE_EQ(b0.supergradient[0], 2.0);  // 6 - 4
  DualBound bhalf = cspp_dual_bound(G, Vec{0.5});
  EXPECT_DOUBLE_EQ(bhalf.bound, 3.0);
  DualBound b2 = cspp_dual_bound(G, Vec{2.0});
  EXPECT_DOUBLE_EQ(b2.bound, 0.0);  // min(14, 8) - 8
  EXPECT_THROW(cspp_dual_bound(G, Vec{-0.5}), std::invalid_argument);
}

TEST(Enumerate, ToyPaths) {
  WeightedGraph G = parse_graph(kToyText);
  auto paths = enumerate_paths(G);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_DOUBLE_EQ(paths[0].length, 2.0);
  EXPECT_DOUBLE_EQ(paths[0].weights[0], 6.0);
  EXPECT_FALSE(paths[0].feasible);
  EXPECT_DOUBLE_EQ(paths[1].length, 4.0);
  EXPECT_DOUBLE_EQ(paths[1].weights[0], 2.0);
  EXPECT_TRUE(paths[1].feasible);
  auto best = constrained_optimum(paths);
  ASSERT_TRUE(best.has_value());
  EXPECT_DOUBLE_EQ(best->length, 4.0);

  WeightedGraph big;
  big.num_vertices = 13;
  big.s = 0;
  big.t = 12;
  EXPECT_THROW(enumerate_paths(big), std::invalid_argument);
}

TEST(Relax, ToyBoundAndGap) {
  WeightedGraph G = parse_graph(kToyText);
  CsppRelaxCfg cfg;
  cfg.iters = 200;
  cfg.rule = StepRule::diminishing(0.25);
  CsppRelaxResult r = cspp_relax(G, cfg);
  EXPECT_GE(r.best_bound.value(), 3.0 - 1e-3);
  EXPECT_LE(r.best_bound.value(), 3.0 + 1e-9);
  ASSERT_TRUE(r.best_feasible.has_value());
  EXPECT_DOUBLE_EQ(r.best_feasible->length, 4.0);
  EXPECT_EQ(r.best_feasible->vertex_seq, (std::vector<int>{0, 2, 3}));
  EXPECT_NEAR(r.gap.gap.value(), 1.0, 1e-3);
  EXPECT_TRUE(r.weak_duality_ok);
}

TEST(Relax, InactiveBudgetIsTight) {
  WeightedGraph G = parse_graph(kToyText);
  G.budgets[0] = 1000.0;
  CsppRelaxResult r = cspp_relax(G);
  EXPECT_NEAR(r.gap.gap.value(), 0.0, 1e-9);
  EXPECT_DOUBLE_EQ(r.state.y.size() ? r.state.y[0] : 0.0, 0.0);  // multiplier never leaves 0
}

TEST(Relax, InfeasibleBudgetFlagged) {
  WeightedGraph G = parse_graph(kToyText);
  G.budgets[0] = 0.0;
  CsppRelaxResult r = cspp_relax(G);
  EXPECT_TRUE(r.no_feasible_found);
  EXPECT_TRUE(r.gap.gap.is_pos_inf());
  EXPECT_GE(r.best_bound.value(), 2.0 - 1e-9);  // bounds remain valid
}

TEST(Properties, RandomInstanceSuite) {
  std::mt19937 meta(97);
  std::uniform_real_distribution<double> yd(0.0, 5.0);
  for (unsigned inst = 0; inst < 100; ++inst) {
    WeightedGraph G = random_instance(1000 + inst);
    auto paths = enumerate_paths(G);
    ASSERT_FALSE(paths.empty());
    auto best = constrained_optimum(paths);
    const double opt = best ? best->length : std::numeric_limits<double>::infinity();

    // weak duality at random multipliers
    for (int rep = 0; rep < 10; ++rep) {
      Vec y(G.q());
      for (auto& v : y) v = yd(meta);
      DualBound b = cspp_dual_bound(G, y);
      EXPECT_LE(b.bound, opt + 1e-9);
    }

    // Dijkstra equals Bellman-Ford exactly, on plain and modified costs
    EXPECT_EQ(dijkstra(G, plain_costs(G)).cost, bellman_ford_cost(G, plain_costs(G)));
    {
      Vec y(G.q());
      for (auto& v : y) v = yd(meta);
      Vec mod(G.num_edges());
      for (std::size_t e = 0; e < G.num_edges(); ++e) {
        mod[e] = G.edges[e].c;
        for (std::size_t k = 0; k < G.q(); ++k) mod[e] += G.edges[e].D[k] * y[k];
      }
      EXPECT_EQ(dijkstra(G, mod).cost, bellman_ford_cost(G, mod));
    }

    // concavity along a random segment and the supergradient inequality
    Vec y1(G.q()), y2(G.q());
    for (auto& v : y1) v = yd(meta);
    for (auto& v : y2) v = yd(meta);
    Vec mid(G.q());
    for (std::size_t k = 0; k < G.q(); ++k) mid[k] = 0.5 * (y1[k] + y2[k]);
    const double p1 = cspp_dual_bound(G, y1).bound;
    const double p2 = cspp_dual_bound(G, y2).bound;
    const double pm = cspp_dual_bound(G, mid).bound;
    EXPECT_GE(pm, 0.5 * (p1 + p2) - 1e-9);

    DualBound at1 = cspp_dual_bound(G, y1);
    EXPECT_LE(p2, p1 + dot(at1.supergradient, y2) - dot(at1.supergradient, y1) + 1e-9);

    // relaxation gap is never negative
    CsppRelaxCfg cfg;
    cfg.iters = 30;
    CsppRelaxResult r = cspp_relax(G, cfg);
    if (r.gap.gap.is_finite()) {
      EXPECT_GE(r.gap.gap.value(), -1e-9);
    }
    EXPECT_TRUE(r.weak_duality_ok);
  }
}

}  // namespace
