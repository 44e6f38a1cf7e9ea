#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rocklab/duality.hpp"
#include "rocklab/extreal.hpp"
#include "rocklab/numeric.hpp"

namespace rocklab {

// Directed graph with edge lengths c >= 0, resource weights D >= 0 and
// budgets d >= 0. Vertices are 1-based in the file format, 0-based here.
struct GraphEdge {
  int tail = 0, head = 0;
  double c = 0.0;
  Vec D;
};

struct WeightedGraph {
  std::size_t num_vertices = 0;
  std::vector<GraphEdge> edges;
  int s = 0, t = 0;
  Vec budgets;

  std::size_t q() const { return budgets.size(); }
  std::size_t num_edges() const { return edges.size(); }
};

struct PathSolution {
  std::vector<std::size_t> edge_seq;  // edge indices along the path
  std::vector<int> vertex_seq;        // s, ..., t
  Vec x;                              // 0/1 indicator over edges
  double length = 0.0;                // <c, x>
  Vec weights;                        // D x
  bool feasible = false;              // D x <= d
  double cost = 0.0;                  // <costs, x> w.r.t. the costs solved with
};

namespace detail {

inline bool near_eq(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

inline Vec dijkstra_dists(const WeightedGraph& G, std::span<const double> costs, int source, bool reversed) {
  const double inf = std::numeric_limits<double>::infinity();
  Vec dist(G.num_vertices, inf);
  dist[source] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (std::size_t e = 0; e < G.edges.size(); ++e) {
      const int from = reversed ? G.edges[e].head : G.edges[e].tail;
      const int to = reversed ? G.edges[e].tail : G.edges[e].head;
      if (from != u) continue;
      const double nd = d + costs[e];
      if (nd < dist[to]) {
        dist[to] = nd;
        heap.push({nd, to});
      }
    }
  }
  return dist;
}

}  // namespace detail

inline PathSolution make_path(const WeightedGraph& G, const std::vector<std::size_t>& edge_seq,
                              std::span<const double> costs) {
  PathSolution p;
  p.edge_seq = edge_seq;
  p.x.assign(G.num_edges(), 0.0);
  p.weights.assign(G.q(), 0.0);
  p.vertex_seq = {G.s};
  for (std::size_t e : edge_seq) {
    p.x[e] = 1.0;
    p.length += G.edges[e].c;
    p.cost += costs.empty() ? G.edges[e].c : costs[e];
    for (std::size_t k = 0; k < G.q(); ++k) p.weights[k] += G.edges[e].D[k];
    p.vertex_seq.push_back(G.edges[e].head);
  }
  p.feasible = true;
  for (std::size_t k = 0; k < G.q(); ++k)
    if (p.weights[k] > G.budgets[k] + 1e-9) p.feasible = false;
  return p;
}

// Shortest s-t path under the given edge costs; ties resolved to the
// lexicographically smallest vertex sequence. The dual supergradient
// depends on the returned path, so determinism keeps ascent traces
// reproducible.
inline PathSolution dijkstra(const WeightedGraph& G, std::span<const double> costs) {
  require_dim(costs.size(), G.num_edges(), "dijkstra costs");
  for (double c : costs)
    if (c < 0.0) throw std::invalid_argument("dijkstra: negative cost");
  const Vec dist_s = detail::dijkstra_dists(G, costs, G.s, false);
  const Vec dist_t = detail::dijkstra_dists(G, costs, G.t, true);
  const double total = dist_s[G.t];
  if (!std::isfinite(total)) throw std::runtime_error("dijkstra: sink unreachable");

  // Lexicographically smallest shortest path via DFS over admissible
  // edges, trying smaller head vertices first. Simple paths only; zero
  // cost cycles would otherwise trap the walk.
  std::vector<std::size_t> stack_edges;
  std::vector<bool> on_path(G.num_vertices, false);
  std::vector<std::size_t> result;

  std::function<bool(int)> dfs = [&](int u) -> bool {
    if (u == G.t) {
      result = stack_edges;
      return true;
    }
    // admissible out-edges sorted by (head, edge cost, index)
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < G.edges.size(); ++e) {
      if (G.edges[e].tail != u) continue;
      const int v = G.edges[e].head;
      if (on_path[v]) continue;
      if (!detail::near_eq(dist_s[u] + costs[e] + dist_t[v], total)) continue;
      if (!detail::near_eq(dist_s[u] + costs[e], dist_s[v])) continue;
      out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
      if (G.edges[a].head != G.edges[b].head) return G.edges[a].head < G.edges[b].head;
      if (costs[a] != costs[b]) return costs[a] < costs[b];
      return a < b;
    });
    for (std::size_t e : out) {
      const int v = G.edges[e].head;
      stack_edges.push_back(e);
      on_path[v] = true;
      if (dfs(v)) return true;
      on_path[v] = false;
      stack_edges.pop_back();
    }
    return false;
  };
  on_path[G.s] = true;
  if (!dfs(G.s)) throw std::runtime_error("dijkstra: path reconstruction failed");
  return make_path(G, result, costs);
}

// ---------------------------------------------------------------------------
// Graph file format, line oriented; '#' and 'c' start comment lines:
//   p cspp <num_vertices> <num_edges> <q>
//   s <vertex> / t <vertex> / b <d_1> ... <d_q>
//   a <tail> <head> <c> <D_1> ... <D_q>

inline WeightedGraph parse_graph(const std::string& text) {
  WeightedGraph G;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_p = false, have_s = false, have_t = false, have_b = false;
  std::size_t declared_edges = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("graph line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "#" || tag == "c" || tag[0] == '#') continue;
    if (tag == "p") {
      std::string kind;
      long v = 0, e = 0, q = 0;
      if (!(ls >> kind >> v >> e >> q) || kind != "cspp" || v < 2 || e < 0 || q < 0)
        fail("expected 'p cspp <V> <E> <q>'");
      G.num_vertices = static_cast<std::size_t>(v);
      declared_edges = static_cast<std::size_t>(e);
      G.budgets.assign(static_cast<std::size_t>(q), 0.0);
      have_p = true;
      have_b = (q == 0);
    } else if (tag == "s" || tag == "t") {
      if (!have_p) fail("'p' line must come first");
      long v = 0;
      if (!(ls >> v) || v < 1 || v > static_cast<long>(G.num_vertices)) fail("vertex out of range");
      (tag == "s" ? G.s : G.t) = static_cast<int>(v - 1);
      (tag == "s" ? have_s : have_t) = true;
    } else if (tag == "b") {
      if (!have_p) fail("'p' line must come first");
      for (std::size_t k = 0; k < G.q(); ++k) {
        if (!(ls >> G.budgets[k])) fail("expected " + std::to_string(G.q()) + " budget entries");
        if (G.budgets[k] < 0.0) fail("negative budget");
      }
      have_b = true;
    } else if (tag == "a") {
      if (!have_p) fail("'p' line must come first");
      GraphEdge e;
      long tail = 0, head = 0;
      if (!(ls >> tail >> head >> e.c)) fail("expected 'a <tail> <head> <c> <D...>'");
      if (tail < 1 || tail > static_cast<long>(G.num_vertices) || head < 1 ||
          head > static_cast<long>(G.num_vertices))
        fail("vertex out of range");
      if (tail == head) fail("self-loop");
      if (e.c < 0.0) fail("negative length");
      e.tail = static_cast<int>(tail - 1);
      e.head = static_cast<int>(head - 1);
      e.D.assign(G.q(), 0.0);
      for (std::size_t k = 0; k < G.q(); ++k) {
        if (!(ls >> e.D[k])) fail("expected " + std::to_string(G.q()) + " weight entries");
        if (e.D[k] < 0.0) fail("negative weight");
      }
      G.edges.push_back(std::move(e));
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  lineno = 0;
  if (!have_p) throw std::invalid_argument("graph: missing 'p cspp' header");
  if (!have_s || !have_t) throw std::invalid_argument("graph: missing source or sink");
  if (!have_b) throw std::invalid_argument("graph: missing budget line");
  if (G.s == G.t) throw std::invalid_argument("graph: source equals sink");
  if (G.edges.size() != declared_edges)
    throw std::invalid_argument("graph: edge count does not match header");
  // connectivity s -> t
  Vec unit(G.num_edges(), 0.0);
  const Vec dist = detail::dijkstra_dists(G, unit, G.s, false);
  if (!std::isfinite(dist[G.t])) throw std::invalid_argument("graph: no s-t path");
  return G;
}

inline std::string to_text(const WeightedGraph& G) {
  std::ostringstream os;
  os << "p cspp " << G.num_vertices << " " << G.num_edges() << " " << G.q() << "\n";
  os << "s " << (G.s + 1) << "\n";
  os << "t " << (G.t + 1) << "\n";
  os << "b";
  for (double d : G.budgets) os << " " << to_string(ExtReal(d));
  os << "\n";
  for (const auto& e : G.edges) {
    os << "a " << (e.tail + 1) << " " << (e.head + 1) << " " << to_string(ExtReal(e.c));
    for (double w : e.D) os << " " << to_string(ExtReal(w));
    os << "\n";
  }
  return os.str();
}

// The analytically tractable reference instance: two s-t paths, feasible
// optimum 4, relaxation bound 3, integrality gap 1.
inline WeightedGraph toy_instance() {
  WeightedGraph G;
  G.num_vertices = 4;
  G.s = 0;
  G.t = 3;
  G.budgets = {4.0};
  G.edges = {{0, 1, 1.0, {3.0}}, {0, 2, 2.0, {1.0}}, {1, 3, 1.0, {3.0}}, {2, 3, 2.0, {1.0}}};
  return G;
}

// ---------------------------------------------------------------------------
// Lagrangian relaxation machinery.

struct DualBound {
  double bound = 0.0;
  PathSolution path;
  Vec supergradient;  // D x - d
};

// psi(y) = min over paths of <c + D^T y, x> - <d, y>; exact by Dijkstra.
inline DualBound cspp_dual_bound(const WeightedGraph& G, std::span<const double> y) {
  require_dim(y.size(), G.q(), "cspp_dual_bound y");
  for (double v : y)
    if (v < 0.0) throw std::invalid_argument("cspp_dual_bound: y must be >= 0");
  Vec costs(G.num_edges());
  for (std::size_t e = 0; e < G.num_edges(); ++e) {
    costs[e] = G.edges[e].c;
    for (std::size_t k = 0; k < G.q(); ++k) costs[e] += G.edges[e].D[k] * y[k];
  }
  DualBound out;
  out.path = dijkstra(G, costs);
  out.bound = out.path.cost - dot(G.budgets, y);
  out.supergradient.resize(G.q());
  for (std::size_t k = 0; k < G.q(); ++k) out.supergradient[k] = out.path.weights[k] - G.budgets[k];
  return out;
}

// All simple s-t paths; desk-scale oracle for gaps and property suites.
inline std::vector<PathSolution> enumerate_paths(const WeightedGraph& G, std::size_t cutoff = 12) {
  if (G.num_vertices > cutoff) throw std::invalid_argument("enumerate_paths: vertex count exceeds cutoff");
  std::vector<PathSolution> out;
  std::vector<std::size_t> stack_edges;
  std::vector<bool> on_path(G.num_vertices, false);
  std::function<void(int)> dfs = [&](int u) {
    if (u == G.t) {
      out.push_back(make_path(G, stack_edges, {}));
      return;
    }
    std::vector<std::size_t> outs;
    for (std::size_t e = 0; e < G.edges.size(); ++e)
      if (G.edges[e].tail == u && !on_path[G.edges[e].head]) outs.push_back(e);
    std::sort(outs.begin(), outs.end(),
              [&](std::size_t a, std::size_t b) { return G.edges[a].head != G.edges[b].head
                                                         ? G.edges[a].head < G.edges[b].head
                                                         : a < b; });
    for (std::size_t e : outs) {
      on_path[G.edges[e].head] = true;
      stack_edges.push_back(e);
      dfs(G.edges[e].head);
      stack_edges.pop_back();
      on_path[G.edges[e].head] = false;
    }
  };
  on_path[G.s] = true;
  dfs(G.s);
  return out;
}

inline std::optional<PathSolution> constrained_optimum(const std::vector<PathSolution>& paths) {
  std::optional<PathSolution> best;
  for (const auto& p : paths) {
    if (!p.feasible) continue;
    if (!best || p.length < best->length - 1e-12 ||
        (std::abs(p.length - best->length) <= 1e-12 && p.vertex_seq < best->vertex_seq))
      best = p;
  }
  return best;
}

struct CsppRelaxCfg {
  std::size_t iters = 200;
  StepRule rule = StepRule::diminishing(0.25);
  Vec y0;  // defaults to 0
};

struct CsppRelaxResult {
  ExtReal best_bound = ExtReal::neg_inf();
  std::optional<PathSolution> best_feasible;
  GapReport gap;
  DualState state;
  bool no_feasible_found = false;
  bool weak_duality_ok = true;  // every bound <= every feasible length
};

inline CsppRelaxResult cspp_relax(const WeightedGraph& G, const CsppRelaxCfg& cfg = {}) {
  CsppRelaxResult res;
  std::vector<PathSolution> candidates;

  AscentProblem ap;
  ap.nonneg.assign(G.q(), true);
  ap.inner = [&G, &candidates](std::span<const double> y) {
    DualBound b = cspp_dual_bound(G, y);
    if (b.path.feasible) candidates.push_back(b.path);
    DualValue dv;
    dv.value = ExtReal(b.bound);
    dv.minimizer = b.path.x;
    dv.exact = true;
    return dv;
  };
  ap.supergradient = [&G](const Vec& x, std::span<const double>) {
    Vec g(G.q(), 0.0);
    for (std::size_t k = 0; k < G.q(); ++k) {
      for (std::size_t e = 0; e < G.num_edges(); ++e) g[k] += G.edges[e].D[k] * x[e];
      g[k] -= G.budgets[k];
    }
    return g;
  };

  Vec y0 = cfg.y0.empty() ? Vec(G.q(), 0.0) : cfg.y0;
  res.state = dual_ascent(ap, y0, cfg.rule, cfg.iters);
  res.best_bound = res.state.best_bound;

  // feasibility heuristics: min-weight routes per budget, a normalized
  // combination, and the plain shortest path
  auto consider_costs = [&](const Vec& costs) {
    PathSolution p = dijkstra(G, costs);
    if (p.feasible) candidates.push_back(p);
  };
  for (std::size_t k = 0; k < G.q(); ++k) {
    Vec costs(G.num_edges());
    for (std::size_t e = 0; e < G.num_edges(); ++e) costs[e] = G.edges[e].D[k];
    consider_costs(costs);
  }
  {
    Vec costs(G.num_edges(), 0.0);
    for (std::size_t e = 0; e < G.num_edges(); ++e)
      for (std::size_t k = 0; k < G.q(); ++k)
        costs[e] += G.edges[e].D[k] / std::max(G.budgets[k], 1.0);
    consider_costs(costs);
    for (std::size_t e = 0; e < G.num_edges(); ++e) costs[e] = G.edges[e].c;
    consider_costs(costs);
  }

  for (const auto& p : candidates) {
    if (!res.best_feasible || p.length < res.best_feasible->length - 1e-12 ||
        (std::abs(p.length - res.best_feasible->length) <= 1e-12 &&
         p.vertex_seq < res.best_feasible->vertex_seq))
      res.best_feasible = p;
  }
  res.no_feasible_found = !res.best_feasible.has_value();

  const ExtReal primal = res.best_feasible ? ExtReal(res.best_feasible->length) : ExtReal::pos_inf();
  res.gap = duality_gap(primal, res.best_bound);
  for (const ExtReal& b : res.state.psi_history)
    if (res.best_feasible && b.is_finite() && b.value() > res.best_feasible->length + 1e-9)
      res.weak_duality_ok = false;
  return res;
}

}  // namespace rocklab
