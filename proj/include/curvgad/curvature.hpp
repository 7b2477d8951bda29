#pragma once

#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>
#include <vector>

#include "curvgad/graph.hpp"
#include "curvgad/transport.hpp"

namespace curvgad {

enum class OrcMode { exact, approximate };

struct OrcConfig {
  double delta = 0.5;  // laziness mass retained at the node
  OrcMode mode = OrcMode::exact;
  bool parallel = false;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (!(delta >= 0.0 && delta < 1.0))
      throw std::invalid_argument("delta must lie in [0, 1)");
  }
};

struct CurvatureMap {
  // One value per edge, keyed (u, v) with u < v.
  std::map<std::pair<int, int>, double> values;
  OrcMode kind = OrcMode::exact;

  double at(int u, int v) const {
    if (u > v) std::swap(u, v);
    auto it = values.find({u, v});
    if (it == values.end()) throw std::out_of_range("no curvature for edge");
    return it->second;
  }
};

// Lazy random walk measure: mass delta at x, (1-delta)/|N(x)| per neighbor.
inline Measure lazy_measure(const Graph& g, int x, double delta) {
  auto nbrs = g.neighborhood(x);
  if (nbrs.empty())
    throw GraphError("lazy measure undefined for isolated node " +
                     std::to_string(x));
  Measure m;
  if (delta > 0.0) m[x] = delta;
  double share = (1.0 - delta) / static_cast<double>(nbrs.size());
  for (int y : nbrs) m[y] += share;
  return m;
}

inline double orc_exact(const Graph& g, int x, int y, const OrcConfig& cfg) {
  cfg.validate();
  Measure mu = lazy_measure(g, x, cfg.delta);
  Measure nu = lazy_measure(g, y, cfg.delta);
  double w_xy = g.edge_weight(x, y);
  // The ORC denominator is the geodesic distance, which on weighted graphs
  // can undercut the direct edge.
  double d_xy = g.unit_weights() ? 1.0 : g.distances_from(x, w_xy)[y];
  // Supports sit within one hop of x and y, so every support-to-support
  // geodesic is bounded by the worst hop out of x, the edge, and the worst
  // hop out of y. Truncating Dijkstra there avoids all-pairs distances.
  double wx = 0.0, wy = 0.0;
  for (auto& [z, w] : g.adjacency(x)) wx = std::max(wx, w);
  for (auto& [z, w] : g.adjacency(y)) wy = std::max(wy, w);
  double radius = wx + w_xy + wy;
  TransportPlan plan = wasserstein1(g, mu, nu, radius);
  return 1.0 - plan.cost / d_xy;
}

// Sorted-adjacency intersection; O(d_x + d_y).
inline int triangle_count(const Graph& g, int x, int y) {
  const auto& ax = g.adjacency(x);
  const auto& ay = g.adjacency(y);
  int count = 0;
  std::size_t i = 0, j = 0;
  while (i < ax.size() && j < ay.size()) {
    if (ax[i].first < ay[j].first) {
      ++i;
    } else if (ax[i].first > ay[j].first) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

struct OrcBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Combinatorial curvature bounds from degrees and triangle counts. Stated
// for unweighted graphs; `strict` rejects weighted input, otherwise the
// topology is treated as unweighted.
inline OrcBounds orc_bounds(const Graph& g, int x, int y, bool strict = false) {
  if (!g.unit_weights() && strict)
    throw GraphError("curvature bounds require a unit-weight graph");
  double dx = g.degree(x), dy = g.degree(y);
  double tri = triangle_count(g, x, y);
  double dmin = std::min(dx, dy), dmax = std::max(dx, dy);
  auto pos = [](double v) { return v > 0.0 ? v : 0.0; };
  OrcBounds b;
  b.lower = -pos(1.0 - 1.0 / dx - 1.0 / dy - tri / dmin) -
            pos(1.0 - 1.0 / dx - 1.0 / dy - tri / dmax) + tri / dmax;
  b.upper = tri / dmax;
  return b;
}

inline double orc_approx(const Graph& g, int x, int y, bool strict = false) {
  OrcBounds b = orc_bounds(g, x, y, strict);
  return 0.5 * (b.lower + b.upper);
}

// Per-edge curvature for the whole graph. Deterministic regardless of the
// parallel flag: results land in an edge-indexed vector before aggregation.
inline CurvatureMap curvature_map(const Graph& g, const OrcConfig& cfg) {
  cfg.validate();
  const auto& edges = g.edges();
  std::vector<double> vals(edges.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Edge& e = edges[i];
      vals[i] = cfg.mode == OrcMode::exact ? orc_exact(g, e.u, e.v, cfg)
                                           : orc_approx(g, e.u, e.v);
    }
  };
  if (cfg.parallel && edges.size() > 1) {
    unsigned nt = cfg.threads > 0 ? cfg.threads
                                  : std::thread::hardware_concurrency();
    nt = std::max(1u, std::min<unsigned>(nt, edges.size()));
    std::vector<std::thread> pool;
    std::size_t chunk = (edges.size() + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
      std::size_t b = t * chunk, e = std::min(edges.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  } else {
    work(0, edges.size());
  }
  CurvatureMap cm;
  cm.kind = cfg.mode;
  for (std::size_t i = 0; i < edges.size(); ++i)
    cm.values[{edges[i].u, edges[i].v}] = vals[i];
  return cm;
}

}  // namespace curvgad
