#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "curvgad/graph.hpp"

namespace curvgad {

// Discrete probability measure on graph nodes.
using Measure = std::map<int, double>;

struct Flow {
  int source = 0;
  int target = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<Flow> flows;
  double cost = 0.0;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double total_mass(const Measure& m) {
  double s = 0.0;
  for (auto& [node, mass] : m) s += mass;
  return s;
}

namespace detail {

// Exact transportation problem on a dense cost matrix, solved by successive
// shortest augmenting paths with node potentials (Bellman-Ford for the first
// path, Dijkstra with reduced costs after). Supplies are reals; each
// augmentation saturates a row or column, so at most r+c rounds.
class DenseTransport {
 public:
  // supply: r masses, demand: c masses, cost: r*c row-major.
  // Returns optimal plan as (i, j, mass) triples.
  static std::vector<std::tuple<int, int, double>> solve(
      std::vector<double> supply, std::vector<double> demand,
      const std::vector<double>& cost) {
    const int r = static_cast<int>(supply.size());
    const int c = static_cast<int>(demand.size());
    std::vector<double> pot_u(r, 0.0), pot_v(c, 0.0);
    std::vector<std::tuple<int, int, double>> plan;

    // Initial potentials from one Bellman-Ford-like pass so reduced costs
    // are non-negative for Dijkstra.
    for (int j = 0; j < c; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < r; ++i) best = std::min(best, cost[i * c + j]);
      pot_v[j] = best;
    }

    std::vector<std::vector<double>> flow(r, std::vector<double>(c, 0.0));
    // Rounding can leave the two sides a few ulps apart; route only what
    // both can carry so exhausted demand is not mistaken for disconnection.
    double total_s = 0.0, total_d = 0.0;
    for (double s : supply) total_s += s;
    for (double d : demand) total_d += d;
    double remaining = std::min(total_s, total_d);

    while (remaining > 1e-15) {
      // Shortest path in the residual network from any source with supply
      // to any sink with demand, over reduced costs. Nodes: rows 0..r-1,
      // cols r..r+c-1.
      const int N = r + c;
      std::vector<double> dist(N, std::numeric_limits<double>::infinity());
      std::vector<int> prev(N, -1);
      std::vector<bool> done(N, false);
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      for (int i = 0; i < r; ++i)
        if (supply[i] > 1e-15) {
          dist[i] = 0.0;
          pq.push({0.0, i});
        }
      while (!pq.empty()) {
        auto [d, x] = pq.top();
        pq.pop();
        if (done[x]) continue;
        done[x] = true;
        if (x < r) {
          for (int j = 0; j < c; ++j) {
            double rc = cost[x * c + j] - pot_u[x] - pot_v[j];
            if (rc < 0) rc = 0;  // clip tiny negatives from rounding
            if (d + rc < dist[r + j] - 1e-18) {
              dist[r + j] = d + rc;
              prev[r + j] = x;
              pq.push({dist[r + j], r + j});
            }
          }
        } else {
          int j = x - r;
          for (int i = 0; i < r; ++i) {
            if (flow[i][j] > 1e-15) {
              double rc = -(cost[i * c + j] - pot_u[i] - pot_v[j]);
              if (rc < 0) rc = 0;
              if (d + rc < dist[i] - 1e-18) {
                dist[i] = d + rc;
                prev[i] = r + j;
                pq.push({dist[i], i});
              }
            }
          }
        }
      }
      // Pick the reachable sink with unmet demand and smallest distance.
      int sink = -1;
      for (int j = 0; j < c; ++j)
        if (demand[j] > 1e-15 && dist[r + j] < std::numeric_limits<double>::infinity())
          if (sink < 0 || dist[r + j] < dist[r + sink]) sink = j;
      if (sink < 0) {
        if (remaining < 1e-12) break;  // dust left over from rounding
        throw TransportError("transport network disconnected");
      }

      // Update potentials. Reduced costs read c - pot_u - pot_v, so the
      // row side moves opposite to the column side.
      for (int i = 0; i < r; ++i)
        if (dist[i] < std::numeric_limits<double>::infinity())
          pot_u[i] -= dist[i];
      for (int j = 0; j < c; ++j)
        if (dist[r + j] < std::numeric_limits<double>::infinity())
          pot_v[j] += dist[r + j];

      // Bottleneck: sink demand, origin supply, residual backward flows.
      int origin = -1;
      for (int x = r + sink; prev[x] != -1; x = prev[x]) origin = prev[x];
      double push = std::min(demand[sink], supply[origin]);
      for (int x = r + sink; prev[x] != -1; x = prev[x]) {
        int p = prev[x];
        if (x < r) push = std::min(push, flow[x][p - r]);
      }
      // Apply.
      for (int x = r + sink; prev[x] != -1; x = prev[x]) {
        int p = prev[x];
        if (x >= r) {
          flow[p][x - r] += push;
        } else {
          flow[x][p - r] -= push;
        }
      }
      supply[origin] -= push;
      demand[sink] -= push;
      remaining -= push;
    }

    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        if (flow[i][j] > 1e-15) plan.emplace_back(i, j, flow[i][j]);
    return plan;
  }
};

}  // namespace detail

// Exact Wasserstein-1 between two measures under weighted shortest-path
// ground distance. Supports are small (at most degree + 1), so a dense
// min-cost-flow solve is exact and cheap. `hop_radius` bounds the Dijkstra
// used for ground distances; pass kInfDist to search the whole component.
inline TransportPlan wasserstein1(const Graph& g, const Measure& mu,
                                  const Measure& nu,
                                  double ground_radius = kInfDist) {
  if (std::abs(total_mass(mu) - 1.0) > 1e-9 ||
      std::abs(total_mass(nu) - 1.0) > 1e-9)
    throw TransportError("measures must have unit total mass");

  std::vector<int> src_nodes, dst_nodes;
  std::vector<double> supply, demand;
  for (auto& [node, mass] : mu)
    if (mass > 0) {
      src_nodes.push_back(node);
      supply.push_back(mass);
    }
  for (auto& [node, mass] : nu)
    if (mass > 0) {
      dst_nodes.push_back(node);
      demand.push_back(mass);
    }
  const int r = static_cast<int>(src_nodes.size());
  const int c = static_cast<int>(dst_nodes.size());

  std::vector<double> cost(static_cast<std::size_t>(r) * c);
  for (int i = 0; i < r; ++i) {
    auto dist = g.distances_from(src_nodes[i], ground_radius);
    for (int j = 0; j < c; ++j) {
      double d = dist[dst_nodes[j]];
      if (d == kInfDist)
        throw TransportError("measure supports lie in different components");
      cost[i * c + j] = d;
    }
  }

  auto raw = detail::DenseTransport::solve(supply, demand, cost);
  TransportPlan plan;
  for (auto& [i, j, mass] : raw) {
    plan.flows.push_back({src_nodes[i], dst_nodes[j], mass});
    plan.cost += mass * cost[i * c + j];
  }
  return plan;
}

}  // namespace curvgad
