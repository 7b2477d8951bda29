#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvgad/curvature.hpp"
#include "curvgad/graph.hpp"
#include "curvgad/karate.hpp"

namespace curvgad {

enum class BaseGraph { erdos_renyi, barabasi_albert, karate_club, grid, tree };

enum class AnomalyKind { structural, attribute, geometric };

struct InjectionSpec {
  double anomaly_fraction = 0.05;
  std::vector<AnomalyKind> kinds = {AnomalyKind::structural,
                                    AnomalyKind::attribute,
                                    AnomalyKind::geometric};
  // Share of anomalies per kind, parallel to `kinds`; empty = uniform.
  std::vector<double> kind_weights;
  std::uint64_t seed = 0;
  BaseGraph base_graph = BaseGraph::barabasi_albert;
  int feature_dim = 8;
  int ba_attachment = 3;
  double er_probability = 0.05;

  void validate() const {
    if (!(anomaly_fraction > 0.0 && anomaly_fraction < 0.5))
      throw std::invalid_argument("anomaly_fraction must lie in (0, 0.5)");
    if (kinds.empty()) throw std::invalid_argument("kinds must be non-empty");
    if (!kind_weights.empty()) {
      if (kind_weights.size() != kinds.size())
        throw std::invalid_argument("kind_weights must match kinds");
      for (double w : kind_weights)
        if (!(w > 0.0))
          throw std::invalid_argument("kind_weights must be positive");
    }
  }
};

namespace synth_detail {

inline Graph erdos_renyi(int n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) < p) edges.push_back({i, j, 1.0});
  return Graph(n, std::move(edges));
}

inline Graph barabasi_albert(int n, int m, std::mt19937_64& rng) {
  if (n <= m) throw std::invalid_argument("barabasi_albert needs n > m");
  std::vector<Edge> edges;
  std::vector<int> targets;  // repeated node list, degree-proportional draws
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      edges.push_back({i, j, 1.0});
      targets.push_back(i);
      targets.push_back(j);
    }
  for (int v = m; v < n; ++v) {
    std::set<int> chosen;
    while (static_cast<int>(chosen.size()) < m) {
      std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);
      chosen.insert(targets[pick(rng)]);
    }
    for (int t : chosen) {
      edges.push_back({std::min(v, t), std::max(v, t), 1.0});
      targets.push_back(v);
      targets.push_back(t);
    }
  }
  return Graph(n, std::move(edges));
}

inline Graph grid(int n) {
  int side = static_cast<int>(std::round(std::sqrt(static_cast<double>(n))));
  side = std::max(side, 2);
  int total = side * side;
  std::vector<Edge> edges;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      int id = r * side + c;
      if (c + 1 < side) edges.push_back({id, id + 1, 1.0});
      if (r + 1 < side) edges.push_back({id, id + side, 1.0});
    }
  return Graph(total, std::move(edges));
}

inline Graph random_tree(int n, std::mt19937_64& rng) {
  std::vector<Edge> edges;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    int p = pick(rng);
    edges.push_back({p, v, 1.0});
  }
  return Graph(n, std::move(edges));
}

inline double mean_incident_orc(const Graph& g, int v) {
  double sum = 0.0;
  int count = 0;
  for (int u : g.neighborhood(v)) {
    sum += orc_approx(g, v, u);
    ++count;
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace synth_detail

inline Graph make_base_graph(const InjectionSpec& spec, int n,
                             std::mt19937_64& rng) {
  switch (spec.base_graph) {
    case BaseGraph::erdos_renyi:
      return synth_detail::erdos_renyi(n, spec.er_probability, rng);
    case BaseGraph::barabasi_albert:
      return synth_detail::barabasi_albert(n, spec.ba_attachment, rng);
    case BaseGraph::karate_club:
      return karate_club();
    case BaseGraph::grid:
      return synth_detail::grid(n);
    case BaseGraph::tree:
      return synth_detail::random_tree(n, rng);
  }
  throw std::logic_error("unknown base graph");
}

// Base graph with Gaussian features plus labeled injected anomalies:
// structural nodes are wired into cliques, attribute nodes get features
// redrawn far from the pooled distribution, geometric nodes are rewired
// until the curvature engine confirms their incident ORC sign flipped.
inline Graph generate(const InjectionSpec& spec, int n) {
  spec.validate();
  if (n < 20) throw std::invalid_argument("need n >= 20");
  std::mt19937_64 rng(spec.seed);
  Graph base = make_base_graph(spec, n, rng);
  n = base.node_count();

  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd features(n, spec.feature_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < spec.feature_dim; ++j) features(i, j) = gauss(rng);

  int n_anom = std::max(1, static_cast<int>(spec.anomaly_fraction * n));

  // Per-kind counts by largest remainder over the (possibly uniform) weights.
  const std::size_t nk = spec.kinds.size();
  std::vector<double> weights = spec.kind_weights;
  if (weights.empty()) weights.assign(nk, 1.0);
  double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> count(nk, 0);
  std::vector<std::pair<double, std::size_t>> frac;
  int assigned = 0;
  for (std::size_t k = 0; k < nk; ++k) {
    double share = n_anom * weights[k] / wsum;
    count[k] = static_cast<int>(share);
    assigned += count[k];
    frac.push_back({share - count[k], k});
  }
  std::sort(frac.begin(), frac.end(), [](auto& a, auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; assigned < n_anom; ++i, ++assigned) ++count[frac[i].second];

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> per_kind(nk);
  std::size_t oi = 0;
  for (std::size_t k = 0; k < nk; ++k)
    for (int c = 0; c < count[k]; ++c) per_kind[k].push_back(order[oi++]);

  std::vector<int> labels(n, 0);
  for (auto& group : per_kind)
    for (int v : group) labels[v] = 1;

  std::set<std::pair<int, int>> edge_set;
  for (auto& e : base.edges()) edge_set.insert({e.u, e.v});
  auto has_edge = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    return edge_set.count({a, b}) > 0;
  };

  std::vector<int> geometric_nodes;
  for (std::size_t k = 0; k < spec.kinds.size(); ++k) {
    const auto& group = per_kind[k];
    switch (spec.kinds[k]) {
      case AnomalyKind::structural: {
        // Dense clique wiring in blocks of up to 10.
        constexpr int kCliqueSize = 10;
        for (std::size_t start = 0; start < group.size();
             start += kCliqueSize) {
          std::size_t end = std::min(group.size(), start + kCliqueSize);
          for (std::size_t a = start; a < end; ++a)
            for (std::size_t b = a + 1; b < end; ++b) {
              int u = group[a], v = group[b];
              if (u > v) std::swap(u, v);
              edge_set.insert({u, v});
            }
        }
        break;
      }
      case AnomalyKind::attribute: {
        // Redraw from a distribution shifted by 3 pooled stds per coord.
        double pooled_var = 0.0;
        for (int j = 0; j < spec.feature_dim; ++j) {
          double mean = features.col(j).mean();
          pooled_var +=
              (features.col(j).array() - mean).square().sum() / (n - 1);
        }
        double pooled_std = std::sqrt(pooled_var / spec.feature_dim);
        std::uniform_int_distribution<int> coin(0, 1);
        for (int v : group) {
          for (int j = 0; j < spec.feature_dim; ++j) {
            double sign = coin(rng) ? 1.0 : -1.0;
            features(v, j) = sign * 3.0 * pooled_std + gauss(rng);
          }
        }
        break;
      }
      case AnomalyKind::geometric:
        geometric_nodes = group;
        break;
    }
  }

  // Geometric rewiring happens on the structurally final graph so the
  // post-hoc curvature verification stays valid.
  std::vector<Edge> edges;
  for (auto& [u, v] : edge_set) edges.push_back({u, v, 1.0});
  Graph g(n, std::move(edges));

  auto key = [](int a, int b) {
    return std::make_pair(std::min(a, b), std::max(a, b));
  };
  std::uniform_int_distribution<int> pick(0, n - 1);

  // Negatively curved nodes flip by welding: every such geometric node is
  // detached from its neighborhood and wired into one shared clique, whose
  // triangle density pushes each incident edge strongly positive. Positively
  // curved nodes (hubs on clustered bases) flip the other way, via
  // triangle-free bridges.
  std::vector<int> weld, bridge;
  for (int v : geometric_nodes)
    (synth_detail::mean_incident_orc(g, v) < 0.0 ? weld : bridge).push_back(v);

  if (!weld.empty()) {
    constexpr int kWeldSize = 8;  // pad small groups with scaffold nodes
    std::vector<double> before(weld.size());
    for (std::size_t i = 0; i < weld.size(); ++i)
      before[i] = synth_detail::mean_incident_orc(g, weld[i]);
    bool done = false;
    for (int attempt = 0; attempt < 100 && !done; ++attempt) {
      std::vector<int> members = weld;
      for (int tries = 0;
           tries < 400 && static_cast<int>(members.size()) < kWeldSize;
           ++tries) {
        int t = pick(rng);
        if (labels[t] || g.degree(t) > 6) continue;
        if (std::find(members.begin(), members.end(), t) != members.end())
          continue;
        members.push_back(t);
      }
      if (static_cast<int>(members.size()) < std::min(kWeldSize, n / 2))
        continue;
      std::set<std::pair<int, int>> es;
      std::vector<int> deg(n, 0);
      for (auto& e : g.edges()) {
        es.insert({e.u, e.v});
        ++deg[e.u];
        ++deg[e.v];
      }
      // Detach the anomalous members, but never strand a neighbor.
      for (int v : weld)
        for (int u : g.neighborhood(v))
          if (deg[u] > 1 && es.erase(key(u, v))) {
            --deg[u];
            --deg[v];
          }
      for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
          es.insert(key(members[a], members[b]));
      std::vector<Edge> ne;
      ne.reserve(es.size());
      for (auto& [a, b] : es) ne.push_back({a, b, 1.0});
      Graph cand(n, std::move(ne));
      bool ok = true;
      for (std::size_t i = 0; i < weld.size() && ok; ++i) {
        double after = synth_detail::mean_incident_orc(cand, weld[i]);
        ok = after > 0.0 && std::abs(after - before[i]) > 0.1;
      }
      if (ok) {
        g = std::move(cand);
        done = true;
      }
    }
    if (!done)
      throw GraphError("geometric weld failed to flip curvature sign");
  }

  for (int v : bridge) {
    double base_mean = synth_detail::mean_incident_orc(g, v);
    bool done = false;
    for (int attempt = 0; attempt < 100 && !done; ++attempt) {
      std::set<std::pair<int, int>> es;
      for (auto& e : g.edges()) es.insert({e.u, e.v});
      // Replace v's edges with triangle-free bridges to high-degree nodes,
      // the most negatively curved wiring a rewiring can produce.
      auto nbrs = g.neighborhood(v);
      if (nbrs.empty()) break;
      for (int u : nbrs) es.erase(key(u, v));
      std::vector<int> targets;
      const int want = 10;
      int min_deg = attempt < 50 ? 6 : 3;  // relax on small graphs
      for (int tries = 0;
           tries < 600 && static_cast<int>(targets.size()) < want; ++tries) {
        int t = pick(rng);
        if (t == v || g.degree(t) < min_deg) continue;
        bool ok = true;
        for (int u : targets)
          if (u == t || es.count(key(u, t))) ok = false;  // no triangles
        if (!ok) continue;
        targets.push_back(t);
      }
      if (targets.size() < 3) continue;
      for (int t : targets) es.insert(key(t, v));
      std::vector<Edge> ne;
      ne.reserve(es.size());
      for (auto& [a, b] : es) ne.push_back({a, b, 1.0});
      Graph cand(n, std::move(ne));
      if (cand.degree(v) == 0) continue;
      double cand_mean = synth_detail::mean_incident_orc(cand, v);
      if (cand_mean < 0.0 && std::abs(cand_mean - base_mean) > 0.1) {
        g = std::move(cand);
        done = true;
      }
    }
    if (!done)
      throw GraphError("geometric rewiring failed after 100 attempts at node " +
                       std::to_string(v));
  }

  g.set_features(std::move(features));
  g.set_labels(std::move(labels));
  return g;
}

}  // namespace curvgad
