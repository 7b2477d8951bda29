#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

namespace curvgad {

inline constexpr double kInfDist = std::numeric_limits<double>::infinity();

struct Edge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Undirected weighted graph. Edges stored once with u < v, no self-loops,
// no duplicates, weights strictly positive. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  Graph(int node_count, std::vector<Edge> edges) {
    n_ = node_count;
    if (n_ < 0) throw GraphError("negative node count");
    std::map<std::pair<int, int>, double> canon;
    for (auto& e : edges) {
      int a = e.u, b = e.v;
      if (a == b) throw GraphError("self-loop at node " + std::to_string(a));
      if (a < 0 || b < 0 || a >= n_ || b >= n_)
        throw GraphError("edge endpoint out of range");
      if (!(e.w > 0.0)) throw GraphError("non-positive edge weight");
      if (a > b) std::swap(a, b);
      auto [it, inserted] = canon.emplace(std::make_pair(a, b), e.w);
      if (!inserted)
        throw GraphError("duplicate edge (" + std::to_string(a) + "," +
                         std::to_string(b) + ")");
    }
    edges_.reserve(canon.size());
    for (auto& [key, w] : canon) edges_.push_back({key.first, key.second, w});
    build_adjacency();
  }

  int node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  const std::vector<std::pair<int, double>>& adjacency(int x) const {
    check_node(x);
    return adj_[x];
  }

  int degree(int x) const {
    check_node(x);
    return static_cast<int>(adj_[x].size());
  }

  std::vector<int> neighborhood(int x) const {
    check_node(x);
    std::vector<int> out;
    out.reserve(adj_[x].size());
    for (auto& [y, w] : adj_[x]) out.push_back(y);
    return out;
  }

  bool unit_weights() const { return unit_weights_; }

  double edge_weight(int u, int v) const {
    check_node(u);
    check_node(v);
    for (auto& [y, w] : adj_[u])
      if (y == v) return w;
    throw GraphError("no such edge");
  }

  // Dijkstra from source; BFS fast path when all weights are 1.
  std::vector<double> distances_from(int source) const {
    check_node(source);
    std::vector<double> dist(n_, kInfDist);
    dist[source] = 0.0;
    if (unit_weights_) {
      std::queue<int> q;
      q.push(source);
      while (!q.empty()) {
        int x = q.front();
        q.pop();
        for (auto& [y, w] : adj_[x])
          if (dist[y] == kInfDist) {
            dist[y] = dist[x] + 1.0;
            q.push(y);
          }
      }
      return dist;
    }
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, source});
    while (!pq.empty()) {
      auto [d, x] = pq.top();
      pq.pop();
      if (d > dist[x]) continue;
      for (auto& [y, w] : adj_[x]) {
        double nd = d + w;
        if (nd < dist[y]) {
          dist[y] = nd;
          pq.push({nd, y});
        }
      }
    }
    return dist;
  }

  // Dijkstra truncated to nodes within `radius` of source (used by the
  // transport solver, whose supports live within two hops of an edge).
  std::vector<double> distances_from(int source, double radius) const {
    check_node(source);
    std::vector<double> dist(n_, kInfDist);
    dist[source] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, source});
    while (!pq.empty()) {
      auto [d, x] = pq.top();
      pq.pop();
      if (d > dist[x] || d > radius) continue;
      for (auto& [y, w] : adj_[x]) {
        double nd = d + w;
        if (nd < dist[y] && nd <= radius) {
          dist[y] = nd;
          pq.push({nd, y});
        }
      }
    }
    return dist;
  }

  double shortest_path_distance(int source, int target) const {
    check_node(target);
    return distances_from(source)[target];
  }

  Graph with_weights(const std::vector<double>& weights) const {
    if (weights.size() != edges_.size())
      throw GraphError("weight vector size mismatch");
    std::vector<Edge> es = edges_;
    for (std::size_t i = 0; i < es.size(); ++i) es[i].w = weights[i];
    Graph g(n_, std::move(es));
    g.features_ = features_;
    g.labels_ = labels_;
    g.original_ids_ = original_ids_;
    return g;
  }

  const std::optional<Eigen::MatrixXd>& features() const { return features_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }
  const std::vector<std::int64_t>& original_ids() const {
    return original_ids_;
  }

  void set_features(Eigen::MatrixXd f) {
    if (f.rows() != n_) throw GraphError("feature row count mismatch");
    features_ = std::move(f);
  }

  void set_labels(std::vector<int> l) {
    if (static_cast<int>(l.size()) != n_)
      throw GraphError("label row count mismatch");
    labels_ = std::move(l);
  }

  void set_original_ids(std::vector<std::int64_t> ids) {
    original_ids_ = std::move(ids);
  }

  std::int64_t original_id(int x) const {
    return original_ids_.empty() ? x : original_ids_[x];
  }

 private:
  void build_adjacency() {
    adj_.assign(n_, {});
    unit_weights_ = true;
    for (auto& e : edges_) {
      adj_[e.u].push_back({e.v, e.w});
      adj_[e.v].push_back({e.u, e.w});
      if (e.w != 1.0) unit_weights_ = false;
    }
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
  }

  void check_node(int x) const {
    if (x < 0 || x >= n_)
      throw GraphError("node id out of range: " + std::to_string(x));
  }

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
  bool unit_weights_ = true;
  std::optional<Eigen::MatrixXd> features_;
  std::optional<std::vector<int>> labels_;
  std::vector<std::int64_t> original_ids_;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

}  // namespace detail

// Parses `u v [w]` lines, `#` comments ignored. Node ids are remapped to a
// dense 0..n-1 range (first-seen order of the sorted original id set); the
// original ids are retained on the graph for output.
inline Graph load_edge_list(std::istream& in) {
  std::vector<std::tuple<std::int64_t, std::int64_t, double>> raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2 && toks.size() != 3)
      throw GraphError("line " + std::to_string(lineno) +
                       ": expected `u v [w]`");
    std::int64_t u, v;
    double w = 1.0;
    try {
      u = std::stoll(toks[0]);
      v = std::stoll(toks[1]);
      if (toks.size() == 3) w = std::stod(toks[2]);
    } catch (const std::exception&) {
      throw GraphError("line " + std::to_string(lineno) + ": parse failure");
    }
    if (u == v)
      throw GraphError("line " + std::to_string(lineno) + ": self-loop");
    if (!(w > 0.0))
      throw GraphError("line " + std::to_string(lineno) +
                       ": non-positive weight");
    raw.emplace_back(u, v, w);
  }
  std::vector<std::int64_t> ids;
  ids.reserve(2 * raw.size());
  for (auto& [u, v, w] : raw) {
    ids.push_back(u);
    ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::map<std::int64_t, int> remap;
  for (std::size_t i = 0; i < ids.size(); ++i)
    remap[ids[i]] = static_cast<int>(i);
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (auto& [u, v, w] : raw) edges.push_back({remap[u], remap[v], w});
  Graph g(static_cast<int>(ids.size()), std::move(edges));
  g.set_original_ids(std::move(ids));
  return g;
}

inline Eigen::MatrixXd load_feature_csv(std::istream& in, bool has_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (has_header && lineno == 1) continue;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw GraphError("feature csv line " + std::to_string(lineno) +
                         ": parse failure");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw GraphError("feature csv line " + std::to_string(lineno) +
                       ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

inline std::vector<int> load_label_csv(std::istream& in) {
  std::vector<int> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    int v;
    try {
      v = std::stoi(line);
    } catch (const std::exception&) {
      throw GraphError("label csv line " + std::to_string(lineno) +
                       ": parse failure");
    }
    if (v != 0 && v != 1)
      throw GraphError("label csv line " + std::to_string(lineno) +
                       ": expected 0 or 1");
    labels.push_back(v);
  }
  return labels;
}

inline Graph load_graph(const std::string& edge_list_path,
                        const std::string& feature_path = "",
                        const std::string& label_path = "",
                        bool feature_header = false) {
  std::ifstream in(edge_list_path);
  if (!in) throw GraphError("cannot open " + edge_list_path);
  Graph g = load_edge_list(in);
  if (!feature_path.empty()) {
    std::ifstream fin(feature_path);
    if (!fin) throw GraphError("cannot open " + feature_path);
    g.set_features(load_feature_csv(fin, feature_header));
  }
  if (!label_path.empty()) {
    std::ifstream lin(label_path);
    if (!lin) throw GraphError("cannot open " + label_path);
    g.set_labels(load_label_csv(lin));
  }
  return g;
}

// Round-trippable doubles: 17 significant digits.
inline std::string format_double(double x) {
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  return ss.str();
}

inline void save_edge_list(const Graph& g, std::ostream& out) {
  for (auto& e : g.edges()) {
    out << g.original_id(e.u) << ' ' << g.original_id(e.v);
    if (!g.unit_weights()) out << ' ' << format_double(e.w);
    out << '\n';
  }
}

}  // namespace curvgad
