#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "curvgad/graph.hpp"

using namespace curvgad;

TEST_CASE("graph canonicalizes edges") {
  Graph g(4, {{2, 0, 1.0}, {1, 3, 2.0}, {0, 1, 1.0}});
  REQUIRE(g.node_count() == 4);
  REQUIRE(g.edge_count() == 3);
  for (auto& e : g.edges()) REQUIRE(e.u < e.v);
  REQUIRE(g.edge_weight(3, 1) == 2.0);
  REQUIRE_FALSE(g.unit_weights());
}

TEST_CASE("graph rejects malformed input") {
  REQUIRE_THROWS_AS(Graph(3, {{0, 0, 1.0}}), GraphError);
  REQUIRE_THROWS_AS(Graph(3, {{0, 5, 1.0}}), GraphError);
  REQUIRE_THROWS_AS(Graph(3, {{0, 1, 0.0}}), GraphError);
  REQUIRE_THROWS_AS(Graph(3, {{0, 1, -2.0}}), GraphError);
  REQUIRE_THROWS_AS(Graph(3, {{0, 1, 1.0}, {1, 0, 1.0}}), GraphError);
}

TEST_CASE("adjacency is sorted and degree consistent") {
  Graph g(5, {{0, 4, 1.0}, {0, 2, 1.0}, {0, 1, 1.0}});
  auto nbrs = g.neighborhood(0);
  REQUIRE(nbrs == std::vector<int>{1, 2, 4});
  REQUIRE(g.degree(0) == 3);
  REQUIRE(g.degree(3) == 0);
}

TEST_CASE("distances: BFS fast path matches Dijkstra") {
  // Weighted copy with all weights 1 must agree with the unit-weight BFS.
  std::vector<Edge> edges = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0},
                             {0, 4, 1.0}, {4, 3, 1.0}};
  Graph unit(5, edges);
  edges[0].w = 1.0 + 1e-14;  // force the Dijkstra branch
  Graph weighted(5, edges);
  auto du = unit.distances_from(0);
  auto dw = weighted.distances_from(0);
  for (int i = 0; i < 5; ++i) REQUIRE(du[i] == Catch::Approx(dw[i]));
  REQUIRE(du[3] == 2.0);
}

TEST_CASE("weighted shortest path can undercut a direct edge") {
  Graph g(3, {{0, 1, 5.0}, {0, 2, 1.0}, {2, 1, 1.0}});
  REQUIRE(g.shortest_path_distance(0, 1) == Catch::Approx(2.0));
}

TEST_CASE("truncated distances stop at the radius") {
  Graph g(5, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}});
  auto d = g.distances_from(0, 2.0);
  REQUIRE(d[2] == 2.0);
  REQUIRE(d[3] == kInfDist);
}

TEST_CASE("edge list parsing remaps sparse ids and keeps originals") {
  std::istringstream in(
      "# comment line\n"
      "10 30\n"
      "30 700 2.5  # trailing comment\n"
      "\n"
      "10 700\n");
  Graph g = load_edge_list(in);
  REQUIRE(g.node_count() == 3);
  REQUIRE(g.edge_count() == 3);
  REQUIRE(g.original_id(0) == 10);
  REQUIRE(g.original_id(2) == 700);
  REQUIRE(g.edge_weight(1, 2) == 2.5);
}

TEST_CASE("edge list parse errors carry line numbers") {
  auto expect_throw = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      load_edge_list(in);
      FAIL("expected GraphError");
    } catch (const GraphError& e) {
      REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_throw("0 1\nbogus\n", "line 2");
  expect_throw("0 1\n2 2\n", "self-loop");
  expect_throw("0 1 -3\n", "non-positive");
  expect_throw("0 1 2 3\n", "expected");
}

TEST_CASE("edge list save/load round trip") {
  Graph g(3, {{0, 1, 0.125}, {1, 2, 3.0}});
  std::ostringstream out;
  save_edge_list(g, out);
  std::istringstream in(out.str());
  Graph h = load_edge_list(in);
  REQUIRE(h.edge_count() == g.edge_count());
  REQUIRE(h.edge_weight(0, 1) == 0.125);
  REQUIRE(h.edge_weight(1, 2) == 3.0);
}

TEST_CASE("feature and label csv loaders") {
  std::istringstream f("1.0,2.0\n3.0,4.0\n");
  auto m = load_feature_csv(f, false);
  REQUIRE(m.rows() == 2);
  REQUIRE(m(1, 0) == 3.0);

  std::istringstream ragged("1.0,2.0\n3.0\n");
  REQUIRE_THROWS_AS(load_feature_csv(ragged, false), GraphError);

  std::istringstream l("0\n1\n0\n");
  auto labels = load_label_csv(l);
  REQUIRE(labels == std::vector<int>{0, 1, 0});
  std::istringstream bad("2\n");
  REQUIRE_THROWS_AS(load_label_csv(bad), GraphError);
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-17, 123456.789012345678}) {
    REQUIRE(std::stod(format_double(x)) == x);
  }
}
