#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "curvgad/encoder.hpp"
#include "curvgad/laplacian.hpp"
#include "oracles.hpp"

using namespace curvgad;

namespace {
Graph triangle() { return Graph(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}}); }
}  // namespace

TEST_CASE("normalized laplacian falls back when triangles are missing") {
  Graph path(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  auto lb = build_laplace_beltrami(path);
  REQUIRE(lb.source == LaplacianSource::graph_fallback);
  Eigen::MatrixXd L(lb.matrix);
  REQUIRE(L(0, 0) == Catch::Approx(1.0));
  REQUIRE(L(0, 1) == Catch::Approx(-1.0 / std::sqrt(2.0)));
  REQUIRE(L(0, 2) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("cotangent assembly on the equilateral triangle") {
  Graph k3 = triangle();
  // Unit-side equilateral embedding in a Euclidean product manifold.
  ProductManifold pm = ProductManifold::euclidean(2);
  Mat emb(3, 2);
  emb << 0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;
  auto lb = build_laplace_beltrami(k3, emb, &pm);
  REQUIRE(lb.source == LaplacianSource::cotangent);

  // Before mass scaling every off-diagonal stiffness is -1/sqrt(3); the
  // vertex masses are area/3 each, so the symmetrized entry is
  // (-1/sqrt(3)) / (area/3) with area = sqrt(3)/4.
  double area_third = (std::sqrt(3.0) / 4.0) / 3.0;
  double expected = (-1.0 / std::sqrt(3.0)) / area_third;
  Eigen::MatrixXd L(lb.matrix);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      REQUIRE(L(i, j) == Catch::Approx(expected).margin(1e-9));
    }
  REQUIRE((L - L.transpose()).norm() < 1e-12);
}

TEST_CASE("laplacians are positive semidefinite by the dense eigensolver") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = oracle::random_er_graph(15, 0.4, rng);
    auto lb = build_laplace_beltrami(g);
    auto evals = oracle::dense_spectrum(lb.matrix);
    REQUIRE(evals.minCoeff() > -1e-9);
    REQUIRE(evals.maxCoeff() <= 2.0 + 1e-9);  // normalized laplacian bound
  }
}

TEST_CASE("spectral radius estimate brackets the dense eigensolver value") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = oracle::random_er_graph(20, 0.3, rng);
    auto lb = build_laplace_beltrami(g);
    double dense_max = oracle::dense_spectrum(lb.matrix).maxCoeff();
    // Estimate must dominate (rescaling needs spectrum inside [-1,1]) and
    // stay within the Gershgorin factor of the truth.
    REQUIRE(lb.lambda_max_estimate >= dense_max - 1e-6);
    REQUIRE(lb.lambda_max_estimate <= 2.0 * dense_max + 1e-6);
  }
}

TEST_CASE("rescaled operator spectrum lies in [-1, 1]") {
  std::mt19937_64 rng(13);
  Graph g = oracle::random_er_graph(18, 0.35, rng);
  auto lb = build_laplace_beltrami(g);
  SpMat Lt = rescale_operator(lb);
  auto evals = oracle::dense_spectrum(Lt);
  REQUIRE(evals.minCoeff() >= -1.0 - 1e-9);
  REQUIRE(evals.maxCoeff() <= 1.0 + 1e-9);
}

TEST_CASE("euclidean filter output matches the dense chebyshev oracle") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 8 + static_cast<int>(rng() % 13);
    Graph g = oracle::random_er_graph(n, 0.4, rng);
    SpMat Lt = rescale_operator(build_laplace_beltrami(g));
    int F = 1 + static_cast<int>(rng() % 5);

    Mat H(n, 3);
    for (Eigen::Index i = 0; i < H.size(); ++i) H(i) = gauss(rng);

    auto Z = cheb_orders(Lt, H, 0.0, F);
    for (int f = 0; f <= F; ++f) {
      Mat expected = oracle::cheb_dense(Lt, H, f);
      double rel = (Z[f] - expected).norm() / std::max(1e-30, expected.norm());
      INFO("trial " << trial << " order " << f);
      REQUIRE(rel < 1e-8);
    }
  }
}

TEST_CASE("one-hot identity attention returns the feature map exactly") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Graph g = oracle::random_er_graph(10, 0.4, rng);
  SpMat Lt = rescale_operator(build_laplace_beltrami(g));

  ProductManifold pm = ProductManifold::euclidean(4);
  EncoderParams p;
  p.filter_order = 2;
  p.feature_weights = Mat(3, 4);
  for (Eigen::Index i = 0; i < p.feature_weights.size(); ++i)
    p.feature_weights(i) = gauss(rng);
  p.feature_bias = Vec::Zero(4);
  // N^I with phi_0 = 1 reproduces Z^(0) = f_theta(X) on the identity
  // operator; extreme logits make the softmax exactly one-hot in floats.
  p.cheb_weights = Mat::Zero(1, 3);
  p.cheb_weights(0, 0) = 1.0;
  p.filter_attention = Vec::Constant(4, -1000.0);
  p.filter_attention[0] = 1000.0;
  p.manifold_attention = Vec::Zero(1);

  Mat X(10, 3);
  for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = gauss(rng);
  Mat out = filter_bank(Lt, X, p, pm);
  Mat expected = feature_map(X, p);
  REQUIRE((out - expected).norm() < 1e-12);
}

TEST_CASE("curved filter bank stays on manifold and is finite") {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> gauss(0.0, 0.2);
  Graph g = oracle::random_er_graph(12, 0.4, rng);
  SpMat Lt = rescale_operator(build_laplace_beltrami(g));

  ProductManifold pm{{{ManifoldKind::hyperbolic, -1.0, 3},
                      {ManifoldKind::spherical, 0.8, 2},
                      {ManifoldKind::euclidean, 0.0, 2}}};
  EncoderParams p;
  p.filter_order = 3;
  p.feature_weights = Mat(4, pm.total_dim());
  for (Eigen::Index i = 0; i < p.feature_weights.size(); ++i)
    p.feature_weights(i) = gauss(rng);
  p.feature_bias = Vec::Zero(pm.total_dim());
  p.cheb_weights = Mat::Ones(3, 4);
  p.filter_attention = Vec::Zero(5);
  p.manifold_attention = Vec::Zero(3);

  Mat X(12, 4);
  for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = gauss(rng);
  Mat out = filter_bank(Lt, X, p, pm);
  REQUIRE(out.allFinite());
  for (int i = 0; i < 12; ++i) REQUIRE(on_manifold(out.row(i), pm));
}

TEST_CASE("encoder parameter validation") {
  ProductManifold pm = ProductManifold::euclidean(4);
  EncoderParams p;
  p.filter_order = 2;
  p.feature_weights = Mat::Zero(3, 5);  // wrong cols
  p.feature_bias = Vec::Zero(4);
  p.cheb_weights = Mat::Zero(1, 3);
  p.filter_attention = Vec::Zero(4);
  p.manifold_attention = Vec::Zero(1);
  REQUIRE_THROWS_AS(p.validate(pm, 3), std::invalid_argument);
}
