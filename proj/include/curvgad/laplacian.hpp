#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "curvgad/graph.hpp"
#include "curvgad/log.hpp"
#include "curvgad/manifold.hpp"

namespace curvgad {

using SpMat = Eigen::SparseMatrix<double>;

enum class LaplacianSource { cotangent, graph_fallback };

struct LaplaceBeltrami {
  SpMat matrix;
  double lambda_max_estimate = 0.0;
  LaplacianSource source = LaplacianSource::graph_fallback;
};

namespace detail {

// Symmetric normalized graph Laplacian I - D^{-1/2} A D^{-1/2}.
inline SpMat normalized_laplacian(const Graph& g) {
  const int n = g.node_count();
  Eigen::VectorXd deg = Eigen::VectorXd::Zero(n);
  for (auto& e : g.edges()) {
    deg[e.u] += e.w;
    deg[e.v] += e.w;
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * g.edge_count() + n);
  for (int i = 0; i < n; ++i)
    if (deg[i] > 0.0) trips.emplace_back(i, i, 1.0);
  for (auto& e : g.edges()) {
    double v = -e.w / std::sqrt(deg[e.u] * deg[e.v]);
    trips.emplace_back(e.u, e.v, v);
    trips.emplace_back(e.v, e.u, v);
  }
  SpMat L(n, n);
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

inline bool every_edge_in_triangle(const Graph& g) {
  if (g.edge_count() == 0) return false;
  for (auto& e : g.edges()) {
    const auto& au = g.adjacency(e.u);
    const auto& av = g.adjacency(e.v);
    std::size_t i = 0, j = 0;
    bool found = false;
    while (i < au.size() && j < av.size()) {
      if (au[i].first < av[j].first) {
        ++i;
      } else if (au[i].first > av[j].first) {
        ++j;
      } else {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace detail

// Cotangent discretization over geodesic triangle geometry when embeddings
// are available and every edge closes a triangle; otherwise the normalized
// graph Laplacian. Cotangent stiffness is symmetrized with the inverse
// square root of the vertex mass matrix (one third of incident triangle
// area per vertex).
inline LaplaceBeltrami build_laplace_beltrami(
    const Graph& g, const std::optional<Mat>& embeddings = std::nullopt,
    const ProductManifold* pm = nullptr) {
  const int n = g.node_count();
  LaplaceBeltrami out;

  bool cotangent_ok = embeddings.has_value() && pm != nullptr &&
                      detail::every_edge_in_triangle(g);
  if (!cotangent_ok) {
    out.matrix = detail::normalized_laplacian(g);
    out.source = LaplacianSource::graph_fallback;
  } else {
    const Mat& emb = *embeddings;
    Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd area = Eigen::VectorXd::Zero(n);
    int degenerate = 0;
    for (auto& e : g.edges()) {
      int i = e.u, j = e.v;
      const auto& ai = g.adjacency(i);
      const auto& aj = g.adjacency(j);
      std::size_t a = 0, b = 0;
      while (a < ai.size() && b < aj.size()) {
        if (ai[a].first < aj[b].first) {
          ++a;
        } else if (ai[a].first > aj[b].first) {
          ++b;
        } else {
          int k = ai[a].first;
          ++a;
          ++b;
          if (k < j) continue;  // visit each triangle (i<j<k) once
          // Geodesic side lengths; law of cosines per corner angle.
          double dij = product_distance(emb.row(i), emb.row(j), *pm);
          double dik = product_distance(emb.row(i), emb.row(k), *pm);
          double djk = product_distance(emb.row(j), emb.row(k), *pm);
          auto cot_opposite = [&](double opp, double s1, double s2) {
            double cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
            cosv = std::clamp(cosv, -1.0, 1.0);
            double sinv = std::sqrt(1.0 - cosv * cosv);
            return sinv < 1e-12 ? kInfDist : cosv / sinv;
          };
          double cot_k = cot_opposite(dij, dik, djk);  // angle at k, opp (i,j)
          double cot_j = cot_opposite(dik, dij, djk);  // angle at j, opp (i,k)
          double cot_i = cot_opposite(djk, dij, dik);  // angle at i, opp (j,k)
          if (cot_k == kInfDist || cot_j == kInfDist || cot_i == kInfDist) {
            ++degenerate;
            continue;
          }
          // Heron area on the side lengths.
          double s = 0.5 * (dij + dik + djk);
          double heron =
              std::sqrt(std::max(0.0, s * (s - dij) * (s - dik) * (s - djk)));
          // Each triangle faces the edge from both sides, so the paper's
          // (cot theta + cot phi)/2 collapses to one cotangent per
          // triangle. Global scale is immaterial after rescaling.
          stiff(i, j) += -cot_k;
          stiff(j, i) += -cot_k;
          stiff(i, k) += -cot_j;
          stiff(k, i) += -cot_j;
          stiff(j, k) += -cot_i;
          stiff(k, j) += -cot_i;
          double third = heron / 3.0;
          area[i] += third;
          area[j] += third;
          area[k] += third;
        }
      }
    }
    if (degenerate > 0)
      log_warn(std::to_string(degenerate) +
               " degenerate triangle(s) skipped in cotangent assembly");
    for (int i = 0; i < n; ++i) stiff(i, i) = -stiff.row(i).sum();
    Eigen::VectorXd mass_inv_sqrt(n);
    for (int i = 0; i < n; ++i)
      mass_inv_sqrt[i] = area[i] > 1e-12 ? 1.0 / std::sqrt(area[i]) : 1.0;
    Eigen::MatrixXd sym = mass_inv_sqrt.asDiagonal() * stiff *
                          mass_inv_sqrt.asDiagonal();
    sym = 0.5 * (sym + sym.transpose());  // kill rounding asymmetry
    out.matrix = sym.sparseView(1e-14);
    out.source = LaplacianSource::cotangent;
  }

  // Power iteration for the spectral radius; Gershgorin as fallback.
  const SpMat& L = out.matrix;
  double gersh = 0.0;
  for (int k = 0; k < L.outerSize(); ++k) {
    double diag = 0.0, offsum = 0.0;
    for (SpMat::InnerIterator it(L, k); it; ++it) {
      if (it.row() == it.col())
        diag = it.value();
      else
        offsum += std::abs(it.value());
    }
    gersh = std::max(gersh, diag + offsum);
  }
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  if (n > 0) v.normalize();
  double lambda = gersh;
  bool converged = false;
  double prev = 0.0;
  for (int it = 0; it < 300 && n > 0; ++it) {
    Eigen::VectorXd w = L * v;
    double norm = w.norm();
    if (norm < 1e-14) break;
    v = w / norm;
    lambda = v.dot(L * v);
    if (it > 0 && std::abs(lambda - prev) < 1e-10) {
      converged = true;
      break;
    }
    prev = lambda;
  }
  // Power iteration approaches the spectral radius from below; pad so the
  // rescaled spectrum stays inside [-1, 1].
  out.lambda_max_estimate = converged ? lambda * (1.0 + 1e-6) : gersh;
  if (out.lambda_max_estimate <= 0.0) out.lambda_max_estimate = gersh;
  return out;
}

// L_tilde = 2L/lambda_max - I, spectrum mapped into [-1, 1].
inline SpMat rescale_operator(const LaplaceBeltrami& lb) {
  if (!(lb.lambda_max_estimate > 0.0))
    throw std::invalid_argument("operator has no positive spectral estimate");
  const int n = lb.matrix.rows();
  SpMat I(n, n);
  I.setIdentity();
  SpMat out = (2.0 / lb.lambda_max_estimate) * lb.matrix - I;
  return out;
}

}  // namespace curvgad
