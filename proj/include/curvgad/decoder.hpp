#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "curvgad/manifold.hpp"

namespace curvgad {

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Attribute decoder: one-hidden-layer MLP, tanh hidden, linear output.
struct AttributeMlp {
  Mat w1;  // d_in x hidden
  Vec b1;
  Mat w2;  // hidden x d_X
  Vec b2;

  Vec apply(const Vec& z) const {
    if (z.size() != w1.rows())
      throw std::invalid_argument("attribute decoder input dim mismatch");
    Vec h = ((w1.transpose() * z + b1).array().tanh()).matrix();
    return w2.transpose() * h + b2;
  }

  Mat apply_rows(const Mat& Z) const {
    Mat H = Z * w1;
    H.rowwise() += b1.transpose();
    H = H.array().tanh().matrix();
    Mat out = H * w2;
    out.rowwise() += b2.transpose();
    return out;
  }
};

struct DecoderParams {
  double gamma = 1.0;    // fixed kernel width
  double log_tau = 0.0;  // tau = exp(log_tau) keeps the sensitivity positive
  AttributeMlp attr_mlp;
  // Optional affine classification head on concatenated tangent embeddings.
  Vec classifier_w;
  double classifier_b = 0.0;
  bool has_classifier = false;

  double tau() const { return std::exp(log_tau); }
};

// Gaussian-kernel curvature decoder on the product-manifold distance:
// C = 2*sigmoid(1 - exp(-gamma D^2 / tau^2)) - 1. Range [0, 2*sigmoid(1)-1),
// strictly increasing in D; it cannot represent negative curvature, which
// shows up as irreducible residual on negatively curved edges.
inline double decode_curvature_from_distance(double dist, double gamma,
                                             double tau) {
  double kernel = std::exp(-gamma * dist * dist / (tau * tau));
  return 2.0 * sigmoid(1.0 - kernel) - 1.0;
}

inline double decode_curvature(const Vec& nx, const Vec& ny,
                               const ProductManifold& pm,
                               const DecoderParams& params) {
  if (!(params.gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  double d = product_distance(nx, ny, pm);
  return decode_curvature_from_distance(d, params.gamma, params.tau());
}

inline double decode_adjacency(const Vec& nx, const Vec& ny) {
  if (nx.size() != ny.size())
    throw std::invalid_argument("latent dimension mismatch");
  return sigmoid(nx.dot(ny));
}

inline Vec decode_attributes(const Vec& nx, const DecoderParams& params) {
  return params.attr_mlp.apply(nx);
}

}  // namespace curvgad
