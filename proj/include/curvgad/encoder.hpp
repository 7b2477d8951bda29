#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "curvgad/laplacian.hpp"
#include "curvgad/manifold.hpp"

namespace curvgad {

// Parameters of one filter-bank encoder instance. phi are per-component,
// per-order scalars; alpha/beta are attention logits passed through a
// softmax before use.
struct EncoderParams {
  Mat feature_weights;  // d_X x d_P
  Vec feature_bias;     // d_P
  Mat cheb_weights;     // P x (F+1), phi_f per component
  Vec filter_attention;   // F+2 logits: [N^I, N^(0), ..., N^(F)]
  Vec manifold_attention;  // P logits
  int filter_order = 2;   // F

  void validate(const ProductManifold& pm, int d_x) const {
    const int p = static_cast<int>(pm.components.size());
    if (feature_weights.rows() != d_x ||
        feature_weights.cols() != pm.total_dim())
      throw std::invalid_argument("feature map shape mismatch");
    if (feature_bias.size() != pm.total_dim())
      throw std::invalid_argument("feature bias shape mismatch");
    if (cheb_weights.rows() != p || cheb_weights.cols() != filter_order + 1)
      throw std::invalid_argument("cheb weight shape mismatch");
    if (filter_attention.size() != filter_order + 2)
      throw std::invalid_argument("filter attention size mismatch");
    if (manifold_attention.size() != p)
      throw std::invalid_argument("manifold attention size mismatch");
  }
};

inline Vec softmax(const Vec& logits) {
  Vec z = logits.array() - logits.maxCoeff();
  Vec e = z.array().exp();
  return e / e.sum();
}

// f_theta: single affine layer + tanh, d_X -> d_P.
inline Mat feature_map(const Mat& X, const EncoderParams& params) {
  Mat H = X * params.feature_weights;
  H.rowwise() += params.feature_bias.transpose();
  return H.array().tanh().matrix();
}

// Chebyshev orders Z^(0..F) on one component: Z0 = exp_0(H), Z1 = L ⊠ Z0,
// Zf = (2 ⊗ L ⊠ Z^{f-1}) ⊖ Z^{f-2}. The Euclidean branch is the classical
// recurrence T_f(L)·H.
inline std::vector<Mat> cheb_orders(const SpMat& L_tilde, const Mat& H,
                                    double kappa, int order) {
  std::vector<Mat> Z;
  Z.reserve(order + 1);
  if (kappa == 0.0) {
    Z.push_back(H);
    if (order >= 1) Z.push_back(L_tilde * H);
    for (int f = 2; f <= order; ++f)
      Z.push_back(2.0 * (L_tilde * Z[f - 1]) - Z[f - 2]);
    return Z;
  }
  Mat X0(H.rows(), H.cols());
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    X0.row(i) =
        stereo::exp_map_zero(H.row(i).transpose(), kappa).transpose();
  Z.push_back(X0);
  if (order >= 1) Z.push_back(stereo::left_matmul(Mat(L_tilde), X0, kappa));
  for (int f = 2; f <= order; ++f) {
    Mat LZ = stereo::left_matmul(Mat(L_tilde), Z[f - 1], kappa);
    Mat twoLZ(LZ.rows(), LZ.cols());
    for (Eigen::Index i = 0; i < LZ.rows(); ++i)
      twoLZ.row(i) =
          stereo::scalar_mul(2.0, LZ.row(i).transpose(), kappa).transpose();
    Mat out(LZ.rows(), LZ.cols());
    for (Eigen::Index i = 0; i < LZ.rows(); ++i)
      out.row(i) = stereo::mobius_sub(twoLZ.row(i).transpose(),
                                      Z[f - 2].row(i).transpose(), kappa)
                       .transpose();
    Z.push_back(out);
  }
  return Z;
}

namespace detail {

// Left-to-right Mobius fold of phi_f ⊗ Z^(f) for f = 0..upto. Mobius
// addition is non-associative; the fold order is filter-index order.
inline Mat aggregate_orders(const std::vector<Mat>& Z, const Vec& phi,
                            double kappa, int upto) {
  Mat acc;
  for (int f = 0; f <= upto; ++f) {
    Mat term(Z[f].rows(), Z[f].cols());
    if (kappa == 0.0) {
      term = phi[f] * Z[f];
    } else {
      for (Eigen::Index i = 0; i < Z[f].rows(); ++i)
        term.row(i) =
            stereo::scalar_mul(phi[f], Z[f].row(i).transpose(), kappa)
                .transpose();
    }
    if (f == 0) {
      acc = term;
    } else if (kappa == 0.0) {
      acc += term;
    } else {
      for (Eigen::Index i = 0; i < acc.rows(); ++i)
        acc.row(i) = stereo::mobius_add(acc.row(i).transpose(),
                                        term.row(i).transpose(), kappa)
                         .transpose();
    }
  }
  return acc;
}

}  // namespace detail

// Full filter bank: per component, the identity-operator aggregate N^I plus
// partial aggregates N^(0)..N^(F), blended by softmaxed filter attention,
// scaled by softmaxed manifold attention, concatenated across components.
inline Mat filter_bank(const SpMat& L_tilde, const Mat& X,
                       const EncoderParams& params,
                       const ProductManifold& pm) {
  params.validate(pm, static_cast<int>(X.cols()));
  const int n = static_cast<int>(X.rows());
  const int F = params.filter_order;
  Mat H_full = feature_map(X, params);
  Vec alpha = softmax(params.filter_attention);
  Vec beta = softmax(params.manifold_attention);

  SpMat I(n, n);
  I.setIdentity();

  Mat out(n, pm.total_dim());
  int off = 0;
  for (std::size_t p = 0; p < pm.components.size(); ++p) {
    const auto& comp = pm.components[p];
    double kappa = comp.curvature;
    Mat H = H_full.middleCols(off, comp.dim);
    Vec phi = params.cheb_weights.row(p).transpose();

    auto Z = cheb_orders(L_tilde, H, kappa, F);
    auto ZI = cheb_orders(I, H, kappa, F);

    // Bank: [N^I, N^(0), ..., N^(F)], alpha-fold left to right.
    Mat acc = detail::aggregate_orders(ZI, phi, kappa, F);
    if (kappa == 0.0) {
      acc *= alpha[0];
    } else {
      for (Eigen::Index i = 0; i < acc.rows(); ++i)
        acc.row(i) =
            stereo::scalar_mul(alpha[0], acc.row(i).transpose(), kappa)
                .transpose();
    }
    for (int f = 0; f <= F; ++f) {
      Mat Nf = detail::aggregate_orders(Z, phi, kappa, f);
      if (kappa == 0.0) {
        acc += alpha[f + 1] * Nf;
      } else {
        for (Eigen::Index i = 0; i < acc.rows(); ++i) {
          Vec scaled =
              stereo::scalar_mul(alpha[f + 1], Nf.row(i).transpose(), kappa);
          acc.row(i) =
              stereo::mobius_add(acc.row(i).transpose(), scaled, kappa)
                  .transpose();
        }
      }
    }
    if (kappa == 0.0) {
      out.middleCols(off, comp.dim) = beta[p] * acc;
    } else {
      for (Eigen::Index i = 0; i < acc.rows(); ++i)
        out.block(i, off, 1, comp.dim) =
            stereo::scalar_mul(beta[p], acc.row(i).transpose(), kappa)
                .transpose();
    }
    off += comp.dim;
  }
  return out;
}

}  // namespace curvgad
