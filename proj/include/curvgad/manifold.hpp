#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvgad/log.hpp"

namespace curvgad {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ManifoldKind { hyperbolic, spherical, euclidean };

struct ComponentManifold {
  ManifoldKind kind = ManifoldKind::euclidean;
  double curvature = 0.0;
  int dim = 1;

  void validate() const {
    if (dim < 1) throw std::invalid_argument("component dim must be >= 1");
    switch (kind) {
      case ManifoldKind::hyperbolic:
        if (!(curvature < 0.0))
          throw std::invalid_argument("hyperbolic curvature must be negative");
        break;
      case ManifoldKind::spherical:
        if (!(curvature > 0.0))
          throw std::invalid_argument("spherical curvature must be positive");
        break;
      case ManifoldKind::euclidean:
        if (curvature != 0.0)
          throw std::invalid_argument("euclidean curvature must be zero");
        break;
    }
    if (curvature != 0.0) {
      double a = std::abs(curvature);
      if (a < 0.01 || a > 10.0)
        throw std::invalid_argument("|curvature| must lie in [0.01, 10]");
    }
  }
};

struct ProductManifold {
  std::vector<ComponentManifold> components;

  int total_dim() const {
    int d = 0;
    for (auto& c : components) d += c.dim;
    return d;
  }

  void validate() const {
    if (components.empty())
      throw std::invalid_argument("product manifold needs >= 1 component");
    int euclidean = 0;
    for (auto& c : components) {
      c.validate();
      if (c.kind == ManifoldKind::euclidean) ++euclidean;
    }
    if (euclidean > 1)
      throw std::invalid_argument("at most one euclidean component");
  }

  // Offset of component p's coordinate slice.
  int offset(std::size_t p) const {
    int off = 0;
    for (std::size_t i = 0; i < p; ++i) off += components[i].dim;
    return off;
  }

  static ProductManifold euclidean(int dim) {
    return {{{ManifoldKind::euclidean, 0.0, dim}}};
  }
};

// ---------------------------------------------------------------------------
// kappa-stereographic primitives. kappa = 0 is always a dedicated Euclidean
// branch; the curved formulas never see it.
// ---------------------------------------------------------------------------

namespace stereo {

inline constexpr double kNormFloor = 1e-15;
inline constexpr double kAtanhClamp = 1.0 - 1e-7;

// tan_kappa: tan for spherical, tanh for hyperbolic.
inline double tan_k(double u, double kappa) {
  return kappa > 0.0 ? std::tan(u) : std::tanh(u);
}

inline double atan_k(double u, double kappa) {
  if (kappa > 0.0) return std::atan(u);
  if (u > kAtanhClamp) u = kAtanhClamp;
  if (u < -kAtanhClamp) u = -kAtanhClamp;
  return std::atanh(u);
}

inline bool in_domain(const Vec& z, double kappa) {
  return -kappa * z.squaredNorm() < 1.0;
}

inline void check_domain(const Vec& z, double kappa) {
  if (!in_domain(z, kappa))
    throw std::domain_error("point outside the kappa-stereographic domain");
}

inline Vec mobius_add(const Vec& x, const Vec& y, double kappa) {
  if (kappa == 0.0) return x + y;
  check_domain(x, kappa);
  check_domain(y, kappa);
  double x2 = x.squaredNorm(), y2 = y.squaredNorm(), xy = x.dot(y);
  double denom = 1.0 - 2.0 * kappa * xy + kappa * kappa * x2 * y2;
  return ((1.0 - 2.0 * kappa * xy - kappa * y2) * x +
          (1.0 + kappa * x2) * y) /
         denom;
}

inline Vec mobius_sub(const Vec& x, const Vec& y, double kappa) {
  return mobius_add(x, Vec(-y), kappa);
}

// Spherical tangent norms are clamped just inside the injectivity radius
// rather than rejected, so optimization loops stay alive.
inline Vec clamp_tangent(const Vec& v, double kappa) {
  if (kappa <= 0.0) return v;
  double bound = 0.99 * std::numbers::pi / (2.0 * std::sqrt(kappa));
  double r = v.norm();
  if (r <= bound) return v;
  // Routine during optimization, so only worth reporting at debug level;
  // the guard keeps the hot path free of string formatting.
  if (log_level() >= LogLevel::debug)
    log_debug("tangent norm " + std::to_string(r) +
              " clamped to spherical injectivity bound");
  return v * (bound / r);
}

inline Vec exp_map_zero(const Vec& v_in, double kappa) {
  if (kappa == 0.0) return v_in;
  Vec v = clamp_tangent(v_in, kappa);
  double r = v.norm();
  if (r < kNormFloor) return Vec::Zero(v.size());
  double sk = std::sqrt(std::abs(kappa));
  return (tan_k(sk * r, kappa) / (sk * r)) * v;
}

inline Vec log_map_zero(const Vec& y, double kappa) {
  if (kappa == 0.0) return y;
  check_domain(y, kappa);
  double r = y.norm();
  if (r < kNormFloor) return Vec::Zero(y.size());
  double sk = std::sqrt(std::abs(kappa));
  return (atan_k(sk * r, kappa) / (sk * r)) * y;
}

inline double distance(const Vec& x, const Vec& y, double kappa) {
  if (kappa == 0.0) return (x - y).norm();
  Vec diff = mobius_add(Vec(-x), y, kappa);
  double sk = std::sqrt(std::abs(kappa));
  return (2.0 / sk) * atan_k(sk * diff.norm(), kappa);
}

inline Vec scalar_mul(double c, const Vec& x, double kappa) {
  if (kappa == 0.0) return c * x;
  return exp_map_zero(Vec(c * log_map_zero(x, kappa)), kappa);
}

// Row-wise exp_0(log_0(X) W).
inline Mat right_matmul(const Mat& X, const Mat& W, double kappa) {
  if (X.cols() != W.rows()) throw std::invalid_argument("shape mismatch");
  if (kappa == 0.0) return X * W;
  Mat T(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    T.row(i) = log_map_zero(X.row(i).transpose(), kappa).transpose();
  Mat P = T * W;
  Mat out(P.rows(), P.cols());
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    out.row(i) = exp_map_zero(P.row(i).transpose(), kappa).transpose();
  return out;
}

// exp_0 applied row-wise to L * log_0(X); the tangent-space left action.
inline Mat left_matmul(const Mat& L, const Mat& X, double kappa) {
  if (L.cols() != X.rows()) throw std::invalid_argument("shape mismatch");
  if (kappa == 0.0) return L * X;
  Mat T(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    T.row(i) = log_map_zero(X.row(i).transpose(), kappa).transpose();
  Mat P = L * T;
  Mat out(P.rows(), P.cols());
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    out.row(i) = exp_map_zero(P.row(i).transpose(), kappa).transpose();
  return out;
}

}  // namespace stereo

// ---------------------------------------------------------------------------
// Product-level operations: apply per-component primitives on each slice.
// ---------------------------------------------------------------------------

inline bool on_manifold(const Vec& x, const ProductManifold& pm) {
  if (x.size() != pm.total_dim()) return false;
  int off = 0;
  for (auto& c : pm.components) {
    if (!stereo::in_domain(x.segment(off, c.dim), c.curvature)) return false;
    off += c.dim;
  }
  return true;
}

inline double product_distance(const Vec& x, const Vec& y,
                               const ProductManifold& pm) {
  if (x.size() != pm.total_dim() || y.size() != pm.total_dim())
    throw std::invalid_argument("point dimension mismatch");
  double sq = 0.0;
  int off = 0;
  for (auto& c : pm.components) {
    double d = stereo::distance(x.segment(off, c.dim), y.segment(off, c.dim),
                                c.curvature);
    sq += d * d;
    off += c.dim;
  }
  return std::sqrt(sq);
}

inline Vec product_exp_zero(const Vec& v, const ProductManifold& pm) {
  Vec out(pm.total_dim());
  int off = 0;
  for (auto& c : pm.components) {
    out.segment(off, c.dim) =
        stereo::exp_map_zero(v.segment(off, c.dim), c.curvature);
    off += c.dim;
  }
  return out;
}

inline Vec product_log_zero(const Vec& x, const ProductManifold& pm) {
  Vec out(pm.total_dim());
  int off = 0;
  for (auto& c : pm.components) {
    out.segment(off, c.dim) =
        stereo::log_map_zero(x.segment(off, c.dim), c.curvature);
    off += c.dim;
  }
  return out;
}

inline std::string signature_string(const ProductManifold& pm) {
  std::string out;
  for (std::size_t p = 0; p < pm.components.size(); ++p) {
    auto& c = pm.components[p];
    if (p) out += " x ";
    switch (c.kind) {
      case ManifoldKind::hyperbolic:
        out += "H^" + std::to_string(c.dim) + "(k=" +
               std::to_string(c.curvature) + ")";
        break;
      case ManifoldKind::spherical:
        out += "S^" + std::to_string(c.dim) + "(k=" +
               std::to_string(c.curvature) + ")";
        break;
      case ManifoldKind::euclidean:
        out += "E^" + std::to_string(c.dim);
        break;
    }
  }
  return out;
}

}  // namespace curvgad
