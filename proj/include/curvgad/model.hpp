#pragma once

#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvgad/curvature.hpp"
#include "curvgad/decoder.hpp"
#include "curvgad/encoder.hpp"
#include "curvgad/flow.hpp"
#include "curvgad/graph.hpp"
#include "curvgad/laplacian.hpp"
#include "curvgad/log.hpp"

namespace curvgad {

// Learnable tradeoff weights: softmax ties lambda_C + lambda_A + lambda_X
// to 1; the classification blend sits in [0,1] via a sigmoid.
struct LossWeights {
  Vec recon_logits = Vec::Zero(3);  // (C, A, X)
  double cls_logit = 0.0;

  Vec lambdas() const { return softmax(recon_logits); }
  double lambda_cls() const { return sigmoid(cls_logit); }
};

struct ModelParams {
  ProductManifold pm;       // equivariant stage; curvatures learnable
  ProductManifold pm_inv;   // Euclidean, fixed
  EncoderParams equivariant;
  EncoderParams invariant;
  DecoderParams decoder;
  LossWeights loss_weights;
  bool supervised = false;

  // --- flat parameter vector for the finite-difference optimizer ---

  std::size_t parameter_count() const {
    std::size_t n = 0;
    auto enc = [&](const EncoderParams& e) {
      n += e.feature_weights.size() + e.feature_bias.size() +
           e.cheb_weights.size() + e.filter_attention.size() +
           e.manifold_attention.size();
    };
    enc(equivariant);
    enc(invariant);
    for (auto& c : pm.components)
      if (c.kind != ManifoldKind::euclidean) ++n;
    n += 1;  // log_tau
    n += decoder.attr_mlp.w1.size() + decoder.attr_mlp.b1.size() +
         decoder.attr_mlp.w2.size() + decoder.attr_mlp.b2.size();
    if (decoder.has_classifier) n += decoder.classifier_w.size() + 1;
    n += 3 + (supervised ? 1 : 0);
    return n;
  }

  Vec to_vector() const {
    Vec v(parameter_count());
    std::size_t k = 0;
    auto put_mat = [&](const Mat& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) v[k++] = m(i);
    };
    auto put_vec = [&](const Vec& x) {
      for (Eigen::Index i = 0; i < x.size(); ++i) v[k++] = x[i];
    };
    auto put_enc = [&](const EncoderParams& e) {
      put_mat(e.feature_weights);
      put_vec(e.feature_bias);
      put_mat(e.cheb_weights);
      put_vec(e.filter_attention);
      put_vec(e.manifold_attention);
    };
    put_enc(equivariant);
    put_enc(invariant);
    for (auto& c : pm.components)
      if (c.kind != ManifoldKind::euclidean) v[k++] = c.curvature;
    v[k++] = decoder.log_tau;
    put_mat(decoder.attr_mlp.w1);
    put_vec(decoder.attr_mlp.b1);
    put_mat(decoder.attr_mlp.w2);
    put_vec(decoder.attr_mlp.b2);
    if (decoder.has_classifier) {
      put_vec(decoder.classifier_w);
      v[k++] = decoder.classifier_b;
    }
    put_vec(loss_weights.recon_logits);
    if (supervised) v[k++] = loss_weights.cls_logit;
    return v;
  }

  void from_vector(const Vec& v) {
    std::size_t k = 0;
    auto get_mat = [&](Mat& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = v[k++];
    };
    auto get_vec = [&](Vec& x) {
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = v[k++];
    };
    auto get_enc = [&](EncoderParams& e) {
      get_mat(e.feature_weights);
      get_vec(e.feature_bias);
      get_mat(e.cheb_weights);
      get_vec(e.filter_attention);
      get_vec(e.manifold_attention);
    };
    get_enc(equivariant);
    get_enc(invariant);
    for (auto& c : pm.components)
      if (c.kind != ManifoldKind::euclidean) c.curvature = v[k++];
    decoder.log_tau = v[k++];
    get_mat(decoder.attr_mlp.w1);
    get_vec(decoder.attr_mlp.b1);
    get_mat(decoder.attr_mlp.w2);
    get_vec(decoder.attr_mlp.b2);
    if (decoder.has_classifier) {
      get_vec(decoder.classifier_w);
      decoder.classifier_b = v[k++];
    }
    get_vec(loss_weights.recon_logits);
    if (supervised) loss_weights.cls_logit = v[k++];
    project();
  }

  // Curvatures never cross zero and stay inside the trainable clamp range.
  void project() {
    for (auto& c : pm.components) {
      if (c.kind == ManifoldKind::euclidean) continue;
      double sign = c.kind == ManifoldKind::hyperbolic ? -1.0 : 1.0;
      double mag = std::abs(c.curvature);
      if (c.curvature * sign < 0.0) mag = 0.01;  // tried to cross zero
      mag = std::clamp(mag, 0.01, 10.0);
      c.curvature = sign * mag;
    }
  }
};

struct Losses {
  double curvature = 0.0;
  double adjacency = 0.0;
  double attributes = 0.0;
  double classification = 0.0;
  double total = 0.0;
};

struct AnomalyReport {
  std::vector<double> curvature_error;
  std::vector<double> adjacency_error;
  std::vector<double> attribute_error;
  std::vector<double> score;
  std::vector<double> cls_probability;  // empty when unsupervised
  std::vector<int> rank;                // 1..n, descending by score
  std::vector<bool> isolated;           // curvature error undefined, set to 0
  double auroc = std::numeric_limits<double>::quiet_NaN();
};

// Everything a training run precomputes once: targets, operators, sampling.
struct TrainingContext {
  const Graph* graph = nullptr;
  Mat features;
  Mat adjacency_dense;  // empty when negative sampling is active
  std::vector<std::pair<int, int>> sampled_pairs;  // with targets below
  std::vector<double> sampled_targets;
  Vec curvature_targets;  // per edge, graph edge order
  SpMat laplacian_orig;
  SpMat laplacian_flow;
  std::vector<int> labels;  // empty when absent
  bool use_dense_adjacency = true;

  static constexpr int kDenseAdjacencyLimit = 300;
  static constexpr int kNegativeSamplesPerEdge = 5;

  static TrainingContext build(const Graph& g, const Graph& flowed,
                               const CurvatureMap& targets,
                               std::uint64_t seed) {
    TrainingContext ctx;
    ctx.graph = &g;
    const int n = g.node_count();
    if (!g.features())
      throw GraphError("training requires node features");
    ctx.features = *g.features();
    if (g.labels()) ctx.labels = *g.labels();

    ctx.curvature_targets.resize(g.edge_count());
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
      auto& e = g.edges()[i];
      ctx.curvature_targets[i] = targets.at(e.u, e.v);
    }

    ctx.laplacian_orig = rescale_operator(build_laplace_beltrami(g));
    ctx.laplacian_flow = rescale_operator(build_laplace_beltrami(flowed));

    ctx.use_dense_adjacency = n <= kDenseAdjacencyLimit;
    if (ctx.use_dense_adjacency) {
      ctx.adjacency_dense = Mat::Zero(n, n);
      for (auto& e : g.edges()) {
        ctx.adjacency_dense(e.u, e.v) = 1.0;
        ctx.adjacency_dense(e.v, e.u) = 1.0;
      }
    } else {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> pick(0, n - 1);
      std::set<std::pair<int, int>> edge_set;
      for (auto& e : g.edges()) edge_set.insert({e.u, e.v});
      for (auto& e : g.edges()) {
        ctx.sampled_pairs.push_back({e.u, e.v});
        ctx.sampled_targets.push_back(1.0);
        for (int s = 0; s < kNegativeSamplesPerEdge; ++s) {
          for (int attempt = 0; attempt < 100; ++attempt) {
            int a = pick(rng), b = pick(rng);
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            if (edge_set.count({a, b})) continue;
            ctx.sampled_pairs.push_back({a, b});
            ctx.sampled_targets.push_back(0.0);
            break;
          }
        }
      }
    }
    return ctx;
  }
};

struct ForwardResult {
  Mat embeddings_eq;   // product-manifold rows
  Mat embeddings_inv;  // Euclidean rows
  Vec curvature_pred;  // per edge
  Mat adjacency_pred;  // dense mode only
  Mat attributes_pred;
  Vec cls_logits;  // supervised only
};

inline ForwardResult model_forward(const ModelParams& params,
                                   const TrainingContext& ctx) {
  const Graph& g = *ctx.graph;
  ForwardResult fr;
  fr.embeddings_eq =
      filter_bank(ctx.laplacian_orig, ctx.features, params.equivariant,
                  params.pm);
  fr.embeddings_inv =
      filter_bank(ctx.laplacian_flow, ctx.features, params.invariant,
                  params.pm_inv);

  double tau = params.decoder.tau();
  fr.curvature_pred.resize(g.edge_count());
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    auto& e = g.edges()[i];
    double d = product_distance(fr.embeddings_eq.row(e.u),
                                fr.embeddings_eq.row(e.v), params.pm);
    fr.curvature_pred[i] =
        decode_curvature_from_distance(d, params.decoder.gamma, tau);
  }

  if (ctx.use_dense_adjacency) {
    Mat logits = fr.embeddings_inv * fr.embeddings_inv.transpose();
    fr.adjacency_pred = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
  }
  fr.attributes_pred = params.decoder.attr_mlp.apply_rows(fr.embeddings_inv);

  if (params.supervised && params.decoder.has_classifier) {
    const int n = g.node_count();
    fr.cls_logits.resize(n);
    for (int i = 0; i < n; ++i) {
      Vec tangent(params.pm.total_dim() + params.pm_inv.total_dim());
      tangent << product_log_zero(fr.embeddings_eq.row(i), params.pm),
          fr.embeddings_inv.row(i).transpose();
      fr.cls_logits[i] =
          params.decoder.classifier_w.dot(tangent) + params.decoder.classifier_b;
    }
  }
  return fr;
}

inline Losses compute_losses(const ModelParams& params,
                             const TrainingContext& ctx,
                             const ForwardResult& fr) {
  Losses out;
  // Channel losses are means, not sums: the raw scales differ by orders of
  // magnitude (n^2 adjacency entries vs |E| curvatures) and a sum-based
  // blend would let one channel drown the others.
  if (ctx.curvature_targets.size() > 0)
    out.curvature = (fr.curvature_pred - ctx.curvature_targets).squaredNorm() /
                    static_cast<double>(ctx.curvature_targets.size());
  if (ctx.use_dense_adjacency) {
    out.adjacency = (fr.adjacency_pred - ctx.adjacency_dense).squaredNorm() /
                    static_cast<double>(ctx.adjacency_dense.size());
  } else if (!ctx.sampled_pairs.empty()) {
    for (std::size_t i = 0; i < ctx.sampled_pairs.size(); ++i) {
      auto [a, b] = ctx.sampled_pairs[i];
      double pred = sigmoid(
          fr.embeddings_inv.row(a).dot(fr.embeddings_inv.row(b)));
      double r = pred - ctx.sampled_targets[i];
      out.adjacency += r * r;
    }
    out.adjacency /= static_cast<double>(ctx.sampled_pairs.size());
  }
  out.attributes = (fr.attributes_pred - ctx.features).squaredNorm() /
                   static_cast<double>(ctx.features.size());

  double lambda_cls = 0.0;
  if (params.supervised) {
    if (ctx.labels.empty()) {
      log_warn("labels missing; forcing unsupervised objective");
    } else {
      lambda_cls = params.loss_weights.lambda_cls();
      double bce = 0.0;
      for (std::size_t i = 0; i < ctx.labels.size(); ++i) {
        double p = sigmoid(fr.cls_logits[static_cast<Eigen::Index>(i)]);
        p = std::clamp(p, 1e-12, 1.0 - 1e-12);
        bce += ctx.labels[i] ? -std::log(p) : -std::log(1.0 - p);
      }
      out.classification = bce / static_cast<double>(ctx.labels.size());
    }
  }

  Vec lam = params.loss_weights.lambdas();
  out.total = lambda_cls * out.classification +
              (1.0 - lambda_cls) * (lam[0] * out.curvature +
                                    lam[1] * out.adjacency +
                                    lam[2] * out.attributes);
  return out;
}

inline Losses compute_losses(const ModelParams& params,
                             const TrainingContext& ctx) {
  return compute_losses(params, ctx, model_forward(params, ctx));
}

struct TrainConfig {
  int iterations = 40;
  double learning_rate = 0.05;
  double fd_step = 1e-5;
  std::uint64_t seed = 0;
};

struct TrainTrace {
  std::vector<double> loss;
  bool aborted_nan = false;
};

// Central-difference gradient descent with a backtracking line search;
// every accepted step decreases the objective, so the loss trace is
// monotone by construction.
inline TrainTrace train(ModelParams& params, const TrainingContext& ctx,
                        const TrainConfig& cfg) {
  TrainTrace trace;
  Vec theta = params.to_vector();
  auto eval = [&](const Vec& v) {
    ModelParams p = params;
    p.from_vector(v);
    return compute_losses(p, ctx).total;
  };
  double loss = eval(theta);
  if (!std::isfinite(loss)) {
    log_warn("initial loss is not finite; parameter norm " +
             std::to_string(theta.norm()));
    trace.aborted_nan = true;
    return trace;
  }
  trace.loss.push_back(loss);
  double lr = cfg.learning_rate;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    Vec grad(theta.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      double h = cfg.fd_step * std::max(1.0, std::abs(theta[j]));
      Vec tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      grad[j] = (eval(tp) - eval(tm)) / (2.0 * h);
    }
    if (!grad.allFinite()) {
      log_warn("NaN gradient at iteration " + std::to_string(iter) +
               "; parameter norm " + std::to_string(theta.norm()));
      trace.aborted_nan = true;
      break;
    }
    double gnorm2 = grad.squaredNorm();
    if (gnorm2 < 1e-20) break;

    bool accepted = false;
    double step = lr;
    for (int bt = 0; bt < 20; ++bt) {
      Vec cand = theta - step * grad;
      double cand_loss = eval(cand);
      if (std::isfinite(cand_loss) &&
          cand_loss <= loss - 1e-4 * step * gnorm2) {
        theta = cand;
        loss = cand_loss;
        accepted = true;
        lr = std::min(step * 1.5, cfg.learning_rate * 10.0);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent direction at resolvable step size
    trace.loss.push_back(loss);
  }
  params.from_vector(theta);
  return trace;
}

// Rank-based AUROC (Mann-Whitney); ties count half.
inline double auroc(const std::vector<double>& scores,
                    const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("score/label size mismatch");
  double pos = 0, neg = 0;
  for (int l : labels) (l ? pos : neg) += 1.0;
  if (pos == 0 || neg == 0)
    throw std::invalid_argument("auroc needs both classes");
  double wins = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / (pos * neg);
}

namespace detail {

inline std::vector<double> min_max_normalize(std::vector<double> v) {
  double lo = kInfDist, hi = -kInfDist;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (hi - lo < 1e-15) {
    for (double& x : v) x = 0.0;
    return v;
  }
  for (double& x : v) x = (x - lo) / (hi - lo);
  return v;
}

}  // namespace detail

// Channel weights for ablation scoring: the full score blends all three
// channels, the equivariant variant keeps only curvature, the invariant
// variant keeps adjacency + attributes.
enum class ScoreVariant { full, equivariant_only, invariant_only };

inline AnomalyReport score_nodes(const ModelParams& params,
                                 const TrainingContext& ctx,
                                 ScoreVariant variant = ScoreVariant::full) {
  const Graph& g = *ctx.graph;
  const int n = g.node_count();
  ForwardResult fr = model_forward(params, ctx);

  AnomalyReport rep;
  rep.curvature_error.assign(n, 0.0);
  rep.adjacency_error.assign(n, 0.0);
  rep.attribute_error.assign(n, 0.0);
  rep.isolated.assign(n, false);

  std::vector<int> incident(n, 0);
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    auto& e = g.edges()[i];
    double r = fr.curvature_pred[i] - ctx.curvature_targets[i];
    rep.curvature_error[e.u] += r * r;
    rep.curvature_error[e.v] += r * r;
    ++incident[e.u];
    ++incident[e.v];
  }
  for (int i = 0; i < n; ++i) {
    if (incident[i] > 0)
      rep.curvature_error[i] /= incident[i];
    else
      rep.isolated[i] = true;
  }

  if (ctx.use_dense_adjacency) {
    for (int i = 0; i < n; ++i)
      rep.adjacency_error[i] =
          (fr.adjacency_pred.row(i) - ctx.adjacency_dense.row(i)).squaredNorm() /
          n;
  } else {
    // Mean per node, like the curvature channel: a sum would scale with how
    // often a node is sampled and turn the channel into a degree detector.
    std::vector<int> touched(n, 0);
    for (std::size_t k = 0; k < ctx.sampled_pairs.size(); ++k) {
      auto [a, b] = ctx.sampled_pairs[k];
      double pred =
          sigmoid(fr.embeddings_inv.row(a).dot(fr.embeddings_inv.row(b)));
      double r = pred - ctx.sampled_targets[k];
      rep.adjacency_error[a] += r * r;
      rep.adjacency_error[b] += r * r;
      ++touched[a];
      ++touched[b];
    }
    for (int i = 0; i < n; ++i)
      if (touched[i] > 0) rep.adjacency_error[i] /= touched[i];
  }
  for (int i = 0; i < n; ++i)
    rep.attribute_error[i] =
        (fr.attributes_pred.row(i) - ctx.features.row(i)).squaredNorm();

  auto c = detail::min_max_normalize(rep.curvature_error);
  auto a = detail::min_max_normalize(rep.adjacency_error);
  auto x = detail::min_max_normalize(rep.attribute_error);

  Vec lam = params.loss_weights.lambdas();
  double wc = lam[0], wa = lam[1], wx = lam[2];
  if (variant == ScoreVariant::equivariant_only) {
    wc = 1.0;
    wa = wx = 0.0;
  } else if (variant == ScoreVariant::invariant_only) {
    wc = 0.0;
    double s = lam[1] + lam[2];
    wa = s > 0 ? lam[1] / s : 0.5;
    wx = s > 0 ? lam[2] / s : 0.5;
  }

  double lambda_cls =
      params.supervised && !ctx.labels.empty() && fr.cls_logits.size() == n
          ? params.loss_weights.lambda_cls()
          : 0.0;
  rep.score.assign(n, 0.0);
  if (lambda_cls > 0.0) rep.cls_probability.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double recon = wc * c[i] + wa * a[i] + wx * x[i];
    double p = 0.0;
    if (lambda_cls > 0.0) {
      p = sigmoid(fr.cls_logits[i]);
      rep.cls_probability[i] = p;
    }
    rep.score[i] = lambda_cls * p + (1.0 - lambda_cls) * recon;
  }

  // Ranks: 1 = highest score; ties broken by node id for determinism.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int u, int v) {
    if (rep.score[u] != rep.score[v]) return rep.score[u] > rep.score[v];
    return u < v;
  });
  rep.rank.assign(n, 0);
  for (int pos = 0; pos < n; ++pos) rep.rank[order[pos]] = pos + 1;

  if (!ctx.labels.empty()) {
    bool has_pos = false, has_neg = false;
    for (int l : ctx.labels) (l ? has_pos : has_neg) = true;
    if (has_pos && has_neg) rep.auroc = auroc(rep.score, ctx.labels);
  }
  return rep;
}

// Seeded parameter initialization.
inline ModelParams init_model(const ProductManifold& pm, int d_x, int d_inv,
                              int filter_order, int mlp_hidden,
                              bool supervised, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.1);
  auto rmat = [&](int r, int c) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = dist(rng);
    return m;
  };
  auto rvec = [&](int s) {
    Vec v(s);
    for (Eigen::Index i = 0; i < s; ++i) v[i] = dist(rng);
    return v;
  };

  ModelParams mp;
  mp.pm = pm;
  mp.pm_inv = ProductManifold::euclidean(d_inv);
  mp.supervised = supervised;

  auto init_enc = [&](const ProductManifold& m) {
    EncoderParams e;
    e.filter_order = filter_order;
    e.feature_weights = rmat(d_x, m.total_dim());
    e.feature_bias = rvec(m.total_dim());
    int p = static_cast<int>(m.components.size());
    e.cheb_weights = Mat::Ones(p, filter_order + 1) +
                     rmat(p, filter_order + 1) * 0.1;
    e.filter_attention = rvec(filter_order + 2) * 0.1;
    e.manifold_attention = rvec(p) * 0.1;
    return e;
  };
  mp.equivariant = init_enc(mp.pm);
  mp.invariant = init_enc(mp.pm_inv);

  mp.decoder.gamma = 1.0;
  mp.decoder.log_tau = 0.0;
  mp.decoder.attr_mlp.w1 = rmat(d_inv, mlp_hidden);
  mp.decoder.attr_mlp.b1 = rvec(mlp_hidden);
  mp.decoder.attr_mlp.w2 = rmat(mlp_hidden, d_x);
  mp.decoder.attr_mlp.b2 = rvec(d_x);
  if (supervised) {
    mp.decoder.has_classifier = true;
    mp.decoder.classifier_w = rvec(pm.total_dim() + d_inv);
    mp.decoder.classifier_b = 0.0;
  }
  return mp;
}

}  // namespace curvgad
