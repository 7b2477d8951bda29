#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "curvgad/curvature.hpp"
#include "curvgad/graph.hpp"

namespace curvgad {

struct FlowConfig {
  double epsilon = 0.5;
  double delta_threshold = 0.01;
  int max_iters = 100;
  OrcMode curvature_mode = OrcMode::exact;
  double orc_delta = 0.5;
  bool parallel = false;
  int threads = 0;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
      throw std::invalid_argument("epsilon must lie in (0, 1]");
    if (!(delta_threshold > 0.0))
      throw std::invalid_argument("delta_threshold must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  }
};

struct FlowIterationRecord {
  int iteration = 0;
  double max_kappa_change = 0.0;
  double max_abs_kappa = 0.0;
  double min_weight = 0.0;
};

struct FlowTrace {
  std::vector<FlowIterationRecord> records;
  bool converged = false;
  Graph final_graph;
};

// Scale weights so their sum equals |E|.
inline Graph normalize_weights(const Graph& g) {
  double sum = 0.0;
  for (auto& e : g.edges()) sum += e.w;
  if (sum <= 0.0) throw GraphError("zero total weight");
  double scale = static_cast<double>(g.edge_count()) / sum;
  std::vector<double> w;
  w.reserve(g.edge_count());
  for (auto& e : g.edges()) w.push_back(e.w * scale);
  return g.with_weights(w);
}

// One Ricci flow update: w <- (1 - eps*kappa) * w. Throws if any weight
// would become non-positive; run_flow halves eps and retries on that.
inline Graph flow_step(const Graph& g, const CurvatureMap& curvatures,
                       double epsilon) {
  std::vector<double> w;
  w.reserve(g.edge_count());
  for (auto& e : g.edges()) {
    double kappa = curvatures.at(e.u, e.v);
    double nw = (1.0 - epsilon * kappa) * e.w;
    if (!(nw > 0.0))
      throw GraphError("flow step drives edge (" + std::to_string(e.u) + "," +
                       std::to_string(e.v) + ") to non-positive weight");
    w.push_back(nw);
  }
  return g.with_weights(w);
}

// Discrete Ollivier-Ricci flow: normalize, compute ORC, update weights,
// stop when curvatures settle edge-wise below the threshold.
inline FlowTrace run_flow(const Graph& g, const FlowConfig& cfg) {
  cfg.validate();
  OrcConfig orc;
  orc.delta = cfg.orc_delta;
  orc.mode = cfg.curvature_mode;
  orc.parallel = cfg.parallel;
  orc.threads = cfg.threads;

  FlowTrace trace;
  Graph cur = g;
  std::vector<double> prev_kappa;
  bool have_prev = false;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    cur = normalize_weights(cur);
    CurvatureMap cm = curvature_map(cur, orc);

    std::vector<double> kappa;
    kappa.reserve(cur.edge_count());
    double max_abs = 0.0;
    for (auto& e : cur.edges()) {
      double k = cm.at(e.u, e.v);
      kappa.push_back(k);
      max_abs = std::max(max_abs, std::abs(k));
    }

    double max_change = kInfDist;
    if (have_prev) {
      max_change = 0.0;
      for (std::size_t i = 0; i < kappa.size(); ++i)
        max_change = std::max(max_change, std::abs(kappa[i] - prev_kappa[i]));
    }

    double min_w = kInfDist;
    for (auto& e : cur.edges()) min_w = std::min(min_w, e.w);
    trace.records.push_back({iter, have_prev ? max_change : 0.0, max_abs, min_w});

    if (have_prev && max_change < cfg.delta_threshold) {
      trace.converged = true;
      break;
    }
    if (!have_prev && cur.edge_count() <= 1) {
      // A single normalized weight is a fixed point up to scale.
      trace.converged = true;
      break;
    }

    double eps = cfg.epsilon;
    Graph next = cur;
    bool stepped = false;
    for (int attempt = 0; attempt < 10; ++attempt) {
      try {
        next = flow_step(cur, cm, eps);
        stepped = true;
        break;
      } catch (const GraphError&) {
        eps *= 0.5;  // positivity guard
      }
    }
    if (!stepped) break;
    cur = next;
    prev_kappa = std::move(kappa);
    have_prev = true;
  }

  trace.final_graph = std::move(cur);
  return trace;
}

}  // namespace curvgad
