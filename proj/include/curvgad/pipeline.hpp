#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "curvgad/flow.hpp"
#include "curvgad/model.hpp"
#include "curvgad/signature.hpp"
#include "curvgad/synth.hpp"

namespace curvgad {

struct DetectorConfig {
  std::string signature = "auto";  // "auto" or manual grammar e.g. "H:4,S:4"
  int d_p = 8;            // equivariant product-manifold dimension
  int d_inv = 8;          // invariant Euclidean latent dimension
  int filter_order = 2;   // F
  int mlp_hidden = 8;
  int iterations = 40;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  bool unsupervised = true;
  double orc_delta = 0.5;
  OrcMode orc_mode = OrcMode::exact;
  int flow_max_iters = 20;
  double flow_epsilon = 0.5;
  double flow_threshold = 0.01;
  double signature_eps_prime = 0.1;
  int signature_h_max = 2;
  int signature_s_max = 2;
};

struct DetectResult {
  AnomalyReport report;
  AnomalyReport report_equivariant_only;
  AnomalyReport report_invariant_only;
  ProductManifold signature;
  ModelParams params;
  TrainTrace trace;
  bool flow_converged = false;
  double seconds_curvature = 0.0;
  double seconds_flow = 0.0;
  double seconds_train = 0.0;
};

// The full dual-pipeline detector: curvature targets, signature, Ricci flow,
// encoder/decoder training, anomaly scoring.
inline DetectResult detect(const Graph& g, const DetectorConfig& cfg) {
  using clock = std::chrono::steady_clock;
  DetectResult out;

  auto t0 = clock::now();
  OrcConfig orc;
  orc.delta = cfg.orc_delta;
  orc.mode = cfg.orc_mode;
  CurvatureMap targets = curvature_map(g, orc);
  out.seconds_curvature =
      std::chrono::duration<double>(clock::now() - t0).count();

  if (cfg.signature == "auto") {
    SignatureConfig sc;
    sc.epsilon_prime = cfg.signature_eps_prime;
    sc.h_max = cfg.signature_h_max;
    sc.s_max = cfg.signature_s_max;
    sc.d_p = cfg.d_p;
    sc.seed = cfg.seed;
    out.signature = estimate_signature(targets, sc);
  } else {
    out.signature = parse_signature(cfg.signature);
  }

  auto t1 = clock::now();
  FlowConfig fc;
  fc.epsilon = cfg.flow_epsilon;
  fc.delta_threshold = cfg.flow_threshold;
  fc.max_iters = cfg.flow_max_iters;
  fc.curvature_mode = cfg.orc_mode;
  fc.orc_delta = cfg.orc_delta;
  FlowTrace flow = run_flow(g, fc);
  out.flow_converged = flow.converged;
  out.seconds_flow = std::chrono::duration<double>(clock::now() - t1).count();

  auto t2 = clock::now();
  TrainingContext ctx = TrainingContext::build(g, flow.final_graph, targets,
                                               cfg.seed);
  bool supervised = !cfg.unsupervised && g.labels().has_value();
  out.params = init_model(out.signature,
                          static_cast<int>(ctx.features.cols()), cfg.d_inv,
                          cfg.filter_order, cfg.mlp_hidden, supervised,
                          cfg.seed);
  TrainConfig tc;
  tc.iterations = cfg.iterations;
  tc.learning_rate = cfg.learning_rate;
  tc.seed = cfg.seed;
  out.trace = train(out.params, ctx, tc);
  out.seconds_train = std::chrono::duration<double>(clock::now() - t2).count();

  out.report = score_nodes(out.params, ctx, ScoreVariant::full);
  out.report_equivariant_only =
      score_nodes(out.params, ctx, ScoreVariant::equivariant_only);
  out.report_invariant_only =
      score_nodes(out.params, ctx, ScoreVariant::invariant_only);
  return out;
}

struct BenchmarkResult {
  std::vector<double> auroc_full;
  std::vector<double> auroc_equivariant;
  std::vector<double> auroc_invariant;
  double mean_auroc = 0.0;
  double stdev_auroc = 0.0;
  double seconds_generate = 0.0;
  double seconds_curvature = 0.0;
  double seconds_flow = 0.0;
  double seconds_train = 0.0;
};

inline BenchmarkResult run_benchmark(const InjectionSpec& spec, int n,
                                     const DetectorConfig& detector,
                                     int seeds) {
  using clock = std::chrono::steady_clock;
  BenchmarkResult out;
  for (int s = 0; s < seeds; ++s) {
    InjectionSpec sp = spec;
    sp.seed = spec.seed + static_cast<std::uint64_t>(s);
    auto t0 = clock::now();
    Graph g = generate(sp, n);
    out.seconds_generate +=
        std::chrono::duration<double>(clock::now() - t0).count();

    DetectorConfig dc = detector;
    dc.seed = detector.seed + static_cast<std::uint64_t>(s);
    DetectResult res = detect(g, dc);
    out.seconds_curvature += res.seconds_curvature;
    out.seconds_flow += res.seconds_flow;
    out.seconds_train += res.seconds_train;
    out.auroc_full.push_back(res.report.auroc);
    out.auroc_equivariant.push_back(res.report_equivariant_only.auroc);
    out.auroc_invariant.push_back(res.report_invariant_only.auroc);
  }
  double sum = 0.0;
  for (double a : out.auroc_full) sum += a;
  out.mean_auroc = sum / out.auroc_full.size();
  double var = 0.0;
  for (double a : out.auroc_full) var += (a - out.mean_auroc) * (a - out.mean_auroc);
  out.stdev_auroc = out.auroc_full.size() > 1
                        ? std::sqrt(var / (out.auroc_full.size() - 1))
                        : 0.0;
  return out;
}

}  // namespace curvgad
