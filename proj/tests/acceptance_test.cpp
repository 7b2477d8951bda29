// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its own tolerances and runtime budget.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "curvgad/curvature.hpp"
#include "curvgad/flow.hpp"
#include "curvgad/karate.hpp"
#include "curvgad/manifold.hpp"
#include "curvgad/pipeline.hpp"
#include "curvgad/signature.hpp"
#include "curvgad/synth.hpp"
#include "oracles.hpp"

using namespace curvgad;
using clock_type = std::chrono::steady_clock;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw Failure(msg);
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << x;
  return ss.str();
}

// --- criterion 1: ORC bound sandwich over 200 random graphs -----------------

void criterion_sandwich() {
  auto t0 = clock_type::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> nn(8, 30);
  std::uniform_real_distribution<double> pp(0.2, 0.6);
  OrcConfig cfg;
  cfg.delta = 0.0;
  int edges_checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Graph g = oracle::random_er_graph(nn(rng), pp(rng), rng);
    for (auto& e : g.edges()) {
      Measure mu = lazy_measure(g, e.u, 0.0);
      Measure nu = lazy_measure(g, e.v, 0.0);
      double exact_lp = 1.0 - oracle::wasserstein1_lp(g, mu, nu);
      double exact_impl = orc_exact(g, e.u, e.v, cfg);
      require(std::abs(exact_lp - exact_impl) <= 1e-9,
              "implementation disagrees with LP oracle by " +
                  fmt(std::abs(exact_lp - exact_impl)));
      auto b = orc_bounds(g, e.u, e.v);
      require(exact_lp >= b.lower - 1e-9,
              "lower bound violated: " + fmt(exact_lp) + " < " + fmt(b.lower));
      require(exact_lp <= b.upper + 1e-9,
              "upper bound violated: " + fmt(exact_lp) + " > " + fmt(b.upper));
      ++edges_checked;
    }
  }
  double secs = seconds_since(t0);
  require(secs < 60.0, "runtime " + fmt(secs) + "s exceeds 60s");
  require(edges_checked > 1000, "too few edges exercised");
}

// --- criterion 2: exact-ORC spot values -------------------------------------

void criterion_spot_values() {
  Graph k3(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
  Graph p3(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  Graph k2(2, {{0, 1, 1.0}});
  OrcConfig d0;
  d0.delta = 0.0;
  OrcConfig d5;
  d5.delta = 0.5;
  auto check = [&](const Graph& g, int u, int v, const OrcConfig& cfg,
                   double expected, const std::string& name) {
    double impl = orc_exact(g, u, v, cfg);
    require(std::abs(impl - expected) <= 1e-9,
            name + ": got " + fmt(impl) + ", expected " + fmt(expected));
    double lp = 1.0 - oracle::wasserstein1_lp(g, lazy_measure(g, u, cfg.delta),
                                              lazy_measure(g, v, cfg.delta));
    require(std::abs(lp - expected) <= 1e-9, name + ": LP oracle disagrees");
  };
  check(k3, 0, 1, d0, 0.5, "K3 delta=0");
  check(p3, 0, 1, d0, 0.0, "P3 leaf delta=0");
  check(k2, 0, 1, d5, 1.0, "K2 delta=0.5");
}

// --- criterion 3: Ricci flow on the karate club -----------------------------

void criterion_flow() {
  auto t0 = clock_type::now();
  Graph g = karate_club();
  const double target_sum = static_cast<double>(g.edge_count());

  // Mirror of the flow loop from the library's own primitives, so the
  // normalization invariant is observable at every iteration.
  OrcConfig orc;
  orc.delta = 0.5;
  Graph cur = g;
  std::vector<double> prev;
  bool converged = false;
  int iters = 0;
  for (int iter = 1; iter <= 50; ++iter) {
    iters = iter;
    cur = normalize_weights(cur);
    double sum = 0.0;
    for (auto& e : cur.edges()) {
      require(e.w > 0.0, "non-positive weight at iteration " +
                             std::to_string(iter));
      sum += e.w;
    }
    require(std::abs(sum - target_sum) <= 1e-9,
            "weight sum " + fmt(sum) + " != |E| at iteration " +
                std::to_string(iter));
    CurvatureMap cm = curvature_map(cur, orc);
    std::vector<double> kappa;
    for (auto& e : cur.edges()) kappa.push_back(cm.at(e.u, e.v));
    if (!prev.empty()) {
      double change = 0.0;
      for (std::size_t i = 0; i < kappa.size(); ++i)
        change = std::max(change, std::abs(kappa[i] - prev[i]));
      if (change < 0.01) {
        converged = true;
        break;
      }
    }
    cur = flow_step(cur, cm, 0.5);
    prev = std::move(kappa);
  }
  require(converged, "mirror loop did not converge within 50 iterations");

  FlowConfig cfg;
  cfg.epsilon = 0.5;
  cfg.delta_threshold = 0.01;
  cfg.max_iters = 50;
  FlowTrace trace = run_flow(g, cfg);
  require(trace.converged, "run_flow did not converge within 50 iterations");
  require(static_cast<int>(trace.records.size()) == iters,
          "run_flow iteration count " + std::to_string(trace.records.size()) +
              " differs from mirror loop " + std::to_string(iters));
  for (auto& r : trace.records)
    require(r.min_weight > 0.0, "trace records a non-positive weight");

  double secs = seconds_since(t0);
  require(secs < 30.0, "runtime " + fmt(secs) + "s exceeds 30s");
}

// --- criterion 4: manifold algebra property suite ---------------------------

void criterion_manifold() {
  auto t0 = clock_type::now();
  std::mt19937_64 rng(4004);
  std::normal_distribution<double> gauss(0.0, 0.4);
  std::uniform_real_distribution<double> ks(0.05, 2.0);
  for (int sample = 0; sample < 1000; ++sample) {
    double kappa = (sample % 2 == 0 ? -1.0 : 1.0) * ks(rng);
    int dim = 2 + static_cast<int>(rng() % 5);
    Vec t(dim);
    for (int i = 0; i < dim; ++i) t[i] = gauss(rng);
    t = stereo::clamp_tangent(t, kappa);

    Vec x = stereo::exp_map_zero(t, kappa);
    Vec back = stereo::log_map_zero(x, kappa);
    require((back - t).norm() <= 1e-6, "exp/log round trip off by " +
                                           fmt((back - t).norm()));

    Vec zero = Vec::Zero(dim);
    require((stereo::mobius_add(x, zero, kappa) - x).norm() <= 1e-9,
            "x (+) 0 != x");
    require(stereo::mobius_add(Vec(-x), x, kappa).norm() <= 1e-9,
            "(-x) (+) x != 0");

    Vec u(dim), v(dim);
    for (int i = 0; i < dim; ++i) {
      u[i] = gauss(rng);
      v[i] = gauss(rng);
    }
    require((stereo::mobius_add(u, v, 0.0) - (u + v)).norm() <= 1e-12,
            "kappa=0 mobius_add is not Euclidean addition");
    require((stereo::exp_map_zero(u, 0.0) - u).norm() <= 1e-12,
            "kappa=0 exp map is not the identity");
    require((stereo::log_map_zero(u, 0.0) - u).norm() <= 1e-12,
            "kappa=0 log map is not the identity");
    require(std::abs(stereo::distance(u, v, 0.0) - (u - v).norm()) <= 1e-12,
            "kappa=0 distance is not the Euclidean norm");
  }
  double secs = seconds_since(t0);
  require(secs < 5.0, "runtime " + fmt(secs) + "s exceeds 5s");
}

// --- criterion 5: Chebyshev oracle equivalence ------------------------------

void criterion_chebyshev() {
  std::mt19937_64 rng(5005);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 8 + static_cast<int>(rng() % 13);
    Graph g = oracle::random_er_graph(n, 0.4, rng);
    SpMat Lt = rescale_operator(build_laplace_beltrami(g));
    int F = 1 + static_cast<int>(rng() % 5);

    EncoderParams p;
    p.filter_order = F;
    p.feature_weights = Mat(3, 4);
    for (Eigen::Index i = 0; i < p.feature_weights.size(); ++i)
      p.feature_weights(i) = gauss(rng);
    p.feature_bias = Vec::Zero(4);
    p.cheb_weights = Mat::Ones(1, F + 1);
    p.filter_attention = Vec::Zero(F + 2);
    p.manifold_attention = Vec::Zero(1);

    Mat X(n, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = gauss(rng);
    Mat H = feature_map(X, p);

    auto Z = cheb_orders(Lt, H, 0.0, F);
    for (int f = 0; f <= F; ++f) {
      Mat expected = oracle::cheb_dense(Lt, H, f);
      double rel = (Z[f] - expected).norm() / std::max(1e-30, expected.norm());
      require(rel < 1e-8, "order " + std::to_string(f) + " relative error " +
                              fmt(rel));
    }
  }
}

// --- criterion 6: curvature decoder contract --------------------------------

void criterion_decoder() {
  ProductManifold pm{{{ManifoldKind::hyperbolic, -1.0, 3},
                      {ManifoldKind::spherical, 0.7, 3}}};
  DecoderParams params;
  std::mt19937_64 rng(6006);
  // Spread kept where the open upper bound stays representable: far pairs
  // saturate the sigmoid once the Gaussian kernel underflows.
  std::normal_distribution<double> gauss(0.0, 0.35);
  const double upper = 2.0 * sigmoid(1.0) - 1.0;

  std::vector<std::pair<double, double>> by_distance;
  for (int sample = 0; sample < 10000; ++sample) {
    Vec tx(6), ty(6);
    for (int i = 0; i < 6; ++i) {
      tx[i] = gauss(rng);
      ty[i] = gauss(rng);
    }
    Vec x = product_exp_zero(tx, pm);
    Vec y = product_exp_zero(ty, pm);
    double d = product_distance(x, y, pm);
    double c = decode_curvature(x, y, pm, params);
    require(c >= 0.0 && c < upper, "decoder output " + fmt(c) +
                                       " escapes [0, 2*sigmoid(1)-1)");
    by_distance.push_back({d, c});
  }
  std::sort(by_distance.begin(), by_distance.end());
  for (std::size_t i = 1; i < by_distance.size(); ++i) {
    if (by_distance[i].first > by_distance[i - 1].first + 1e-12)
      require(by_distance[i].second >= by_distance[i - 1].second,
              "decoder not monotone in product distance");
  }

  require(std::abs(decode_curvature_from_distance(0.0, 1.0, 1.0)) <= 1e-9,
          "D=0 spot value");
  require(std::abs(decode_curvature_from_distance(1e6, 1.0, 1.0) - upper) <=
              1e-9,
          "D->infinity spot value");
  double expected = 2.0 * sigmoid(1.0 - std::exp(-1.0)) - 1.0;
  require(std::abs(decode_curvature_from_distance(1.0, 1.0, 1.0) - expected) <=
              1e-9,
          "gamma=tau=D=1 spot value");
}

// --- criterion 7: signature determinism -------------------------------------

void criterion_signature() {
  CurvatureMap cm;
  int edge = 0;
  for (int i = 0; i < 20; ++i) cm.values[{edge, 1000 + edge}] = -0.8, ++edge;
  for (int i = 0; i < 20; ++i) cm.values[{edge, 1000 + edge}] = 0.6, ++edge;
  SignatureConfig cfg;
  cfg.d_p = 48;
  for (int run = 0; run < 10; ++run) {
    ProductManifold pm = estimate_signature(cm, cfg);
    require(pm.components.size() == 2, "expected exactly two components");
    require(pm.components[0].kind == ManifoldKind::hyperbolic &&
                pm.components[0].dim == 24 &&
                std::abs(pm.components[0].curvature + 0.8) <= 1e-12,
            "first component is not H^24(-0.8)");
    require(pm.components[1].kind == ManifoldKind::spherical &&
                pm.components[1].dim == 24 &&
                std::abs(pm.components[1].curvature - 0.6) <= 1e-12,
            "second component is not S^24(0.6)");
  }
}

// --- criteria 8 + 9: synthetic detection and ablation ordering --------------

struct BenchOutcome {
  BenchmarkResult result;
  double null_mean = 0.0;
  double runtime = 0.0;
};

BenchOutcome run_synthetic_benchmark() {
  auto t0 = clock_type::now();
  InjectionSpec spec;
  spec.base_graph = BaseGraph::barabasi_albert;
  spec.anomaly_fraction = 0.05;
  // Geometry-heavy mix: the benchmark exists to exercise the curvature
  // pipelines, so geometric anomalies carry the largest share.
  spec.kind_weights = {0.2, 0.2, 0.6};
  spec.seed = 9000;

  DetectorConfig det;
  det.seed = 9000;
  det.orc_mode = OrcMode::approximate;
  det.d_p = 6;
  det.d_inv = 6;
  det.filter_order = 2;
  det.mlp_hidden = 6;
  det.iterations = 15;
  det.learning_rate = 0.1;
  det.flow_max_iters = 15;

  BenchOutcome out;
  out.result = run_benchmark(spec, 500, det, 5);

  // Null detector: uniform random scores against the same labels.
  double null_sum = 0.0;
  for (int s = 0; s < 5; ++s) {
    InjectionSpec sp = spec;
    sp.seed = spec.seed + static_cast<std::uint64_t>(s);
    Graph g = generate(sp, 500);
    std::mt19937_64 rng(777 + s);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> scores(g.node_count());
    for (auto& x : scores) x = u(rng);
    null_sum += auroc(scores, *g.labels());
  }
  out.null_mean = null_sum / 5.0;
  out.runtime = seconds_since(t0);
  return out;
}

void criterion_detection(const BenchOutcome& bench) {
  require(bench.runtime < 600.0,
          "runtime " + fmt(bench.runtime) + "s exceeds 600s");
  require(bench.result.mean_auroc >= 0.75,
          "mean AUROC " + fmt(bench.result.mean_auroc) + " below 0.75");
  require(std::abs(bench.null_mean - 0.5) <= 0.05,
          "null-detector AUROC " + fmt(bench.null_mean) +
              " outside 0.5 +/- 0.05");
}

void criterion_ablation(const BenchOutcome& bench) {
  int ordered = 0;
  for (int s = 0; s < 5; ++s) {
    if (bench.result.auroc_full[s] >= bench.result.auroc_equivariant[s] &&
        bench.result.auroc_equivariant[s] >= bench.result.auroc_invariant[s])
      ++ordered;
  }
  std::ostringstream detail;
  for (int s = 0; s < 5; ++s)
    detail << " [" << fmt(bench.result.auroc_full[s]) << "/"
           << fmt(bench.result.auroc_equivariant[s]) << "/"
           << fmt(bench.result.auroc_invariant[s]) << "]";
  require(ordered >= 4, "full >= equivariant >= invariant holds on only " +
                            std::to_string(ordered) + "/5 seeds:" +
                            detail.str());
}

// --- criterion 10: linear scaling of the approximation ----------------------

void criterion_scaling() {
  // Ring plus the antipodal perfect matching: 3-regular, |E| = 3n/2.
  auto build = [](int n) {
    std::vector<Edge> edges;
    edges.reserve(3 * n / 2);
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    edges.push_back({0, n - 1, 1.0});
    for (int i = 0; i < n / 2; ++i) edges.push_back({i, i + n / 2, 1.0});
    return Graph(n, std::move(edges));
  };
  OrcConfig cfg;
  cfg.mode = OrcMode::approximate;
  auto time_once = [&](const Graph& g) {
    auto t0 = clock_type::now();
    auto cm = curvature_map(g, cfg);
    require(cm.values.size() == g.edge_count(), "missing curvature values");
    return seconds_since(t0);
  };
  Graph small = build(20000);   // |E| = 30k
  Graph large = build(40000);   // |E| = 60k
  time_once(small);  // warm-up
  double t_small = std::min(time_once(small), time_once(small));
  double t_large = std::min(time_once(large), time_once(large));
  double ratio = t_large / t_small;
  require(ratio <= 2.5, "60k/30k time ratio " + fmt(ratio) + " exceeds 2.5");
}

// --- criterion 11: byte-identical detect runs -------------------------------

void criterion_reproducibility() {
#ifndef CURVGAD_CLI_PATH
  throw Failure("CLI path not configured at build time");
#else
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "curvgad_accept";
  fs::create_directories(dir);

  InjectionSpec spec;
  spec.seed = 5;
  Graph g = generate(spec, 60);
  {
    std::ofstream edges(dir / "edges.txt");
    save_edge_list(g, edges);
    std::ofstream feats(dir / "features.csv");
    const auto& X = *g.features();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (j) feats << ',';
        feats << format_double(X(i, j));
      }
      feats << '\n';
    }
  }

  auto run_detect = [&](const std::string& out) {
    std::string cmd = std::string(CURVGAD_CLI_PATH) + " --seed 11 detect " +
                      (dir / "edges.txt").string() + " --features " +
                      (dir / "features.csv").string() +
                      " --mode approx --iters 5 --dim 6 --out " +
                      (dir / out).string() + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    require(rc == 0, "detect exited with status " + std::to_string(rc));
  };
  run_detect("scores_a.csv");
  run_detect("scores_b.csv");

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string a = slurp(dir / "scores_a.csv");
  std::string b = slurp(dir / "scores_b.csv");
  require(!a.empty(), "score CSV is empty");
  require(a == b, "score CSVs differ between identical runs");
#endif
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name,
                    const std::function<void()>& fn) {
    try {
      fn();
      std::cout << "[PASS] criterion " << id << ": " << name << '\n';
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "[FAIL] criterion " << id << ": " << name << " -- "
                << e.what() << '\n';
    }
    std::cout.flush();
  };

  report(1, "ORC bound sandwich on 200 random graphs", criterion_sandwich);
  report(2, "exact-ORC spot values", criterion_spot_values);
  report(3, "Ricci flow on the karate club", criterion_flow);
  report(4, "manifold algebra property suite", criterion_manifold);
  report(5, "Chebyshev oracle equivalence", criterion_chebyshev);
  report(6, "curvature decoder contract", criterion_decoder);
  report(7, "signature determinism", criterion_signature);

  BenchOutcome bench;
  bool bench_ok = false;
  try {
    bench = run_synthetic_benchmark();
    bench_ok = true;
  } catch (const std::exception& e) {
    std::cout << "[FAIL] criterion 8: synthetic detection -- benchmark run "
              << "failed: " << e.what() << '\n';
    std::cout << "[FAIL] criterion 9: ablation ordering -- benchmark run "
              << "failed: " << e.what() << '\n';
    failures += 2;
  }
  if (bench_ok) {
    report(8, "synthetic detection", [&] { criterion_detection(bench); });
    report(9, "ablation ordering", [&] { criterion_ablation(bench); });
  }

  report(10, "linear scaling of approximate curvature", criterion_scaling);
  report(11, "byte-identical detect runs", criterion_reproducibility);

  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
