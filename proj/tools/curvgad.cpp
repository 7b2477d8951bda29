// curvgad: graph curvature toolkit and anomaly detector.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "curvgad/curvature.hpp"
#include "curvgad/flow.hpp"
#include "curvgad/graph.hpp"
#include "curvgad/log.hpp"
#include "curvgad/pipeline.hpp"
#include "curvgad/signature.hpp"
#include "curvgad/synth.hpp"

using json = nlohmann::json;
using namespace curvgad;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot open for writing: " + path);
  return out;
}

OrcMode parse_mode(const std::string& s) {
  if (s == "exact") return OrcMode::exact;
  if (s == "approx") return OrcMode::approximate;
  throw GraphError("mode must be exact or approx, got: " + s);
}

struct GlobalOpts {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string level = "warn";

  void apply() const {
    if (level == "quiet")
      log_level() = LogLevel::quiet;
    else if (level == "warn")
      log_level() = LogLevel::warn;
    else if (level == "info")
      log_level() = LogLevel::info;
    else if (level == "debug")
      log_level() = LogLevel::debug;
    else
      throw GraphError("unknown log level: " + level);
  }

  int worker_count() const {
    if (threads > 0) return threads;
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
  }
};

void log_config(const std::string& sub, const GlobalOpts& g,
                const std::string& detail) {
  log_info("run: " + sub + " seed=" + std::to_string(g.seed) +
           " threads=" + std::to_string(g.worker_count()) +
           (detail.empty() ? "" : " " + detail));
}

void write_curvature_csv(const Graph& g, const CurvatureMap& cm,
                         std::ostream& out) {
  out << "u,v,curvature\n";
  for (auto& e : g.edges())
    out << g.original_id(e.u) << ',' << g.original_id(e.v) << ','
        << format_double(cm.at(e.u, e.v)) << '\n';
}

std::vector<double> load_score_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path);
  std::vector<double> scores;
  std::string line;
  int lineno = 0;
  int score_col = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (lineno == 1) {
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] == "score") score_col = static_cast<int>(i);
      if (score_col >= 0) continue;  // header row
      score_col = cells.size() > 1 ? 1 : 0;  // headerless fallback
    }
    if (score_col >= static_cast<int>(cells.size()))
      throw GraphError(path + " line " + std::to_string(lineno) +
                       ": missing score column");
    try {
      scores.push_back(std::stod(cells[score_col]));
    } catch (const std::exception&) {
      throw GraphError(path + " line " + std::to_string(lineno) +
                       ": bad score value");
    }
  }
  return scores;
}

json signature_json(const ProductManifold& pm) {
  json comps = json::array();
  for (auto& c : pm.components) {
    std::string kind = c.kind == ManifoldKind::hyperbolic   ? "hyperbolic"
                       : c.kind == ManifoldKind::spherical ? "spherical"
                                                           : "euclidean";
    comps.push_back({{"kind", kind}, {"curvature", c.curvature},
                     {"dim", c.dim}});
  }
  return {{"components", comps}, {"total_dim", pm.total_dim()},
          {"signature", signature_string(pm)}};
}

void write_scores_csv(const Graph& g, const AnomalyReport& rep,
                      std::ostream& out) {
  out << "node_id,curv_err,adj_err,attr_err,score,rank\n";
  for (int i = 0; i < g.node_count(); ++i)
    out << g.original_id(i) << ',' << format_double(rep.curvature_error[i])
        << ',' << format_double(rep.adjacency_error[i]) << ','
        << format_double(rep.attribute_error[i]) << ','
        << format_double(rep.score[i]) << ',' << rep.rank[i] << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"graph curvature toolkit and anomaly detector"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "global random seed");
  app.add_option("--threads", g.threads,
                 "worker threads (0 = logical cores)");
  app.add_option("--log-level", g.level, "quiet|warn|info|debug");

  // --- curvature ---
  auto* c_cmd = app.add_subcommand("curvature", "per-edge Ollivier-Ricci curvature");
  std::string c_edges, c_mode = "exact", c_out;
  double c_delta = 0.5;
  c_cmd->add_option("edges", c_edges, "edge list file")->required();
  c_cmd->add_option("--delta", c_delta, "lazy walk mass at the node");
  c_cmd->add_option("--mode", c_mode, "exact|approx");
  c_cmd->add_option("--out", c_out, "output CSV (default stdout)");

  // --- flow ---
  auto* f_cmd = app.add_subcommand("flow", "discrete Ricci flow regularization");
  std::string f_edges, f_mode = "exact", f_out, f_trace;
  double f_eps = 0.5, f_thresh = 0.01;
  int f_max = 100;
  f_cmd->add_option("edges", f_edges, "edge list file")->required();
  f_cmd->add_option("--epsilon", f_eps, "flow step size");
  f_cmd->add_option("--threshold", f_thresh, "convergence threshold");
  f_cmd->add_option("--max-iters", f_max, "iteration cap");
  f_cmd->add_option("--mode", f_mode, "exact|approx");
  f_cmd->add_option("--out", f_out, "regularized weighted edge list");
  f_cmd->add_option("--trace", f_trace, "per-iteration stats CSV");

  // --- signature ---
  auto* s_cmd = app.add_subcommand("signature", "estimate product-manifold signature");
  std::string s_edges, s_json, s_mode = "exact";
  double s_eps = 0.1, s_delta = 0.5;
  int s_hmax = 2, s_smax = 2, s_dim = 48;
  s_cmd->add_option("edges", s_edges, "edge list file")->required();
  s_cmd->add_option("--eps-prime", s_eps, "flat-region threshold");
  s_cmd->add_option("--h-max", s_hmax, "max hyperbolic components");
  s_cmd->add_option("--s-max", s_smax, "max spherical components");
  s_cmd->add_option("--dim", s_dim, "total product dimension");
  s_cmd->add_option("--delta", s_delta, "curvature laziness");
  s_cmd->add_option("--mode", s_mode, "exact|approx");
  s_cmd->add_option("--json", s_json, "write signature JSON here");

  // --- detect ---
  auto* d_cmd = app.add_subcommand("detect", "dual-pipeline anomaly detection");
  std::string d_edges, d_features, d_labels, d_out = "scores.csv";
  DetectorConfig dc;
  bool d_supervised = false;
  std::string d_mode = "exact";
  d_cmd->add_option("edges", d_edges, "edge list file")->required();
  d_cmd->add_option("--features", d_features, "node feature CSV")->required();
  d_cmd->add_option("--labels", d_labels, "node label CSV (optional)");
  d_cmd->add_option("--signature", dc.signature,
                    "auto or manual, e.g. H:4,S:4");
  d_cmd->add_option("--filters", dc.filter_order, "Chebyshev filter order F");
  d_cmd->add_option("--dim", dc.d_p, "product-manifold dimension");
  d_cmd->add_option("--iters", dc.iterations, "training iterations");
  d_cmd->add_option("--lr", dc.learning_rate, "learning rate");
  d_cmd->add_option("--mode", d_mode, "curvature mode exact|approx");
  d_cmd->add_flag("--unsupervised", dc.unsupervised,
                  "ignore labels during training (default)");
  d_cmd->add_flag("--supervised", d_supervised,
                  "use labels in the objective when present");
  d_cmd->add_option("--out", d_out, "score CSV path");

  // --- eval ---
  auto* e_cmd = app.add_subcommand("eval", "AUROC of a score file");
  std::string e_scores, e_labels, e_json;
  e_cmd->add_option("--scores", e_scores, "score CSV")->required();
  e_cmd->add_option("--labels", e_labels, "label CSV")->required();
  e_cmd->add_option("--json", e_json, "write result JSON here");

  // --- bench ---
  auto* b_cmd = app.add_subcommand("bench", "synthetic detection benchmark");
  std::string b_spec, b_out = "report.json";
  int b_seeds = 5;
  b_cmd->add_option("--spec", b_spec, "benchmark spec JSON");
  b_cmd->add_option("--seeds", b_seeds, "number of seeds");
  b_cmd->add_option("--out", b_out, "report JSON path");

  CLI11_PARSE(app, argc, argv);
  g.apply();

  if (*c_cmd) {
    log_config("curvature", g, "edges=" + c_edges + " mode=" + c_mode);
    Graph graph = load_graph(c_edges);
    OrcConfig orc;
    orc.delta = c_delta;
    orc.mode = parse_mode(c_mode);
    orc.parallel = g.worker_count() > 1;
    orc.threads = g.worker_count();
    CurvatureMap cm = curvature_map(graph, orc);
    if (c_out.empty()) {
      write_curvature_csv(graph, cm, std::cout);
    } else {
      auto out = open_out(c_out);
      write_curvature_csv(graph, cm, out);
    }
    return 0;
  }

  if (*f_cmd) {
    log_config("flow", g, "edges=" + f_edges + " epsilon=" +
                              format_double(f_eps));
    Graph graph = load_graph(f_edges);
    FlowConfig fc;
    fc.epsilon = f_eps;
    fc.delta_threshold = f_thresh;
    fc.max_iters = f_max;
    fc.curvature_mode = parse_mode(f_mode);
    fc.parallel = g.worker_count() > 1;
    fc.threads = g.worker_count();
    FlowTrace trace = run_flow(graph, fc);
    if (!f_trace.empty()) {
      auto out = open_out(f_trace);
      out << "iteration,max_kappa_change,max_abs_kappa,min_weight\n";
      for (auto& r : trace.records)
        out << r.iteration << ',' << format_double(r.max_kappa_change) << ','
            << format_double(r.max_abs_kappa) << ','
            << format_double(r.min_weight) << '\n';
    }
    if (!f_out.empty()) {
      auto out = open_out(f_out);
      save_edge_list(trace.final_graph, out);
    }
    std::cout << (trace.converged ? "converged" : "not converged") << " after "
              << trace.records.size() << " iterations\n";
    if (!trace.converged) {
      log_warn("flow did not converge within " + std::to_string(f_max) +
               " iterations");
      return 2;
    }
    return 0;
  }

  if (*s_cmd) {
    log_config("signature", g, "edges=" + s_edges);
    Graph graph = load_graph(s_edges);
    OrcConfig orc;
    orc.delta = s_delta;
    orc.mode = parse_mode(s_mode);
    orc.parallel = g.worker_count() > 1;
    orc.threads = g.worker_count();
    CurvatureMap cm = curvature_map(graph, orc);
    SignatureConfig sc;
    sc.epsilon_prime = s_eps;
    sc.h_max = s_hmax;
    sc.s_max = s_smax;
    sc.d_p = s_dim;
    sc.seed = g.seed;
    ProductManifold pm = estimate_signature(cm, sc);
    std::cout << signature_string(pm) << '\n';
    if (!s_json.empty()) {
      auto out = open_out(s_json);
      out << signature_json(pm).dump(2) << '\n';
    }
    return 0;
  }

  if (*d_cmd) {
    log_config("detect", g, "edges=" + d_edges + " signature=" + dc.signature);
    Graph graph = load_graph(d_edges, d_features, d_labels);
    dc.seed = g.seed;
    dc.unsupervised = !d_supervised;
    dc.orc_mode = parse_mode(d_mode);
    DetectResult res = detect(graph, dc);
    if (res.trace.aborted_nan) {
      log_warn("training aborted on non-finite values");
      return 2;
    }
    auto out = open_out(d_out);
    write_scores_csv(graph, res.report, out);
    std::cout << "signature: " << signature_string(res.signature) << '\n';
    if (!std::isnan(res.report.auroc))
      std::cout << "auroc: " << format_double(res.report.auroc) << '\n';
    return 0;
  }

  if (*e_cmd) {
    log_config("eval", g, "scores=" + e_scores);
    std::vector<double> scores = load_score_column(e_scores);
    std::ifstream lin(e_labels);
    if (!lin) throw GraphError("cannot open " + e_labels);
    std::vector<int> labels = load_label_csv(lin);
    double a = auroc(scores, labels);
    std::cout << "auroc: " << format_double(a) << '\n';
    json j = {{"auroc", a}, {"n", scores.size()}};
    if (!e_json.empty()) {
      auto out = open_out(e_json);
      out << j.dump(2) << '\n';
    }
    return 0;
  }

  if (*b_cmd) {
    log_config("bench", g, "seeds=" + std::to_string(b_seeds));
    InjectionSpec spec;
    DetectorConfig det;
    int n = 500;
    if (!b_spec.empty()) {
      std::ifstream in(b_spec);
      if (!in) throw GraphError("cannot open " + b_spec);
      json j = json::parse(in);
      n = j.value("nodes", n);
      spec.anomaly_fraction = j.value("anomaly_fraction", spec.anomaly_fraction);
      spec.feature_dim = j.value("feature_dim", spec.feature_dim);
      if (j.contains("kind_weights"))
        spec.kind_weights = j["kind_weights"].get<std::vector<double>>();
      std::string base = j.value("base_graph", std::string("barabasi_albert"));
      if (base == "erdos_renyi")
        spec.base_graph = BaseGraph::erdos_renyi;
      else if (base == "barabasi_albert")
        spec.base_graph = BaseGraph::barabasi_albert;
      else if (base == "karate_club")
        spec.base_graph = BaseGraph::karate_club;
      else if (base == "grid")
        spec.base_graph = BaseGraph::grid;
      else if (base == "tree")
        spec.base_graph = BaseGraph::tree;
      else
        throw GraphError("unknown base_graph: " + base);
      det.d_p = j.value("dim", det.d_p);
      det.filter_order = j.value("filters", det.filter_order);
      det.iterations = j.value("iters", det.iterations);
      det.learning_rate = j.value("lr", det.learning_rate);
      det.signature = j.value("signature", det.signature);
      std::string mode = j.value("mode", std::string("exact"));
      det.orc_mode = parse_mode(mode);
    }
    spec.seed = g.seed;
    det.seed = g.seed;
    BenchmarkResult res = run_benchmark(spec, n, det, b_seeds);
    json j = {{"seeds", b_seeds},
              {"mean_auroc", res.mean_auroc},
              {"stdev_auroc", res.stdev_auroc},
              {"auroc_full", res.auroc_full},
              {"auroc_equivariant_only", res.auroc_equivariant},
              {"auroc_invariant_only", res.auroc_invariant},
              {"seconds",
               {{"generate", res.seconds_generate},
                {"curvature", res.seconds_curvature},
                {"flow", res.seconds_flow},
                {"train", res.seconds_train}}}};
    auto out = open_out(b_out);
    out << j.dump(2) << '\n';
    std::cout << "mean auroc: " << format_double(res.mean_auroc) << " (+/- "
              << format_double(res.stdev_auroc) << ")\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const GraphError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
}
