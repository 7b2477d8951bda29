#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvgad/curvature.hpp"
#include "curvgad/manifold.hpp"

namespace curvgad {

struct SignatureConfig {
  double epsilon_prime = 0.1;  // flat-region threshold
  int h_max = 2;
  int s_max = 2;
  int d_p = 48;
  std::vector<int> predefined_dims;  // optional, one per resulting component
  std::uint64_t seed = 0;

  void validate() const {
    if (!(epsilon_prime > 0.0))
      throw std::invalid_argument("epsilon_prime must be positive");
    if (h_max < 1 || s_max < 1)
      throw std::invalid_argument("h_max and s_max must be >= 1");
    if (d_p < 1) throw std::invalid_argument("d_p must be >= 1");
  }
};

namespace detail {

struct WeightedPoint {
  double value = 0.0;
  double weight = 0.0;
};

struct Clustering {
  std::vector<double> centroids;       // weighted means
  std::vector<double> cluster_weight;  // total normalized frequency
  double inertia = 0.0;
};

// 1-D weighted k-means with weighted-quantile seeding: deterministic, no
// k-means++ randomness needed on a line.
inline Clustering weighted_kmeans_1d(const std::vector<WeightedPoint>& pts,
                                     int k) {
  Clustering out;
  out.centroids.resize(k);
  double total = 0.0;
  for (auto& p : pts) total += p.weight;
  // Seed at the (i + 0.5)/k weighted quantiles.
  for (int i = 0; i < k; ++i) {
    double target = (i + 0.5) / k * total;
    double acc = 0.0;
    double v = pts.back().value;
    for (auto& p : pts) {
      acc += p.weight;
      if (acc >= target) {
        v = p.value;
        break;
      }
    }
    out.centroids[i] = v;
  }
  std::sort(out.centroids.begin(), out.centroids.end());

  std::vector<int> assign(pts.size(), 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int best = 0;
      double bestd = std::abs(pts[i].value - out.centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = std::abs(pts[i].value - out.centroids[c]);
        if (d < bestd) {
          bestd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    std::vector<double> wsum(k, 0.0), vsum(k, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      wsum[assign[i]] += pts[i].weight;
      vsum[assign[i]] += pts[i].weight * pts[i].value;
    }
    for (int c = 0; c < k; ++c)
      if (wsum[c] > 0.0) out.centroids[c] = vsum[c] / wsum[c];
    if (!changed && iter > 0) break;
  }

  out.cluster_weight.assign(k, 0.0);
  out.inertia = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double d = pts[i].value - out.centroids[assign[i]];
    out.inertia += pts[i].weight * d * d;
    out.cluster_weight[assign[i]] += pts[i].weight;
  }
  return out;
}

}  // namespace detail

// Manifold signature from the curvature histogram: cluster the weighted
// curvature values, map each cluster to a hyperbolic / spherical / euclidean
// component by its centroid sign against the flat threshold, allocate
// dimensions proportionally to cluster weights.
inline ProductManifold estimate_signature(const CurvatureMap& curvatures,
                                          const SignatureConfig& cfg) {
  cfg.validate();
  if (curvatures.values.empty())
    throw std::invalid_argument("empty curvature map");

  // Histogram with normalized frequencies.
  std::map<double, double> hist;
  for (auto& [edge, kappa] : curvatures.values) hist[kappa] += 1.0;
  std::vector<detail::WeightedPoint> pts;
  double total = static_cast<double>(curvatures.values.size());
  for (auto& [v, f] : hist) pts.push_back({v, f / total});

  // Elbow rule: smallest K whose refinement to K+1 buys < 10% inertia.
  const int cap =
      std::min<int>(cfg.h_max + cfg.s_max + 1, static_cast<int>(pts.size()));
  std::vector<detail::Clustering> runs;
  for (int k = 1; k <= cap; ++k)
    runs.push_back(detail::weighted_kmeans_1d(pts, k));
  int chosen = cap;
  for (int k = 1; k <= cap; ++k) {
    double in_k = runs[k - 1].inertia;
    if (in_k <= 1e-12) {
      chosen = k;
      break;
    }
    if (k < cap) {
      double gain = (in_k - runs[k].inertia) / in_k;
      if (gain < 0.10) {
        chosen = k;
        break;
      }
    }
  }
  const auto& clu = runs[chosen - 1];

  // Sorted cluster order keeps the output deterministic.
  std::vector<int> order(chosen);
  for (int i = 0; i < chosen; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return clu.centroids[a] < clu.centroids[b];
  });

  struct Comp {
    ManifoldKind kind;
    double curvature;
    double weight;
  };
  std::vector<Comp> comps;
  int n_h = 0, n_s = 0;
  double euclid_weight = 0.0;
  bool has_euclid = false;
  auto clamp_mag = [](double k) {
    double sign = k < 0 ? -1.0 : 1.0;
    return sign * std::clamp(std::abs(k), 0.01, 10.0);
  };
  for (int idx : order) {
    double kc = clu.centroids[idx];
    double wc = clu.cluster_weight[idx];
    if (wc <= 0.0) continue;
    if (kc < -cfg.epsilon_prime && n_h < cfg.h_max) {
      comps.push_back({ManifoldKind::hyperbolic, clamp_mag(kc), wc});
      ++n_h;
    } else if (kc > cfg.epsilon_prime && n_s < cfg.s_max) {
      comps.push_back({ManifoldKind::spherical, clamp_mag(kc), wc});
      ++n_s;
    } else {
      // Flat cluster, or a curved cluster whose capacity class is full.
      euclid_weight += wc;
      has_euclid = true;
    }
  }
  if (has_euclid) comps.push_back({ManifoldKind::euclidean, 0.0, euclid_weight});

  const int q = static_cast<int>(comps.size());
  if (cfg.d_p < q)
    throw std::invalid_argument("d_p smaller than component count");

  std::vector<int> dims(q, 0);
  if (!cfg.predefined_dims.empty()) {
    if (static_cast<int>(cfg.predefined_dims.size()) != q)
      throw std::invalid_argument("predefined dims count mismatch");
    dims = cfg.predefined_dims;
  } else {
    // Proportional floor allocation, remainder by largest fractional part.
    double wsum = 0.0;
    for (auto& c : comps) wsum += c.weight;
    std::vector<double> frac(q);
    int used = 0;
    for (int i = 0; i < q; ++i) {
      double exact = cfg.d_p * comps[i].weight / wsum;
      dims[i] = static_cast<int>(std::floor(exact));
      frac[i] = exact - dims[i];
      used += dims[i];
    }
    std::vector<int> rema(q);
    for (int i = 0; i < q; ++i) rema[i] = i;
    std::sort(rema.begin(), rema.end(), [&](int a, int b) {
      if (frac[a] != frac[b]) return frac[a] > frac[b];
      return a < b;
    });
    for (int r = 0; used < cfg.d_p; ++r, ++used) ++dims[rema[r % q]];
    // 1-D curved components are degenerate for the encoder; steal from the
    // largest component to enforce a floor of 2.
    int floor_dim = std::min(2, cfg.d_p / q);
    for (int i = 0; i < q; ++i) {
      while (dims[i] < floor_dim) {
        int big = static_cast<int>(
            std::max_element(dims.begin(), dims.end()) - dims.begin());
        if (dims[big] <= floor_dim) break;
        --dims[big];
        ++dims[i];
      }
    }
  }

  ProductManifold pm;
  for (int i = 0; i < q; ++i)
    pm.components.push_back({comps[i].kind, comps[i].curvature, dims[i]});
  pm.validate();
  if (pm.total_dim() != cfg.d_p)
    throw std::logic_error("dimension allocation failed to sum to d_p");
  return pm;
}

// Manual signature grammar: comma-separated `H:<dim>[@kappa]`, `S:<dim>[@kappa]`,
// `E:<dim>`, e.g. "H:24,S:24" or "H:8,H:8,S:16,E:16".
inline ProductManifold parse_signature(const std::string& text) {
  ProductManifold pm;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char kind = item[0];
    auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("bad signature component: " + item);
    auto at = item.find('@');
    int dim = std::stoi(item.substr(colon + 1, at == std::string::npos
                                                   ? std::string::npos
                                                   : at - colon - 1));
    double kappa = 0.0;
    bool has_kappa = at != std::string::npos;
    if (has_kappa) kappa = std::stod(item.substr(at + 1));
    switch (kind) {
      case 'H':
      case 'h':
        pm.components.push_back(
            {ManifoldKind::hyperbolic, has_kappa ? kappa : -1.0, dim});
        break;
      case 'S':
      case 's':
        pm.components.push_back(
            {ManifoldKind::spherical, has_kappa ? kappa : 1.0, dim});
        break;
      case 'E':
      case 'e':
        pm.components.push_back({ManifoldKind::euclidean, 0.0, dim});
        break;
      default:
        throw std::invalid_argument("unknown manifold kind: " + item);
    }
  }
  pm.validate();
  return pm;
}

}  // namespace curvgad
