#include "rmlr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rmlr/rng.hpp"
#include "rmlr/robust_stats.hpp"

namespace rmlr {

namespace {

double estimate_rho(std::span<const Task> light1, double alpha) {
  std::vector<double> sq;
  for (const Task& task : light1) {
    for (Eigen::Index j = 0; j < task.y.size(); ++j) sq.push_back(task.y(j) * task.y(j));
  }
  if (sq.empty()) return 1.0;
  double m2 = 0.0;
  if (sq.size() >= 8) {
    m2 = trimmed_mean(sq, admissible_trim_level(std::min(std::max(alpha, 0.01), 0.125), sq.size()));
  } else {
    m2 = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(sq.size());
  }
  return std::sqrt(std::max(m2, 1e-12));
}

int task_dim(std::span<const Task> a, std::span<const Task> b, std::span<const Task> c) {
  for (auto split : {a, b, c}) {
    if (!split.empty()) return static_cast<int>(split.front().X.cols());
  }
  throw std::invalid_argument("run_pipeline: every split is empty");
}

}  // namespace

PipelineResult run_pipeline(std::span<const Task> light1, std::span<const Task> heavy,
                            std::span<const Task> light2, const PipelineOptions& opts, std::uint64_t seed) {
  const int d = task_dim(light1, heavy, light2);
  if (opts.k < 1 || opts.k > d) throw std::invalid_argument("run_pipeline: k must be in [1, d]");
  if (opts.boosts < 1) throw std::invalid_argument("run_pipeline: boosts must be positive");
  PipelineResult result;

  if (!light1.empty()) {
    const double rho = opts.rho.value_or(estimate_rho(light1, opts.alpha_light1));
    RobustSubspaceOptions sub;
    sub.k = opts.k;
    sub.alpha = opts.alpha_light1;
    sub.nu = opts.nu.value_or(std::sqrt(static_cast<double>(opts.k)) * rho * rho);
    sub.delta = opts.delta;
    result.subspace = robust_subspace(rank_one_statistics(light1), sub, derive_seed(seed, {stream_tag("subspace")}));
    if (result.subspace.diagnostics.alpha_clamped) {
      result.warnings.push_back("alpha_light1 clamped to " + std::to_string(result.subspace.diagnostics.alpha_used));
    }
  } else {
    result.subspace.u = Matrix::Identity(d, d);
    result.skipped_stages.emplace_back("subspace");
  }

  if (heavy.empty()) {
    result.skipped_stages.emplace_back("clustering");
    result.skipped_stages.emplace_back("refinement");
    return result;
  }
  ClusteringConfig cc;
  cc.k = opts.k;
  cc.m = opts.moment_order;
  cc.boosts = opts.boosts;
  const double p_min = opts.p_min.value_or(1.0 / opts.k);
  cc.trim = opts.cluster_trim.value_or(std::min(opts.alpha_heavy / p_min, 0.24));
  result.clusters = fit_cluster_model(heavy, result.subspace.u, cc, opts.alpha_heavy,
                                      derive_seed(seed, {stream_tag("cluster")}));

  if (light2.empty()) {
    result.skipped_stages.emplace_back("refinement");
    FittedMeta& f = result.fitted;
    f.w_hat = result.clusters.centers.transpose();
    f.s2_hat = result.clusters.radii;
    f.p_hat = Vector::Zero(opts.k);
    for (int label : result.clusters.assignments) {
      if (label != kOutlier) f.p_hat(label) += 1.0 / static_cast<double>(heavy.size());
    }
    f.empty_cluster.assign(static_cast<std::size_t>(opts.k), false);
    return result;
  }
  result.fitted = refine(light2, result.clusters, opts.alpha_light2);
  for (int l = 0; l < opts.k; ++l) {
    if (result.fitted.empty_cluster[static_cast<std::size_t>(l)]) {
      result.warnings.push_back("component " + std::to_string(l) + " kept from the coarse model");
    }
  }
  return result;
}

}  // namespace rmlr
