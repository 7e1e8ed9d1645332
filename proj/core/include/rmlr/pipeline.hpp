#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmlr/classification.hpp"
#include "rmlr/clustering.hpp"
#include "rmlr/robust_pca.hpp"

namespace rmlr {

struct PipelineOptions {
  int k = 1;
  double alpha_light1 = 0.0;
  double alpha_heavy = 0.0;
  double alpha_light2 = 0.0;
  double delta = 0.1;
  /// Fourth-moment bound for the filter. Unset: sqrt(k) rho^2, where rho
  /// is taken from `rho` or, failing that, estimated as the square root of
  /// a trimmed mean of squared light1 labels.
  std::optional<double> nu;
  std::optional<double> rho;
  /// Smallest mixing weight, if known; only sets the default cluster trim.
  std::optional<double> p_min;
  int boosts = 1;
  int moment_order = 1;
  /// Outlier budget for clustering. Unset: alpha_heavy / p_min (p_min
  /// defaulting to 1/k), capped below 1/4.
  std::optional<double> cluster_trim;
};

struct PipelineResult {
  SubspaceEstimate subspace;
  ClusterModel clusters;
  FittedMeta fitted;
  std::vector<std::string> skipped_stages;
  std::vector<std::string> warnings;
};

/// Subspace estimation on light1, clustering on heavy, classification and
/// refinement on light2. A stage whose split is empty is skipped and named
/// in skipped_stages.
PipelineResult run_pipeline(std::span<const Task> light1, std::span<const Task> heavy,
                            std::span<const Task> light2, const PipelineOptions& opts, std::uint64_t seed);

}  // namespace rmlr
