#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rmlr/linalg.hpp"
#include "rmlr/model.hpp"

namespace rmlr {

inline constexpr int kOutlier = -1;

struct ClusteringConfig {
  int k = 1;
  int m = 1;           // moment order, diagnostics only
  double trim = 0.0;   // outlier fraction budget in [0, 1/4)
  int boosts = 1;      // median-of-means folds
  int max_iterations = 100;
  /// Seeding picks each new center at the (1 - max(trim, seed_quantile))
  /// quantile of nearest-center distance instead of the farthest point.
  double seed_quantile = 0.05;

  void validate() const;
};

/// Default fold count ceil(4 ln(1/delta)).
int default_boosts(double delta);

/// Projects each task's averaged statistic: U^T (1/t) sum_j y_j x_j. Rows are tasks.
Matrix embed_heavy(std::span<const Task> heavy, const Matrix& u);

struct ClusterAssignment {
  Matrix centers;                // k x dim, one center per row
  std::vector<int> assignments;  // label in [0, k) or kOutlier
};

/// Trimmed Lloyd clustering with median-of-means boosting across folds.
ClusterAssignment robust_cluster(const Matrix& points, const ClusteringConfig& cfg, std::uint64_t seed);

/// Rows c_l -> U c_l. Result is k x d.
Matrix lift(const Matrix& u, const Matrix& centers);

/// Per-cluster radius estimate: mean over member tasks of their mean squared
/// residual against the cluster center; trimmed at level alpha / p_hat
/// (capped at 1/8) when alpha > 0. `centers` is k x d.
Vector estimate_r2(std::span<const Task> heavy, const Matrix& centers, std::span<const int> assignments,
                   double alpha);

struct ClusterModel {
  Matrix centers;  // k x d
  Vector radii;    // r~_l^2
  std::vector<int> assignments;

  int components() const { return static_cast<int>(centers.rows()); }
};

/// embed_heavy -> robust_cluster -> lift -> estimate_r2.
ClusterModel fit_cluster_model(std::span<const Task> heavy, const Matrix& u, const ClusteringConfig& cfg,
                               double alpha, std::uint64_t seed);

}  // namespace rmlr
