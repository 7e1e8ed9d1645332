#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rmlr/linalg.hpp"

namespace rmlr {

/// Ground-truth mixture: k regression vectors (columns of W), per-component
/// noise standard deviations s and mixing weights p.
struct MetaParameter {
  Matrix W;  // d x k
  Vector s;  // k
  Vector p;  // k

  int dim() const { return static_cast<int>(W.rows()); }
  int components() const { return static_cast<int>(W.cols()); }

  /// Throws std::invalid_argument unless shapes agree, k >= 1, p is a
  /// probability vector (sum within 1e-12), s >= 0 and columns of W are
  /// pairwise distinct.
  void validate() const;
};

struct DerivedStats {
  double rho = 0.0;        // max_l sqrt(s_l^2 + |w_l|^2)
  double delta = 0.0;      // min_{i != j} |w_i - w_j|, +inf when k = 1
  double p_min = 0.0;
  double sigma_min = 0.0;  // smallest non-zero eigenvalue of sum_l p_l w_l w_l^T, 0 if rank 0
  double mean_label_variance = 0.0;  // sum_l p_l (s_l^2 + |w_l|^2)
};

/// Rejects k = 0 and any s_l <= 0.
DerivedStats derived_stats(const MetaParameter& meta);

/// Second moment of the rank-one statistic y x for a single example:
/// (sum_l p_l (s_l^2 + |w_l|^2)) I + 2 sum_l p_l w_l w_l^T.
Matrix rank_one_statistic_moment(const MetaParameter& meta);

/// Observable part of one regression task. Estimators only ever see this.
struct Task {
  Matrix X;  // t x d covariates
  Vector y;  // t labels

  int size() const { return static_cast<int>(y.size()); }
};

/// Evaluation-only metadata. Kept in a parallel array so that estimation
/// code, which takes std::span<const Task>, has no path to it.
struct TaskTruth {
  int component = -1;
  bool corrupted = false;
};

struct TaskSet {
  std::vector<Task> tasks;
  std::vector<TaskTruth> truth;

  std::size_t size() const { return tasks.size(); }
  bool empty() const { return tasks.empty(); }
  int corrupted_count() const;
};

/// n tasks of batch size t: z ~ multinomial(p), x ~ N(0, I_d),
/// y = w_z^T x + s_z * N(0, 1).
TaskSet sample_tasks(const MetaParameter& meta, int n, int t, std::uint64_t seed);

/// Rank-one statistics y_{i,j} x_{i,j}, one row per example, tasks in order.
Matrix rank_one_statistics(std::span<const Task> tasks);

/// Which task produced each row of rank_one_statistics().
std::vector<int> rank_one_owner(std::span<const Task> tasks);

/// Per-task averaged statistic (1/t) X^T y, one row per task.
Matrix averaged_statistics(std::span<const Task> tasks);

// ---------------------------------------------------------------------------
// Adversaries

enum class Strategy { none, figure2, cluster_kill, large_leverage, boundary };

const char* to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

struct AdversaryConfig {
  Strategy strategy = Strategy::none;
  double alpha = 0.0;
  /// large_leverage: |y x| = leverage_scale * rho^2 * sqrt(d).
  double leverage_scale = 10.0;
  /// boundary: projected score placed at margin * (first-filter cut).
  double boundary_margin = 0.99;
  /// boundary: energy orthogonal to the clean top-k subspace, as a
  /// multiple of the in-subspace magnitude.
  double boundary_orthogonal_scale = 3.0;
};

/// Replaces exactly floor(alpha * n) tasks according to cfg.strategy and
/// flags them corrupted. Untouched tasks are copied unchanged. The
/// adversary may inspect the meta-parameter and every task.
TaskSet corrupt(const TaskSet& tasks, const MetaParameter& meta, const AdversaryConfig& cfg,
                std::uint64_t seed);

struct SplitSizes {
  int n_light1 = 0, t_light1 = 1;
  int n_heavy = 0, t_heavy = 1;
  int n_light2 = 0, t_light2 = 1;
};

struct SplitAdversaries {
  AdversaryConfig light1, heavy, light2;
};

struct DatasetSplits {
  TaskSet light1, heavy, light2;
  double alpha_light1 = 0.0, alpha_heavy = 0.0, alpha_light2 = 0.0;
};

/// Samples and corrupts the three splits from independent streams of `seed`.
DatasetSplits make_splits(const MetaParameter& meta, const SplitSizes& sizes,
                          const SplitAdversaries& adv, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Point-cloud instance generators for the subspace experiments.

struct PointSample {
  Matrix clean;     // n x d, before corruption
  Matrix observed;  // n x d, after corruption
  std::vector<bool> corrupted;

  int corrupted_count() const;
};

/// Clean law: x1 ~ N(0, 1.1), x2 = z x1 / sqrt(1.1) with z Rademacher,
/// x_{3:d} ~ N(0, I). Each point is independently replaced with probability
/// alpha by (0, z' * 2 alpha^{1/4}, x_{3:d}).
PointSample figure2_points(int d, double alpha, int n, std::uint64_t seed);

/// Population second moment of the clean figure2 law: I_d + 0.1 e1 e1^T.
Matrix figure2_covariance(int d);

/// Four-point product distribution: coordinates in `heavy_coords` are
/// +-sqrt(nu) w.p. (1 - alpha/k)/2 each and +-(nu^2 k / alpha)^{1/4}
/// w.p. alpha/(2k) each; all other coordinates are +-sqrt(nu) w.p. 1/2.
/// Rows are samples.
Matrix lower_bound_points(int d, int k, double alpha, double nu, std::span<const int> heavy_coords,
                          int n, std::uint64_t seed);

/// Meta-parameter with k orthonormal regression directions scaled so that
/// min pairwise distance equals `separation`; directions are a seeded
/// random orthonormal frame in R^d.
MetaParameter orthogonal_preset(int d, int k, double separation, const Vector& s, const Vector& p,
                                std::uint64_t seed);

}  // namespace rmlr
