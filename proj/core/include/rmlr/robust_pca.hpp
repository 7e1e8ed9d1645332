#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rmlr/linalg.hpp"
#include "rmlr/model.hpp"

namespace rmlr {

/// Largest alpha the double filter accepts.
inline constexpr double kMaxFilterAlpha = 1.0 / 36.0;

/// Constant in the mean-shift test mu_all - mu_good <= c (alpha mu_good + nu sqrt(k alpha)).
inline constexpr double kMeanShiftConstant = 48.0;

/// z_i = |U^T p_i|^2 for every row p_i of `points`.
Vector rank_one_scores(const Matrix& points, const Matrix& u);

/// Positions (ascending) that survive removal of the ceil(2 alpha n)
/// largest and ceil(2 alpha n) smallest scores. Ties are ordered by
/// position, so among equal scores the lower position is treated as smaller.
IndexSet first_filter(std::span<const double> scores, double alpha);

/// Everything one call of the double filter computed, so that callers and
/// tests can re-check the decision.
struct DoubleFilterStep {
  IndexSet survivors;     // subset of the input rows
  bool filtered = false;  // false: mean-shift test held, input returned unchanged
  double mean_all = 0.0;
  double mean_good = 0.0;
  double threshold = 0.0;  // c (alpha mu_good + nu sqrt(k alpha))
  double uniform_draw = 0.0;
  double readmit_level = 0.0;  // W
  Matrix u;                    // U_0 used for the scores
  Vector scores;               // z over the input rows, in input order
  IndexSet first_filter_kept;  // rows (not positions) kept by the first filter
};

/// One round of double filtering over `rows` of `points`.
/// Requires alpha in (0, 1/36], nu > 0, |rows| >= k.
DoubleFilterStep double_filter(const Matrix& points, std::span<const int> rows, int k, double alpha,
                               double nu, std::uint64_t seed);

struct FilterDiagnostics {
  IndexSet survivors;
  int restarts_run = 0;
  std::vector<int> inner_iterations;  // per restart
  int best_restart = -1;
  double alpha_requested = 0.0;
  double alpha_used = 0.0;
  bool alpha_clamped = false;
  // Evaluation-only; filled by annotate_removals().
  std::optional<int> removed_good;
  std::optional<int> removed_corrupted;
  // hrpca only
  int rounds_run = 0;
  int selected_round = -1;
  std::vector<int> removal_order;
};

struct SubspaceEstimate {
  Matrix u;  // d x k, orthonormal columns
  FilterDiagnostics diagnostics;
};

struct RobustSubspaceOptions {
  int k = 1;
  double alpha = 0.01;
  double nu = 1.0;
  double delta = 0.1;
};

/// Observer invoked after every double-filter round (restart, iteration, step).
using FilterObserver = std::function<void(int, int, const DoubleFilterStep&)>;

/// Number of restarts, ceil(log_6(2 / delta)).
int restart_count(double delta);

/// Repeated double filtering with restarts; returns the top-k eigenbasis of
/// the largest surviving set. alpha == 0 skips filtering (plain PCA);
/// alpha > 1/36 is clamped and recorded in the diagnostics.
SubspaceEstimate robust_subspace(const Matrix& points, const RobustSubspaceOptions& opts,
                                 std::uint64_t seed, const FilterObserver& observer = {});

/// Baseline: removes floor(n/2) points one at a time, each with probability
/// proportional to its score under the current top-k subspace, and returns
/// the candidate with the largest trimmed captured variance.
SubspaceEstimate hrpca(const Matrix& points, int k, double alpha, std::uint64_t seed);

/// Fills removed_good / removed_corrupted from evaluation-only flags.
void annotate_removals(FilterDiagnostics& diagnostics, const std::vector<bool>& corrupted);

struct SubspaceMetrics {
  double captured_variance = 0.0;  // Tr(U^T Sigma U)
  double best_captured_variance = 0.0;  // Tr(P_k(Sigma))
  double nuclear_error = 0.0;
  Vector residuals;                // |(I - U U^T) w_l|
};

/// Sigma defaults to rank_one_statistic_moment(meta).
SubspaceMetrics subspace_metrics(const Matrix& u, const MetaParameter& meta,
                                 const std::optional<Matrix>& sigma = std::nullopt);

/// Same, for a bare second-moment matrix; residuals are computed against the
/// columns of `directions` (may be empty).
SubspaceMetrics subspace_metrics(const Matrix& u, const Matrix& sigma, const Matrix& directions);

}  // namespace rmlr
