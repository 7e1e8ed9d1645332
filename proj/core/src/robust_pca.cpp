#include "rmlr/robust_pca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rmlr/errors.hpp"
#include "rmlr/rng.hpp"

namespace rmlr {

namespace {

// ceil() that does not round exact products like 2 * 0.025 * 10000 up by one ulp.
std::size_t ceil_count(double x) {
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
}

void check_semi_orthogonal(const Matrix& u, Eigen::Index d, const char* who) {
  if (u.rows() != d) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  if (u.cols() < 1 || orthogonality_defect(u) > 1e-6) {
    throw std::invalid_argument(std::string(who) + ": U must have orthonormal columns");
  }
}

}  // namespace

Vector rank_one_scores(const Matrix& points, const Matrix& u) {
  check_semi_orthogonal(u, points.cols(), "rank_one_scores");
  return (points * u).rowwise().squaredNorm();
}

IndexSet first_filter(std::span<const double> scores, double alpha) {
  if (scores.empty()) throw std::invalid_argument("first_filter: no scores");
  if (!(alpha >= 0.0) || alpha >= 0.25) throw std::invalid_argument("first_filter: alpha must be in [0, 1/4)");
  const std::size_t n = scores.size();
  const std::size_t r = ceil_count(2.0 * alpha * static_cast<double>(n));
  if (2 * r >= n && r > 0) throw std::invalid_argument("first_filter: trimming would remove every score");
  IndexSet order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    return sa < sb || (sa == sb && a < b);
  });
  IndexSet kept(order.begin() + static_cast<std::ptrdiff_t>(r), order.end() - static_cast<std::ptrdiff_t>(r));
  std::sort(kept.begin(), kept.end());
  return kept;
}

DoubleFilterStep double_filter(const Matrix& points, std::span<const int> rows, int k, double alpha, double nu,
                               std::uint64_t seed) {
  if (!(alpha > 0.0) || alpha > kMaxFilterAlpha) throw std::invalid_argument("double_filter: alpha must be in (0, 1/36]");
  if (!(nu > 0.0)) throw std::invalid_argument("double_filter: nu must be positive");
  if (k < 1 || k > points.cols()) throw std::invalid_argument("double_filter: need 1 <= k <= d");
  if (rows.size() < static_cast<std::size_t>(k)) throw std::invalid_argument("double_filter: fewer points than k");

  DoubleFilterStep step;
  step.u = top_k_subspace_of_points(points, rows, k);
  step.scores.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    step.scores(static_cast<Eigen::Index>(i)) = (points.row(rows[i]) * step.u).squaredNorm();
  }
  const std::span<const double> z(step.scores.data(), rows.size());
  const IndexSet kept_pos = first_filter(z, alpha);
  if (kept_pos.empty()) throw std::invalid_argument("double_filter: first filter kept nothing");

  step.mean_all = step.scores.mean();
  double good_sum = 0.0;
  for (int pos : kept_pos) good_sum += z[static_cast<std::size_t>(pos)];
  step.mean_good = good_sum / static_cast<double>(kept_pos.size());
  step.threshold = kMeanShiftConstant * (alpha * step.mean_good + nu * std::sqrt(k * alpha));
  step.first_filter_kept.reserve(kept_pos.size());
  for (int pos : kept_pos) step.first_filter_kept.push_back(rows[static_cast<std::size_t>(pos)]);

  if (step.mean_all - step.mean_good <= step.threshold) {
    step.survivors.assign(rows.begin(), rows.end());
    return step;
  }

  step.filtered = true;
  std::vector<bool> in_good(rows.size(), false);
  for (int pos : kept_pos) in_good[static_cast<std::size_t>(pos)] = true;
  double max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!in_good[i]) max_excess = std::max(max_excess, z[i] - step.mean_good);
  }
  Rng rng(seed);
  step.uniform_draw = rng.uniform();
  step.readmit_level = step.uniform_draw * max_excess;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (in_good[i] || z[i] - step.mean_good <= step.readmit_level) step.survivors.push_back(rows[i]);
  }
  return step;
}

int restart_count(double delta) {
  if (!(delta > 0.0) || delta >= 0.5) throw std::invalid_argument("restart_count: delta must be in (0, 0.5)");
  return static_cast<int>(ceil_count(std::log(2.0 / delta) / std::log(6.0)));
}

SubspaceEstimate robust_subspace(const Matrix& points, const RobustSubspaceOptions& opts, std::uint64_t seed,
                                 const FilterObserver& observer) {
  const auto n = static_cast<int>(points.rows());
  const auto d = static_cast<int>(points.cols());
  if (opts.k < 1 || opts.k > d) throw std::invalid_argument("robust_subspace: need 1 <= k <= d");
  if (n < opts.k) throw std::invalid_argument("robust_subspace: fewer points than k");
  if (!(opts.alpha >= 0.0)) throw std::invalid_argument("robust_subspace: alpha must be non-negative");
  if (!(opts.nu > 0.0)) throw std::invalid_argument("robust_subspace: nu must be positive");
  const int restarts = restart_count(opts.delta);

  SubspaceEstimate out;
  FilterDiagnostics& diag = out.diagnostics;
  diag.alpha_requested = opts.alpha;
  diag.alpha_used = std::min(opts.alpha, kMaxFilterAlpha);
  diag.alpha_clamped = opts.alpha > kMaxFilterAlpha;

  if (diag.alpha_used == 0.0) {
    diag.survivors = all_indices(n);
    out.u = top_k_subspace_of_points(points, opts.k);
    return out;
  }

  const auto max_iterations = static_cast<int>(ceil_count(9.0 * diag.alpha_used * n));
  IndexSet best;
  for (int r = 0; r < restarts; ++r) {
    IndexSet current = all_indices(n);
    int iterations = 0;
    while (iterations < max_iterations) {
      ++iterations;
      DoubleFilterStep step = double_filter(points, current, opts.k, diag.alpha_used, opts.nu,
                                            derive_seed(seed, {static_cast<std::uint64_t>(r),
                                                               static_cast<std::uint64_t>(iterations)}));
      if (observer) observer(r, iterations, step);
      const bool unchanged = step.survivors.size() == current.size();
      current = std::move(step.survivors);
      if (unchanged) break;
    }
    diag.inner_iterations.push_back(iterations);
    if (best.size() < current.size()) {
      best = std::move(current);
      diag.best_restart = r;
    }
  }
  diag.restarts_run = restarts;
  diag.survivors = std::move(best);
  out.u = top_k_subspace_of_points(points, diag.survivors, opts.k);
  return out;
}

void annotate_removals(FilterDiagnostics& diagnostics, const std::vector<bool>& corrupted) {
  std::vector<bool> kept(corrupted.size(), false);
  for (int i : diagnostics.survivors) {
    if (i < 0 || static_cast<std::size_t>(i) >= corrupted.size()) {
      throw std::invalid_argument("annotate_removals: survivor index out of range");
    }
    kept[static_cast<std::size_t>(i)] = true;
  }
  int good = 0;
  int bad = 0;
  for (std::size_t i = 0; i < corrupted.size(); ++i) {
    if (kept[i]) continue;
    (corrupted[i] ? bad : good) += 1;
  }
  diagnostics.removed_good = good;
  diagnostics.removed_corrupted = bad;
}

SubspaceMetrics subspace_metrics(const Matrix& u, const Matrix& sigma, const Matrix& directions) {
  const auto d = sigma.rows();
  check_semi_orthogonal(u, d, "subspace_metrics");
  if (sigma.cols() != d) throw std::invalid_argument("subspace_metrics: Sigma must be square");
  if (directions.size() > 0 && directions.rows() != d) {
    throw std::invalid_argument("subspace_metrics: direction dimension mismatch");
  }
  const auto k = u.cols();
  SubspaceMetrics m;
  m.captured_variance = (u.transpose() * sigma * u).trace();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sigma + sigma.transpose()));
  const Matrix top = eig.eigenvectors().rightCols(k);
  const Matrix best_approx = top * eig.eigenvalues().tail(k).asDiagonal() * top.transpose();
  m.best_captured_variance = eig.eigenvalues().tail(k).sum();
  const Matrix proj = u * u.transpose();
  m.nuclear_error = nuclear_norm_symmetric(sigma - proj * sigma * proj) - nuclear_norm_symmetric(sigma - best_approx);

  m.residuals.resize(directions.cols());
  for (Eigen::Index l = 0; l < directions.cols(); ++l) {
    m.residuals(l) = (directions.col(l) - proj * directions.col(l)).norm();
  }
  return m;
}

SubspaceMetrics subspace_metrics(const Matrix& u, const MetaParameter& meta, const std::optional<Matrix>& sigma) {
  if (sigma) return subspace_metrics(u, *sigma, meta.W);
  return subspace_metrics(u, rank_one_statistic_moment(meta), meta.W);
}

}  // namespace rmlr
