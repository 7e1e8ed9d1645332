#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rmlr/robust_pca.hpp"
#include "rmlr/rng.hpp"

namespace rmlr {

namespace {

// The running accumulator is rebuilt from the survivors this often to keep
// rank-one downdates from drifting.
constexpr int kRebuildEvery = 512;

}  // namespace

SubspaceEstimate hrpca(const Matrix& points, int k, double alpha, std::uint64_t seed) {
  const auto n = static_cast<int>(points.rows());
  const auto d = static_cast<int>(points.cols());
  if (k < 1 || k > d) throw std::invalid_argument("hrpca: need 1 <= k <= d");
  if (n < 2 * k) throw std::invalid_argument("hrpca: too few points");
  if (!(alpha >= 0.0) || alpha >= 0.5) throw std::invalid_argument("hrpca: alpha must be in [0, 1/2)");

  const int rounds = n / 2;
  const auto trim = static_cast<Eigen::Index>(std::ceil(alpha * n - 1e-9 * std::max(1.0, alpha * n)));

  // Survivors are kept compacted in the leading rows of `alive`; `ids` maps
  // those rows back to input indices.
  Matrix alive = points;
  std::vector<int> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
  Eigen::Index m = n;

  Matrix acc = Matrix::Zero(d, d);
  acc.selfadjointView<Eigen::Lower>().rankUpdate(alive.transpose());
  acc = Matrix(acc.selfadjointView<Eigen::Lower>());

  Rng rng(seed);
  SubspaceEstimate out;
  FilterDiagnostics& diag = out.diagnostics;
  diag.alpha_requested = alpha;
  diag.alpha_used = alpha;
  diag.removal_order.reserve(static_cast<std::size_t>(rounds));

  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> sorted;
  for (int round = 0; round < rounds; ++round) {
    if (round > 0 && round % kRebuildEvery == 0) {
      acc.setZero();
      acc.selfadjointView<Eigen::Lower>().rankUpdate(alive.topRows(m).transpose());
      acc = Matrix(acc.selfadjointView<Eigen::Lower>());
    }
    const Matrix u = top_k_subspace(acc, k);
    const Vector scores = (alive.topRows(m) * u).rowwise().squaredNorm();

    sorted.assign(scores.data(), scores.data() + m);
    const Eigen::Index keep = std::max<Eigen::Index>(m - trim, 1);
    std::nth_element(sorted.begin(), sorted.begin() + (keep - 1), sorted.end());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < keep; ++i) sum += sorted[static_cast<std::size_t>(i)];
    const double value = sum / static_cast<double>(keep);
    if (value > best_value) {
      best_value = value;
      out.u = u;
      diag.selected_round = round;
    }

    const double total = scores.sum();
    Eigen::Index pick = m - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        running += scores(i);
        if (target < running) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)));
    }
    diag.removal_order.push_back(ids[static_cast<std::size_t>(pick)]);
    acc.noalias() -= alive.row(pick).transpose() * alive.row(pick);
    --m;
    alive.row(pick) = alive.row(m);
    ids[static_cast<std::size_t>(pick)] = ids[static_cast<std::size_t>(m)];
  }

  diag.rounds_run = rounds;
  std::vector<bool> removed(static_cast<std::size_t>(n), false);
  for (int r = 0; r < diag.selected_round; ++r) removed[static_cast<std::size_t>(diag.removal_order[static_cast<std::size_t>(r)])] = true;
  for (int i = 0; i < n; ++i) {
    if (!removed[static_cast<std::size_t>(i)]) diag.survivors.push_back(i);
  }
  return out;
}

}  // namespace rmlr
