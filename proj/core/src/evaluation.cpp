#include "rmlr/evaluation.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace rmlr {

std::vector<int> match_components(const Matrix& estimated_cols, const Matrix& true_cols) {
  if (estimated_cols.rows() != true_cols.rows() || estimated_cols.cols() != true_cols.cols()) {
    throw std::invalid_argument("match_components: shape mismatch");
  }
  const auto k = static_cast<int>(true_cols.cols());
  Matrix cost(k, k);
  for (int e = 0; e < k; ++e) {
    for (int j = 0; j < k; ++j) cost(e, j) = (estimated_cols.col(e) - true_cols.col(j)).norm();
  }
  std::vector<int> best(static_cast<std::size_t>(k));
  std::iota(best.begin(), best.end(), 0);
  if (k <= 8) {
    std::vector<int> perm = best;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int e = 0; e < k; ++e) c += cost(e, perm[static_cast<std::size_t>(e)]);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<std::tuple<double, int, int>> pairs;
  for (int e = 0; e < k; ++e) {
    for (int j = 0; j < k; ++j) pairs.emplace_back(cost(e, j), e, j);
  }
  std::sort(pairs.begin(), pairs.end());
  std::fill(best.begin(), best.end(), -1);
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (const auto& [c, e, j] : pairs) {
    if (best[static_cast<std::size_t>(e)] >= 0 || used[static_cast<std::size_t>(j)]) continue;
    best[static_cast<std::size_t>(e)] = j;
    used[static_cast<std::size_t>(j)] = true;
  }
  return best;
}

namespace {

double relative(double err, double scale) {
  if (scale > 0.0) return err / scale;
  return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

ComponentErrors fit_errors(const FittedMeta& fitted, const MetaParameter& meta) {
  meta.validate();
  const std::vector<int> match = match_components(fitted.w_hat, meta.W);
  const int k = meta.components();
  ComponentErrors out{Vector(k), Vector(k), Vector(k), Vector(k)};
  for (int e = 0; e < k; ++e) {
    const int j = match[static_cast<std::size_t>(e)];
    const double s = meta.s(j);
    out.w_error_abs(j) = (fitted.w_hat.col(e) - meta.W.col(j)).norm();
    out.w_error_rel(j) = relative(out.w_error_abs(j), s);
    out.s2_error_rel(j) = relative(std::abs(fitted.s2_hat(e) - s * s), s * s);
    out.p_error(j) = std::abs(fitted.p_hat(e) - meta.p(j));
  }
  return out;
}

double max_center_distance(const Matrix& centers, const MetaParameter& meta) {
  if (centers.cols() != meta.dim() || centers.rows() < 1) throw std::invalid_argument("max_center_distance: shape mismatch");
  double worst = 0.0;
  for (int j = 0; j < meta.components(); ++j) {
    const double nearest = (centers.rowwise() - meta.W.col(j).transpose()).rowwise().norm().minCoeff();
    worst = std::max(worst, nearest);
  }
  return worst;
}

}  // namespace rmlr
