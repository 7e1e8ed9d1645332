#pragma once

#include <span>
#include <vector>

#include "rmlr/clustering.hpp"
#include "rmlr/linalg.hpp"
#include "rmlr/model.hpp"

namespace rmlr {

/// argmin_l (1 / 2 r_l^2) sum_j (y_j - x_j^T w_l)^2 + t log r_l; lowest label on ties.
int classify(const Task& batch, const ClusterModel& model);

/// Ordinary least squares via column-pivoted QR. Throws NumericalError when
/// X is rank deficient.
Vector ordinary_least_squares(const Matrix& x, const Vector& y);

/// Residual-trimming regression: max_rounds rounds of OLS, each followed by
/// removal of the ceil(alpha n / max_rounds) largest absolute residuals.
/// alpha == 0 is a single OLS solve.
Vector trimmed_least_squares(const Matrix& x, const Vector& y, double alpha, int max_rounds = 10);

struct FittedMeta {
  Matrix w_hat;  // d x k
  Vector s2_hat;
  Vector p_hat;
  std::vector<bool> empty_cluster;  // component kept from the coarse model

  int components() const { return static_cast<int>(w_hat.cols()); }
  int dim() const { return static_cast<int>(w_hat.rows()); }

  static FittedMeta from_truth(const MetaParameter& meta);
};

/// Classifies every light task, then per cluster fits w by trimmed least
/// squares at budget min(4 alpha / p_hat, 1/4), s^2 by a (trimmed) mean of
/// per-task residual means, and p_hat = |C_l| / n.
FittedMeta refine(std::span<const Task> light2, const ClusterModel& model, double alpha,
                  std::vector<int>* labels_out = nullptr);

}  // namespace rmlr
