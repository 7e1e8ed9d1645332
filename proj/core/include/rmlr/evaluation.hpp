#pragma once

#include <vector>

#include "rmlr/classification.hpp"
#include "rmlr/linalg.hpp"
#include "rmlr/model.hpp"

namespace rmlr {

/// Assignment of estimated components (rows / columns of the estimate) to
/// true components minimising the summed distance. Exhaustive for k <= 8,
/// greedy beyond. result[estimated] = true index.
std::vector<int> match_components(const Matrix& estimated_cols, const Matrix& true_cols);

/// Per true component, after matching.
struct ComponentErrors {
  Vector w_error_rel;   // |w_hat - w| / s
  Vector w_error_abs;   // |w_hat - w|
  Vector s2_error_rel;  // |s2_hat - s^2| / s^2
  Vector p_error;       // |p_hat - p|
};

ComponentErrors fit_errors(const FittedMeta& fitted, const MetaParameter& meta);

/// Max over true components of the distance to the nearest estimated center
/// (rows of `centers`).
double max_center_distance(const Matrix& centers, const MetaParameter& meta);

}  // namespace rmlr
