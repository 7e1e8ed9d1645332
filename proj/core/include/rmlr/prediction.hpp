#pragma once

#include <cstdint>

#include "rmlr/classification.hpp"
#include "rmlr/linalg.hpp"
#include "rmlr/model.hpp"

namespace rmlr {

/// Noise variances are floored at this value inside the likelihood.
inline constexpr double kVarianceFloor = 1e-12;

/// P(l | batch) proportional to p_l prod_j N(y_j; x_j^T w_l, s_l^2), in log space.
Vector posterior(const Task& batch, const FittedMeta& theta);

/// x_query^T w_{l*} with l* the posterior mode (lowest index on ties).
double map_predict(const Task& batch, const FittedMeta& theta, const Vector& x_query);

/// sum_l posterior(l) x_query^T w_l.
double bayes_predict(const Task& batch, const FittedMeta& theta, const Vector& x_query);

struct PredictionErrors {
  double mse_map = 0.0;
  double mse_bayes = 0.0;
  int trials = 0;
};

/// Fresh tasks from meta_true with tau training examples and one query each.
PredictionErrors eval_prediction(const MetaParameter& meta_true, const FittedMeta& theta, int tau, int trials,
                                 std::uint64_t seed);

/// Irreducible term sum_l p_l s_l^2.
double noise_floor(const MetaParameter& meta);

}  // namespace rmlr
