#include "rmlr/prediction.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "rmlr/rng.hpp"

namespace rmlr {

Vector posterior(const Task& batch, const FittedMeta& theta) {
  const int k = theta.components();
  if (k < 1 || theta.p_hat.size() != k || theta.s2_hat.size() != k) {
    throw std::invalid_argument("posterior: malformed fitted parameters");
  }
  if (batch.X.rows() > 0 && batch.X.cols() != theta.dim()) throw std::invalid_argument("posterior: dimension mismatch");
  if (!(theta.p_hat.minCoeff() >= 0.0) || !(theta.p_hat.sum() > 0.0)) {
    throw std::invalid_argument("posterior: weights must be non-negative with positive mass");
  }
  const double t = static_cast<double>(batch.size());
  Vector log_post(k);
  for (int l = 0; l < k; ++l) {
    if (theta.p_hat(l) == 0.0) {
      log_post(l) = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double s2 = std::max(theta.s2_hat(l), kVarianceFloor);
    const double sse = t > 0 ? (batch.y - batch.X * theta.w_hat.col(l)).squaredNorm() : 0.0;
    log_post(l) = std::log(theta.p_hat(l)) - 0.5 * t * std::log(2.0 * std::numbers::pi * s2) - sse / (2.0 * s2);
  }
  const double top = log_post.maxCoeff();
  Vector post = (log_post.array() - top).exp();
  return post / post.sum();
}

double map_predict(const Task& batch, const FittedMeta& theta, const Vector& x_query) {
  const Vector post = posterior(batch, theta);
  Eigen::Index best = 0;
  for (Eigen::Index l = 1; l < post.size(); ++l) {
    if (post(l) > post(best)) best = l;
  }
  return x_query.dot(theta.w_hat.col(best));
}

double bayes_predict(const Task& batch, const FittedMeta& theta, const Vector& x_query) {
  const Vector post = posterior(batch, theta);
  return (theta.w_hat.transpose() * x_query).dot(post);
}

PredictionErrors eval_prediction(const MetaParameter& meta_true, const FittedMeta& theta, int tau, int trials,
                                 std::uint64_t seed) {
  meta_true.validate();
  if (tau < 0 || trials < 1) throw std::invalid_argument("eval_prediction: need tau >= 0 and trials >= 1");
  if (theta.dim() != meta_true.dim()) throw std::invalid_argument("eval_prediction: dimension mismatch");
  const int d = meta_true.dim();
  const std::vector<double> weights(meta_true.p.data(), meta_true.p.data() + meta_true.components());
  PredictionErrors out;
  out.trials = trials;
  Task task{Matrix(tau, d), Vector(tau)};
  Vector query(d);
  for (int i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    const int z = rng.categorical(weights);
    const auto w = meta_true.W.col(z);
    for (int r = 0; r < tau; ++r) {
      for (int c = 0; c < d; ++c) task.X(r, c) = rng.normal();
      task.y(r) = task.X.row(r).dot(w) + meta_true.s(z) * rng.normal();
    }
    for (int c = 0; c < d; ++c) query(c) = rng.normal();
    const double y_query = query.dot(w) + meta_true.s(z) * rng.normal();
    const Vector post = posterior(task, theta);
    Eigen::Index best = 0;
    for (Eigen::Index l = 1; l < post.size(); ++l) {
      if (post(l) > post(best)) best = l;
    }
    const Vector preds = theta.w_hat.transpose() * query;
    const double e_map = preds(best) - y_query;
    const double e_bayes = preds.dot(post) - y_query;
    out.mse_map += e_map * e_map;
    out.mse_bayes += e_bayes * e_bayes;
  }
  out.mse_map /= trials;
  out.mse_bayes /= trials;
  return out;
}

double noise_floor(const MetaParameter& meta) {
  meta.validate();
  return meta.p.dot(meta.s.cwiseProduct(meta.s));
}

}  // namespace rmlr
