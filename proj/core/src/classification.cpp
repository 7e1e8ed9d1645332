#include "rmlr/classification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rmlr/errors.hpp"
#include "rmlr/robust_stats.hpp"

namespace rmlr {

namespace {

constexpr double kS2Floor = 1e-12;

int ceil_count(double x) { return static_cast<int>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x)))); }

Vector ols_rows(const Matrix& x, const Vector& y, const std::vector<int>& rows) {
  Matrix xs(static_cast<Eigen::Index>(rows.size()), x.cols());
  Vector ys(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    xs.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    ys(static_cast<Eigen::Index>(i)) = y(rows[i]);
  }
  return ordinary_least_squares(xs, ys);
}

}  // namespace

int classify(const Task& batch, const ClusterModel& model) {
  const int k = model.components();
  if (k < 1) throw std::invalid_argument("classify: model has no centers");
  if (model.radii.size() != k) throw std::invalid_argument("classify: one radius per center required");
  if (batch.X.cols() != model.centers.cols()) throw std::invalid_argument("classify: dimension mismatch");
  const double t = static_cast<double>(batch.size());
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int l = 0; l < k; ++l) {
    const double r2 = model.radii(l);
    if (!(r2 > 0.0)) throw std::invalid_argument("classify: radii must be positive");
    const double sse = (batch.y - batch.X * model.centers.row(l).transpose()).squaredNorm();
    const double value = sse / (2.0 * r2) + 0.5 * t * std::log(r2);
    if (value < best_value) {
      best_value = value;
      best = l;
    }
  }
  return best;
}

Vector ordinary_least_squares(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw std::invalid_argument("ordinary_least_squares: row count mismatch");
  if (x.rows() < x.cols()) throw NumericalError("ordinary_least_squares: fewer examples than unknowns");
  const Eigen::ColPivHouseholderQR<Matrix> qr(x);
  if (qr.rank() < x.cols()) throw NumericalError("ordinary_least_squares: design matrix is rank deficient");
  return qr.solve(y);
}

Vector trimmed_least_squares(const Matrix& x, const Vector& y, double alpha, int max_rounds) {
  if (x.rows() != y.size()) throw std::invalid_argument("trimmed_least_squares: row count mismatch");
  if (x.rows() <= x.cols()) throw std::invalid_argument("trimmed_least_squares: need more examples than unknowns");
  if (!(alpha >= 0.0) || alpha >= 0.25) throw std::invalid_argument("trimmed_least_squares: alpha must be in [0, 1/4)");
  if (max_rounds < 1) throw std::invalid_argument("trimmed_least_squares: max_rounds must be positive");
  if (alpha == 0.0) return ordinary_least_squares(x, y);

  const auto total = static_cast<int>(x.rows());
  const int per_round = ceil_count(alpha * total / max_rounds);
  std::vector<int> rows(static_cast<std::size_t>(total));
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> abs_res;
  for (int round = 0; round < max_rounds; ++round) {
    const Vector w = ols_rows(x, y, rows);
    const int drop = std::min(per_round, static_cast<int>(rows.size()) - static_cast<int>(x.cols()) - 1);
    if (drop <= 0) break;
    abs_res.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) abs_res[i] = std::abs(y(rows[i]) - x.row(rows[i]).dot(w));
    std::vector<int> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return abs_res[static_cast<std::size_t>(a)] > abs_res[static_cast<std::size_t>(b)];
    });
    std::vector<bool> removed(rows.size(), false);
    for (int i = 0; i < drop; ++i) removed[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
    std::vector<int> kept;
    kept.reserve(rows.size() - static_cast<std::size_t>(drop));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!removed[i]) kept.push_back(rows[i]);
    }
    rows.swap(kept);
  }
  return ols_rows(x, y, rows);
}

FittedMeta FittedMeta::from_truth(const MetaParameter& meta) {
  meta.validate();
  FittedMeta out;
  out.w_hat = meta.W;
  out.s2_hat = meta.s.cwiseProduct(meta.s);
  out.p_hat = meta.p;
  out.empty_cluster.assign(static_cast<std::size_t>(meta.components()), false);
  return out;
}

FittedMeta refine(std::span<const Task> light2, const ClusterModel& model, double alpha,
                  std::vector<int>* labels_out) {
  if (light2.empty()) throw std::invalid_argument("refine: light2 split is empty");
  if (!(alpha >= 0.0) || alpha >= 0.25) throw std::invalid_argument("refine: alpha must be in [0, 1/4)");
  const int k = model.components();
  const auto d = model.centers.cols();
  const double n = static_cast<double>(light2.size());

  std::vector<int> labels(light2.size());
  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < light2.size(); ++i) {
    labels[i] = classify(light2[i], model);
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }

  FittedMeta out;
  out.w_hat.resize(d, k);
  out.s2_hat.resize(k);
  out.p_hat.resize(k);
  out.empty_cluster.assign(static_cast<std::size_t>(k), false);
  for (int l = 0; l < k; ++l) {
    const auto& rows = members[static_cast<std::size_t>(l)];
    const double p_hat = static_cast<double>(rows.size()) / n;
    out.p_hat(l) = p_hat;
    Eigen::Index pooled = 0;
    for (int i : rows) pooled += light2[static_cast<std::size_t>(i)].X.rows();
    if (pooled <= d) {
      // Too few examples to identify w_l: keep the coarse estimate.
      out.w_hat.col(l) = model.centers.row(l).transpose();
      out.s2_hat(l) = model.radii(l);
      out.empty_cluster[static_cast<std::size_t>(l)] = true;
      continue;
    }
    Matrix x(pooled, d);
    Vector y(pooled);
    Eigen::Index at = 0;
    for (int i : rows) {
      const Task& task = light2[static_cast<std::size_t>(i)];
      x.middleRows(at, task.X.rows()) = task.X;
      y.segment(at, task.y.size()) = task.y;
      at += task.X.rows();
    }
    const double budget = alpha > 0.0 ? std::min(4.0 * alpha / p_hat, std::nextafter(0.25, 0.0)) : 0.0;
    const Vector w = trimmed_least_squares(x, y, budget);
    out.w_hat.col(l) = w;

    std::vector<double> residuals;
    residuals.reserve(rows.size());
    for (int i : rows) {
      const Task& task = light2[static_cast<std::size_t>(i)];
      if (task.size() == 0) continue;
      residuals.push_back((task.y - task.X * w).squaredNorm() / static_cast<double>(task.size()));
    }
    double s2 = 0.0;
    if (alpha > 0.0 && residuals.size() >= 8) {
      s2 = trimmed_mean(residuals, admissible_trim_level(std::min(4.0 * alpha / p_hat, 0.125), residuals.size()));
    } else if (!residuals.empty()) {
      s2 = std::accumulate(residuals.begin(), residuals.end(), 0.0) / static_cast<double>(residuals.size());
    }
    out.s2_hat(l) = std::max(s2, kS2Floor);
  }
  if (labels_out != nullptr) *labels_out = std::move(labels);
  return out;
}

}  // namespace rmlr
