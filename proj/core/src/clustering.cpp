#include "rmlr/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rmlr/errors.hpp"
#include "rmlr/rng.hpp"
#include "rmlr/robust_stats.hpp"

namespace rmlr {

void ClusteringConfig::validate() const {
  if (k < 1) throw std::invalid_argument("ClusteringConfig: k must be at least 1");
  if (m < 1) throw std::invalid_argument("ClusteringConfig: m must be at least 1");
  if (!(trim >= 0.0) || trim >= 0.25) throw std::invalid_argument("ClusteringConfig: trim must be in [0, 1/4)");
  if (boosts < 1) throw std::invalid_argument("ClusteringConfig: boosts must be at least 1");
  if (max_iterations < 1) throw std::invalid_argument("ClusteringConfig: max_iterations must be at least 1");
  if (!(seed_quantile >= 0.0) || seed_quantile >= 1.0) {
    throw std::invalid_argument("ClusteringConfig: seed_quantile must be in [0, 1)");
  }
}

int default_boosts(double delta) {
  if (!(delta > 0.0) || delta >= 1.0) throw std::invalid_argument("default_boosts: delta must be in (0, 1)");
  return std::max(1, static_cast<int>(std::ceil(4.0 * std::log(1.0 / delta))));
}

Matrix embed_heavy(std::span<const Task> heavy, const Matrix& u) {
  if (heavy.empty()) return Matrix(0, u.cols());
  if (u.rows() != heavy.front().X.cols()) throw std::invalid_argument("embed_heavy: dimension mismatch");
  return averaged_statistics(heavy) * u;
}

Matrix lift(const Matrix& u, const Matrix& centers) {
  if (centers.cols() != u.cols()) throw std::invalid_argument("lift: dimension mismatch");
  return centers * u.transpose();
}

namespace {

struct Nearest {
  std::vector<int> label;
  std::vector<double> dist2;
};

Nearest nearest_centers(const Matrix& points, const Matrix& centers) {
  const auto n = points.rows();
  Nearest out{std::vector<int>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double dd = (points.row(i) - centers.row(c)).squaredNorm();
      if (dd < best_d) {
        best_d = dd;
        best = static_cast<int>(c);
      }
    }
    out.label[static_cast<std::size_t>(i)] = best;
    out.dist2[static_cast<std::size_t>(i)] = best_d;
  }
  return out;
}

// Rows with the `count` largest distances (ties: the later row is dropped first).
std::vector<bool> farthest_mask(const std::vector<double>& dist2, std::size_t count) {
  std::vector<bool> mask(dist2.size(), false);
  if (count == 0) return mask;
  std::vector<int> order(dist2.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = dist2[static_cast<std::size_t>(a)];
    const double db = dist2[static_cast<std::size_t>(b)];
    return da < db || (da == db && a < b);
  });
  for (std::size_t i = order.size() - count; i < order.size(); ++i) mask[static_cast<std::size_t>(order[i])] = true;
  return mask;
}

Vector coordinatewise_trimmed_mean(const Matrix& points, const std::vector<int>& rows, double trim) {
  const auto dim = points.cols();
  Vector out(dim);
  std::vector<double> values(rows.size());
  const auto per_side = static_cast<std::size_t>(std::floor(trim * static_cast<double>(rows.size())));
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (std::size_t i = 0; i < rows.size(); ++i) values[i] = points(rows[i], c);
    out(c) = trim_mean_count(values, std::min(per_side, (rows.size() - 1) / 2));
  }
  return out;
}

Matrix seed_centers(const Matrix& points, const ClusteringConfig& cfg) {
  const auto n = points.rows();
  const auto dim = points.cols();
  Vector med(dim);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = points(i, c);
    med(c) = median(column);
  }
  Eigen::Index first = 0;
  (points.rowwise() - med.transpose()).rowwise().squaredNorm().minCoeff(&first);

  Matrix centers(cfg.k, dim);
  centers.row(0) = points.row(first);
  const double q = std::max(cfg.trim, cfg.seed_quantile);
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int j = 1; j < cfg.k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[static_cast<std::size_t>(i)] =
          std::min(nearest[static_cast<std::size_t>(i)], (points.row(i) - centers.row(j - 1)).squaredNorm());
    }
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = nearest[static_cast<std::size_t>(a)];
      const double db = nearest[static_cast<std::size_t>(b)];
      return da < db || (da == db && a < b);
    });
    auto pos = static_cast<std::size_t>(std::floor((1.0 - q) * static_cast<double>(n - 1)));
    if (nearest[static_cast<std::size_t>(order[pos])] == 0.0) pos = order.size() - 1;
    centers.row(j) = points.row(order[pos]);
  }
  return centers;
}

ClusterAssignment cluster_fold(const Matrix& points, const ClusteringConfig& cfg) {
  Matrix centers = seed_centers(points, cfg);
  const auto n = static_cast<std::size_t>(points.rows());
  const auto excluded_count = static_cast<std::size_t>(std::floor(cfg.trim * static_cast<double>(n)));
  std::vector<int> previous;
  std::vector<bool> previous_mask;
  Nearest near;
  std::vector<bool> mask;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    near = nearest_centers(points, centers);
    mask = farthest_mask(near.dist2, excluded_count);
    if (it > 0 && near.label == previous && mask == previous_mask) break;
    std::vector<std::vector<int>> members(static_cast<std::size_t>(cfg.k));
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) members[static_cast<std::size_t>(near.label[i])].push_back(static_cast<int>(i));
    }
    for (int c = 0; c < cfg.k; ++c) {
      const auto& rows = members[static_cast<std::size_t>(c)];
      if (!rows.empty()) centers.row(c) = coordinatewise_trimmed_mean(points, rows, cfg.trim).transpose();
    }
    previous = near.label;
    previous_mask = mask;
  }
  return {centers, near.label};
}

// Greedy minimum-distance matching: result[j] = row of `candidates` matched to reference row j.
std::vector<int> greedy_match(const Matrix& reference, const Matrix& candidates) {
  const auto k = reference.rows();
  std::vector<std::tuple<double, int, int>> pairs;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      pairs.emplace_back((reference.row(a) - candidates.row(b)).squaredNorm(), static_cast<int>(a), static_cast<int>(b));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> match(static_cast<std::size_t>(k), -1);
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (const auto& [dist, a, b] : pairs) {
    if (match[static_cast<std::size_t>(a)] >= 0 || used[static_cast<std::size_t>(b)]) continue;
    match[static_cast<std::size_t>(a)] = b;
    used[static_cast<std::size_t>(b)] = true;
  }
  return match;
}

}  // namespace

ClusterAssignment robust_cluster(const Matrix& points, const ClusteringConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto n = static_cast<int>(points.rows());
  if (n < cfg.k) throw std::invalid_argument("robust_cluster: fewer points than clusters");
  if (n < cfg.k * cfg.boosts) throw std::invalid_argument("robust_cluster: need at least k points per fold");
  if (cfg.k > 1 && (points.rowwise() - points.row(0)).cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("robust_cluster: all points identical, cannot form k > 1 clusters");
  }

  // Canonical (lexicographic) order makes the result independent of input order.
  std::vector<int> canonical(static_cast<std::size_t>(n));
  std::iota(canonical.begin(), canonical.end(), 0);
  std::sort(canonical.begin(), canonical.end(), [&](int a, int b) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
    }
    return a < b;
  });
  Rng rng(seed);
  std::shuffle(canonical.begin(), canonical.end(), rng.engine());

  std::vector<Matrix> fold_centers;
  for (int f = 0; f < cfg.boosts; ++f) {
    const auto begin = static_cast<std::size_t>(static_cast<long long>(n) * f / cfg.boosts);
    const auto end = static_cast<std::size_t>(static_cast<long long>(n) * (f + 1) / cfg.boosts);
    Matrix fold(static_cast<Eigen::Index>(end - begin), points.cols());
    for (std::size_t i = begin; i < end; ++i) fold.row(static_cast<Eigen::Index>(i - begin)) = points.row(canonical[i]);
    fold_centers.push_back(cluster_fold(fold, cfg).centers);
  }

  ClusterAssignment out;
  if (cfg.boosts == 1) {
    out.centers = fold_centers.front();
  } else {
    const Matrix& reference = fold_centers.front();
    out.centers.resize(cfg.k, points.cols());
    std::vector<std::vector<int>> matches;
    for (const Matrix& fc : fold_centers) matches.push_back(greedy_match(reference, fc));
    std::vector<double> values(fold_centers.size());
    for (int j = 0; j < cfg.k; ++j) {
      for (Eigen::Index c = 0; c < points.cols(); ++c) {
        for (std::size_t f = 0; f < fold_centers.size(); ++f) {
          values[f] = fold_centers[f](matches[f][static_cast<std::size_t>(j)], c);
        }
        out.centers(j, c) = median(values);
      }
    }
  }

  Nearest near = nearest_centers(points, out.centers);
  const auto excluded = static_cast<std::size_t>(std::floor(cfg.trim * n));
  const std::vector<bool> mask = farthest_mask(near.dist2, excluded);
  out.assignments = near.label;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.assignments[i] = kOutlier;
  }
  return out;
}

Vector estimate_r2(std::span<const Task> heavy, const Matrix& centers, std::span<const int> assignments, double alpha) {
  if (assignments.size() != heavy.size()) throw std::invalid_argument("estimate_r2: one assignment per task required");
  if (!(alpha >= 0.0)) throw std::invalid_argument("estimate_r2: alpha must be non-negative");
  const auto k = centers.rows();
  std::vector<std::vector<double>> residuals(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < heavy.size(); ++i) {
    const int label = assignments[i];
    if (label == kOutlier) continue;
    if (label < 0 || label >= k) throw std::invalid_argument("estimate_r2: assignment out of range");
    const Task& task = heavy[i];
    if (task.X.cols() != centers.cols()) throw std::invalid_argument("estimate_r2: dimension mismatch");
    const Vector r = task.y - task.X * centers.row(label).transpose();
    residuals[static_cast<std::size_t>(label)].push_back(r.squaredNorm() / static_cast<double>(task.size()));
  }
  Vector radii(k);
  for (Eigen::Index l = 0; l < k; ++l) {
    const auto& values = residuals[static_cast<std::size_t>(l)];
    if (values.empty()) throw NumericalError("estimate_r2: cluster " + std::to_string(l) + " is empty");
    const double p_hat = static_cast<double>(values.size()) / static_cast<double>(heavy.size());
    if (alpha > 0.0 && values.size() >= 8) {
      radii(l) = trimmed_mean(values, admissible_trim_level(std::min(alpha / p_hat, 0.125), values.size()));
    } else {
      radii(l) = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }
  }
  return radii;
}

ClusterModel fit_cluster_model(std::span<const Task> heavy, const Matrix& u, const ClusteringConfig& cfg, double alpha,
                               std::uint64_t seed) {
  const Matrix embedded = embed_heavy(heavy, u);
  ClusterAssignment clusters = robust_cluster(embedded, cfg, seed);
  ClusterModel model;
  model.centers = lift(u, clusters.centers);
  model.radii = estimate_r2(heavy, model.centers, clusters.assignments, alpha).cwiseMax(1e-12);
  model.assignments = std::move(clusters.assignments);
  return model;
}

}  // namespace rmlr
