#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rmlr/linalg.hpp"
#include "rmlr/model.hpp"
#include "rmlr/rng.hpp"

namespace rmlr {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::none: return "none";
    case Strategy::figure2: return "figure2";
    case Strategy::cluster_kill: return "cluster_kill";
    case Strategy::large_leverage: return "large_leverage";
    case Strategy::boundary: return "boundary";
  }
  return "none";
}

Strategy strategy_from_string(std::string_view name) {
  for (Strategy s : {Strategy::none, Strategy::figure2, Strategy::cluster_kill, Strategy::large_leverage,
                     Strategy::boundary}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown adversary strategy '" + std::string(name) + "'");
}

namespace {

double max_label_scale(const MetaParameter& meta) {
  double rho2 = 0.0;
  for (int l = 0; l < meta.components(); ++l) {
    rho2 = std::max(rho2, meta.s(l) * meta.s(l) + meta.W.col(l).squaredNorm());
  }
  return std::sqrt(rho2);
}

// Unit vector orthogonal to the columns of `basis` (when they do not span R^d).
Vector orthogonal_direction(const Matrix& basis, int d, Rng& rng) {
  Matrix q;
  if (basis.cols() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(basis);
    q = qr.householderQ() * Matrix::Identity(d, qr.rank());
  }
  for (int attempt = 0; attempt < 16; ++attempt) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
    if (q.cols() > 0 && q.cols() < d) v -= q * (q.transpose() * v);
    const double norm = v.norm();
    if (norm > 1e-8) return v / norm;
  }
  throw std::invalid_argument("adversary: could not draw an orthogonal direction");
}

std::vector<int> pick_tasks(const TaskSet& tasks, const MetaParameter& meta, const AdversaryConfig& cfg,
                            std::size_t budget, Rng& rng) {
  std::vector<int> order(tasks.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  if (cfg.strategy == Strategy::cluster_kill) {
    Eigen::Index smallest = 0;
    meta.p.minCoeff(&smallest);
    std::stable_partition(order.begin(), order.end(), [&](int i) {
      return tasks.truth[static_cast<std::size_t>(i)].component == static_cast<int>(smallest);
    });
  }
  order.resize(budget);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

TaskSet corrupt(const TaskSet& tasks, const MetaParameter& meta, const AdversaryConfig& cfg, std::uint64_t seed) {
  if (tasks.empty()) throw std::invalid_argument("corrupt: no tasks");
  if (tasks.truth.size() != tasks.tasks.size()) throw std::invalid_argument("corrupt: truth/task size mismatch");
  if (!(cfg.alpha >= 0.0) || cfg.alpha >= 1.0) throw std::invalid_argument("corrupt: alpha must be in [0, 1)");
  TaskSet out = tasks;
  if (cfg.strategy == Strategy::none) return out;

  const auto n = tasks.size();
  const auto budget = static_cast<std::size_t>(std::floor(cfg.alpha * static_cast<double>(n)));
  if (budget >= n) throw std::invalid_argument("corrupt: alpha * n must be below n");
  if (budget == 0) return out;

  const int d = tasks.tasks.front().X.cols();
  Rng rng(seed);
  const std::vector<int> victims = pick_tasks(tasks, meta, cfg, budget, rng);

  switch (cfg.strategy) {
    case Strategy::none:
      break;
    case Strategy::figure2: {
      if (d < 2) throw std::invalid_argument("corrupt(figure2): need d >= 2");
      const double magnitude = 2.0 * std::pow(cfg.alpha, 0.25);
      for (int i : victims) {
        Task& task = out.tasks[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < task.X.rows(); ++j) {
          task.X(j, 0) = 0.0;
          task.X(j, 1) = rng.rademacher() * magnitude;
        }
      }
      break;
    }
    case Strategy::cluster_kill: {
      if (meta.components() < 2) throw std::invalid_argument("corrupt(cluster_kill): need k >= 2");
      Eigen::Index target = 0;
      meta.p.minCoeff(&target);
      int donor = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int l = 0; l < meta.components(); ++l) {
        if (l == target) continue;
        const double dist = (meta.W.col(l) - meta.W.col(target)).norm();
        if (dist < best) {
          best = dist;
          donor = l;
        }
      }
      for (int i : victims) {
        Task& task = out.tasks[static_cast<std::size_t>(i)];
        const Vector signal = task.X * meta.W.col(donor);
        for (Eigen::Index j = 0; j < task.y.size(); ++j) task.y(j) = signal(j) + meta.s(donor) * rng.normal();
      }
      break;
    }
    case Strategy::large_leverage: {
      const double rho = max_label_scale(meta);
      const Vector v = orthogonal_direction(meta.W, d, rng);
      const double label = cfg.leverage_scale * rho * rho;
      for (int i : victims) {
        Task& task = out.tasks[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < task.X.rows(); ++j) {
          const double sign = rng.rademacher();
          task.X.row(j) = (sign * std::sqrt(static_cast<double>(d))) * v.transpose();
          task.y(j) = sign * label;
        }
      }
      break;
    }
    case Strategy::boundary: {
      const int k = meta.components();
      const Matrix stats = rank_one_statistics(tasks.tasks);
      const Matrix u = top_k_subspace_of_points(stats, std::min(k, d));
      const Vector scores = (stats * u).rowwise().squaredNorm();
      const auto total = static_cast<std::size_t>(scores.size());
      auto cut_rank = static_cast<std::size_t>(std::ceil(2.0 * cfg.alpha * static_cast<double>(total)));
      cut_rank = std::clamp<std::size_t>(cut_rank, 1, total);
      std::vector<double> sorted(scores.data(), scores.data() + scores.size());
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(cut_rank - 1), sorted.end(),
                       std::greater<>());
      const double cut = sorted[cut_rank - 1];
      const double in_plane = std::sqrt(cfg.boundary_margin * cut);
      const Vector v = u.cols() < d ? orthogonal_direction(u, d, rng) : Vector::Zero(d);
      std::size_t count = 0;
      for (int i : victims) {
        Task& task = out.tasks[static_cast<std::size_t>(i)];
        const Vector target = in_plane * u.col(static_cast<Eigen::Index>(count++ % static_cast<std::size_t>(u.cols()))) +
                              (cfg.boundary_orthogonal_scale * in_plane) * v;
        const double norm = target.norm();
        for (Eigen::Index j = 0; j < task.X.rows(); ++j) {
          const double sign = rng.rademacher();
          task.X.row(j) = (sign * std::sqrt(static_cast<double>(d)) / norm) * target.transpose();
          task.y(j) = sign * norm / std::sqrt(static_cast<double>(d));
        }
      }
      break;
    }
  }
  for (int i : victims) out.truth[static_cast<std::size_t>(i)].corrupted = true;
  return out;
}

DatasetSplits make_splits(const MetaParameter& meta, const SplitSizes& sizes, const SplitAdversaries& adv,
                          std::uint64_t seed) {
  if (sizes.n_light1 < 0 || sizes.n_heavy < 0 || sizes.n_light2 < 0) {
    throw std::invalid_argument("make_splits: split counts must be non-negative");
  }
  auto build = [&](std::string_view label, int n, int t, const AdversaryConfig& cfg, double& applied) {
    applied = 0.0;
    if (n == 0) return TaskSet{};
    const std::uint64_t tag = stream_tag(label);
    TaskSet clean = sample_tasks(meta, n, t, derive_seed(seed, {tag, stream_tag("sample")}));
    TaskSet out = corrupt(clean, meta, cfg, derive_seed(seed, {tag, stream_tag("corrupt")}));
    applied = static_cast<double>(out.corrupted_count()) / static_cast<double>(n);
    return out;
  };
  DatasetSplits splits;
  splits.light1 = build("light1", sizes.n_light1, sizes.t_light1, adv.light1, splits.alpha_light1);
  splits.heavy = build("heavy", sizes.n_heavy, sizes.t_heavy, adv.heavy, splits.alpha_heavy);
  splits.light2 = build("light2", sizes.n_light2, sizes.t_light2, adv.light2, splits.alpha_light2);
  return splits;
}

}  // namespace rmlr
