#include "rmlr/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rmlr/rng.hpp"

namespace rmlr {

void MetaParameter::validate() const {
  const auto k = W.cols();
  if (k < 1) throw std::invalid_argument("MetaParameter: k must be at least 1");
  if (W.rows() < 1) throw std::invalid_argument("MetaParameter: d must be at least 1");
  if (s.size() != k || p.size() != k) {
    throw std::invalid_argument("MetaParameter: s and p must have k entries");
  }
  if ((p.array() < 0.0).any()) throw std::invalid_argument("MetaParameter: negative mixing weight");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw std::invalid_argument("MetaParameter: weights must sum to 1");
  if ((s.array() < 0.0).any()) throw std::invalid_argument("MetaParameter: negative noise level");
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if ((W.col(i) - W.col(j)).norm() == 0.0) {
        throw std::invalid_argument("MetaParameter: regression vectors " + std::to_string(i) + " and " +
                                    std::to_string(j) + " coincide");
      }
    }
  }
}

DerivedStats derived_stats(const MetaParameter& meta) {
  if (meta.components() == 0) throw std::invalid_argument("derived_stats: k = 0");
  if ((meta.s.array() <= 0.0).any()) throw std::invalid_argument("derived_stats: every s_l must be positive");
  meta.validate();
  const int k = meta.components();
  DerivedStats out;
  out.delta = std::numeric_limits<double>::infinity();
  for (int l = 0; l < k; ++l) {
    const double r2 = meta.s(l) * meta.s(l) + meta.W.col(l).squaredNorm();
    out.rho = std::max(out.rho, std::sqrt(r2));
    out.mean_label_variance += meta.p(l) * r2;
    for (int j = l + 1; j < k; ++j) out.delta = std::min(out.delta, (meta.W.col(l) - meta.W.col(j)).norm());
  }
  out.p_min = meta.p.minCoeff();

  Matrix m = Matrix::Zero(meta.dim(), meta.dim());
  for (int l = 0; l < k; ++l) m += meta.p(l) * meta.W.col(l) * meta.W.col(l).transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  out.sigma_min = 0.0;
  if (largest > 0.0) {
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev(i) > 1e-10 * largest) {
        out.sigma_min = ev(i);
        break;
      }
    }
  }
  return out;
}

Matrix rank_one_statistic_moment(const MetaParameter& meta) {
  const int d = meta.dim();
  double c = 0.0;
  Matrix m = Matrix::Zero(d, d);
  for (int l = 0; l < meta.components(); ++l) {
    c += meta.p(l) * (meta.s(l) * meta.s(l) + meta.W.col(l).squaredNorm());
    m += 2.0 * meta.p(l) * meta.W.col(l) * meta.W.col(l).transpose();
  }
  m.diagonal().array() += c;
  return m;
}

int TaskSet::corrupted_count() const {
  return static_cast<int>(std::count_if(truth.begin(), truth.end(), [](const TaskTruth& t) { return t.corrupted; }));
}

TaskSet sample_tasks(const MetaParameter& meta, int n, int t, std::uint64_t seed) {
  if (n < 1 || t < 1) throw std::invalid_argument("sample_tasks: need n >= 1 and t >= 1");
  meta.validate();
  const int d = meta.dim();
  const std::vector<double> weights(meta.p.data(), meta.p.data() + meta.p.size());
  TaskSet out;
  out.tasks.reserve(static_cast<std::size_t>(n));
  out.truth.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    const int z = rng.categorical(weights);
    Task task{Matrix(t, d), Vector(t)};
    for (int j = 0; j < t; ++j) {
      for (int c = 0; c < d; ++c) task.X(j, c) = rng.normal();
    }
    const Vector signal = task.X * meta.W.col(z);
    for (int j = 0; j < t; ++j) task.y(j) = signal(j) + meta.s(z) * rng.normal();
    out.tasks.push_back(std::move(task));
    out.truth.push_back({z, false});
  }
  return out;
}

Matrix rank_one_statistics(std::span<const Task> tasks) {
  if (tasks.empty()) return Matrix(0, 0);
  Eigen::Index rows = 0;
  for (const Task& t : tasks) rows += t.X.rows();
  const auto d = tasks.front().X.cols();
  Matrix out(rows, d);
  Eigen::Index r = 0;
  for (const Task& t : tasks) {
    if (t.X.cols() != d) throw std::invalid_argument("rank_one_statistics: tasks disagree on dimension");
    if (t.X.rows() != t.y.size()) throw std::invalid_argument("rank_one_statistics: covariate/label length mismatch");
    out.middleRows(r, t.X.rows()) = t.y.asDiagonal() * t.X;
    r += t.X.rows();
  }
  return out;
}

std::vector<int> rank_one_owner(std::span<const Task> tasks) {
  std::vector<int> owner;
  for (std::size_t i = 0; i < tasks.size(); ++i) owner.insert(owner.end(), static_cast<std::size_t>(tasks[i].size()), static_cast<int>(i));
  return owner;
}

Matrix averaged_statistics(std::span<const Task> tasks) {
  if (tasks.empty()) return Matrix(0, 0);
  const auto d = tasks.front().X.cols();
  Matrix out(static_cast<Eigen::Index>(tasks.size()), d);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    if (t.size() < 1) throw std::invalid_argument("averaged_statistics: empty task");
    if (t.X.cols() != d) throw std::invalid_argument("averaged_statistics: tasks disagree on dimension");
    out.row(static_cast<Eigen::Index>(i)) = (t.X.transpose() * t.y).transpose() / static_cast<double>(t.size());
  }
  return out;
}

int PointSample::corrupted_count() const {
  return static_cast<int>(std::count(corrupted.begin(), corrupted.end(), true));
}

PointSample figure2_points(int d, double alpha, int n, std::uint64_t seed) {
  if (d < 2 || n < 1) throw std::invalid_argument("figure2_points: need d >= 2 and n >= 1");
  if (alpha < 0.0 || alpha >= 1.0) throw std::invalid_argument("figure2_points: alpha must be in [0, 1)");
  Rng rng(seed);
  const double sd1 = std::sqrt(1.1);
  const double magnitude = 2.0 * std::pow(alpha, 0.25);
  PointSample out{Matrix(n, d), Matrix(n, d), std::vector<bool>(static_cast<std::size_t>(n), false)};
  for (int i = 0; i < n; ++i) {
    const double x1 = sd1 * rng.normal();
    const double z = rng.rademacher();
    out.clean(i, 0) = x1;
    out.clean(i, 1) = z * x1 / sd1;
    for (int c = 2; c < d; ++c) out.clean(i, c) = rng.normal();
    out.observed.row(i) = out.clean.row(i);
    const double u = rng.uniform();
    const double z_adv = rng.rademacher();
    if (u < alpha) {
      out.corrupted[static_cast<std::size_t>(i)] = true;
      out.observed(i, 0) = 0.0;
      out.observed(i, 1) = z_adv * magnitude;
    }
  }
  return out;
}

Matrix figure2_covariance(int d) {
  Matrix sigma = Matrix::Identity(d, d);
  sigma(0, 0) = 1.1;
  return sigma;
}

Matrix lower_bound_points(int d, int k, double alpha, double nu, std::span<const int> heavy_coords, int n,
                          std::uint64_t seed) {
  if (d < 1 || n < 1) throw std::invalid_argument("lower_bound_points: need d >= 1 and n >= 1");
  if (!(nu > 0.0)) throw std::invalid_argument("lower_bound_points: nu must be positive");
  std::vector<bool> heavy(static_cast<std::size_t>(d), false);
  for (int c : heavy_coords) {
    if (c < 0 || c >= d) throw std::invalid_argument("lower_bound_points: coordinate out of range");
    if (heavy[static_cast<std::size_t>(c)]) throw std::invalid_argument("lower_bound_points: repeated coordinate");
    heavy[static_cast<std::size_t>(c)] = true;
  }
  if (!heavy_coords.empty()) {
    if (static_cast<int>(heavy_coords.size()) != k) {
      throw std::invalid_argument("lower_bound_points: index set must have exactly k coordinates");
    }
    if (!(alpha > 0.0) || alpha >= 1.0) {
      throw std::invalid_argument("lower_bound_points: alpha must be in (0, 1) when the index set is nonempty");
    }
  }
  const double light = std::sqrt(nu);
  const double heavy_atom = heavy_coords.empty() ? 0.0 : std::pow(nu * nu * k / alpha, 0.25);
  const double heavy_prob = heavy_coords.empty() ? 0.0 : alpha / k;
  Rng rng(seed);
  Matrix out(n, d);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) {
      const double sign = rng.rademacher();
      double magnitude = light;
      if (heavy[static_cast<std::size_t>(c)] && rng.uniform() < heavy_prob) magnitude = heavy_atom;
      out(i, c) = sign * magnitude;
    }
  }
  return out;
}

MetaParameter orthogonal_preset(int d, int k, double separation, const Vector& s, const Vector& p,
                                std::uint64_t seed) {
  if (k < 1 || k > d) throw std::invalid_argument("orthogonal_preset: need 1 <= k <= d");
  if (!(separation > 0.0)) throw std::invalid_argument("orthogonal_preset: separation must be positive");
  Rng rng(seed);
  Matrix g(d, k);
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < d; ++r) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, k);
  MetaParameter meta{q * (separation / std::sqrt(2.0)), s, p};
  meta.validate();
  return meta;
}

}  // namespace rmlr
