#include "rmlr/moments.hpp"

#include <cmath>
#include <stdexcept>

#include "rmlr/rng.hpp"

namespace rmlr {

namespace {

Vector random_unit(int d, Rng& rng) {
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
  } while (v.norm() == 0.0);
  return v.normalized();
}

}  // namespace

SosMomentReport sos_moment_check(const MetaParameter& meta, int t, int n, int m_max, int n_directions,
                                 std::uint64_t seed) {
  meta.validate();
  if (m_max < 1) throw std::invalid_argument("sos_moment_check: m_max must be at least 1");
  if (t < 2 * m_max) throw std::invalid_argument("sos_moment_check: need t >= 2 m_max");
  if (n < 1 || n_directions < 1) throw std::invalid_argument("sos_moment_check: n and n_directions must be positive");
  const int d = meta.dim();
  const int k = meta.components();

  double rho = 0.0;
  for (int l = 0; l < k; ++l) rho = std::max(rho, std::sqrt(meta.s(l) * meta.s(l) + meta.W.col(l).squaredNorm()));

  Rng dir_rng(derive_seed(seed, {stream_tag("directions")}));
  Matrix dirs(d, n_directions);
  for (int j = 0; j < n_directions; ++j) dirs.col(j) = random_unit(d, dir_rng);

  // sums(m - 1, j) accumulates <e_i, v_j>^{2m}.
  Matrix sums = Matrix::Zero(m_max, n_directions);
  const std::vector<double> weights(meta.p.data(), meta.p.data() + k);
  Matrix x(t, d);
  Vector y(t);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {stream_tag("tasks"), static_cast<std::uint64_t>(i)}));
    const int z = rng.categorical(weights);
    for (int r = 0; r < t; ++r) {
      for (int c = 0; c < d; ++c) x(r, c) = rng.normal();
    }
    y = x * meta.W.col(z);
    for (int r = 0; r < t; ++r) y(r) += meta.s(z) * rng.normal();
    const Vector err = x.transpose() * y / static_cast<double>(t) - meta.W.col(z);
    const Vector proj = dirs.transpose() * err;
    for (int j = 0; j < n_directions; ++j) {
      const double sq = proj(j) * proj(j);
      double power = 1.0;
      for (int m = 1; m <= m_max; ++m) {
        power *= sq;
        sums(m - 1, j) += power;
      }
    }
  }

  SosMomentReport report;
  report.directions = dirs;
  report.passed = true;
  for (int m = 1; m <= m_max; ++m) {
    const double bound = std::pow(rho, 2.0 * m) * std::pow(2.0 * m, m) * std::pow(kSosMomentConstant, m) /
                         std::pow(static_cast<double>(t), m);
    for (int j = 0; j < n_directions; ++j) {
      SosMomentEntry e;
      e.m = m;
      e.direction = j;
      e.empirical = sums(m - 1, j) / static_cast<double>(n);
      e.bound = bound;
      e.ratio = e.empirical == 0.0 ? 0.0 : e.empirical / bound;
      report.max_ratio = std::max(report.max_ratio, e.ratio);
      if (!(e.ratio <= 1.0)) report.passed = false;
      report.entries.push_back(e);
    }
  }
  return report;
}

MomentMatrixEstimate averaged_statistic_moment(const Vector& beta, double sigma, int t, int replicates,
                                               std::uint64_t seed) {
  if (t < 1 || replicates < 2) throw std::invalid_argument("averaged_statistic_moment: need t >= 1 and replicates >= 2");
  if (!(sigma >= 0.0)) throw std::invalid_argument("averaged_statistic_moment: sigma must be non-negative");
  const auto d = beta.size();
  Rng rng(seed);
  Matrix sum = Matrix::Zero(d, d);
  Matrix sum_sq = Matrix::Zero(d, d);
  Matrix x(t, d);
  for (int r = 0; r < replicates; ++r) {
    for (int i = 0; i < t; ++i) {
      for (Eigen::Index c = 0; c < d; ++c) x(i, c) = rng.normal();
    }
    Vector y = x * beta;
    for (int i = 0; i < t; ++i) y(i) += sigma * rng.normal();
    const Vector b = x.transpose() * y / static_cast<double>(t);
    const Matrix outer = b * b.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
  }
  const double nr = static_cast<double>(replicates);
  MomentMatrixEstimate out;
  out.mean = sum / nr;
  const Matrix var = (sum_sq / nr - out.mean.cwiseProduct(out.mean)).cwiseMax(0.0) * (nr / (nr - 1.0));
  out.standard_error = (var / nr).cwiseSqrt();
  const double tt = static_cast<double>(t);
  out.expected = (1.0 + 1.0 / tt) * beta * beta.transpose() +
                 ((beta.squaredNorm() + sigma * sigma) / tt) * Matrix::Identity(d, d);
  return out;
}

std::vector<double> weighted_chi_square_moments(double a, double b) {
  // kappa_n = 2^{n-1} (n-1)! (a^n + b^n)
  const double k1 = a + b;
  const double k2 = 2.0 * (a * a + b * b);
  const double k3 = 8.0 * (a * a * a + b * b * b);
  const double k4 = 48.0 * (a * a * a * a + b * b * b * b);
  return {k1, k2 + k1 * k1, k3 + 3.0 * k2 * k1 + k1 * k1 * k1,
          k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 + k1 * k1 * k1 * k1};
}

ChiSquareDecompositionCheck chi_square_decomposition_check(const Vector& beta, double sigma, const Vector& v,
                                                           int replicates, std::uint64_t seed) {
  if (beta.size() != v.size()) throw std::invalid_argument("chi_square_decomposition_check: dimension mismatch");
  if (replicates < 2) throw std::invalid_argument("chi_square_decomposition_check: need replicates >= 2");
  if (!(sigma >= 0.0)) throw std::invalid_argument("chi_square_decomposition_check: sigma must be non-negative");
  const double sigma_y = std::sqrt(beta.squaredNorm() + sigma * sigma);
  ChiSquareDecompositionCheck out;
  out.a = 0.5 * (v.dot(beta) + v.norm() * sigma_y);
  out.b = 0.5 * (v.dot(beta) - v.norm() * sigma_y);
  out.exact = weighted_chi_square_moments(out.a, out.b);

  Rng rng(seed);
  std::vector<double> sum(8, 0.0);  // E[X^r], r = 1..8
  Vector x(beta.size());
  for (int r = 0; r < replicates; ++r) {
    for (Eigen::Index c = 0; c < x.size(); ++c) x(c) = rng.normal();
    const double y = x.dot(beta) + sigma * rng.normal();
    const double value = v.dot(x) * y;
    double power = 1.0;
    for (double& s : sum) {
      power *= value;
      s += power;
    }
  }
  const double nr = static_cast<double>(replicates);
  for (int r = 1; r <= 4; ++r) {
    const double mean = sum[static_cast<std::size_t>(r - 1)] / nr;
    const double second = sum[static_cast<std::size_t>(2 * r - 1)] / nr;
    const double se = std::sqrt(std::max(second - mean * mean, 0.0) / nr);
    out.empirical.push_back(mean);
    out.standard_error.push_back(se);
    const double diff = std::abs(mean - out.exact[static_cast<std::size_t>(r - 1)]);
    out.max_z = std::max(out.max_z, se > 0.0 ? diff / se : (diff > 0.0 ? INFINITY : 0.0));
  }
  return out;
}

}  // namespace rmlr
