#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rmlr/clustering.hpp"
#include "rmlr/errors.hpp"
#include "rmlr/rng.hpp"

using namespace rmlr;

namespace {

struct Blobs {
  Matrix points;
  std::vector<int> label;
  Matrix truth;  // k x dim
};

// Two clusters at +-10 e1 in the plane, Gaussian spread `spread` per coordinate.
/// heavy_tailed: Cauchy noise, where a single fold mean has no finite moments.
Blobs two_blobs(int n, double spread, std::uint64_t seed, bool heavy_tailed = false) {
  Rng rng(seed);
  std::cauchy_distribution<double> cauchy(0.0, 1.0);
  Blobs b{Matrix(n, 2), std::vector<int>(static_cast<std::size_t>(n)), Matrix(2, 2)};
  b.truth << 10, 0, -10, 0;
  for (int i = 0; i < n; ++i) {
    const int l = i % 2;
    b.label[static_cast<std::size_t>(i)] = l;
    for (int c = 0; c < 2; ++c) {
      const double noise = heavy_tailed ? cauchy(rng.engine()) : rng.normal();
      b.points(i, c) = b.truth(l, c) + spread * noise;
    }
  }
  return b;
}

double center_error(const Matrix& centers, const Matrix& truth) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < truth.rows(); ++j) {
    worst = std::max(worst, (centers.rowwise() - truth.row(j)).rowwise().norm().minCoeff());
  }
  return worst;
}

int nearest_row(const Matrix& rows, const Eigen::RowVectorXd& x) {
  Eigen::Index arg = 0;
  (rows.rowwise() - x).rowwise().squaredNorm().minCoeff(&arg);
  return static_cast<int>(arg);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 == 1 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

Matrix frame(const MetaParameter& m) {
  return m.W.householderQr().householderQ() * Matrix::Identity(m.dim(), m.components());
}

}  // namespace

TEST(EmbedHeavy, LawOfLargeNumbers) {
  const MetaParameter m = orthogonal_preset(6, 2, 4.0, Vector::Zero(2), Vector::Constant(2, 0.5), 1);
  const TaskSet ts = sample_tasks(m, 4, 10000, 2);
  const Matrix u = frame(m);
  const Matrix e = embed_heavy(ts.tasks, u);
  for (int i = 0; i < 4; ++i) {
    const Vector w = m.W.col(ts.truth[static_cast<std::size_t>(i)].component);
    EXPECT_LE((e.row(i).transpose() - u.transpose() * w).norm(), 0.05 * w.norm());
  }
}

TEST(EmbedHeavy, ZeroLabelsAndIdentityProjection) {
  std::vector<Task> tasks{{Matrix::Ones(1, 3), Vector::Zero(1)}};
  EXPECT_EQ(embed_heavy(tasks, Matrix::Identity(3, 2)).norm(), 0.0);
  const MetaParameter m = orthogonal_preset(4, 2, 2.0, Vector::Ones(2), Vector::Constant(2, 0.5), 1);
  const TaskSet ts = sample_tasks(m, 5, 7, 3);
  EXPECT_EQ(embed_heavy(ts.tasks, Matrix::Identity(4, 4)), averaged_statistics(ts.tasks));
  EXPECT_THROW(embed_heavy(ts.tasks, Matrix::Identity(5, 2)), std::invalid_argument);
}

TEST(RobustCluster, TwoSeparatedBlobs) {
  const Blobs b = two_blobs(400, 0.5, 1);
  ClusteringConfig cfg;
  cfg.k = 2;
  const ClusterAssignment out = robust_cluster(b.points, cfg, 3);
  EXPECT_LE(center_error(out.centers, b.truth), 0.5);
  for (int i = 0; i < 400; ++i) {
    const int a = out.assignments[static_cast<std::size_t>(i)];
    if (a == kOutlier) continue;
    EXPECT_EQ(nearest_row(b.truth, out.centers.row(a)), nearest_row(b.truth, b.points.row(i)));
  }
}

TEST(RobustCluster, SingleClusterIsTheMean) {
  const Blobs b = two_blobs(101, 3.0, 2);
  ClusteringConfig cfg;
  const ClusterAssignment out = robust_cluster(b.points, cfg, 1);
  EXPECT_LT((out.centers.row(0) - b.points.colwise().mean()).norm(), 1e-12);
  EXPECT_TRUE(std::all_of(out.assignments.begin(), out.assignments.end(), [](int a) { return a == 0; }));
}

TEST(RobustCluster, TrimMarksFarthestPointsAsOutliers) {
  const Blobs b = two_blobs(200, 0.5, 4);
  ClusteringConfig cfg;
  cfg.k = 2;
  cfg.trim = 0.1;
  const ClusterAssignment out = robust_cluster(b.points, cfg, 1);
  EXPECT_EQ(std::count(out.assignments.begin(), out.assignments.end(), kOutlier), 20);
}

TEST(RobustCluster, ResilientToFarOutliers) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Blobs clean = two_blobs(400, 1.0, seed);
    Blobs dirty = clean;
    for (int i = 0; i < 40; ++i) dirty.points.row(i * 10) << 0.0, 1000.0;
    ClusteringConfig cfg;
    cfg.k = 2;
    cfg.trim = 0.15;
    cfg.boosts = 5;
    const Matrix a = robust_cluster(clean.points, cfg, seed).centers;
    const Matrix c = robust_cluster(dirty.points, cfg, seed).centers;
    EXPECT_LT(center_error(c, a), 1.0) << seed;
  }
}

TEST(RobustCluster, Errors) {
  ClusteringConfig cfg;
  cfg.k = 3;
  EXPECT_THROW(robust_cluster(Matrix::Ones(2, 2), cfg, 1), std::invalid_argument);
  EXPECT_THROW(robust_cluster(Matrix::Ones(10, 2), cfg, 1), std::invalid_argument);
  cfg.trim = 0.3;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(RobustClusterProperty, PermutationEquivariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Blobs b = two_blobs(150, 2.0, seed);
    std::vector<int> perm(150);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
    Matrix shuffled(150, 2);
    for (int i = 0; i < 150; ++i) shuffled.row(i) = b.points.row(perm[static_cast<std::size_t>(i)]);
    ClusteringConfig cfg;
    cfg.k = 2;
    cfg.trim = 0.05;
    cfg.boosts = seed % 2 == 0 ? 1 : 3;
    const ClusterAssignment a = robust_cluster(b.points, cfg, 7);
    const ClusterAssignment c = robust_cluster(shuffled, cfg, 7);
    EXPECT_EQ(a.centers, c.centers);
    for (int i = 0; i < 150; ++i) {
      EXPECT_EQ(c.assignments[static_cast<std::size_t>(i)], a.assignments[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    }
  }
}

TEST(RobustClusterProperty, SingleFoldIgnoresFoldSeed) {
  const Blobs b = two_blobs(120, 1.0, 3);
  ClusteringConfig cfg;
  cfg.k = 2;
  EXPECT_EQ(robust_cluster(b.points, cfg, 1).centers, robust_cluster(b.points, cfg, 999).centers);
}

TEST(RobustClusterProperty, BoostingDoesNotIncreaseMedianError) {
  std::vector<double> single, boosted;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Blobs b = two_blobs(500, 1.0, seed, true);
    ClusteringConfig cfg;
    cfg.k = 2;
    single.push_back(center_error(robust_cluster(b.points, cfg, seed).centers, b.truth));
    cfg.boosts = 5;
    boosted.push_back(center_error(robust_cluster(b.points, cfg, seed).centers, b.truth));
  }
  EXPECT_LE(median_of(boosted), median_of(single));
}

TEST(DefaultBoosts, FourLogInverseDelta) {
  EXPECT_EQ(default_boosts(0.1), 10);
  EXPECT_EQ(default_boosts(0.5), 3);
}

TEST(Lift, BasisRoundTripAndNorm) {
  const MetaParameter m = orthogonal_preset(7, 3, 2.0, Vector::Ones(3), Vector::Constant(3, 1.0 / 3), 5);
  const Matrix u = frame(m);
  Matrix c = Matrix::Zero(1, 3);
  c(0, 0) = 1.0;
  EXPECT_LT((lift(u, c).row(0).transpose() - u.col(0)).norm(), 1e-15);
  Matrix many(4, 3);
  many << 1, 2, 3, -1, 0.5, 2, 0, 0, 1, 3, 3, 3;
  const Matrix lifted = lift(u, many);
  EXPECT_LT((lifted * u - many).cwiseAbs().maxCoeff(), 1e-10);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(lifted.row(i).norm(), many.row(i).norm(), 1e-10);
  EXPECT_THROW(lift(u, Matrix::Zero(1, 2)), std::invalid_argument);
}

TEST(Lift, ResidualTriangleDecomposition) {
  const MetaParameter m = orthogonal_preset(7, 2, 2.0, Vector::Ones(2), Vector::Constant(2, 0.5), 5);
  Rng rng(2);
  Matrix g(7, 2);
  for (int i = 0; i < 14; ++i) g(i % 7, i / 7) = rng.normal();
  const Matrix u = (m.W + 0.3 * g).householderQr().householderQ() * Matrix::Identity(7, 2);
  const Vector w = m.W.col(0);
  const Matrix c = (u.transpose() * w + Vector::Constant(2, 0.1)).transpose();
  const Vector lifted = lift(u, c).row(0).transpose();
  const double lhs = (lifted - w).norm();
  const double rhs = (lifted - u * u.transpose() * w).norm() + (w - u * u.transpose() * w).norm();
  EXPECT_LE(lhs, rhs + 1e-12);
}

TEST(EstimateR2, ExactCentersCleanTasks) {
  const MetaParameter m = orthogonal_preset(5, 2, 4.0, Vector::Ones(2), Vector::Constant(2, 0.5), 1);
  const int t = 50;
  const TaskSet ts = sample_tasks(m, 400, t, 3);
  std::vector<int> labels;
  for (const TaskTruth& tr : ts.truth) labels.push_back(tr.component);
  const Vector r2 = estimate_r2(ts.tasks, m.W.transpose(), labels, 0.0);
  for (int l = 0; l < 2; ++l) {
    const auto n_l = static_cast<double>(std::count(labels.begin(), labels.end(), l));
    EXPECT_LE(std::abs(r2(l) - 1.0), 3.0 * std::sqrt(2.0 / (t * n_l)));
  }
}

TEST(EstimateR2, ZeroNoiseIsZero) {
  const MetaParameter m = orthogonal_preset(5, 2, 4.0, Vector::Zero(2), Vector::Constant(2, 0.5), 1);
  const TaskSet ts = sample_tasks(m, 40, 10, 3);
  std::vector<int> labels;
  for (const TaskTruth& tr : ts.truth) labels.push_back(tr.component);
  EXPECT_LT(estimate_r2(ts.tasks, m.W.transpose(), labels, 0.0).maxCoeff(), 1e-25);
  EXPECT_LT(estimate_r2(ts.tasks, m.W.transpose(), labels, 0.05).maxCoeff(), 1e-25);
}

TEST(EstimateR2, EmptyClusterNamed) {
  const MetaParameter m = orthogonal_preset(5, 2, 4.0, Vector::Ones(2), Vector::Constant(2, 0.5), 1);
  const TaskSet ts = sample_tasks(m, 10, 5, 3);
  const std::vector<int> labels(10, 0);
  try {
    estimate_r2(ts.tasks, m.W.transpose(), labels, 0.0);
    FAIL() << "expected an error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("cluster 1"), std::string::npos);
  }
}

TEST(EstimateR2, CorruptedErrorWithinTrimmedMeanEnvelope) {
  const MetaParameter m = orthogonal_preset(5, 2, 4.0, Vector::Ones(2), Vector::Constant(2, 0.5), 1);
  const int t = 50, n = 1000;
  const double alpha = 0.02;
  TaskSet ts = sample_tasks(m, n, t, 8);
  std::vector<int> labels;
  for (const TaskTruth& tr : ts.truth) labels.push_back(tr.component);
  const Vector clean = estimate_r2(ts.tasks, m.W.transpose(), labels, alpha);
  for (int i = 0; i < static_cast<int>(alpha * n); ++i) ts.tasks[static_cast<std::size_t>(i * 50)].y *= 30.0;
  const Vector dirty = estimate_r2(ts.tasks, m.W.transpose(), labels, alpha);
  for (int l = 0; l < 2; ++l) {
    const double r2 = 1.0;
    const double envelope = 18.0 * std::sqrt(alpha / 0.5) * r2 * std::sqrt(2.0 / t);
    EXPECT_LE(std::abs(dirty(l) - r2), std::abs(clean(l) - r2) + envelope);
  }
}

TEST(FitClusterModel, RadiiAndCentersOnSeparatedInstance) {
  const MetaParameter m = orthogonal_preset(32, 3, 4.0, Vector::Ones(3), Vector::Constant(3, 1.0 / 3), 7);
  const DerivedStats st = derived_stats(m);
  const int t = 100;
  ASSERT_GE(st.delta, 10.0 * st.rho / std::sqrt(t));
  const TaskSet ts = sample_tasks(m, 900, t, 1);
  ClusteringConfig cfg;
  cfg.k = 3;
  const ClusterModel model = fit_cluster_model(ts.tasks, frame(m), cfg, 0.0, 2);
  for (int j = 0; j < 3; ++j) {
    const int l = nearest_row(model.centers, m.W.col(j).transpose());
    const double err = (model.centers.row(l).transpose() - m.W.col(j)).norm();
    EXPECT_LE(err, st.delta / 10.0);
    const double r2 = err * err + m.s(j) * m.s(j);
    EXPECT_LE(std::abs(model.radii(l) - r2), r2 * st.delta * st.delta / (50.0 * st.rho * st.rho));
  }
  EXPECT_GT(model.radii.minCoeff(), 0.0);
}
