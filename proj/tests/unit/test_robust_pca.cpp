#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rmlr/model.hpp"
#include "rmlr/rng.hpp"
#include "rmlr/robust_pca.hpp"

using namespace rmlr;

namespace {

Matrix gaussian(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) m(i, c) = rng.normal();
  }
  return m;
}

Matrix light_statistics(int d, int k, int n, std::uint64_t seed) {
  const MetaParameter m = orthogonal_preset(d, k, 4.0, Vector::Ones(k), Vector::Constant(k, 1.0 / k), 11);
  return rank_one_statistics(sample_tasks(m, n, 1, seed).tasks);
}

double max_angle(const Matrix& u, const Matrix& v) { return principal_angles(u, v).maxCoeff(); }

int ceil_int(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

}  // namespace

TEST(RankOneScores, AlignedAndOrthogonal) {
  Matrix u = Matrix::Zero(3, 1);
  u(0, 0) = 1.0;
  Matrix p = Matrix::Zero(2, 3);
  p(0, 0) = 1.0;
  p(1, 1) = 1.0;
  const Vector z = rank_one_scores(p, u);
  EXPECT_DOUBLE_EQ(z(0), 1.0);
  EXPECT_DOUBLE_EQ(z(1), 0.0);
}

TEST(RankOneScores, MatchesTraceForm) {
  const Matrix p = gaussian(20, 6, 1);
  const Matrix u = top_k_subspace_of_points(gaussian(50, 6, 2), 2);
  const Vector z = rank_one_scores(p, u);
  for (int i = 0; i < 20; ++i) {
    const Matrix x = p.row(i).transpose() * p.row(i);
    EXPECT_NEAR(z(i), (u.transpose() * x * u).trace(), 1e-12);
  }
  EXPECT_THROW(rank_one_scores(p, Matrix::Identity(5, 1)), std::invalid_argument);
}

TEST(FirstFilter, AlphaZeroKeepsEverything) {
  const std::vector<double> z{3, 1, 2};
  EXPECT_EQ(first_filter(z, 0.0), (IndexSet{0, 1, 2}));
}

TEST(FirstFilter, QuantileRuleByHand) {
  std::vector<double> z;
  for (int i = 0; i <= 10; ++i) z.push_back(i);
  z.push_back(100);
  // ceil(2 * 0.05 * 12) = 2 per side.
  EXPECT_EQ(first_filter(z, 0.05), (IndexSet{2, 3, 4, 5, 6, 7, 8, 9}));
}

TEST(FirstFilter, TiesResolvedByIndex) {
  const std::vector<double> z(40, 1.0);
  const IndexSet kept = first_filter(z, 0.02);
  EXPECT_EQ(kept.size(), 40U - 2U * 2U);
  EXPECT_EQ(kept.front(), 2);
  EXPECT_EQ(kept.back(), 37);
}

TEST(FirstFilter, RejectsEmptyingTrim) {
  const std::vector<double> z(4, 1.0);
  EXPECT_THROW(first_filter(z, 0.25), std::invalid_argument);
}

TEST(DoubleFilter, IdenticalPointsAreReturnedUnchanged) {
  const Matrix p = Matrix::Ones(50, 4);
  const IndexSet rows = all_indices(50);
  const DoubleFilterStep step = double_filter(p, rows, 1, 0.02, 1.0, 3);
  EXPECT_FALSE(step.filtered);
  EXPECT_EQ(step.survivors, rows);
}

TEST(DoubleFilter, SingleFarOutlierIsAlwaysRemoved) {
  Matrix p = gaussian(200, 3, 5);
  p.row(17) << 1000.0, 0.0, 0.0;
  const IndexSet rows = all_indices(200);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DoubleFilterStep step = double_filter(p, rows, 1, 0.02, 1.0, seed);
    ASSERT_TRUE(step.filtered);
    EXPECT_FALSE(std::binary_search(step.survivors.begin(), step.survivors.end(), 17)) << seed;
  }
}

TEST(DoubleFilter, RejectsBadParameters) {
  const Matrix p = gaussian(30, 3, 1);
  const IndexSet rows = all_indices(30);
  EXPECT_THROW(double_filter(p, rows, 1, 0.0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(double_filter(p, rows, 1, 0.03, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(double_filter(p, rows, 1, 0.02, 0.0, 1), std::invalid_argument);
}

// Decision and add-back rule re-derived from the step's own scores.
TEST(DoubleFilterProperty, DecisionAndAddBackRecomputed) {
  const MetaParameter m = orthogonal_preset(8, 2, 4.0, Vector::Ones(2), Vector::Constant(2, 0.5), 2);
  int filtered = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const TaskSet clean = sample_tasks(m, 1500, 1, seed);
    const Strategy s = seed % 2 == 0 ? Strategy::large_leverage : Strategy::boundary;
    const Matrix p = rank_one_statistics(corrupt(clean, m, {s, 0.02}, seed + 100).tasks);
    const double nu = seed % 4 < 2 ? 0.05 : 9.0;
    const IndexSet rows = all_indices(static_cast<int>(p.rows()));
    const DoubleFilterStep step = double_filter(p, rows, 2, 0.02, nu, seed);

    const Vector z = rank_one_scores(p, step.u);
    EXPECT_LT((z - step.scores).cwiseAbs().maxCoeff(), 1e-9);
    const IndexSet kept = first_filter(std::span<const double>(z.data(), z.size()), 0.02);
    EXPECT_EQ(kept, step.first_filter_kept);
    double good = 0.0;
    for (int i : kept) good += z(i);
    good /= static_cast<double>(kept.size());
    const double all = z.mean();
    const double threshold = 48.0 * (0.02 * good + nu * std::sqrt(2 * 0.02));
    EXPECT_EQ(!step.filtered, all - good <= threshold);
    if (!step.filtered) {
      EXPECT_EQ(step.survivors, rows);
      continue;
    }
    ++filtered;
    double max_excess = -INFINITY;
    std::vector<bool> in_good(rows.size(), false);
    for (int i : kept) in_good[static_cast<std::size_t>(i)] = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!in_good[i]) max_excess = std::max(max_excess, z(static_cast<Eigen::Index>(i)) - good);
    }
    const double w = step.uniform_draw * max_excess;
    EXPECT_NEAR(w, step.readmit_level, 1e-9 * std::abs(w));
    for (int i : step.survivors) {
      if (!in_good[static_cast<std::size_t>(i)]) {
        EXPECT_LE(z(i) - good, step.readmit_level);
      }
    }
    for (int i : kept) EXPECT_TRUE(std::binary_search(step.survivors.begin(), step.survivors.end(), i));
  }
  EXPECT_GT(filtered, 0);
}

TEST(DoubleFilterProperty, ExpectedProgressOnLargeLeverageInstance) {
  const MetaParameter m = orthogonal_preset(8, 2, 4.0, Vector::Ones(2), Vector::Constant(2, 0.5), 2);
  const TaskSet ts = corrupt(sample_tasks(m, 3000, 1, 1), m, {Strategy::large_leverage, 0.02}, 2);
  const Matrix p = rank_one_statistics(ts.tasks);
  // Start from (G \ L) u E with L = 10 dropped good points.
  IndexSet rows;
  int dropped = 0;
  int bad = 0;
  for (int i = 0; i < static_cast<int>(ts.size()); ++i) {
    const bool corrupted = ts.truth[static_cast<std::size_t>(i)].corrupted;
    if (!corrupted && dropped < 10) {
      ++dropped;
      continue;
    }
    bad += corrupted ? 1 : 0;
    rows.push_back(i);
  }
  const double before = 2.0 * dropped + bad;
  const double nu = std::sqrt(2.0) * 9.0;
  double total = 0.0;
  const int runs = 200;
  for (int seed = 0; seed < runs; ++seed) {
    const DoubleFilterStep step = double_filter(p, rows, 2, 0.02, nu, static_cast<std::uint64_t>(seed));
    int lost = dropped;
    int remaining_bad = 0;
    for (int i : rows) {
      const bool kept = std::binary_search(step.survivors.begin(), step.survivors.end(), i);
      const bool corrupted = ts.truth[static_cast<std::size_t>(i)].corrupted;
      if (corrupted && kept) ++remaining_bad;
      if (!corrupted && !kept) ++lost;
    }
    total += 2.0 * lost + remaining_bad;
  }
  EXPECT_LE(total / runs, before);
}

TEST(RobustSubspace, RestartCount) {
  EXPECT_EQ(restart_count(0.1), 2);   // log_6(20) = 1.67
  EXPECT_EQ(restart_count(1.0 / 3.0), 1);  // log_6(6) = 1
  EXPECT_EQ(restart_count(0.01), 3);  // log_6(200) = 2.96
  EXPECT_THROW(restart_count(0.5), std::invalid_argument);
}

TEST(RobustSubspace, CleanDataMatchesOraclePca) {
  const int d = 8, k = 2;
  const Matrix p = light_statistics(d, k, 50 * d * k * k, 3);
  const SubspaceEstimate est = robust_subspace(p, {k, 0.001, 1.0, 0.1}, 4);
  EXPECT_LE(max_angle(est.u, top_k_subspace_of_points(p, k)), 0.05);
}

TEST(RobustSubspace, CleanConsistencyImprovesWithN) {
  const int d = 8, k = 2;
  const MetaParameter m = orthogonal_preset(d, k, 4.0, Vector::Ones(k), Vector::Constant(k, 0.5), 11);
  const Matrix truth = top_k_subspace(rank_one_statistic_moment(m), k);
  double small = 0.0, large = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RobustSubspaceOptions opts{k, 0.001, 3.0, 0.1};
    small += max_angle(robust_subspace(light_statistics(d, k, 800, seed), opts, seed).u, truth);
    large += max_angle(robust_subspace(light_statistics(d, k, 20000, seed + 50), opts, seed).u, truth);
  }
  EXPECT_LT(large, small);
}

TEST(RobustSubspace, DeterministicGivenSeed) {
  const MetaParameter m = orthogonal_preset(8, 2, 4.0, Vector::Ones(2), Vector::Constant(2, 0.5), 2);
  const Matrix p = rank_one_statistics(corrupt(sample_tasks(m, 2000, 1, 1), m, {Strategy::large_leverage, 0.02}, 2).tasks);
  const RobustSubspaceOptions opts{2, 0.02, 0.5, 0.05};
  const SubspaceEstimate a = robust_subspace(p, opts, 9);
  const SubspaceEstimate b = robust_subspace(p, opts, 9);
  EXPECT_EQ(a.diagnostics.survivors, b.diagnostics.survivors);
  EXPECT_EQ(a.u, b.u);
}

TEST(RobustSubspace, AlphaZeroIsPlainPcaAndLargeAlphaIsClamped) {
  const Matrix p = light_statistics(6, 2, 1000, 1);
  const SubspaceEstimate plain = robust_subspace(p, {2, 0.0, 1.0, 0.1}, 1);
  EXPECT_EQ(plain.diagnostics.restarts_run, 0);
  EXPECT_EQ(plain.diagnostics.survivors.size(), 1000U);
  EXPECT_LT(max_angle(plain.u, top_k_subspace_of_points(p, 2)), 1e-7);
  const SubspaceEstimate clamped = robust_subspace(p, {2, 0.1, 1.0, 0.1}, 1);
  EXPECT_TRUE(clamped.diagnostics.alpha_clamped);
  EXPECT_DOUBLE_EQ(clamped.diagnostics.alpha_used, 1.0 / 36.0);
  EXPECT_THROW(robust_subspace(p, {7, 0.01, 1.0, 0.1}, 1), std::invalid_argument);
}

// Nested survivors, the iteration cap, semi-orthogonality and best-set selection,
// across adversaries, alphas and seeds.
TEST(RobustSubspaceProperty, NestedBoundedAndOrthogonal) {
  const MetaParameter m = orthogonal_preset(8, 2, 4.0, Vector::Ones(2), Vector::Constant(2, 0.5), 2);
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    const double alpha = std::vector<double>{0.005, 0.01, 0.02, 1.0 / 36.0}[seed % 4];
    const Strategy s = std::vector<Strategy>{Strategy::large_leverage, Strategy::boundary, Strategy::figure2}[seed % 3];
    const int n = 1200;
    const Matrix p = rank_one_statistics(corrupt(sample_tasks(m, n, 1, seed), m, {s, alpha}, seed).tasks);
    std::map<int, IndexSet> last;
    std::map<int, int> calls;
    const RobustSubspaceOptions opts{2, alpha, seed % 2 == 0 ? 0.02 : 5.0, 0.01};
    const SubspaceEstimate est = robust_subspace(p, opts, seed, [&](int restart, int, const DoubleFilterStep& step) {
      auto it = last.find(restart);
      const IndexSet& previous = it == last.end() ? all_indices(n) : it->second;
      EXPECT_TRUE(std::includes(previous.begin(), previous.end(), step.survivors.begin(), step.survivors.end()));
      last[restart] = step.survivors;
      ++calls[restart];
    });
    const auto& diag = est.diagnostics;
    EXPECT_EQ(diag.restarts_run, restart_count(0.01));
    for (int r = 0; r < diag.restarts_run; ++r) {
      EXPECT_LE(diag.inner_iterations[static_cast<std::size_t>(r)], ceil_int(9 * alpha * n));
      EXPECT_EQ(calls[r], diag.inner_iterations[static_cast<std::size_t>(r)]);
    }
    EXPECT_LT(orthogonality_defect(est.u), 1e-8);
    std::size_t largest = 0;
    for (const auto& [r, set] : last) largest = std::max(largest, set.size());
    EXPECT_EQ(diag.survivors.size(), largest);
    EXPECT_EQ(diag.survivors, last[diag.best_restart]);
  }
}

TEST(RobustSubspace, Figure2CapturedVarianceRange) {
  const Matrix sigma = figure2_covariance(10);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const PointSample s = figure2_points(10, 0.02, 10000, seed);
    const SubspaceEstimate est = robust_subspace(s.observed, {1, 0.02, 1.1, 0.1}, seed);
    const double cv = subspace_metrics(est.u, sigma, Matrix(10, 0)).captured_variance;
    EXPECT_GE(cv, 1.05);
    EXPECT_LE(cv, 1.1);
  }
}

TEST(RobustSubspaceProperty, GuaranteeShapeOnFigure2Family) {
  const Matrix sigma = figure2_covariance(10);
  const double best = 1.1;
  const double nu = 1.1;
  for (double alpha : {0.005, 0.01, 0.015, 0.02, 0.025}) {
    const PointSample s = figure2_points(10, alpha, 10000, 42);
    const SubspaceEstimate est = robust_subspace(s.observed, {1, alpha, nu, 0.1}, 43);
    const SubspaceMetrics m = subspace_metrics(est.u, sigma, Matrix(10, 0));
    EXPECT_NEAR(m.best_captured_variance, best, 1e-12);
    EXPECT_LE(best - m.captured_variance, 48.0 * alpha * best + 110.0 * nu * std::sqrt(alpha));
  }
}

TEST(Hrpca, CleanFigure2NearOracleAndRemovesHalf) {
  const PointSample s = figure2_points(10, 0.0, 10000, 5);
  const SubspaceEstimate est = hrpca(s.observed, 1, 0.0, 6);
  const Matrix sigma = figure2_covariance(10);
  const double oracle = subspace_metrics(top_k_subspace_of_points(s.observed, 1), sigma, Matrix(10, 0)).captured_variance;
  EXPECT_NEAR(subspace_metrics(est.u, sigma, Matrix(10, 0)).captured_variance, oracle, 0.02);
  EXPECT_EQ(est.diagnostics.rounds_run, 5000);
  EXPECT_EQ(est.diagnostics.removal_order.size(), 5000U);
  std::vector<int> removed = est.diagnostics.removal_order;
  std::sort(removed.begin(), removed.end());
  EXPECT_EQ(std::adjacent_find(removed.begin(), removed.end()), removed.end());
  EXPECT_LT(orthogonality_defect(est.u), 1e-8);
}

TEST(Hrpca, DoubleFilterBeatsHrpcaOnFigure2) {
  const Matrix sigma = figure2_covariance(10);
  int wins = 0;
  const int seeds = 50;
  for (int seed = 0; seed < seeds; ++seed) {
    const PointSample s = figure2_points(10, 0.02, 10000, static_cast<std::uint64_t>(seed));
    const double filtered =
        subspace_metrics(robust_subspace(s.observed, {1, 0.02, 1.1, 0.1}, 1).u, sigma, Matrix(10, 0)).captured_variance;
    const double baseline = subspace_metrics(hrpca(s.observed, 1, 0.02, 2).u, sigma, Matrix(10, 0)).captured_variance;
    wins += filtered > baseline ? 1 : 0;
  }
  EXPECT_GE(wins, 40);
}

TEST(Hrpca, SurvivorsMatchSelectedRound) {
  const PointSample s = figure2_points(6, 0.02, 600, 2);
  const SubspaceEstimate est = hrpca(s.observed, 1, 0.02, 3);
  const auto& d = est.diagnostics;
  ASSERT_GE(d.selected_round, 0);
  EXPECT_EQ(d.survivors.size(), 600U - static_cast<std::size_t>(d.selected_round));
  for (int r = 0; r < d.selected_round; ++r) {
    EXPECT_FALSE(std::binary_search(d.survivors.begin(), d.survivors.end(), d.removal_order[static_cast<std::size_t>(r)]));
  }
  EXPECT_EQ(hrpca(s.observed, 1, 0.02, 3).u, est.u);
}

TEST(AnnotateRemovals, CountsByFlag) {
  FilterDiagnostics d;
  d.survivors = {0, 2, 3};
  annotate_removals(d, {false, true, false, true, false});
  EXPECT_EQ(*d.removed_good, 1);
  EXPECT_EQ(*d.removed_corrupted, 1);
}

TEST(SubspaceMetrics, SpanOfTruthHasZeroResiduals) {
  const MetaParameter m = orthogonal_preset(6, 2, 3.0, Vector::Ones(2), Vector::Constant(2, 0.5), 1);
  const Matrix u = m.W.householderQr().householderQ() * Matrix::Identity(6, 2);
  const SubspaceMetrics sm = subspace_metrics(u, m);
  EXPECT_LT(sm.residuals.maxCoeff(), 1e-12);
  EXPECT_NEAR(sm.nuclear_error, 0.0, 1e-9);
}

TEST(SubspaceMetrics, Figure2CapturedVariance) {
  const Matrix sigma = figure2_covariance(10);
  Matrix w = Matrix::Zero(10, 1);
  w(0, 0) = std::sqrt(0.1);
  Matrix e1 = Matrix::Zero(10, 1);
  e1(0, 0) = 1.0;
  Matrix e2 = Matrix::Zero(10, 1);
  e2(1, 0) = 1.0;
  EXPECT_NEAR(subspace_metrics(e1, sigma, w).captured_variance, 1.1, 1e-15);
  const SubspaceMetrics off = subspace_metrics(e2, sigma, w);
  EXPECT_NEAR(off.captured_variance, 1.0, 1e-15);
  EXPECT_NEAR(off.residuals(0), std::sqrt(0.1), 1e-15);
  // |Sigma - P Sigma P|_* - |Sigma - P_k(Sigma)|_* = (1.1 + 8) - 9
  EXPECT_NEAR(off.nuclear_error, 0.1, 1e-12);
  EXPECT_THROW(subspace_metrics(Matrix::Identity(9, 1), sigma, w), std::invalid_argument);
}
