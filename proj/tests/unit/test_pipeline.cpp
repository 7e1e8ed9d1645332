#include <gtest/gtest.h>

#include <algorithm>

#include "rmlr/evaluation.hpp"
#include "rmlr/pipeline.hpp"

using namespace rmlr;

namespace {

MetaParameter standard_preset() {
  return orthogonal_preset(32, 3, 4.0, Vector::Ones(3), Vector::Constant(3, 1.0 / 3), 7);
}

bool skipped(const PipelineResult& r, const std::string& stage) {
  return std::find(r.skipped_stages.begin(), r.skipped_stages.end(), stage) != r.skipped_stages.end();
}

}  // namespace

TEST(Pipeline, CleanPresetRecoversParameters) {
  const MetaParameter m = standard_preset();
  const DatasetSplits s = make_splits(m, {20000, 1, 600, 50, 3000, 25}, {}, 3);
  PipelineOptions opts;
  opts.k = 3;
  const PipelineResult r = run_pipeline(s.light1.tasks, s.heavy.tasks, s.light2.tasks, opts, 4);
  EXPECT_TRUE(r.skipped_stages.empty());
  const ComponentErrors e = fit_errors(r.fitted, m);
  EXPECT_LE(e.w_error_rel.maxCoeff(), 0.1);
  EXPECT_LE(e.s2_error_rel.maxCoeff(), 0.1);
  EXPECT_LE(e.p_error.maxCoeff(), 0.05);
  EXPECT_LT(orthogonality_defect(r.subspace.u), 1e-8);
}

TEST(Pipeline, ClusterKillStillFindsEveryCenter) {
  const MetaParameter m = standard_preset();
  const double alpha_h = derived_stats(m).p_min / 32.0;
  SplitAdversaries adv;
  adv.heavy = {Strategy::cluster_kill, alpha_h};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const DatasetSplits s = make_splits(m, {20000, 1, 600, 50, 3000, 25}, adv, seed);
    ASSERT_GT(s.heavy.corrupted_count(), 0);
    PipelineOptions opts;
    opts.k = 3;
    opts.alpha_heavy = s.alpha_heavy;
    const PipelineResult r = run_pipeline(s.light1.tasks, s.heavy.tasks, s.light2.tasks, opts, seed);
    EXPECT_LE(max_center_distance(r.clusters.centers, m), derived_stats(m).delta / 2.0);
  }
}

TEST(Pipeline, OutputIndependentOfTruthMetadata) {
  const MetaParameter m = standard_preset();
  DatasetSplits s = make_splits(m, {3000, 1, 120, 30, 300, 10}, {}, 5);
  PipelineOptions opts;
  opts.k = 3;
  const PipelineResult a = run_pipeline(s.light1.tasks, s.heavy.tasks, s.light2.tasks, opts, 1);
  for (TaskSet* split : {&s.light1, &s.heavy, &s.light2}) {
    for (TaskTruth& t : split->truth) {
      t.component = (t.component + 1) % 3;
      t.corrupted = !t.corrupted;
    }
  }
  const PipelineResult b = run_pipeline(s.light1.tasks, s.heavy.tasks, s.light2.tasks, opts, 1);
  EXPECT_EQ(a.fitted.w_hat, b.fitted.w_hat);
  EXPECT_EQ(a.fitted.s2_hat, b.fitted.s2_hat);
  EXPECT_EQ(a.clusters.assignments, b.clusters.assignments);
}

TEST(Pipeline, EmptySplitsSkipStages) {
  const MetaParameter m = standard_preset();
  const DatasetSplits s = make_splits(m, {2000, 1, 90, 40, 200, 10}, {}, 6);
  PipelineOptions opts;
  opts.k = 3;
  const std::vector<Task> none;
  const PipelineResult no_light1 = run_pipeline(none, s.heavy.tasks, s.light2.tasks, opts, 1);
  EXPECT_TRUE(skipped(no_light1, "subspace"));
  EXPECT_FALSE(skipped(no_light1, "refinement"));
  const PipelineResult no_light2 = run_pipeline(s.light1.tasks, s.heavy.tasks, none, opts, 1);
  EXPECT_TRUE(skipped(no_light2, "refinement"));
  EXPECT_EQ(no_light2.fitted.w_hat.cols(), 3);
  const PipelineResult no_heavy = run_pipeline(s.light1.tasks, none, none, opts, 1);
  EXPECT_TRUE(skipped(no_heavy, "clustering"));
  EXPECT_THROW(run_pipeline(none, none, none, opts, 1), std::invalid_argument);
}

TEST(Pipeline, ClampedFilterAlphaIsReported) {
  const MetaParameter m = standard_preset();
  const DatasetSplits s = make_splits(m, {3000, 1, 90, 40, 300, 10}, {}, 7);
  PipelineOptions opts;
  opts.k = 3;
  opts.alpha_light1 = 0.05;
  const PipelineResult r = run_pipeline(s.light1.tasks, s.heavy.tasks, s.light2.tasks, opts, 1);
  EXPECT_TRUE(r.subspace.diagnostics.alpha_clamped);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Evaluation, MatchingIsPermutationInvariant) {
  const MetaParameter m = standard_preset();
  FittedMeta f = FittedMeta::from_truth(m);
  f.w_hat.col(0).swap(f.w_hat.col(2));
  std::swap(f.s2_hat(0), f.s2_hat(2));
  std::swap(f.p_hat(0), f.p_hat(2));
  const ComponentErrors e = fit_errors(f, m);
  EXPECT_EQ(e.w_error_abs.maxCoeff(), 0.0);
  EXPECT_EQ(match_components(f.w_hat, m.W), (std::vector<int>{2, 1, 0}));
}
