#include "rmlr/bench/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "rmlr/bench/worker_pool.hpp"
#include "rmlr/errors.hpp"
#include "rmlr/evaluation.hpp"
#include "rmlr/moments.hpp"
#include "rmlr/pipeline.hpp"
#include "rmlr/prediction.hpp"
#include "rmlr/rng.hpp"
#include "rmlr/robust_pca.hpp"

namespace rmlr::bench {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t alpha_key(double alpha) { return std::bit_cast<std::uint64_t>(alpha); }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Cell {
  double alpha;
  int seed;
};

std::vector<Cell> cells_of(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (double a : cfg.alphas) {
    for (int s = 0; s < cfg.seeds; ++s) cells.push_back({a, s});
  }
  return cells;
}

// Runs every cell on the worker pool and concatenates per-cell records in cell order.
template <typename F>
std::vector<ResultRecord> run_cells(const ExperimentConfig& cfg, F&& body) {
  const std::vector<Cell> cells = cells_of(cfg);
  std::vector<std::vector<ResultRecord>> per_cell(cells.size());
  parallel_for(cells.size(), resolve_threads(cfg.threads), [&](std::size_t i) { per_cell[i] = body(cells[i]); });
  std::vector<ResultRecord> out;
  for (auto& records : per_cell) {
    for (auto& r : records) out.push_back(std::move(r));
  }
  return out;
}

class Recorder {
 public:
  Recorder(const char* experiment, const Cell& cell, bool timing)
      : experiment_(experiment), cell_(cell), timing_(timing) {}

  void add(const std::string& method, const std::string& metric, double value, double wall) {
    records_.push_back({experiment_, method, cell_.alpha, cell_.seed, metric, value, timing_ ? wall : 0.0});
  }

  std::vector<ResultRecord> take() { return std::move(records_); }

 private:
  const char* experiment_;
  Cell cell_;
  bool timing_;
  std::vector<ResultRecord> records_;
};

}  // namespace

std::vector<ResultRecord> run_subspace_bench(const ExperimentConfig& cfg) {
  if (cfg.experiment != Experiment::subspace) throw ConfigError("run_subspace_bench: experiment must be subspace");
  const SubspaceSpec& spec = cfg.subspace;
  const Matrix sigma = figure2_covariance(spec.d);
  const double nu = spec.nu.value_or(std::sqrt(static_cast<double>(spec.k)) * 1.1);

  return run_cells(cfg, [&](const Cell& cell) {
    Recorder rec("subspace", cell, cfg.timing);
    const PointSample sample = figure2_points(
        spec.d, cell.alpha, spec.n,
        derive_seed(cfg.master_seed, {stream_tag("figure2"), alpha_key(cell.alpha), static_cast<std::uint64_t>(cell.seed)}));
    for (Method method : cfg.methods) {
      const std::string name = to_string(method);
      const std::uint64_t method_seed =
          derive_seed(cfg.master_seed, {stream_tag(name), alpha_key(cell.alpha), static_cast<std::uint64_t>(cell.seed)});
      const auto start = Clock::now();
      SubspaceEstimate est;
      if (method == Method::oracle) {
        IndexSet clean;
        for (int i = 0; i < spec.n; ++i) {
          if (!sample.corrupted[static_cast<std::size_t>(i)]) clean.push_back(i);
        }
        est.u = top_k_subspace_of_points(sample.observed, clean, spec.k);
      } else if (method == Method::double_filter) {
        est = robust_subspace(sample.observed, {spec.k, cell.alpha, nu, spec.delta}, method_seed);
      } else {
        est = hrpca(sample.observed, spec.k, cell.alpha, method_seed);
      }
      const double wall = seconds_since(start);
      const SubspaceMetrics m = subspace_metrics(est.u, sigma, Matrix(spec.d, 0));
      rec.add(name, "captured_variance", m.captured_variance, wall);
      if (method != Method::oracle) {
        annotate_removals(est.diagnostics, sample.corrupted);
        rec.add(name, "removed_good", *est.diagnostics.removed_good, wall);
        rec.add(name, "removed_corrupted", *est.diagnostics.removed_corrupted, wall);
      }
    }
    return rec.take();
  });
}

std::vector<ResultRecord> run_pipeline_bench(const ExperimentConfig& cfg) {
  if (cfg.experiment != Experiment::pipeline) throw ConfigError("run_pipeline_bench: experiment must be pipeline");
  const PipelineSpec& spec = cfg.pipeline;
  const MetaParameter meta = spec.model.build();
  const int tau = spec.prediction_tau > 0 ? spec.prediction_tau : spec.sizes.t_light2;

  return run_cells(cfg, [&](const Cell& cell) {
    Recorder rec("pipeline", cell, cfg.timing);
    auto adversary = [&](const SplitAdversarySpec& s) {
      AdversaryConfig a;
      a.strategy = s.strategy;
      a.alpha = s.strategy == Strategy::none ? 0.0 : s.alpha.value_or(cell.alpha);
      return a;
    };
    const SplitAdversaries adv{adversary(spec.light1), adversary(spec.heavy), adversary(spec.light2)};
    const auto cell_seed = [&](const char* tag) {
      return derive_seed(cfg.master_seed, {stream_tag(tag), alpha_key(cell.alpha), static_cast<std::uint64_t>(cell.seed)});
    };
    const DatasetSplits splits = make_splits(meta, spec.sizes, adv, cell_seed("splits"));

    for (Method method : cfg.methods) {
      const std::string name = to_string(method);
      const auto start = Clock::now();
      if (method == Method::oracle) {
        const PredictionErrors pe =
            eval_prediction(meta, FittedMeta::from_truth(meta), tau, spec.prediction_trials, cell_seed("prediction"));
        const double wall = seconds_since(start);
        rec.add(name, "mse_map", pe.mse_map, wall);
        rec.add(name, "mse_bayes", pe.mse_bayes, wall);
        rec.add(name, "noise_floor", noise_floor(meta), wall);
        continue;
      }
      if (method != Method::double_filter) continue;

      PipelineOptions opts;
      opts.k = meta.components();
      opts.alpha_light1 = splits.alpha_light1;
      opts.alpha_heavy = splits.alpha_heavy;
      opts.alpha_light2 = splits.alpha_light2;
      opts.delta = spec.delta;
      opts.nu = spec.nu;
      opts.boosts = spec.boosts;
      const PipelineResult result =
          run_pipeline(splits.light1.tasks, splits.heavy.tasks, splits.light2.tasks, opts, cell_seed(name.c_str()));
      const double wall = seconds_since(start);
      for (const std::string& stage : result.skipped_stages) rec.add(name, "skipped_" + stage, 1.0, wall);

      const bool has = [&] {
        return std::find(result.skipped_stages.begin(), result.skipped_stages.end(), "subspace") ==
               result.skipped_stages.end();
      }();
      if (has) {
        const SubspaceMetrics sm = subspace_metrics(result.subspace.u, meta);
        rec.add(name, "subspace_max_residual", sm.residuals.maxCoeff(), wall);
      }
      if (splits.heavy.empty()) continue;
      rec.add(name, "cluster_max_center_error", max_center_distance(result.clusters.centers, meta), wall);
      const ComponentErrors errors = fit_errors(result.fitted, meta);
      rec.add(name, "w_error_rel_max", errors.w_error_rel.maxCoeff(), wall);
      rec.add(name, "s2_error_rel_max", errors.s2_error_rel.maxCoeff(), wall);
      rec.add(name, "p_error_max", errors.p_error.maxCoeff(), wall);
      const PredictionErrors pe = eval_prediction(meta, result.fitted, tau, spec.prediction_trials, cell_seed("prediction"));
      rec.add(name, "mse_map", pe.mse_map, wall);
      rec.add(name, "mse_bayes", pe.mse_bayes, wall);
    }
    return rec.take();
  });
}

bool MomentsReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed; });
}

MomentsReport run_moments_check(const ExperimentConfig& cfg) {
  if (cfg.experiment != Experiment::moments) throw ConfigError("run_moments_check: experiment must be moments");
  const MomentsSpec& spec = cfg.moments;
  if (spec.t < 2 * spec.m_max) throw std::invalid_argument("run_moments_check: need t >= 2 m_max");
  const MetaParameter meta = spec.model.build();
  constexpr double kZLimit = 5.0;

  std::vector<MomentsReport> per_seed(static_cast<std::size_t>(cfg.seeds));
  parallel_for(per_seed.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    const auto seed = static_cast<std::uint64_t>(i);
    const Cell cell{0.0, static_cast<int>(i)};
    Recorder rec("moments", cell, cfg.timing);
    MomentsReport& report = per_seed[i];
    const auto key = [&](const char* tag) { return derive_seed(cfg.master_seed, {stream_tag(tag), seed}); };

    auto start = Clock::now();
    Vector beta = Vector::Zero(spec.bound_m_d);
    beta(0) = 1.0;
    const MomentMatrixEstimate mm = averaged_statistic_moment(beta, 1.0, spec.bound_m_t, spec.replicates, key("bound_m"));
    double max_z = 0.0;
    for (Eigen::Index r = 0; r < mm.mean.rows(); ++r) {
      for (Eigen::Index c = 0; c < mm.mean.cols(); ++c) {
        const double diff = std::abs(mm.mean(r, c) - mm.expected(r, c));
        const double se = mm.standard_error(r, c);
        max_z = std::max(max_z, se > 0.0 ? diff / se : (diff > 0.0 ? INFINITY : 0.0));
      }
    }
    rec.add("diagnostic", "bound_m_max_z", max_z, seconds_since(start));
    report.checks.push_back({"bound_m_max_z", max_z, kZLimit, max_z <= kZLimit});

    start = Clock::now();
    Vector b2 = Vector::Zero(spec.bound_m_d);
    Vector v = Vector::Zero(spec.bound_m_d);
    b2(0) = 1.0;
    v(0) = 1.0;
    if (spec.bound_m_d > 1) {
      b2(1) = 0.5;
      v(1) = -0.7;
    }
    const ChiSquareDecompositionCheck chi = chi_square_decomposition_check(b2, 1.0, v, spec.replicates, key("chi_square"));
    rec.add("diagnostic", "chi_square_max_z", chi.max_z, seconds_since(start));
    report.checks.push_back({"chi_square_max_z", chi.max_z, kZLimit, chi.max_z <= kZLimit});

    start = Clock::now();
    const SosMomentReport sos = sos_moment_check(meta, spec.t, spec.n, spec.m_max, spec.directions, key("sos"));
    const double wall = seconds_since(start);
    for (int m = 1; m <= spec.m_max; ++m) {
      double worst = 0.0;
      for (const SosMomentEntry& e : sos.entries) {
        if (e.m == m) worst = std::max(worst, e.ratio);
      }
      const std::string name = "sos_ratio_m" + std::to_string(m);
      rec.add("diagnostic", name, worst, wall);
      report.checks.push_back({name, worst, 1.0, worst < 1.0});
    }
    report.records = rec.take();
  });

  MomentsReport out;
  for (auto& r : per_seed) {
    for (auto& c : r.checks) out.checks.push_back(std::move(c));
    for (auto& rec : r.records) out.records.push_back(std::move(rec));
  }
  return out;
}

double mean_metric(const std::vector<ResultRecord>& records, const std::string& method, double alpha,
                   const std::string& metric) {
  double sum = 0.0;
  int count = 0;
  for (const ResultRecord& r : records) {
    if (r.method == method && r.alpha == alpha && r.metric == metric) {
      sum += r.value;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("mean_metric: no records for " + method + "/" + metric);
  return sum / count;
}

}  // namespace rmlr::bench
