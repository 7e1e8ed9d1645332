#pragma once

#include <string>
#include <vector>

#include "rmlr/bench/config.hpp"

namespace rmlr::bench {

struct ResultRecord {
  std::string experiment;
  std::string method;
  double alpha = 0.0;
  int seed = 0;
  std::string metric;
  double value = 0.0;
  double wall_time_s = 0.0;

  bool operator==(const ResultRecord&) const = default;
};

std::vector<ResultRecord> run_subspace_bench(const ExperimentConfig& cfg);
std::vector<ResultRecord> run_pipeline_bench(const ExperimentConfig& cfg);

struct CheckOutcome {
  std::string name;
  double statistic = 0.0;  // ratio or z-score, see name
  double limit = 0.0;
  bool passed = false;
};

struct MomentsReport {
  std::vector<CheckOutcome> checks;
  std::vector<ResultRecord> records;
  bool passed() const;
};

MomentsReport run_moments_check(const ExperimentConfig& cfg);

/// Mean of `metric` for `method` at `alpha` over all seeds.
double mean_metric(const std::vector<ResultRecord>& records, const std::string& method, double alpha,
                   const std::string& metric);

}  // namespace rmlr::bench
