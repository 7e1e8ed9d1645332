#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmlr/linalg.hpp"
#include "rmlr/model.hpp"

namespace rmlr::bench {

enum class Experiment { subspace, pipeline, moments };

const char* to_string(Experiment e);

struct ModelSpec {
  int d = 32;
  int k = 3;
  double separation = 4.0;  // min pairwise |w_i - w_j|; |w_1| when k = 1
  std::vector<double> noise;    // s_l; empty -> all 1
  std::vector<double> weights;  // p_l; empty -> uniform
  std::uint64_t frame_seed = 7;

  MetaParameter build() const;
};

struct SubspaceSpec {
  int d = 10;
  int k = 1;
  int n = 10000;
  double delta = 0.1;
  std::optional<double> nu;  // unset: sqrt(k) times the largest population eigenvalue
};

struct SplitAdversarySpec {
  Strategy strategy = Strategy::none;
  std::optional<double> alpha;  // unset: the sweep value
};

struct PipelineSpec {
  ModelSpec model;
  SplitSizes sizes{20000, 1, 600, 50, 3000, 25};
  SplitAdversarySpec light1, heavy, light2;
  double delta = 0.1;
  int boosts = 1;
  std::optional<double> nu;
  int prediction_tau = 0;  // 0 -> t_light2
  int prediction_trials = 2000;
};

struct MomentsSpec {
  ModelSpec model{8, 1, 1.0, {1.0}, {1.0}, 7};
  int t = 32;
  int n = 100000;
  int m_max = 3;
  int directions = 8;
  int bound_m_t = 5;
  int bound_m_d = 4;
  int replicates = 100000;
};

enum class Method { double_filter, hrpca, oracle };

const char* to_string(Method m);

/// Parsed configuration document. Every section and key is validated;
/// unknown keys raise ConfigError naming the offending path.
struct ExperimentConfig {
  Experiment experiment = Experiment::subspace;
  std::vector<double> alphas{0.005, 0.01, 0.015, 0.02, 0.025};
  std::vector<Method> methods{Method::double_filter, Method::hrpca, Method::oracle};
  int seeds = 1;
  std::uint64_t master_seed = 0;
  int threads = 1;
  bool plots = true;
  bool timing = false;
  std::filesystem::path output;
  SubspaceSpec subspace;
  PipelineSpec pipeline;
  MomentsSpec moments;
  std::vector<std::string> warnings;  // e.g. alpha clamps
};

/// Parses JSON text. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON echo of a configuration (used in manifest.json).
std::string config_to_json(const ExperimentConfig& cfg);

/// Thread count from the RMLR_THREADS environment variable, else 1.
int default_thread_count();

/// Resolves 0 to the hardware concurrency.
int resolve_threads(int requested);

}  // namespace rmlr::bench
