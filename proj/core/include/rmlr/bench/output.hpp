#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rmlr/bench/config.hpp"
#include "rmlr/bench/experiments.hpp"

namespace rmlr::bench {

inline constexpr const char* kCsvHeader = "experiment,method,alpha,seed,metric,value,wall_time_s";

/// Shortest-round-trip-safe rendering with 17 significant digits,
/// independent of the global locale.
std::string format_double(double v);

std::string to_csv(const std::vector<ResultRecord>& records, bool include_timing);
std::vector<ResultRecord> parse_csv(const std::string& text);

/// One SVG document plotting `metric` against alpha: a polyline of the
/// per-alpha mean for each method plus a min-max band over seeds.
std::string render_metric_svg(const std::vector<ResultRecord>& records, const std::string& metric);

/// Minimal well-formedness check: one root <svg> element with a viewBox and
/// balanced tags.
bool svg_well_formed(const std::string& svg);

struct EmitOptions {
  bool plots = true;
  bool timing = false;
};

/// Writes results.csv, manifest.json and (optionally) one SVG per metric
/// into `dir`, creating it if needed. Throws std::runtime_error when the
/// directory cannot be written.
void emit_outputs(const std::vector<ResultRecord>& records, const std::filesystem::path& dir,
                  const ExperimentConfig& cfg, const EmitOptions& options);

}  // namespace rmlr::bench
