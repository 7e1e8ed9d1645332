#include "rmlr/bench/output.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <tuple>

#include <nlohmann/json.hpp>

#include "rmlr/version.hpp"

namespace rmlr::bench {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

namespace {

void check_field(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos) {
    throw std::invalid_argument("to_csv: field contains a separator: " + s);
  }
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("parse_csv: bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("parse_csv: bad integer '" + s + "'");
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::string to_csv(const std::vector<ResultRecord>& records, bool include_timing) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const ResultRecord& r : records) {
    check_field(r.experiment);
    check_field(r.method);
    check_field(r.metric);
    out += r.experiment + ',' + r.method + ',' + format_double(r.alpha) + ',' + std::to_string(r.seed) + ',' + r.metric +
           ',' + format_double(r.value) + ',' + format_double(include_timing ? r.wall_time_s : 0.0) + '\n';
  }
  return out;
}

std::vector<ResultRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("parse_csv: missing or wrong header");
  std::vector<ResultRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 7) throw std::invalid_argument("parse_csv: expected 7 fields in '" + line + "'");
    out.push_back({fields[0], fields[1], parse_double(fields[2]), parse_int(fields[3]), fields[4], parse_double(fields[5]),
                   parse_double(fields[6])});
  }
  return out;
}

void emit_outputs(const std::vector<ResultRecord>& records, const std::filesystem::path& dir,
                  const ExperimentConfig& cfg, const EmitOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file(dir / "results.csv", to_csv(records, options.timing));

  nlohmann::json manifest;
  manifest["version"] = RMLR_VERSION;
  manifest["experiment"] = to_string(cfg.experiment);
  manifest["master_seed"] = cfg.master_seed;
  manifest["seeds"] = cfg.seeds;
  manifest["rows"] = records.size();
  manifest["config"] = nlohmann::json::parse(config_to_json(cfg));
  manifest["warnings"] = cfg.warnings;
  if (options.timing) {
    double total = 0.0;
    std::set<std::tuple<std::string, double, int>> seen;
    for (const ResultRecord& r : records) {
      if (seen.insert({r.method, r.alpha, r.seed}).second) total += r.wall_time_s;
    }
    manifest["total_method_time_s"] = total;
  }
  std::vector<std::string> plots;
  if (options.plots) {
    std::set<std::string> metrics;
    for (const ResultRecord& r : records) metrics.insert(r.metric);
    for (const std::string& metric : metrics) {
      const std::string file = metric + ".svg";
      write_file(dir / file, render_metric_svg(records, metric));
      plots.push_back(file);
    }
  }
  manifest["plots"] = plots;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace rmlr::bench
