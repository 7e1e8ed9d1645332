#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "rmlr/bench/output.hpp"

namespace rmlr::bench {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 56.0;
const char* const kPalette[] = {"#1b6ca8", "#c8553d", "#2a9d55", "#8e5ea2", "#b08d1a", "#555555"};

struct Summary {
  double mean = 0.0, lo = 0.0, hi = 0.0;
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string render_metric_svg(const std::vector<ResultRecord>& records, const std::string& metric) {
  // method -> alpha -> values
  std::map<std::string, std::map<double, std::vector<double>>> data;
  for (const ResultRecord& r : records) {
    if (r.metric == metric && std::isfinite(r.value)) data[r.method][r.alpha].push_back(r.value);
  }
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  std::map<std::string, std::map<double, Summary>> summary;
  for (const auto& [method, by_alpha] : data) {
    for (const auto& [alpha, values] : by_alpha) {
      Summary s;
      s.lo = *std::min_element(values.begin(), values.end());
      s.hi = *std::max_element(values.begin(), values.end());
      for (double v : values) s.mean += v;
      s.mean /= static_cast<double>(values.size());
      summary[method][alpha] = s;
      x_lo = std::min(x_lo, alpha);
      x_hi = std::max(x_hi, alpha);
      y_lo = std::min(y_lo, s.lo);
      y_hi = std::max(y_hi, s.hi);
    }
  }
  if (summary.empty()) {
    x_lo = y_lo = 0.0;
    x_hi = y_hi = 1.0;
  }
  if (x_hi - x_lo <= 0.0) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi - y_lo <= 0.0) {
    const double pad = std::max(1e-12, std::abs(y_hi) * 0.05);
    y_lo -= pad;
    y_hi += pad;
  }
  const auto px = [&](double x) { return kMargin + (x - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); };
  const auto py = [&](double y) { return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
                    "\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         escape(metric) + "</text>\n";
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) + "\" x2=\"" + num(kWidth - kMargin) +
         "\" y2=\"" + num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) + "\" y2=\"" +
         num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  for (double t : {x_lo, x_hi}) {
    svg += "<text x=\"" + num(px(t)) + "\" y=\"" + num(kHeight - kMargin + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + label(t) + "</text>\n";
  }
  for (double t : {y_lo, y_hi}) {
    svg += "<text x=\"" + num(kMargin - 6) + "\" y=\"" + num(py(t) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + label(t) + "</text>\n";
  }
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">alpha</text>\n";

  std::size_t color = 0;
  double legend_y = kMargin;
  for (const auto& [method, by_alpha] : summary) {
    const char* stroke = kPalette[color++ % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string band, line;
    for (const auto& [alpha, s] : by_alpha) band += num(px(alpha)) + "," + num(py(s.hi)) + " ";
    for (auto it = by_alpha.rbegin(); it != by_alpha.rend(); ++it) {
      band += num(px(it->first)) + "," + num(py(it->second.lo)) + " ";
    }
    for (const auto& [alpha, s] : by_alpha) line += num(px(alpha)) + "," + num(py(s.mean)) + " ";
    band.pop_back();
    line.pop_back();
    svg += "<polygon points=\"" + band + "\" fill=\"" + stroke + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kWidth - kMargin + 4) + "\" y=\"" + num(legend_y) + "\" fill=\"" + stroke +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(method) + "</text>\n";
    legend_y += 14;
  }
  svg += "</svg>\n";
  return svg;
}

bool svg_well_formed(const std::string& svg) {
  std::vector<std::string> stack;
  int roots = 0;
  bool saw_viewbox = false;
  std::size_t pos = 0;
  while ((pos = svg.find('<', pos)) != std::string::npos) {
    const std::size_t end = svg.find('>', pos);
    if (end == std::string::npos) return false;
    std::string tag = svg.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
    if (stack.empty()) {
      if (name != "svg" || ++roots > 1) return false;
      saw_viewbox = tag.find("viewBox=\"") != std::string::npos;
    }
    if (!self_closing) stack.push_back(name);
  }
  return roots == 1 && stack.empty() && saw_viewbox;
}

}  // namespace rmlr::bench
