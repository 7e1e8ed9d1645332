#include "rmlr/robust_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rmlr {

double trim_mean_count(std::span<const double> samples, std::size_t per_side) {
  if (2 * per_side >= samples.size()) throw std::invalid_argument("trimmed mean: trimming removes every sample");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = per_side; i < v.size() - per_side; ++i) sum += v[i];
  return sum / static_cast<double>(v.size() - 2 * per_side);
}

double trimmed_mean(std::span<const double> samples, double eps) {
  if (!(eps > 0.0) || eps > 0.125) throw std::invalid_argument("trimmed_mean: eps must be in (0, 1/8]");
  const auto n = static_cast<double>(samples.size());
  if (samples.size() < 8 || n * eps < 1.0 - 1e-12) {
    throw std::invalid_argument("trimmed_mean: need at least max(8, 1/eps) samples");
  }
  const double x = 2.0 * eps * n;
  const auto per_side = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
  return trim_mean_count(samples, per_side);
}

double admissible_trim_level(double eps, std::size_t n) {
  if (n < 8) throw std::invalid_argument("admissible_trim_level: need at least 8 samples");
  return std::min(std::max(eps, 1.0 / static_cast<double>(n)), 0.125);
}

double median(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("median: no samples");
  std::vector<double> v(samples.begin(), samples.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace rmlr
