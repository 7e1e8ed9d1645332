#pragma once

#include <cstddef>
#include <span>

namespace rmlr {

/// Mean after removing `per_side` smallest and `per_side` largest samples.
/// Throws std::invalid_argument if nothing would remain.
double trim_mean_count(std::span<const double> samples, std::size_t per_side);

/// Trimmed mean at level eps: removes the ceil(2 eps n) smallest and largest
/// samples. Requires eps in (0, 1/8] and n >= max(8, 1/eps).
double trimmed_mean(std::span<const double> samples, double eps);

/// Smallest eps the trimmed_mean size precondition admits for n samples,
/// raised from `eps` and capped at 1/8.
double admissible_trim_level(double eps, std::size_t n);

double median(std::span<const double> samples);

}  // namespace rmlr
