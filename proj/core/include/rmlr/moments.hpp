#pragma once

#include <cstdint>
#include <vector>

#include "rmlr/linalg.hpp"
#include "rmlr/model.hpp"

namespace rmlr {

/// Cap on the constant in the 2m-th moment bound rho^{2m} (2m)^m C^m / t^m.
inline const double kSosMomentConstant = 403.4287934927351;  // e^6

struct SosMomentEntry {
  int m = 0;
  int direction = 0;
  double empirical = 0.0;  // (1/n) sum <beta_hat_i - beta_i, v>^{2m}
  double bound = 0.0;
  double ratio = 0.0;
};

struct SosMomentReport {
  std::vector<SosMomentEntry> entries;
  Matrix directions;  // d x n_directions, unit columns
  double max_ratio = 0.0;
  bool passed = false;
};

/// Empirical 2m-th moments of the averaged-statistic error along random
/// unit directions, for m = 1..m_max, on n clean tasks of size t.
SosMomentReport sos_moment_check(const MetaParameter& meta, int t, int n, int m_max, int n_directions,
                                 std::uint64_t seed);

/// Monte-Carlo estimate of E[beta_hat beta_hat^T] for beta_hat = X^T y / t,
/// with entrywise standard errors.
struct MomentMatrixEstimate {
  Matrix mean;
  Matrix standard_error;
  Matrix expected;  // (1 + 1/t) beta beta^T + ((|beta|^2 + sigma^2)/t) I
};

MomentMatrixEstimate averaged_statistic_moment(const Vector& beta, double sigma, int t, int replicates,
                                               std::uint64_t seed);

/// First four raw moments of (v^T x) y (single example, x ~ N(0, I)) against
/// the exact moments of a Z1^2 + b Z2^2 with a, b = (v^T beta +- |v| sigma_y)/2.
struct ChiSquareDecompositionCheck {
  double a = 0.0, b = 0.0;
  std::vector<double> empirical;  // E[X^r], r = 1..4
  std::vector<double> exact;
  std::vector<double> standard_error;
  double max_z = 0.0;  // max_r |empirical - exact| / se
};

ChiSquareDecompositionCheck chi_square_decomposition_check(const Vector& beta, double sigma, const Vector& v,
                                                           int replicates, std::uint64_t seed);

/// Raw moments E[X^r], r = 1..4, of a Z1^2 + b Z2^2 from chi-square cumulants.
std::vector<double> weighted_chi_square_moments(double a, double b);

}  // namespace rmlr
