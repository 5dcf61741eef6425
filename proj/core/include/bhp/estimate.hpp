#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace bhp {

/// Normal-approximation Monte Carlo estimate.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_replicates = 0;

  double ci_lo() const noexcept { return value - 1.96 * std_error; }
  double ci_hi() const noexcept { return value + 1.96 * std_error; }

  /// Sample mean and standard error of the mean.
  static Estimate from_samples(std::span<const double> samples);
};

/// Shared Monte Carlo settings: results are a pure function of
/// (seed, n_reps); `threads` only changes the schedule.
struct McConfig {
  std::uint64_t seed = 1;
  std::size_t n_reps = 100;
  int threads = 1;
};

/// |a - b| in units of the combined standard error (0 when both are exact).
double z_gap(const Estimate& a, const Estimate& b) noexcept;

}  // namespace bhp
