#include "bhp/estimate.hpp"

#include <cmath>
#include <limits>

namespace bhp {

Estimate Estimate::from_samples(std::span<const double> samples) {
  Estimate e;
  e.n_replicates = samples.size();
  if (samples.empty()) return e;
  double sum = 0.0;
  for (double x : samples) sum += x;
  e.value = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - e.value) * (x - e.value);
    e.std_error = std::sqrt(ss / static_cast<double>(samples.size() - 1) / static_cast<double>(samples.size()));
  }
  return e;
}

double z_gap(const Estimate& a, const Estimate& b) noexcept {
  const double se = std::hypot(a.std_error, b.std_error);
  const double diff = std::abs(a.value - b.value);
  if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / se;
}

}  // namespace bhp
