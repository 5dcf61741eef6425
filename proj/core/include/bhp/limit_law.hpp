#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "bhp/point_process.hpp"

namespace bhp {

/// Law of the (unscaled) base-station process Y1 as seen by the limit
/// distribution.
class StationLaw {
 public:
  enum class Kind { poisson, shifted_lattice, empirical };

  static StationLaw poisson(double intensity);
  static StationLaw shifted_lattice(double spacing, int d, int quadrature_points = 48);
  /// `sampler(seed)` must return Y1 on a window around the origin large
  /// enough for the distances queried.
  static StationLaw empirical(const std::function<PointSet(std::uint64_t)>& sampler, std::size_t samples,
                              std::uint64_t seed);

  Kind kind() const noexcept { return kind_; }
  double intensity() const noexcept { return intensity_; }
  double spacing() const noexcept { return spacing_; }

  /// P(min{|y| : y in Y1 thinned with survival theta} <= t), dimension d.
  double contact_cdf(double theta, int d, double t) const;

 private:
  StationLaw() = default;

  Kind kind_ = Kind::poisson;
  double intensity_ = 0.0;
  double spacing_ = 0.0;
  // Sorted origin distances per sample (empirical) or per quadrature node
  // (lattice, up to lattice_radius_).
  std::shared_ptr<const std::vector<std::vector<double>>> distances_;
  double lattice_radius_ = 0.0;
  int lattice_dim_ = 0;
};

/// W = (1 - Z) * inf + Z * mu * min{|y| : y in Y^(theta)}, Z ~ Bernoulli(theta).
struct LimitLaw {
  double theta = 1.0;
  double mu = 1.0;
  StationLaw stations = StationLaw::poisson(1.0);
  int d = 2;

  void validate() const;
};

double kappa_d(int d);

/// P(W <= a). Poisson stations: theta * (1 - exp(-theta * lambda' * kappa_d * (a / mu)^d)).
double limit_cdf(const LimitLaw& law, double a);

}  // namespace bhp
