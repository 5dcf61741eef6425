#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bhp {

enum class BoundaryMode { free, torus };

/// Axis-aligned box. In torus mode opposite faces are identified and
/// distances wrap component-wise by the box period.
class Window {
 public:
  Window(std::vector<double> center, std::vector<double> half_widths, BoundaryMode mode = BoundaryMode::free);

  static Window cube(int d, double half_width, BoundaryMode mode = BoundaryMode::free);
  static Window from_bounds(std::span<const double> lo, std::span<const double> hi,
                            BoundaryMode mode = BoundaryMode::free);

  int dim() const noexcept { return static_cast<int>(center_.size()); }
  BoundaryMode mode() const noexcept { return mode_; }
  const std::vector<double>& center() const noexcept { return center_; }
  const std::vector<double>& half_widths() const noexcept { return half_widths_; }
  double lo(int i) const noexcept { return center_[i] - half_widths_[i]; }
  double hi(int i) const noexcept { return center_[i] + half_widths_[i]; }
  double period(int i) const noexcept { return 2.0 * half_widths_[i]; }
  double volume() const noexcept;

  bool contains(std::span<const double> x) const noexcept;

  /// Shrinks every side by `inset` on both ends. Throws a configuration
  /// error when nothing is left.
  Window inset(double inset) const;
  Window scaled(double factor) const;

  /// Maps x into [lo, hi) along every axis (torus mode only changes x).
  void wrap(std::span<double> x) const noexcept;

  /// Squared distance in this window's metric.
  double squared_distance(std::span<const double> a, std::span<const double> b) const noexcept;

 private:
  std::vector<double> center_;
  std::vector<double> half_widths_;
  BoundaryMode mode_;
};

struct Provenance {
  std::string process;  ///< "poisson", "shifted_lattice", "explicit"
  double intensity = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> operations;
};

/// Immutable finite point configuration, coordinates stored row-major.
class PointSet {
 public:
  PointSet(Window window, std::vector<double> coords, Provenance provenance = {});

  /// Convenience for hand-built configurations in free mode.
  static PointSet from_points(const Window& window, const std::vector<std::vector<double>>& points);

  int dim() const noexcept { return window_.dim(); }
  std::size_t size() const noexcept { return coords_.size() / static_cast<std::size_t>(dim()); }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const noexcept {
    return {coords_.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }
  std::span<const double> coords() const noexcept { return coords_; }
  const Window& window() const noexcept { return window_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  /// Returns a copy with `x` appended as the last point (Palm insertion).
  PointSet with_point(std::span<const double> x, const std::string& note = "insert") const;

 private:
  Window window_;
  std::vector<double> coords_;
  Provenance provenance_;
};

enum class StationProcess { poisson, shifted_lattice };

struct ModelParams {
  double lambda = 1.0;        ///< user intensity
  double lambda_prime = 1.0;  ///< base-station intensity before scaling
  double r = 1.0;             ///< base-station scaling factor
  int d = 2;
  int k = 0;                  ///< hop budget, 0 when unused
  StationProcess stations = StationProcess::poisson;

  /// lambda > 0, lambda_prime >= 0, r >= 0, d >= 2, k >= 0.
  void validate() const;
};

PointSet sample_poisson(double lambda, const Window& window, std::uint64_t seed);

/// spacing * Z^d + U with U uniform in [0, spacing)^d, clipped to the window.
PointSet sample_shifted_lattice(double spacing, const Window& window, std::uint64_t seed);

/// Keeps each point independently with probability survival_p, then
/// multiplies coordinates (and the window) by scale. Point i is kept iff
/// the i-th uniform of the stream for `seed` is below survival_p, so the
/// same seed gives nested outputs for increasing survival_p.
PointSet thin_and_scale(const PointSet& points, double survival_p, double scale, std::uint64_t seed);

/// Base stations Y = r * Y1 restricted to `window`: Y1 is sampled in
/// window / r with intensity lambda_prime and scaled by r.
PointSet sample_stations(const ModelParams& params, const Window& window, std::uint64_t seed);

}  // namespace bhp
