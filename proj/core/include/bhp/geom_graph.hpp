#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bhp/point_process.hpp"

namespace bhp {

/// Unit-disk (radius-r) graph over a PointSet. Adjacency is implicit: a
/// dense grid with cell side >= radius buckets the points, and neighbour
/// queries scan the 3^d cells around the query.
class GeometricGraph {
 public:
  GeometricGraph(PointSet points, double radius);

  const PointSet& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  int dim() const noexcept { return points_.dim(); }
  double radius() const noexcept { return radius_; }
  const Window& window() const noexcept { return points_.window(); }

  double squared_distance(std::size_t i, std::size_t j) const noexcept {
    return window().squared_distance(points_[i], points_[j]);
  }

  /// Calls f(j) for every j != i with |x_i - x_j| <= radius.
  template <class F>
  void for_each_neighbor(std::size_t i, F&& f) const {
    scan(points_[i], radius_ * radius_, i, f);
  }

  /// Calls f(j) for every point within distance `r` of `location`
  /// (r <= radius()). `location` need not lie in the window.
  template <class F>
  void for_each_within(std::span<const double> location, double r, F&& f) const {
    scan(location, r * r, npos, f);
  }

  bool any_within(std::span<const double> location, double r) const;

  /// Edges (i < j), sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;
  std::size_t edge_count() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t cell_of(std::span<const double> x, std::span<long> coords) const noexcept;

  template <class F>
  void scan(std::span<const double> x, double r2, std::size_t skip, F& f) const {
    const int d = dim();
    long base[8];
    cell_of(x, std::span<long>(base, static_cast<std::size_t>(d)));
    const bool torus = window().mode() == BoundaryMode::torus;
    for (std::size_t o = 0; o < offsets_.size(); o += static_cast<std::size_t>(d)) {
      std::size_t flat = 0;
      bool inside = true;
      for (int j = d - 1; j >= 0; --j) {
        long c = base[j] + offsets_[o + j];
        if (c < 0 || c >= cells_[j]) {
          if (!torus) {
            inside = false;
            break;
          }
          c = (c + cells_[j]) % cells_[j];
        }
        flat = flat * static_cast<std::size_t>(cells_[j]) + static_cast<std::size_t>(c);
      }
      if (!inside) continue;
      for (std::uint32_t s = cell_start_[flat]; s < cell_start_[flat + 1]; ++s) {
        const std::uint32_t j = cell_points_[s];
        if (j == skip) continue;
        const double* p = sorted_coords_.data() + static_cast<std::size_t>(s) * d;
        double d2 = 0.0;
        if (torus) {
          d2 = window().squared_distance(x, std::span<const double>(p, static_cast<std::size_t>(d)));
        } else {
          for (int k = 0; k < d; ++k) {
            const double t = x[k] - p[k];
            d2 += t * t;
          }
        }
        if (d2 <= r2) f(static_cast<std::size_t>(j));
      }
    }
  }

  PointSet points_;
  double radius_;
  std::vector<long> cells_;       // cells per axis
  std::vector<double> cell_side_; // >= radius
  std::vector<long> offsets_;     // neighbour-cell offset vectors, flattened
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> cell_points_;
  std::vector<double> sorted_coords_;
};

GeometricGraph build_graph(PointSet points, double radius = 1.0);

struct ClusterLabeling {
  std::vector<std::uint32_t> label;   ///< per point; ids ordered by lowest member index
  std::vector<std::size_t> sizes;     ///< per component
  std::optional<std::uint32_t> giant_id;

  std::size_t component_count() const noexcept { return sizes.size(); }
  bool in_giant(std::size_t i) const noexcept { return giant_id && label[i] == *giant_id; }
};

/// Connected components. The giant proxy is the largest component (lowest
/// id on ties) if it holds at least `giant_fraction` of all points.
ClusterLabeling clusters(const GeometricGraph& graph, double giant_fraction = 0.25);

/// Component of the lowest-index point among the nearest points within
/// radius of `location`; none if no point is that close.
std::optional<std::uint32_t> cluster_containing(const ClusterLabeling& labeling, const GeometricGraph& graph,
                                                std::span<const double> location);

}  // namespace bhp
