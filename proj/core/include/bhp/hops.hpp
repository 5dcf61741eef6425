#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bhp/geom_graph.hpp"

namespace bhp {

/// Hop count with an explicit unreachable state that compares above every
/// finite count.
class HopCount {
 public:
  enum class Kind : std::uint8_t { finite, infinite };

  constexpr HopCount() noexcept = default;
  constexpr explicit HopCount(std::uint32_t hops) noexcept : kind_(Kind::finite), hops_(hops) {}
  static constexpr HopCount infinite() noexcept {
    HopCount h;
    h.kind_ = Kind::infinite;
    return h;
  }

  constexpr bool is_finite() const noexcept { return kind_ == Kind::finite; }
  constexpr bool is_infinite() const noexcept { return kind_ == Kind::infinite; }
  constexpr Kind kind() const noexcept { return kind_; }
  /// Only meaningful when is_finite().
  constexpr std::uint32_t value() const noexcept { return hops_; }

  constexpr bool within(std::uint32_t k) const noexcept { return is_finite() && hops_ <= k; }

  friend constexpr bool operator==(HopCount a, HopCount b) noexcept {
    return a.kind_ == b.kind_ && (a.is_infinite() || a.hops_ == b.hops_);
  }
  friend constexpr std::strong_ordering operator<=>(HopCount a, HopCount b) noexcept {
    if (a.is_infinite() || b.is_infinite()) return a.is_infinite() <=> b.is_infinite();
    return a.hops_ <=> b.hops_;
  }

 private:
  Kind kind_ = Kind::infinite;
  std::uint32_t hops_ = 0;
};

/// Minimum hop counts H(X_i) from every user to a station set.
struct HopField {
  std::vector<HopCount> values;
  std::uint32_t cutoff = 0;
  std::size_t station_count = 0;

  std::size_t count_within(std::uint32_t k) const noexcept;
};

/// Users reachable from a location and their hop counts, in BFS order.
struct Reach {
  std::vector<std::uint32_t> users;
  std::vector<std::uint32_t> hops;
};

/// H(X_i) for every user: 1 if a station is within distance 1 (graph
/// radius), otherwise 1 + hops through user-user edges to such a user;
/// infinite beyond k_max or if disconnected.
HopField hop_field(const GeometricGraph& users, const PointSet& stations, std::uint32_t k_max);

/// All users k-connectable to `location` for k <= k_max (level 1 = users
/// within radius of the location). Passing no cap explores the whole
/// reachable set.
Reach reach_from(const GeometricGraph& users, std::span<const double> location,
                 std::optional<std::uint32_t> k_max);

/// Hop count from user `source` to the nearest station in `stations`
/// (a graph used as a spatial index). 1 when a station is within radius
/// of the source.
HopCount hops_to_stations(const GeometricGraph& users, std::size_t source, const GeometricGraph& stations,
                          std::optional<std::uint32_t> cap = std::nullopt);

/// Minimum number of user-user hops between a and b; infinite when
/// disconnected or above cap.
HopCount chemical_distance(const GeometricGraph& graph, std::size_t a, std::size_t b,
                           std::optional<std::uint32_t> cap = std::nullopt);

/// Index of the giant-component point nearest to x, lowest index on ties.
/// Throws ErrorKind::no_giant when the labeling has no giant.
std::size_t nearest_cluster_point(const PointSet& points, const ClusterLabeling& labeling, std::span<const double> x);

struct HopPath {
  std::vector<std::uint32_t> vertices;

  std::size_t hop_count() const noexcept { return vertices.empty() ? 0 : vertices.size() - 1; }
};

/// True when consecutive vertices are within the graph radius.
bool is_valid_path(const HopPath& path, const GeometricGraph& graph);

/// Chronological loop erasure. Throws ErrorKind::contract for a path with
/// a hop longer than the graph radius.
HopPath loop_erase(const HopPath& path, const GeometricGraph& graph);

}  // namespace bhp
