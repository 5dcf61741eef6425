#include "bhp/hops.hpp"

#include <limits>

#include "bhp/error.hpp"

namespace bhp {

namespace {

constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();

// Level-synchronous BFS over user-user edges. `dist` must hold the seeds'
// levels already; `frontier` holds the seeds. Stops after level `cap`.
template <class OnVisit>
void expand(const GeometricGraph& g, std::vector<std::uint32_t>& dist, std::vector<std::uint32_t> frontier,
            std::uint32_t cap, OnVisit&& on_visit) {
  std::vector<std::uint32_t> next;
  while (!frontier.empty()) {
    const std::uint32_t level = dist[frontier.front()];
    if (level >= cap) break;
    next.clear();
    for (std::uint32_t u : frontier) {
      g.for_each_neighbor(u, [&](std::size_t v) {
        if (dist[v] != kUnvisited) return;
        dist[v] = level + 1;
        next.push_back(static_cast<std::uint32_t>(v));
        on_visit(static_cast<std::uint32_t>(v), level + 1);
      });
    }
    frontier.swap(next);
  }
}

}  // namespace

std::size_t HopField::count_within(std::uint32_t k) const noexcept {
  std::size_t c = 0;
  for (HopCount h : values) c += h.within(k) ? 1 : 0;
  return c;
}

HopField hop_field(const GeometricGraph& users, const PointSet& stations, std::uint32_t k_max) {
  require(k_max >= 1, ErrorKind::parameter, "k_max must be at least 1");
  require(stations.empty() || stations.dim() == users.dim(), ErrorKind::parameter, "station dimension mismatch");
  HopField field;
  field.cutoff = k_max;
  field.station_count = stations.size();
  std::vector<std::uint32_t> dist(users.size(), kUnvisited);
  std::vector<std::uint32_t> seeds;
  for (std::size_t s = 0; s < stations.size(); ++s) {
    users.for_each_within(stations[s], users.radius(), [&](std::size_t u) {
      if (dist[u] == kUnvisited) {
        dist[u] = 1;
        seeds.push_back(static_cast<std::uint32_t>(u));
      }
    });
  }
  expand(users, dist, std::move(seeds), k_max, [](std::uint32_t, std::uint32_t) {});
  field.values.resize(users.size());
  for (std::size_t i = 0; i < users.size(); ++i)
    field.values[i] = dist[i] == kUnvisited ? HopCount::infinite() : HopCount(dist[i]);
  return field;
}

Reach reach_from(const GeometricGraph& users, std::span<const double> location, std::optional<std::uint32_t> k_max) {
  require(static_cast<int>(location.size()) == users.dim(), ErrorKind::parameter, "location dimension mismatch");
  const std::uint32_t cap = k_max.value_or(kUnvisited - 1);
  Reach out;
  if (cap == 0) return out;
  std::vector<std::uint32_t> dist(users.size(), kUnvisited);
  std::vector<std::uint32_t> seeds;
  users.for_each_within(location, users.radius(), [&](std::size_t u) {
    dist[u] = 1;
    seeds.push_back(static_cast<std::uint32_t>(u));
  });
  for (std::uint32_t u : seeds) {
    out.users.push_back(u);
    out.hops.push_back(1);
  }
  expand(users, dist, std::move(seeds), cap, [&](std::uint32_t v, std::uint32_t level) {
    out.users.push_back(v);
    out.hops.push_back(level);
  });
  return out;
}

HopCount hops_to_stations(const GeometricGraph& users, std::size_t source, const GeometricGraph& stations,
                          std::optional<std::uint32_t> cap) {
  require(source < users.size(), ErrorKind::parameter, "source index out of range");
  const std::uint32_t limit = cap.value_or(kUnvisited - 1);
  if (limit == 0) return HopCount::infinite();
  auto touches = [&](std::uint32_t u) { return stations.any_within(users.points()[u], users.radius()); };
  if (touches(static_cast<std::uint32_t>(source))) return HopCount(1);

  std::vector<std::uint32_t> dist(users.size(), kUnvisited);
  std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(source)}, next;
  dist[source] = 0;
  std::uint32_t level = 0;
  while (!frontier.empty() && level + 2 <= limit) {
    next.clear();
    bool hit = false;
    for (std::uint32_t u : frontier) {
      users.for_each_neighbor(u, [&](std::size_t v) {
        if (dist[v] != kUnvisited) return;
        dist[v] = level + 1;
        next.push_back(static_cast<std::uint32_t>(v));
        if (!hit && touches(static_cast<std::uint32_t>(v))) hit = true;
      });
    }
    ++level;
    if (hit) return HopCount(level + 1);
    frontier.swap(next);
  }
  return HopCount::infinite();
}

HopCount chemical_distance(const GeometricGraph& graph, std::size_t a, std::size_t b, std::optional<std::uint32_t> cap) {
  require(a < graph.size() && b < graph.size(), ErrorKind::parameter, "point index out of range");
  if (a == b) return HopCount(0);
  const std::uint32_t limit = cap.value_or(kUnvisited - 1);
  std::vector<std::uint32_t> dist(graph.size(), kUnvisited);
  std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(a)}, next;
  dist[a] = 0;
  std::uint32_t level = 0;
  while (!frontier.empty() && level < limit) {
    next.clear();
    bool hit = false;
    for (std::uint32_t u : frontier) {
      graph.for_each_neighbor(u, [&](std::size_t v) {
        if (dist[v] != kUnvisited) return;
        dist[v] = level + 1;
        hit |= v == b;
        next.push_back(static_cast<std::uint32_t>(v));
      });
      if (hit) return HopCount(level + 1);
    }
    ++level;
    frontier.swap(next);
  }
  return HopCount::infinite();
}

std::size_t nearest_cluster_point(const PointSet& points, const ClusterLabeling& labeling, std::span<const double> x) {
  require(labeling.label.size() == points.size(), ErrorKind::contract, "labeling does not match point set");
  if (!labeling.giant_id) throw Error(ErrorKind::no_giant, "no giant component (subcritical or window too small)");
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labeling.label[i] != *labeling.giant_id) continue;
    const double d2 = points.window().squared_distance(points[i], x);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

bool is_valid_path(const HopPath& path, const GeometricGraph& graph) {
  const double r2 = graph.radius() * graph.radius();
  for (std::size_t i = 0; i < path.vertices.size(); ++i) {
    if (path.vertices[i] >= graph.size()) return false;
    if (i > 0 && graph.squared_distance(path.vertices[i - 1], path.vertices[i]) > r2) return false;
  }
  return true;
}

HopPath loop_erase(const HopPath& path, const GeometricGraph& graph) {
  require(is_valid_path(path, graph), ErrorKind::contract, "path has a hop longer than the connection radius");
  HopPath out;
  std::vector<std::size_t> position(graph.size(), GeometricGraph::npos);
  for (std::uint32_t v : path.vertices) {
    if (position[v] != GeometricGraph::npos) {
      const std::size_t keep = position[v] + 1;
      for (std::size_t i = keep; i < out.vertices.size(); ++i) position[out.vertices[i]] = GeometricGraph::npos;
      out.vertices.resize(keep);
      continue;
    }
    position[v] = out.vertices.size();
    out.vertices.push_back(v);
  }
  return out;
}

}  // namespace bhp
