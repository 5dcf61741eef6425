#pragma once

// Brute-force reference implementations used by the unit tests and the
// acceptance binary. Each one avoids the data structure it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "bhp/point_process.hpp"
#include "bhp/rng.hpp"

namespace oracle {

inline constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

using Adjacency = std::vector<std::vector<std::uint32_t>>;

inline Adjacency adjacency(const bhp::PointSet& pts, double radius) {
  Adjacency adj(pts.size());
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j && pts.window().squared_distance(pts[i], pts[j]) <= r2) adj[i].push_back(static_cast<std::uint32_t>(j));
  return adj;
}

/// Component ids by plain BFS, numbered in order of lowest member.
inline std::vector<std::uint32_t> components(const Adjacency& adj) {
  std::vector<std::uint32_t> label(adj.size(), kInf);
  std::uint32_t next = 0;
  for (std::size_t s = 0; s < adj.size(); ++s) {
    if (label[s] != kInf) continue;
    std::vector<std::uint32_t> queue{static_cast<std::uint32_t>(s)};
    label[s] = next;
    for (std::size_t q = 0; q < queue.size(); ++q)
      for (std::uint32_t v : adj[queue[q]])
        if (label[v] == kInf) {
          label[v] = next;
          queue.push_back(v);
        }
    ++next;
  }
  return label;
}

/// All-pairs hop distances by Floyd-Warshall.
inline std::vector<std::vector<std::uint32_t>> all_pairs(const Adjacency& adj) {
  const std::size_t n = adj.size();
  std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (std::uint32_t j : adj[i]) d[i][j] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][k] == kInf) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (d[k][j] != kInf && d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    }
  return d;
}

/// Users within `radius` of a location (window metric).
inline std::vector<bool> touching(const bhp::PointSet& users, std::span<const double> x, double radius) {
  std::vector<bool> out(users.size(), false);
  for (std::size_t i = 0; i < users.size(); ++i)
    out[i] = users.window().squared_distance(users[i], x) <= radius * radius;
  return out;
}

/// H(X_i) = 1 + min over users j touching a station of the chain length
/// from i to j; kInf if no chain exists.
inline std::vector<std::uint32_t> hop_field(const bhp::PointSet& users, const bhp::PointSet& stations, double radius) {
  const auto d = all_pairs(adjacency(users, radius));
  std::vector<bool> touches(users.size(), false);
  for (std::size_t s = 0; s < stations.size(); ++s) {
    const auto t = touching(users, stations[s], radius);
    for (std::size_t i = 0; i < users.size(); ++i) touches[i] = touches[i] || t[i];
  }
  std::vector<std::uint32_t> h(users.size(), kInf);
  for (std::size_t i = 0; i < users.size(); ++i)
    for (std::size_t j = 0; j < users.size(); ++j)
      if (touches[j] && d[i][j] != kInf) h[i] = std::min(h[i], d[i][j] + 1);
  return h;
}

/// Hops from a location: 1 + chain length from a user touching it.
inline std::vector<std::uint32_t> hops_from(const bhp::PointSet& users, std::span<const double> x, double radius) {
  const auto d = all_pairs(adjacency(users, radius));
  const auto t = touching(users, x, radius);
  std::vector<std::uint32_t> h(users.size(), kInf);
  for (std::size_t i = 0; i < users.size(); ++i)
    for (std::size_t j = 0; j < users.size(); ++j)
      if (t[j] && d[j][i] != kInf) h[i] = std::min(h[i], d[j][i] + 1);
  return h;
}

/// Site goodness by direct point-in-cube tests over every subcube.
inline bool site_good(const bhp::PointSet& pts, std::span<const long> z, double eps) {
  const int d = pts.dim();
  const double s = 1.0 - eps;
  const int per = 2 * d;
  const double sub = s / per;
  long total = 1;
  for (int i = 0; i < d; ++i) total *= per;
  for (long code = 0; code < total; ++code) {
    long c = code;
    std::vector<double> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      const long k = c % per;
      c /= per;
      lo[i] = s * z[i] - s / 2 + k * sub;
      hi[i] = lo[i] + sub;
    }
    bool found = false;
    for (std::size_t p = 0; p < pts.size() && !found; ++p) {
      bool in = true;
      for (int i = 0; i < d && in; ++i) in = pts[p][i] >= lo[i] && pts[p][i] <= hi[i];
      found = in;
    }
    if (!found) return false;
  }
  for (std::size_t p = 0; p < pts.size(); ++p) {
    bool in = true;
    for (int i = 0; i < d && in; ++i) in = std::abs(pts[p][i] - s * z[i]) <= eps / 4;
    if (in) return true;
  }
  return false;
}

/// Uniform random configuration of n points in a cube of the given half-width.
inline bhp::PointSet random_points(std::size_t n, int d, double half_width, std::uint64_t seed,
                                   bhp::BoundaryMode mode = bhp::BoundaryMode::free) {
  bhp::Stream rng(seed);
  const bhp::Window w = bhp::Window::cube(d, half_width, mode);
  std::vector<double> coords(n * d);
  for (double& c : coords) c = rng.uniform(-half_width, half_width);
  return bhp::PointSet(w, std::move(coords));
}

}  // namespace oracle
