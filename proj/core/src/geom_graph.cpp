#include "bhp/geom_graph.hpp"

#include <algorithm>
#include <limits>

#include "bhp/error.hpp"
#include "bhp/union_find.hpp"

namespace bhp {

namespace {

constexpr int kMaxDim = 8;

}  // namespace

GeometricGraph::GeometricGraph(PointSet points, double radius) : points_(std::move(points)), radius_(radius) {
  require(radius > 0.0 && std::isfinite(radius), ErrorKind::parameter, "connection radius must be positive");
  const int d = dim();
  require(d <= kMaxDim, ErrorKind::parameter, "dimension above 8 is not supported by the grid index");
  require(points_.size() < std::numeric_limits<std::uint32_t>::max(), ErrorKind::parameter, "too many points");
  const Window& w = window();
  const bool torus = w.mode() == BoundaryMode::torus;

  cells_.assign(d, 1);
  double total = 1.0;
  for (int j = 0; j < d; ++j) {
    cells_[j] = std::max<long>(1, static_cast<long>(std::floor(w.period(j) / radius_)));
    total *= static_cast<double>(cells_[j]);
  }
  // Keep the dense grid O(N): coarser cells stay correct, only slower.
  const double cap = std::max(64.0, 2.0 * static_cast<double>(points_.size()));
  if (total > cap) {
    const double shrink = std::pow(total / cap, 1.0 / d);
    for (int j = 0; j < d; ++j)
      cells_[j] = std::max<long>(1, static_cast<long>(std::floor(static_cast<double>(cells_[j]) / shrink)));
  }
  cell_side_.resize(d);
  for (int j = 0; j < d; ++j) cell_side_[j] = w.period(j) / static_cast<double>(cells_[j]);

  // Per-axis offsets; a torus axis with < 3 cells would otherwise visit a
  // cell twice.
  std::vector<std::vector<long>> axis(d);
  for (int j = 0; j < d; ++j) {
    if (!torus || cells_[j] >= 3) axis[j] = {-1, 0, 1};
    else if (cells_[j] == 2) axis[j] = {0, 1};
    else axis[j] = {0};
  }
  std::vector<std::size_t> pos(d, 0);
  for (;;) {
    for (int j = 0; j < d; ++j) offsets_.push_back(axis[j][pos[j]]);
    int j = 0;
    while (j < d && ++pos[j] == axis[j].size()) {
      pos[j] = 0;
      ++j;
    }
    if (j == d) break;
  }

  std::size_t n_cells = 1;
  for (long c : cells_) n_cells *= static_cast<std::size_t>(c);
  const std::size_t n = points_.size();
  std::vector<std::uint32_t> cell_id(n);
  cell_start_.assign(n_cells + 1, 0);
  long scratch[kMaxDim];
  for (std::size_t i = 0; i < n; ++i) {
    cell_id[i] = static_cast<std::uint32_t>(cell_of(points_[i], std::span<long>(scratch, static_cast<std::size_t>(d))));
    ++cell_start_[cell_id[i] + 1];
  }
  for (std::size_t c = 0; c < n_cells; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_points_.resize(n);
  sorted_coords_.resize(n * static_cast<std::size_t>(d));
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t s = fill[cell_id[i]]++;
    cell_points_[s] = static_cast<std::uint32_t>(i);
    std::copy_n(points_[i].begin(), d, sorted_coords_.begin() + static_cast<std::ptrdiff_t>(s) * d);
  }
}

std::size_t GeometricGraph::cell_of(std::span<const double> x, std::span<long> coords) const noexcept {
  const Window& w = window();
  const int d = dim();
  const bool torus = w.mode() == BoundaryMode::torus;
  std::size_t flat = 0;
  for (int j = d - 1; j >= 0; --j) {
    long c = static_cast<long>(std::floor((x[j] - w.lo(j)) / cell_side_[j]));
    if (torus) {
      c %= cells_[j];
      if (c < 0) c += cells_[j];
    } else {
      c = std::clamp<long>(c, 0, cells_[j] - 1);
    }
    coords[j] = c;
    flat = flat * static_cast<std::size_t>(cells_[j]) + static_cast<std::size_t>(c);
  }
  return flat;
}

bool GeometricGraph::any_within(std::span<const double> location, double r) const {
  bool found = false;
  for_each_within(location, r, [&](std::size_t) { found = true; });
  return found;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> GeometricGraph::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::size_t i = 0; i < size(); ++i)
    for_each_neighbor(i, [&](std::size_t j) {
      if (i < j) out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    });
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t GeometricGraph::edge_count() const {
  std::size_t twice = 0;
  for (std::size_t i = 0; i < size(); ++i) for_each_neighbor(i, [&](std::size_t) { ++twice; });
  return twice / 2;
}

GeometricGraph build_graph(PointSet points, double radius) { return GeometricGraph(std::move(points), radius); }

ClusterLabeling clusters(const GeometricGraph& graph, double giant_fraction) {
  require(giant_fraction > 0.0 && giant_fraction <= 1.0, ErrorKind::parameter, "giant fraction must lie in (0, 1]");
  const std::size_t n = graph.size();
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    graph.for_each_neighbor(i, [&](std::size_t j) {
      if (j > i) uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    });

  ClusterLabeling out;
  out.label.assign(n, 0);
  constexpr std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> root_label(n, unset);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t root = uf.find(static_cast<std::uint32_t>(i));
    if (root_label[root] == unset) {
      root_label[root] = static_cast<std::uint32_t>(out.sizes.size());
      out.sizes.push_back(0);
    }
    out.label[i] = root_label[root];
    ++out.sizes[root_label[root]];
  }
  if (!out.sizes.empty()) {
    const auto it = std::max_element(out.sizes.begin(), out.sizes.end());
    if (static_cast<double>(*it) >= giant_fraction * static_cast<double>(n))
      out.giant_id = static_cast<std::uint32_t>(it - out.sizes.begin());
  }
  return out;
}

std::optional<std::uint32_t> cluster_containing(const ClusterLabeling& labeling, const GeometricGraph& graph,
                                                std::span<const double> location) {
  require(labeling.label.size() == graph.size(), ErrorKind::contract, "labeling does not match graph");
  std::size_t best = GeometricGraph::npos;
  double best_d2 = std::numeric_limits<double>::infinity();
  graph.for_each_within(location, graph.radius(), [&](std::size_t j) {
    const double d2 = graph.window().squared_distance(location, graph.points()[j]);
    if (d2 < best_d2 || (d2 == best_d2 && j < best)) {
      best_d2 = d2;
      best = j;
    }
  });
  if (best == GeometricGraph::npos) return std::nullopt;
  return labeling.label[best];
}

}  // namespace bhp
