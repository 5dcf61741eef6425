#include "bhp/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "bhp/error.hpp"
#include "bhp/geom_graph.hpp"
#include "bhp/parallel.hpp"
#include "bhp/rng.hpp"
#include "bhp/union_find.hpp"

namespace bhp {

namespace {

enum Tag : std::uint64_t { kQ = 31, kSoundness = 32, kTail = 33 };

void check_epsilon(double epsilon, int d) {
  require(d >= 2, ErrorKind::parameter, "dimension must be >= 2");
  require(epsilon > 0.0 && epsilon < 1.0 / d, ErrorKind::parameter, "epsilon must lie in (0, 1/d)");
}

std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Occupancy of the (2d)^d subcubes and the central cube of one site cube.
class CubeTester {
 public:
  CubeTester(int d, double epsilon)
      : d_(d), side_(1.0 - epsilon), quarter_(epsilon / 4.0), per_axis_(2 * d), seen_(ipow(2 * d, d), 0) {}

  void reset() {
    std::fill(seen_.begin(), seen_.end(), 0);
    missing_ = seen_.size();
    central_ = false;
  }

  // x relative to the site centre.
  void add(std::span<const double> x) {
    std::size_t flat = 0;
    bool central = true;
    for (int i = d_ - 1; i >= 0; --i) {
      const double u = (x[i] + 0.5 * side_) / side_ * per_axis_;
      if (u < 0.0 || u > per_axis_) return;
      const long c = std::min<long>(static_cast<long>(u), per_axis_ - 1);
      flat = flat * per_axis_ + static_cast<std::size_t>(c);
      central = central && std::abs(x[i]) <= quarter_;
    }
    if (!seen_[flat]) {
      seen_[flat] = 1;
      --missing_;
    }
    central_ = central_ || central;
  }

  bool good() const noexcept { return missing_ == 0 && central_; }

 private:
  int d_;
  double side_;
  double quarter_;
  long per_axis_;
  std::vector<std::uint8_t> seen_;
  std::size_t missing_ = 0;
  bool central_ = false;
};

bool sample_good_site(double lambda, double epsilon, int d, Stream& rng) {
  CubeTester tester(d, epsilon);
  tester.reset();
  const double side = 1.0 - epsilon;
  const double mean = lambda * std::pow(side, d);
  std::size_t n = 0;
  if (mean > 0.0) {
    std::poisson_distribution<long long> count(mean);
    n = static_cast<std::size_t>(count(rng));
  }
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x[j] = rng.uniform(-0.5 * side, 0.5 * side);
    tester.add(x);
    if (tester.good()) return true;
  }
  return false;
}

// Offsets of the 3^d - 1 ell_inf neighbours.
std::vector<std::vector<long>> star_offsets(int d) {
  std::vector<std::vector<long>> out;
  const std::uint64_t total = ipow(3, d);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::vector<long> off(static_cast<std::size_t>(d));
    std::uint64_t c = code;
    bool zero = true;
    for (int i = 0; i < d; ++i) {
      off[i] = static_cast<long>(c % 3) - 1;
      c /= 3;
      zero = zero && off[i] == 0;
    }
    if (!zero) out.push_back(std::move(off));
  }
  return out;
}

template <class F>
void for_each_offset(const SiteBox& box, std::size_t index, const std::vector<std::vector<long>>& offsets, F&& f) {
  const std::vector<long> z = box.site(index);
  std::vector<long> w(z.size());
  for (const auto& off : offsets) {
    for (std::size_t i = 0; i < z.size(); ++i) w[i] = z[i] + off[i];
    if (box.contains(w)) f(box.index(w));
  }
}

std::vector<std::vector<long>> axis_offsets(int d) {
  std::vector<std::vector<long>> out;
  for (int i = 0; i < d; ++i)
    for (long s : {-1L, 1L}) {
      std::vector<long> off(static_cast<std::size_t>(d), 0);
      off[i] = s;
      out.push_back(std::move(off));
    }
  return out;
}

}  // namespace

double epsilon_of_lambda(double lambda, int d) {
  require(d >= 2, ErrorKind::parameter, "dimension must be >= 2");
  require(lambda > 1.0, ErrorKind::parameter, "lambda must exceed 1");
  const double eps = 2.0 * std::pow(std::log(lambda) / lambda, 1.0 / d);
  if (eps >= 1.0 / d)
    throw Error(ErrorKind::lambda_too_small,
                "epsilon(" + std::to_string(lambda) + ") = " + std::to_string(eps) + " is not below 1/d");
  return eps;
}

double q_bound(double lambda, double epsilon, int d) {
  check_epsilon(epsilon, d);
  require(lambda >= 0.0, ErrorKind::parameter, "lambda must be nonnegative");
  const double cubes = std::pow(2.0 * d, d);
  return cubes * std::exp(-lambda * std::pow(1.0 - epsilon, d) / cubes) +
         std::exp(-lambda * std::pow(0.5 * epsilon, d));
}

Estimate estimate_q(double lambda, double epsilon, int d, const McConfig& mc) {
  check_epsilon(epsilon, d);
  require(lambda >= 0.0, ErrorKind::parameter, "lambda must be nonnegative");
  auto bad = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
    Stream rng = Stream::derive(mc.seed, {kQ, rep});
    return sample_good_site(lambda, epsilon, d, rng) ? 0.0 : 1.0;
  });
  return Estimate::from_samples(bad);
}

bool cube_is_good(std::span<const double> relative_coords, int d, double epsilon) {
  check_epsilon(epsilon, d);
  CubeTester tester(d, epsilon);
  tester.reset();
  for (std::size_t i = 0; i + d <= relative_coords.size(); i += d) tester.add(relative_coords.subspan(i, d));
  return tester.good();
}

// ---------------------------------------------------------------------------

SiteBox SiteBox::segment(int d, long m, long margin) {
  require(d >= 2 && m >= 0 && margin >= 1, ErrorKind::parameter, "bad segment box");
  SiteBox box;
  box.lo.assign(d, -margin);
  box.hi.assign(d, margin);
  box.hi[0] = m + margin;
  return box;
}

std::size_t SiteBox::size() const noexcept {
  std::size_t n = 1;
  for (int i = 0; i < dim(); ++i) n *= static_cast<std::size_t>(extent(i));
  return n;
}

bool SiteBox::contains(std::span<const long> z) const noexcept {
  for (int i = 0; i < dim(); ++i)
    if (z[i] < lo[i] || z[i] > hi[i]) return false;
  return true;
}

std::size_t SiteBox::index(std::span<const long> z) const noexcept {
  std::size_t idx = 0;
  for (int i = dim() - 1; i >= 0; --i) idx = idx * static_cast<std::size_t>(extent(i)) + (z[i] - lo[i]);
  return idx;
}

std::vector<long> SiteBox::site(std::size_t index) const {
  std::vector<long> z(lo.size());
  for (int i = 0; i < dim(); ++i) {
    const auto e = static_cast<std::size_t>(extent(i));
    z[i] = lo[i] + static_cast<long>(index % e);
    index /= e;
  }
  return z;
}

bool SiteBox::on_face(std::size_t index) const noexcept {
  for (int i = 0; i < dim(); ++i) {
    const auto e = static_cast<std::size_t>(extent(i));
    const std::size_t c = index % e;
    if (c == 0 || c + 1 == e) return true;
    index /= e;
  }
  return false;
}

std::size_t SiteBox::axis_site(long j) const {
  std::vector<long> z(lo.size(), 0);
  z[0] = j;
  require(contains(z), ErrorKind::configuration, "axis site outside the site box");
  return index(z);
}

SiteGrid::SiteGrid(double epsilon, SiteBox box, std::vector<std::uint8_t> good)
    : epsilon_(epsilon), box_(std::move(box)), good_(std::move(good)) {
  check_epsilon(epsilon_, box_.dim());
  require(box_.lo.size() == box_.hi.size(), ErrorKind::parameter, "site box bounds differ in dimension");
  for (int i = 0; i < box_.dim(); ++i) require(box_.lo[i] <= box_.hi[i], ErrorKind::parameter, "empty site box");
  require(good_.size() == box_.size(), ErrorKind::parameter, "flag count does not match the site box");
}

SiteGrid SiteGrid::from_flags(double epsilon, SiteBox box, std::vector<std::uint8_t> good) {
  return SiteGrid(epsilon, std::move(box), std::move(good));
}

std::size_t SiteGrid::bad_count() const noexcept {
  return static_cast<std::size_t>(std::count(good_.begin(), good_.end(), std::uint8_t{0}));
}

std::vector<std::size_t> SiteGrid::star_neighbors(std::size_t index) const {
  std::vector<std::size_t> out;
  for_each_offset(box_, index, star_offsets(dim()), [&](std::size_t j) { out.push_back(j); });
  return out;
}

SiteGrid classify_sites(const PointSet& points, double epsilon, const SiteBox& box) {
  const int d = box.dim();
  check_epsilon(epsilon, d);
  require(points.dim() == d, ErrorKind::parameter, "point and site dimensions differ");
  const double s = 1.0 - epsilon;
  const Window& w = points.window();
  constexpr double tol = 1e-9;
  for (int i = 0; i < d; ++i)
    require(w.lo(i) <= s * box.lo[i] - 0.5 + tol && w.hi(i) >= s * box.hi[i] + 0.5 - tol, ErrorKind::configuration,
            "point window does not cover the site box");

  std::vector<CubeTester> testers(box.size(), CubeTester(d, epsilon));
  for (auto& t : testers) t.reset();
  std::vector<long> z(static_cast<std::size_t>(d));
  std::vector<double> rel(static_cast<std::size_t>(d));
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto x = points[p];
    for (int i = 0; i < d; ++i) {
      z[i] = static_cast<long>(std::floor(x[i] / s + 0.5));
      rel[i] = x[i] - s * z[i];
    }
    if (box.contains(z)) testers[box.index(z)].add(rel);
  }
  std::vector<std::uint8_t> good(box.size());
  for (std::size_t i = 0; i < good.size(); ++i) good[i] = testers[i].good() ? 1 : 0;
  return SiteGrid(epsilon, box, std::move(good));
}

SiteGrid classify_poisson(double lambda, double epsilon, const SiteBox& box, std::uint64_t seed) {
  const int d = box.dim();
  check_epsilon(epsilon, d);
  std::vector<std::uint8_t> good(box.size());
  for (std::size_t i = 0; i < good.size(); ++i) {
    Stream rng = Stream::derive(seed, {i});
    good[i] = sample_good_site(lambda, epsilon, d, rng) ? 1 : 0;
  }
  return SiteGrid(epsilon, box, std::move(good));
}

// ---------------------------------------------------------------------------

std::size_t BadDecomposition::u_prime_size() const noexcept {
  std::size_t n = 0;
  for (const auto& c : components_) n += c.sites.size();
  return n;
}

std::size_t BadDecomposition::boundary_total() const noexcept {
  std::size_t n = 0;
  for (const auto& c : components_) n += c.boundary.size();
  return n;
}

bool star_connected(const SiteBox& box, std::span<const std::size_t> sites) {
  if (sites.empty()) return true;
  std::vector<std::size_t> sorted(sites.begin(), sites.end());
  std::sort(sorted.begin(), sorted.end());
  auto pos = [&](std::size_t s) -> long {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), s);
    return it != sorted.end() && *it == s ? it - sorted.begin() : -1;
  };
  const auto offsets = star_offsets(box.dim());
  UnionFind uf(sorted.size());
  std::size_t merges = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for_each_offset(box, sorted[i], offsets, [&](std::size_t j) {
      const long p = pos(j);
      if (p >= 0 && uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(p))) ++merges;
    });
  return merges + 1 == sorted.size();
}

BadDecomposition bad_decomposition(const SiteGrid& grid, long m) {
  require(m >= 0, ErrorKind::parameter, "m must be nonnegative");
  const SiteBox& box = grid.box();
  const int d = box.dim();
  const std::size_t n = grid.size();
  const auto star = star_offsets(d);
  BadDecomposition out(grid);
  out.m_ = m;
  std::vector<std::size_t> axis(static_cast<std::size_t>(m) + 1);
  for (long j = 0; j <= m; ++j) axis[j] = box.axis_site(j);

  // Bad *-components and the ones meeting the segment.
  UnionFind uf(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (grid.good(s)) continue;
    for_each_offset(box, s, star, [&](std::size_t t) {
      if (!grid.good(t)) uf.unite(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t));
    });
  }
  std::vector<std::uint8_t> relevant(n, 0);
  for (std::size_t s : axis)
    if (!grid.good(s)) relevant[uf.find(static_cast<std::uint32_t>(s))] = 1;
  out.in_u_m_.assign(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (grid.good(s) || !relevant[uf.find(static_cast<std::uint32_t>(s))]) continue;
    if (box.on_face(s))
      throw Error(ErrorKind::enlarge_box, "a bad component meeting the segment reaches the site box face; enlarge box");
    out.in_u_m_[s] = 1;
    ++out.u_m_size_;
  }

  // Unbounded complement component: nearest-neighbour flood fill from the faces.
  const auto nn = axis_offsets(d);
  std::vector<std::uint8_t> outside(n, 0);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s)
    if (box.on_face(s)) {
      outside[s] = 1;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    for_each_offset(box, s, nn, [&](std::size_t t) {
      if (!outside[t] && !out.in_u_m_[t]) {
        outside[t] = 1;
        queue.push_back(t);
      }
    });
  }

  // *-components of U' and their outer boundaries.
  out.component_of_.assign(n, -1);
  for (std::size_t s = 0; s < n; ++s) {
    if (outside[s] || out.component_of_[s] >= 0) continue;
    const long id = static_cast<long>(out.components_.size());
    FilledComponent comp;
    out.component_of_[s] = id;
    queue.push_back(s);
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      comp.sites.push_back(u);
      for_each_offset(box, u, star, [&](std::size_t t) {
        if (!outside[t] && out.component_of_[t] < 0) {
          out.component_of_[t] = id;
          queue.push_back(t);
        }
      });
    }
    std::sort(comp.sites.begin(), comp.sites.end());
    for (std::size_t u : comp.sites) {
      comp.bad_sites += out.in_u_m_[u];
      for_each_offset(box, u, star, [&](std::size_t t) {
        if (out.component_of_[t] != id) comp.boundary.push_back(t);
      });
    }
    std::sort(comp.boundary.begin(), comp.boundary.end());
    comp.boundary.erase(std::unique(comp.boundary.begin(), comp.boundary.end()), comp.boundary.end());
    out.components_.push_back(std::move(comp));
  }

  // Run sequences along the segment.
  auto in_prime = [&](long j) { return out.component_of_[axis[j]] >= 0; };
  out.origin_engulfed_ = in_prime(0);
  out.end_engulfed_ = in_prime(m);
  long a = 0;
  while (a <= m && in_prime(a)) ++a;
  while (a <= m) {
    long b = a;
    while (b < m && !in_prime(b + 1)) ++b;
    out.a_.push_back(a);
    out.b_.push_back(b);
    if (b == m) break;
    const long comp = out.component_of_[axis[b + 1]];
    out.detours_.push_back(comp);
    long next = b;
    for (std::size_t t : out.components_[comp].boundary) {
      const std::vector<long> z = box.site(t);
      bool on_axis = true;
      for (int i = 1; i < d; ++i) on_axis = on_axis && z[i] == 0;
      if (on_axis) next = std::max(next, z[0]);
    }
    if (next > m) break;
    a = next;
  }
  return out;
}

long m_epsilon(double n, double epsilon) {
  require(epsilon > 0.0 && epsilon < 1.0, ErrorKind::parameter, "epsilon must lie in (0, 1)");
  require(n >= 0.0, ErrorKind::parameter, "n must be nonnegative");
  return static_cast<long>(std::floor(n / (1.0 - epsilon) + 0.5));
}

std::uint64_t covering_constant(int d) {
  require(d >= 1, ErrorKind::parameter, "dimension must be positive");
  // Grid spacing 1/sqrt(d) puts every point within 1/2 of a grid node; a
  // cube of side 1 - eps < 1 needs at most ceil(sqrt(d)) nodes per axis.
  const auto per_axis = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(d)) - 1e-12));
  return ipow(3, d) * ipow(per_axis, d);
}

std::uint64_t default_c1(int d) { return 2 * covering_constant(d); }

HopBound hop_upper_bound(const BadDecomposition& decomp, double n, double epsilon, std::optional<std::uint64_t> c1) {
  const SiteGrid& grid = decomp.grid();
  const int d = grid.dim();
  require(decomp.m() == m_epsilon(n, epsilon), ErrorKind::contract, "decomposition length differs from m_eps(n)");
  HopBound out;
  out.m = decomp.m();
  out.c1 = c1.value_or(default_c1(d));
  out.boundary_total = decomp.boundary_total();
  out.u_prime = decomp.u_prime_size();
  const std::uint64_t detour = 3 + ipow(2 * d, d);
  out.value = static_cast<std::uint64_t>(out.m) + detour * out.boundary_total + 2 * out.c1 * out.u_prime;

  auto withhold = [&](std::string why) {
    out.certified = false;
    out.reason = std::move(why);
    out.steps.clear();
    out.certified_hops = 0;
    return out;
  };
  if (decomp.a().empty()) return withhold("segment engulfed");
  if (decomp.origin_engulfed()) return withhold("origin engulfed");
  if (decomp.end_engulfed()) return withhold("end engulfed");

  const SiteBox& box = grid.box();
  auto boundary_ok = [&](long comp) {
    const auto& bd = decomp.components()[comp].boundary;
    for (std::size_t s : bd)
      if (!grid.good(s)) return false;
    return star_connected(box, bd);
  };
  auto in_boundary = [&](long comp, long j) {
    const auto& bd = decomp.components()[comp].boundary;
    return std::binary_search(bd.begin(), bd.end(), box.axis_site(j));
  };

  const auto& a = decomp.a();
  const auto& b = decomp.b();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (long j = a[i]; j <= b[i]; ++j)
      if (!grid.good(box.axis_site(j))) return withhold("bad site inside a run");
    out.steps.push_back({BoundStep::Kind::run, a[i], b[i], -1, static_cast<std::uint64_t>(b[i] - a[i])});
    const long to = i + 1 < a.size() ? a[i + 1] : out.m;
    if (i + 1 == a.size() && b[i] == out.m) break;
    const long comp = decomp.detours()[i];
    if (!boundary_ok(comp)) return withhold("boundary not good and *-connected");
    if (!in_boundary(comp, b[i]) || !in_boundary(comp, to)) return withhold("end not on the final boundary");
    out.steps.push_back(
        {BoundStep::Kind::detour, b[i], to, comp, detour * decomp.components()[comp].boundary.size()});
  }
  out.certified = true;
  for (const auto& s : out.steps) out.certified_hops += s.hops;
  if (out.certified_hops > out.value) throw Error(ErrorKind::contract, "certificate exceeds the bound");
  return out;
}

std::optional<std::size_t> anchor_point(const PointSet& points, double epsilon, long j) {
  const double s = 1.0 - epsilon;
  const double q = epsilon / 4.0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto x = points[p];
    bool in = std::abs(x[0] - s * static_cast<double>(j)) <= q;
    for (int i = 1; in && i < points.dim(); ++i) in = std::abs(x[i]) <= q;
    if (in) return p;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

SoundnessReport renorm_soundness(double lambda, int d, double n, double epsilon, long margin, const McConfig& mc) {
  check_epsilon(epsilon, d);
  require(lambda > 0.0 && n > 0.0, ErrorKind::parameter, "lambda and n must be positive");
  SoundnessReport report;
  report.lambda = lambda;
  report.epsilon = epsilon;
  report.n = n;
  report.m = m_epsilon(n, epsilon);
  const SiteBox box = SiteBox::segment(d, report.m, margin);
  const double s = 1.0 - epsilon;
  std::vector<double> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = s * box.lo[i] - 0.5;
    hi[i] = s * box.hi[i] + 0.5;
  }
  const Window window = Window::from_bounds(lo, hi);

  report.rows = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
    SoundnessRow row;
    const PointSet pts = sample_poisson(lambda, window, derive_seed(mc.seed, {kSoundness, rep}));
    const SiteGrid grid = classify_sites(pts, epsilon, box);
    std::optional<BadDecomposition> decomp;
    try {
      decomp.emplace(bad_decomposition(grid, report.m));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::enlarge_box) throw;
      row.status = SoundnessRow::Status::enlarge_box;
      row.reason = "enlarge box";
      return row;
    }
    const HopBound bound = hop_upper_bound(*decomp, n, epsilon);
    row.bound = bound.value;
    row.all_good = decomp->u_prime_size() == 0;
    if (!bound.certified) {
      row.reason = bound.reason;
      return row;
    }
    row.status = SoundnessRow::Status::certified;
    const auto x = anchor_point(pts, epsilon, 0);
    const auto y = anchor_point(pts, epsilon, report.m);
    if (!x || !y) throw Error(ErrorKind::contract, "good end site without a central point");
    const GeometricGraph graph(pts, 1.0);
    row.measured = chemical_distance(graph, *x, *y);
    return row;
  });

  for (const auto& row : report.rows) {
    if (row.status != SoundnessRow::Status::certified) continue;
    ++report.certified;
    if (!row.measured.within(static_cast<std::uint32_t>(std::min<std::uint64_t>(row.bound, UINT32_MAX))))
      ++report.violations;
    if (row.all_good) {
      ++report.all_good;
      report.max_all_good_ratio = std::max(report.max_all_good_ratio, static_cast<double>(row.bound) / n);
    }
  }
  return report;
}

TailReport cluster_tail_check(double lambda, double epsilon, int d, std::span<const long> m_list, long margin,
                              const McConfig& mc) {
  check_epsilon(epsilon, d);
  require(!m_list.empty(), ErrorKind::parameter, "m list is empty");
  TailReport report;
  report.lambda = lambda;
  report.epsilon = epsilon;
  report.regime_threshold = std::ldexp(1.0, -static_cast<int>(ipow(3, d)) - 1);

  struct Sample {
    bool enlarge = false;
    double bad_fraction = 0.0;
    double boundary_total = 0.0;
    double u_prime = 0.0;
    std::size_t not_connected = 0;
    std::size_t isoperimetry = 0;
    bool boundary_sum = false;
  };
  const double three_d = static_cast<double>(ipow(3, d));
  std::vector<std::vector<Sample>> per_m;
  for (std::size_t idx = 0; idx < m_list.size(); ++idx) {
    const long m = m_list[idx];
    const SiteBox box = SiteBox::segment(d, m, margin);
    per_m.push_back(run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
      Sample s;
      const SiteGrid grid = classify_poisson(lambda, epsilon, box, derive_seed(mc.seed, {kTail, idx, rep}));
      s.bad_fraction = static_cast<double>(grid.bad_count()) / static_cast<double>(grid.size());
      try {
        const BadDecomposition dec = bad_decomposition(grid, m);
        s.boundary_total = static_cast<double>(dec.boundary_total());
        s.u_prime = static_cast<double>(dec.u_prime_size());
        for (const auto& c : dec.components()) {
          if (!star_connected(box, c.boundary)) ++s.not_connected;
          const double bd = static_cast<double>(c.boundary.size());
          if (static_cast<double>(c.sites.size()) > three_d * d * d * bd * bd) ++s.isoperimetry;
        }
        s.boundary_sum = s.boundary_total > three_d * static_cast<double>(dec.u_m_size());
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::enlarge_box) throw;
        s.enlarge = true;
      }
      return s;
    }));
  }

  std::vector<double> fractions;
  for (const auto& samples : per_m)
    for (const auto& s : samples) fractions.push_back(s.bad_fraction);
  report.q_hat = Estimate::from_samples(fractions);
  report.in_regime = report.q_hat.value < report.regime_threshold;
  const double q = report.q_hat.value;

  for (std::size_t idx = 0; idx < m_list.size(); ++idx) {
    TailRow row;
    row.m = m_list[idx];
    row.boundary_threshold = std::ldexp(1.0, static_cast<int>(ipow(3, d)) + 2) * three_d * q * row.m;
    row.u_prime_threshold =
        std::ldexp(1.0, static_cast<int>(ipow(3, d)) + 4) * std::pow(3.0, 3 * d) * d * d * q * row.m;
    std::vector<double> bex, uex, bsum, usum;
    for (const auto& s : per_m[idx]) {
      ++report.realizations;
      if (s.enlarge) {
        ++row.enlarge_box;
        continue;
      }
      report.boundary_not_connected += s.not_connected;
      report.isoperimetry_violations += s.isoperimetry;
      report.boundary_sum_violations += s.boundary_sum ? 1 : 0;
      // An empty decomposition never counts, even when q_hat is 0.
      bex.push_back(s.boundary_total > 0.0 && s.boundary_total >= row.boundary_threshold ? 1.0 : 0.0);
      uex.push_back(s.u_prime > 0.0 && s.u_prime >= row.u_prime_threshold ? 1.0 : 0.0);
      bsum.push_back(s.boundary_total);
      usum.push_back(s.u_prime);
    }
    row.boundary_exceed = Estimate::from_samples(bex);
    row.u_prime_exceed = Estimate::from_samples(uex);
    row.mean_boundary_total = Estimate::from_samples(bsum);
    row.mean_u_prime = Estimate::from_samples(usum);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace bhp
