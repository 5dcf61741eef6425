#include "bhp/point_process.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "bhp/error.hpp"
#include "bhp/rng.hpp"

namespace bhp {

Window::Window(std::vector<double> center, std::vector<double> half_widths, BoundaryMode mode)
    : center_(std::move(center)), half_widths_(std::move(half_widths)), mode_(mode) {
  require(center_.size() == half_widths_.size(), ErrorKind::parameter, "window center and half-widths differ in dimension");
  require(center_.size() >= 2, ErrorKind::parameter, "window dimension must be at least 2");
  for (double h : half_widths_)
    require(h > 0.0 && std::isfinite(h), ErrorKind::parameter, "window half-widths must be positive and finite");
}

Window Window::cube(int d, double half_width, BoundaryMode mode) {
  require(d >= 2, ErrorKind::parameter, "dimension must be at least 2");
  return Window(std::vector<double>(d, 0.0), std::vector<double>(d, half_width), mode);
}

Window Window::from_bounds(std::span<const double> lo, std::span<const double> hi, BoundaryMode mode) {
  require(lo.size() == hi.size(), ErrorKind::parameter, "window bounds differ in dimension");
  std::vector<double> c(lo.size()), h(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    c[i] = 0.5 * (lo[i] + hi[i]);
    h[i] = 0.5 * (hi[i] - lo[i]);
  }
  return Window(std::move(c), std::move(h), mode);
}

double Window::volume() const noexcept {
  double v = 1.0;
  for (double h : half_widths_) v *= 2.0 * h;
  return v;
}

bool Window::contains(std::span<const double> x) const noexcept {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo(i) || x[i] > hi(i)) return false;
  return true;
}

Window Window::inset(double amount) const {
  std::vector<double> h = half_widths_;
  for (double& v : h) {
    v -= amount;
    require(v > 0.0, ErrorKind::configuration, "core window is empty after insetting by " + std::to_string(amount));
  }
  return Window(center_, std::move(h), mode_);
}

Window Window::scaled(double factor) const {
  require(factor > 0.0 && std::isfinite(factor), ErrorKind::parameter, "window scale factor must be positive");
  std::vector<double> c = center_, h = half_widths_;
  for (double& v : c) v *= factor;
  for (double& v : h) v *= factor;
  return Window(std::move(c), std::move(h), mode_);
}

void Window::wrap(std::span<double> x) const noexcept {
  if (mode_ != BoundaryMode::torus) return;
  for (int i = 0; i < dim(); ++i) {
    const double p = period(i);
    double t = std::fmod(x[i] - lo(i), p);
    if (t < 0.0) t += p;
    if (t >= p) t = 0.0;
    x[i] = lo(i) + t;
  }
}

double Window::squared_distance(std::span<const double> a, std::span<const double> b) const noexcept {
  double s = 0.0;
  if (mode_ == BoundaryMode::torus) {
    for (int i = 0; i < dim(); ++i) {
      const double p = period(i);
      double t = std::abs(a[i] - b[i]);
      t = std::fmod(t, p);
      t = std::min(t, p - t);
      s += t * t;
    }
  } else {
    for (int i = 0; i < dim(); ++i) {
      const double t = a[i] - b[i];
      s += t * t;
    }
  }
  return s;
}

PointSet::PointSet(Window window, std::vector<double> coords, Provenance provenance)
    : window_(std::move(window)), coords_(std::move(coords)), provenance_(std::move(provenance)) {
  require(coords_.size() % static_cast<std::size_t>(window_.dim()) == 0, ErrorKind::parameter,
          "coordinate count is not a multiple of the dimension");
}

PointSet PointSet::from_points(const Window& window, const std::vector<std::vector<double>>& points) {
  std::vector<double> coords;
  coords.reserve(points.size() * static_cast<std::size_t>(window.dim()));
  for (const auto& p : points) {
    require(static_cast<int>(p.size()) == window.dim(), ErrorKind::parameter, "point dimension mismatch");
    coords.insert(coords.end(), p.begin(), p.end());
  }
  return PointSet(window, std::move(coords), Provenance{"explicit", 0.0, 0, {}});
}

PointSet PointSet::with_point(std::span<const double> x, const std::string& note) const {
  require(static_cast<int>(x.size()) == dim(), ErrorKind::parameter, "inserted point has wrong dimension");
  std::vector<double> coords = coords_;
  const std::size_t at = coords.size();
  coords.insert(coords.end(), x.begin(), x.end());
  window_.wrap(std::span<double>(coords.data() + at, x.size()));
  Provenance p = provenance_;
  p.operations.push_back(note);
  return PointSet(window_, std::move(coords), std::move(p));
}

void ModelParams::validate() const {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::parameter, "lambda must be positive");
  require(lambda_prime >= 0.0 && std::isfinite(lambda_prime), ErrorKind::parameter, "lambda_prime must be non-negative");
  require(r >= 0.0 && std::isfinite(r), ErrorKind::parameter, "r must be non-negative");
  require(d >= 2, ErrorKind::parameter, "dimension must be at least 2");
  require(k >= 0, ErrorKind::parameter, "hop budget must be non-negative");
}

PointSet sample_poisson(double lambda, const Window& window, std::uint64_t seed) {
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorKind::parameter, "intensity must be non-negative");
  const int d = window.dim();
  Stream rng(seed);
  std::size_t n = 0;
  const double mean = lambda * window.volume();
  if (mean > 0.0) {
    std::poisson_distribution<long long> count(mean);
    n = static_cast<std::size_t>(count(rng));
  }
  std::vector<double> coords(n * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) coords[i * d + j] = rng.uniform(window.lo(j), window.hi(j));
  return PointSet(window, std::move(coords), Provenance{"poisson", lambda, seed, {"sample_poisson"}});
}

PointSet sample_shifted_lattice(double spacing, const Window& window, std::uint64_t seed) {
  require(spacing > 0.0 && std::isfinite(spacing), ErrorKind::parameter, "lattice spacing must be positive");
  const int d = window.dim();
  Stream rng(seed);
  std::vector<double> shift(d);
  for (double& u : shift) u = rng.uniform(0.0, spacing);

  // Half-open clipping [lo, hi) so that tiling windows count each site once.
  std::vector<long long> first(d), last(d);
  for (int j = 0; j < d; ++j) {
    first[j] = static_cast<long long>(std::ceil((window.lo(j) - shift[j]) / spacing));
    last[j] = static_cast<long long>(std::ceil((window.hi(j) - shift[j]) / spacing)) - 1;
    while (shift[j] + spacing * first[j] < window.lo(j)) ++first[j];
    while (last[j] >= first[j] && shift[j] + spacing * last[j] >= window.hi(j)) --last[j];
  }
  std::vector<double> coords;
  bool empty = false;
  for (int j = 0; j < d; ++j) empty |= last[j] < first[j];
  if (!empty) {
    std::vector<long long> idx = first;
    for (;;) {
      for (int j = 0; j < d; ++j) coords.push_back(shift[j] + spacing * static_cast<double>(idx[j]));
      int j = 0;
      while (j < d && ++idx[j] > last[j]) {
        idx[j] = first[j];
        ++j;
      }
      if (j == d) break;
    }
  }
  return PointSet(window, std::move(coords),
                  Provenance{"shifted_lattice", std::pow(spacing, -d), seed, {"sample_shifted_lattice"}});
}

PointSet thin_and_scale(const PointSet& points, double survival_p, double scale, std::uint64_t seed) {
  require(survival_p >= 0.0 && survival_p <= 1.0, ErrorKind::parameter, "survival probability must lie in [0, 1]");
  require(scale > 0.0 && std::isfinite(scale), ErrorKind::parameter, "scale must be positive (a zero scale collapses the window)");
  const int d = points.dim();
  Stream rng(seed);
  std::vector<double> coords;
  coords.reserve(points.coords().size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool keep = rng.uniform() < survival_p;
    if (!keep) continue;
    for (double x : points[i]) coords.push_back(x * scale);
  }
  Provenance p = points.provenance();
  p.intensity *= survival_p * std::pow(scale, -d);
  p.operations.push_back("thin_and_scale");
  return PointSet(points.window().scaled(scale), std::move(coords), std::move(p));
}

PointSet sample_stations(const ModelParams& params, const Window& window, std::uint64_t seed) {
  params.validate();
  if (params.lambda_prime == 0.0) {
    return PointSet(window, {}, Provenance{"empty", 0.0, seed, {"sample_stations"}});
  }
  require(params.r > 0.0, ErrorKind::configuration, "base stations need r > 0 to be simulated");
  const Window unit = window.scaled(1.0 / params.r);
  const PointSet base = params.stations == StationProcess::poisson
                            ? sample_poisson(params.lambda_prime, unit, derive_seed(seed, {1}))
                            : sample_shifted_lattice(std::pow(params.lambda_prime, -1.0 / params.d), unit,
                                                     derive_seed(seed, {2}));
  return thin_and_scale(base, 1.0, params.r, derive_seed(seed, {3}));
}

}  // namespace bhp
