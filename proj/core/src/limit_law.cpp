#include "bhp/limit_law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bhp/error.hpp"
#include "bhp/rng.hpp"

namespace bhp {

namespace {

// Calls f(distance) for every point of spacing * Z^d + shift within `radius`
// of the origin.
template <class F>
void for_each_lattice_point(std::span<const double> shift, double spacing, double radius, F&& f) {
  const int d = static_cast<int>(shift.size());
  std::vector<long long> first(d), last(d), idx(d);
  for (int j = 0; j < d; ++j) {
    first[j] = static_cast<long long>(std::ceil((-radius - shift[j]) / spacing));
    last[j] = static_cast<long long>(std::floor((radius - shift[j]) / spacing));
    if (last[j] < first[j]) return;
  }
  idx = first;
  const double r2 = radius * radius;
  for (;;) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double x = shift[j] + spacing * static_cast<double>(idx[j]);
      s += x * x;
    }
    if (s <= r2) f(std::sqrt(s));
    int j = 0;
    while (j < d && ++idx[j] > last[j]) {
      idx[j] = first[j];
      ++j;
    }
    if (j == d) break;
  }
}

// Sorted distances from the origin of the lattice points within `radius`.
std::vector<double> lattice_distances(std::span<const double> shift, double spacing, double radius) {
  std::vector<double> out;
  for_each_lattice_point(shift, spacing, radius, [&](double r) { out.push_back(r); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> quadrature_shift(std::size_t node, int d, int per_axis, double spacing) {
  std::vector<double> shift(d);
  for (int j = 0; j < d; ++j) {
    shift[j] = (static_cast<double>(node % per_axis) + 0.5) / per_axis * spacing;
    node /= per_axis;
  }
  return shift;
}

// Mean over configurations of 1 - (1 - theta)^{N_t}.
double thinned_hit_probability(const std::vector<std::vector<double>>& distances, double theta, double t) {
  if (distances.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& ds : distances) {
    const auto n = static_cast<double>(std::upper_bound(ds.begin(), ds.end(), t) - ds.begin());
    acc += 1.0 - std::pow(1.0 - theta, n);
  }
  return acc / static_cast<double>(distances.size());
}

}  // namespace

double kappa_d(int d) {
  require(d >= 1, ErrorKind::parameter, "dimension must be positive");
  const double h = 0.5 * d;
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

StationLaw StationLaw::poisson(double intensity) {
  require(intensity >= 0.0 && std::isfinite(intensity), ErrorKind::parameter, "station intensity must be non-negative");
  StationLaw law;
  law.kind_ = Kind::poisson;
  law.intensity_ = intensity;
  return law;
}

StationLaw StationLaw::shifted_lattice(double spacing, int d, int quadrature_points) {
  require(spacing > 0.0, ErrorKind::parameter, "lattice spacing must be positive");
  require(d >= 1 && quadrature_points >= 1, ErrorKind::parameter, "bad lattice quadrature setup");
  StationLaw law;
  law.kind_ = Kind::shifted_lattice;
  law.spacing_ = spacing;
  law.intensity_ = std::pow(spacing, -d);
  law.lattice_dim_ = d;
  law.lattice_radius_ = spacing * (2.0 * std::sqrt(static_cast<double>(d)) + 4.0);
  std::size_t nodes = 1;
  for (int j = 0; j < d; ++j) nodes *= static_cast<std::size_t>(quadrature_points);
  auto cache = std::make_shared<std::vector<std::vector<double>>>();
  cache->reserve(nodes);
  for (std::size_t q = 0; q < nodes; ++q)
    cache->push_back(lattice_distances(quadrature_shift(q, d, quadrature_points, spacing), spacing, law.lattice_radius_));
  law.distances_ = std::move(cache);
  return law;
}

StationLaw StationLaw::empirical(const std::function<PointSet(std::uint64_t)>& sampler, std::size_t samples,
                                 std::uint64_t seed) {
  require(samples > 0, ErrorKind::parameter, "empirical station law needs at least one sample");
  StationLaw law;
  law.kind_ = Kind::empirical;
  auto cache = std::make_shared<std::vector<std::vector<double>>>();
  double total_intensity = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const PointSet ps = sampler(derive_seed(seed, {i}));
    std::vector<double> ds;
    ds.reserve(ps.size());
    for (std::size_t p = 0; p < ps.size(); ++p) {
      double s = 0.0;
      for (double x : ps[p]) s += x * x;
      ds.push_back(std::sqrt(s));
    }
    std::sort(ds.begin(), ds.end());
    total_intensity += static_cast<double>(ps.size()) / ps.window().volume();
    cache->push_back(std::move(ds));
  }
  law.intensity_ = total_intensity / static_cast<double>(samples);
  law.distances_ = std::move(cache);
  return law;
}

double StationLaw::contact_cdf(double theta, int d, double t) const {
  if (t < 0.0) return 0.0;
  if (std::isinf(t)) return theta > 0.0 && intensity_ > 0.0 ? 1.0 : 0.0;
  switch (kind_) {
    case Kind::poisson:
      return 1.0 - std::exp(-theta * intensity_ * kappa_d(d) * std::pow(t, d));
    case Kind::shifted_lattice: {
      require(d == lattice_dim_, ErrorKind::parameter, "lattice law built for another dimension");
      if (t <= lattice_radius_) return thinned_hit_probability(*distances_, theta, t);
      // t is past the covering radius, so every shift has a point within t.
      if (theta <= 0.0) return 0.0;
      if (theta >= 1.0) return 1.0;
      // Cells of the points within t cover B(t - spacing sqrt(d) / 2), which
      // bounds the count from below for every shift.
      const double inner = t - 0.5 * spacing_ * std::sqrt(static_cast<double>(d));
      const double n_lo = kappa_d(d) * std::pow(inner / spacing_, d);
      if (n_lo * std::log1p(-theta) < std::log(1e-18)) return 1.0;
      const int per_axis = static_cast<int>(std::lround(std::pow(static_cast<double>(distances_->size()), 1.0 / d)));
      double acc = 0.0;
      for (std::size_t q = 0; q < distances_->size(); ++q) {
        double n = 0.0;
        for_each_lattice_point(quadrature_shift(q, d, per_axis, spacing_), spacing_, t, [&](double) { n += 1.0; });
        acc += 1.0 - std::pow(1.0 - theta, n);
      }
      return acc / static_cast<double>(distances_->size());
    }
    case Kind::empirical:
      return thinned_hit_probability(*distances_, theta, t);
  }
  return 0.0;
}

void LimitLaw::validate() const {
  require(theta >= 0.0 && theta <= 1.0, ErrorKind::parameter, "theta must lie in [0, 1]");
  require(mu >= 1.0 && std::isfinite(mu), ErrorKind::parameter, "mu must be at least 1");
  require(d >= 1, ErrorKind::parameter, "dimension must be positive");
}

double limit_cdf(const LimitLaw& law, double a) {
  require(a >= 0.0, ErrorKind::parameter, "limit_cdf needs a >= 0");
  law.validate();
  if (law.theta == 0.0) return 0.0;
  return law.theta * law.stations.contact_cdf(law.theta, law.d, a / law.mu);
}

}  // namespace bhp
