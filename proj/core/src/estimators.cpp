#include "bhp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bhp/error.hpp"
#include "bhp/hops.hpp"
#include "bhp/parallel.hpp"
#include "bhp/rng.hpp"

namespace bhp {

namespace {

// Stream tags; changing them changes every published number.
enum Tag : std::uint64_t {
  kUsers = 11,
  kStations = 12,
  kWindowEstimator = 21,
  kMassTransport = 22,
  kPalm = 23,
  kTheta = 24,
  kMu = 25,
  kLimit = 26,
  kCoincidence = 27,
};

std::uint32_t max_k(std::span<const std::uint32_t> ks) {
  require(!ks.empty(), ErrorKind::parameter, "k list is empty");
  for (std::uint32_t k : ks) require(k >= 1, ErrorKind::parameter, "hop budgets must be >= 1");
  return *std::max_element(ks.begin(), ks.end());
}

ThetaKrResult collect(std::span<const std::uint32_t> ks, std::vector<std::vector<double>> per_rep, double core_volume) {
  ThetaKrResult out;
  out.k.assign(ks.begin(), ks.end());
  out.core_volume = core_volume;
  std::vector<double> column(per_rep.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    for (std::size_t i = 0; i < per_rep.size(); ++i) column[i] = per_rep[i][j];
    out.estimates.push_back(Estimate::from_samples(column));
  }
  out.per_replicate = std::move(per_rep);
  return out;
}

std::vector<double> origin(int d) { return std::vector<double>(static_cast<std::size_t>(d), 0.0); }

PointSet restrict_to(const PointSet& points, const Window& sub) {
  if (sub.volume() >= points.window().volume()) return points;
  std::vector<double> coords;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (sub.contains(points[i])) coords.insert(coords.end(), points[i].begin(), points[i].end());
  return PointSet(sub, std::move(coords), points.provenance());
}

Estimate scaled(const Estimate& e, double factor) {
  Estimate s = e;
  s.value *= factor;
  s.std_error *= std::abs(factor);
  return s;
}

}  // namespace

ThetaKrResult theta_kr_window(const ModelParams& params, std::span<const std::uint32_t> k_list, double window_size,
                              const McConfig& mc) {
  params.validate();
  const std::uint32_t kmax = max_k(k_list);
  const Window window = Window::cube(params.d, 0.5 * window_size);
  const Window core = window.inset(static_cast<double>(kmax) + 1.0);
  const double norm = 1.0 / (params.lambda * core.volume());

  auto per_rep = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
    const std::uint64_t base = derive_seed(mc.seed, {kWindowEstimator, rep});
    GeometricGraph users(sample_poisson(params.lambda, window, derive_seed(base, {kUsers})), 1.0);
    const PointSet stations = sample_stations(params, window, derive_seed(base, {kStations}));
    const HopField field = hop_field(users, stations, kmax);
    std::vector<double> values(k_list.size(), 0.0);
    for (std::size_t i = 0; i < users.size(); ++i) {
      if (!core.contains(users.points()[i]) || field.values[i].is_infinite()) continue;
      for (std::size_t j = 0; j < k_list.size(); ++j)
        if (field.values[i].within(k_list[j])) values[j] += norm;
    }
    return values;
  });
  return collect(k_list, std::move(per_rep), core.volume());
}

double mass_transport_sum(const GeometricGraph& users, const PointSet& stations, std::uint32_t k,
                          const Window& station_core) {
  require(k >= 1, ErrorKind::parameter, "hop budget must be >= 1");
  std::vector<std::uint32_t> kappa(users.size(), 0);
  std::vector<Reach> reaches;
  reaches.reserve(stations.size());
  for (std::size_t s = 0; s < stations.size(); ++s) {
    reaches.push_back(reach_from(users, stations[s], k));
    for (std::uint32_t u : reaches.back().users) ++kappa[u];
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < stations.size(); ++s) {
    if (!station_core.contains(stations[s])) continue;
    for (std::uint32_t u : reaches[s].users) sum += 1.0 / static_cast<double>(kappa[u]);
  }
  return sum;
}

ThetaKrResult theta_kr_mass_transport(const ModelParams& params, std::span<const std::uint32_t> k_list,
                                      double window_size, const McConfig& mc) {
  params.validate();
  const std::uint32_t kmax = max_k(k_list);
  const Window window = Window::cube(params.d, 0.5 * window_size);
  const Window core = window.inset(2.0 * static_cast<double>(kmax) + 1.0);
  const double norm = 1.0 / (params.lambda * core.volume());

  auto per_rep = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
    const std::uint64_t base = derive_seed(mc.seed, {kMassTransport, rep});
    GeometricGraph users(sample_poisson(params.lambda, window, derive_seed(base, {kUsers})), 1.0);
    const PointSet stations = sample_stations(params, window, derive_seed(base, {kStations}));

    // One truncated BFS per station at kmax; smaller k read off the levels.
    std::vector<Reach> reaches;
    reaches.reserve(stations.size());
    for (std::size_t s = 0; s < stations.size(); ++s) reaches.push_back(reach_from(users, stations[s], kmax));

    std::vector<double> values(k_list.size(), 0.0);
    std::vector<std::uint32_t> kappa(users.size());
    for (std::size_t j = 0; j < k_list.size(); ++j) {
      const std::uint32_t k = k_list[j];
      std::fill(kappa.begin(), kappa.end(), 0);
      for (const Reach& reach : reaches)
        for (std::size_t t = 0; t < reach.users.size(); ++t)
          if (reach.hops[t] <= k) ++kappa[reach.users[t]];
      double sum = 0.0;
      for (std::size_t s = 0; s < stations.size(); ++s) {
        if (!core.contains(stations[s])) continue;
        const Reach& reach = reaches[s];
        for (std::size_t t = 0; t < reach.users.size(); ++t)
          if (reach.hops[t] <= k) sum += 1.0 / static_cast<double>(kappa[reach.users[t]]);
      }
      values[j] = sum * norm;
    }
    return values;
  });
  return collect(k_list, std::move(per_rep), core.volume());
}

PalmResult palm_cluster_size(double lambda, int d, std::optional<std::uint32_t> k, double window_size,
                             const McConfig& mc) {
  if (k) {
    const std::uint32_t ks[] = {*k};
    return palm_cluster_sizes(lambda, d, ks, window_size, mc).front();
  }
  require(lambda > 0.0, ErrorKind::parameter, "lambda must be positive");
  const Window window = Window::cube(d, 0.5 * window_size);
  const std::vector<double> o = origin(d);

  auto per_rep = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
    const std::uint64_t base = derive_seed(mc.seed, {kPalm, rep});
    GeometricGraph users(sample_poisson(lambda, window, derive_seed(base, {kUsers})), 1.0);
    const ClusterLabeling labels = clusters(users);
    const Reach reach = reach_from(users, o, std::nullopt);
    for (std::uint32_t u : reach.users)
      if (labels.in_giant(u))
        throw Error(ErrorKind::supercritical_divergence,
                    "the origin's cluster is the giant proxy; E#C(o) is infinite in the supercritical phase");
    return static_cast<double>(reach.users.size());
  });
  PalmResult out;
  out.mean_size = Estimate::from_samples(per_rep);
  out.per_replicate = std::move(per_rep);
  return out;
}

std::vector<PalmResult> palm_cluster_sizes(double lambda, int d, std::span<const std::uint32_t> k_list,
                                           double window_size, const McConfig& mc) {
  require(lambda > 0.0, ErrorKind::parameter, "lambda must be positive");
  const std::uint32_t kmax = max_k(k_list);
  const Window window = Window::cube(d, 0.5 * window_size);
  require(0.5 * window_size >= static_cast<double>(kmax) + 1.0, ErrorKind::configuration,
          "window must contain the radius-(k+1) ball around the origin (truncation rule)");
  const std::vector<double> o = origin(d);

  auto per_rep = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
    const std::uint64_t base = derive_seed(mc.seed, {kPalm, rep});
    GeometricGraph users(sample_poisson(lambda, window, derive_seed(base, {kUsers})), 1.0);
    const Reach reach = reach_from(users, o, kmax);
    std::vector<double> sizes(k_list.size(), 0.0);
    for (std::uint32_t h : reach.hops)
      for (std::size_t j = 0; j < k_list.size(); ++j)
        if (h <= k_list[j]) sizes[j] += 1.0;
    return sizes;
  });
  std::vector<PalmResult> out(k_list.size());
  for (std::size_t j = 0; j < k_list.size(); ++j) {
    out[j].k = k_list[j];
    out[j].per_replicate.resize(per_rep.size());
    for (std::size_t i = 0; i < per_rep.size(); ++i) out[j].per_replicate[i] = per_rep[i][j];
    out[j].mean_size = Estimate::from_samples(out[j].per_replicate);
  }
  return out;
}

std::vector<DecayRow> small_k_decay(const ModelParams& params, std::span<const double> r_list, double window_size,
                                    const McConfig& theta_mc, const McConfig& palm_mc) {
  params.validate();
  std::vector<DecayRow> rows;
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    ModelParams p = params;
    p.r = r_list[i];
    const auto k = static_cast<std::uint32_t>(std::ceil(std::sqrt(p.r)));
    const std::uint32_t ks[] = {k};
    McConfig tmc = theta_mc;
    tmc.seed = derive_seed(theta_mc.seed, {i});
    DecayRow row;
    row.r = p.r;
    row.k = k;
    row.theta = theta_kr_window(p, ks, window_size, tmc).estimates.front();
    const PalmResult palm = palm_cluster_size(p.lambda, p.d, k, 2.0 * (k + 1.0), palm_mc);
    row.bound = scaled(palm.mean_size, p.lambda_prime / (p.lambda * std::pow(p.r, p.d)));
    rows.push_back(row);
  }
  return rows;
}

SubcriticalReport check_subcritical_bound(const ModelParams& params, std::span<const std::uint32_t> k_list,
                                          const BoundSettings& settings) {
  params.validate();
  SubcriticalReport report;
  report.slack_sigmas = settings.slack_sigmas;
  const ThetaKrResult theta = theta_kr_window(params, k_list, settings.window_size, settings.theta_mc);
  const PalmResult palm = palm_cluster_size(params.lambda, params.d, std::nullopt, settings.palm_window, settings.palm_mc);
  report.mean_cluster_size = palm.mean_size;
  const double factor = params.r > 0.0 ? params.lambda_prime / (params.lambda * std::pow(params.r, params.d)) : 0.0;
  const Estimate bound = scaled(palm.mean_size, factor);
  for (std::size_t j = 0; j < k_list.size(); ++j) {
    BoundRow row;
    row.k = k_list[j];
    row.theta = theta.estimates[j];
    row.bound = bound;
    const double se = std::hypot(row.theta.std_error, row.bound.std_error);
    const double excess = row.theta.value - row.bound.value;
    row.z = se > 0.0 ? excess / se : (excess > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    row.violation = row.z > settings.slack_sigmas;
    report.any_violation |= row.violation;
    report.rows.push_back(row);
  }
  if (!settings.decay_r.empty())
    report.decay = small_k_decay(params, settings.decay_r, settings.decay_window, settings.theta_mc, settings.palm_mc);
  return report;
}

ThetaEstimate estimate_theta(double lambda, int d, double window_size, const McConfig& mc) {
  require(lambda > 0.0, ErrorKind::parameter, "lambda must be positive");
  const Window window = Window::cube(d, 0.5 * window_size);
  require(window_size > 2.0, ErrorKind::configuration, "window must be much larger than the unit ball");
  const std::vector<double> o = origin(d);

  struct Outcome {
    double ball = 0.0;
    double palm = 0.0;
    double no_giant = 0.0;
  };
  auto outcomes = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
    const std::uint64_t base = derive_seed(mc.seed, {kTheta, rep});
    PointSet pts = sample_poisson(lambda, window, derive_seed(base, {kUsers}));
    Outcome out;
    {
      GeometricGraph g(pts, 1.0);
      const ClusterLabeling labels = clusters(g);
      out.no_giant = labels.giant_id ? 0.0 : 1.0;
      g.for_each_within(o, 1.0, [&](std::size_t j) {
        if (labels.in_giant(j)) out.ball = 1.0;
      });
    }
    GeometricGraph palm(pts.with_point(o, "palm_origin"), 1.0);
    const ClusterLabeling labels = clusters(palm);
    out.palm = labels.in_giant(palm.size() - 1) ? 1.0 : 0.0;
    return out;
  });
  std::vector<double> ball, palm;
  ThetaEstimate est;
  for (const Outcome& o2 : outcomes) {
    ball.push_back(o2.ball);
    palm.push_back(o2.palm);
    est.no_giant_replicates += o2.no_giant > 0.0 ? 1 : 0;
  }
  if (2 * est.no_giant_replicates > outcomes.size())
    throw Error(ErrorKind::not_supercritical, std::to_string(est.no_giant_replicates) + " of " +
                                                  std::to_string(outcomes.size()) + " replicates had no giant component");
  est.ball = Estimate::from_samples(ball);
  est.palm = Estimate::from_samples(palm);
  return est;
}

CoincidenceCheck giant_coincidence(double lambda, int d, std::size_t m, double separation, double window_size,
                                   const McConfig& mc) {
  require(m >= 1, ErrorKind::parameter, "need at least one test location");
  require(separation > 2.0, ErrorKind::parameter, "locations must be well separated");
  const Window window = Window::cube(d, 0.5 * window_size, BoundaryMode::torus);
  // Locations on a circle in the first two coordinates.
  std::vector<std::vector<double>> locations(m, origin(d));
  for (std::size_t i = 0; i < m; ++i) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
    locations[i][0] = separation * std::cos(phi);
    locations[i][1] = separation * std::sin(phi);
  }
  struct Outcome {
    double joint = 0.0;
    double members = 0.0;
  };
  auto outcomes = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
    const std::uint64_t base = derive_seed(mc.seed, {kCoincidence, rep});
    PointSet pts = sample_poisson(lambda, window, derive_seed(base, {kUsers}));
    const std::size_t first = pts.size();
    pts = pts.with_point(origin(d), "palm_origin");
    for (const auto& x : locations) pts = pts.with_point(x, "palm_location");
    GeometricGraph g(std::move(pts), 1.0);
    const ClusterLabeling labels = clusters(g);
    Outcome out;
    bool any = false;
    for (std::size_t i = 0; i <= m; ++i) {
      const bool in = labels.in_giant(first + i);
      out.members += in ? 1.0 : 0.0;
      if (i > 0) any |= in;
    }
    out.joint = labels.in_giant(first) && any ? 1.0 : 0.0;
    out.members /= static_cast<double>(m + 1);
    return out;
  });
  std::vector<double> joint, members;
  for (const Outcome& o : outcomes) {
    joint.push_back(o.joint);
    members.push_back(o.members);
  }
  CoincidenceCheck c;
  c.m = m;
  c.observed = Estimate::from_samples(joint);
  c.theta_palm = Estimate::from_samples(members);
  const double t = c.theta_palm.value;
  c.predicted = t * (1.0 - std::pow(1.0 - t, static_cast<double>(m)));
  return c;
}

MuEstimate estimate_mu(double lambda, int d, std::span<const std::uint32_t> n_list, double aspect, const McConfig& mc) {
  require(lambda > 0.0, ErrorKind::parameter, "lambda must be positive");
  require(aspect > 0.0, ErrorKind::parameter, "aspect must be positive");
  require(!n_list.empty(), ErrorKind::parameter, "n list is empty");
  MuEstimate out;
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const std::uint32_t n = n_list[idx];
    require(n >= 1, ErrorKind::parameter, "n must be >= 1");
    const double pad = aspect * n;
    std::vector<double> lo(d, -pad), hi(d, pad);
    hi[0] = n + pad;
    const Window slab = Window::from_bounds(lo, hi);
    std::vector<double> target = origin(d);
    target[0] = n;

    auto ratios = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
      const std::uint64_t base = derive_seed(mc.seed, {kMu, n, rep});
      GeometricGraph g(sample_poisson(lambda, slab, derive_seed(base, {kUsers})), 1.0);
      const ClusterLabeling labels = clusters(g);
      if (!labels.giant_id) return std::numeric_limits<double>::quiet_NaN();
      const std::size_t a = nearest_cluster_point(g.points(), labels, origin(d));
      const std::size_t b = nearest_cluster_point(g.points(), labels, target);
      const HopCount dist = chemical_distance(g, a, b);
      return dist.is_finite() ? static_cast<double>(dist.value()) / n : std::numeric_limits<double>::quiet_NaN();
    });
    MuRow row;
    row.n = n;
    std::vector<double> kept;
    for (double v : ratios) {
      if (std::isnan(v)) ++row.discarded;
      else kept.push_back(v);
    }
    if (5 * row.discarded > ratios.size())
      throw Error(ErrorKind::no_giant, "q lookup failed in " + std::to_string(row.discarded) + " of " +
                                           std::to_string(ratios.size()) + " replicates at n=" + std::to_string(n));
    row.ratio = Estimate::from_samples(kept);
    out.rows.push_back(row);
  }
  const auto largest = std::max_element(out.rows.begin(), out.rows.end(),
                                        [](const MuRow& a, const MuRow& b) { return a.n < b.n; });
  out.mu = largest->ratio;
  if (out.mu.value + 3.0 * out.mu.std_error < 1.0)
    throw Error(ErrorKind::contract, "time constant estimate below 1 contradicts unit hop length");
  return out;
}

double sup_distance(std::span<const double> sorted_finite, std::size_t n_total, const LimitLaw& law) {
  require(n_total >= sorted_finite.size() && n_total > 0, ErrorKind::parameter, "bad sample counts");
  const double n = static_cast<double>(n_total);
  double sup = 0.0;
  std::size_t i = 0;
  while (i < sorted_finite.size()) {
    const double v = sorted_finite[i];
    std::size_t j = i;
    while (j < sorted_finite.size() && sorted_finite[j] == v) ++j;
    const double f = limit_cdf(law, v);
    sup = std::max(sup, std::abs(static_cast<double>(i) / n - f));  // left limit
    sup = std::max(sup, std::abs(static_cast<double>(j) / n - f));
    i = j;
  }
  // Tail: F_n is flat past the last finite sample while F climbs to theta.
  sup = std::max(sup, std::abs(static_cast<double>(sorted_finite.size()) / n - law.theta));
  return sup;
}

LimitCheckReport empirical_limit_check(const ModelParams& params, std::span<const double> r_list,
                                       std::optional<double> theta, std::optional<double> mu, const McConfig& mc) {
  params.validate();
  if (!theta || !mu) throw Error(ErrorKind::configuration, "limit check needs theta and mu estimates");
  LimitCheckReport report;
  report.theta = *theta;
  report.mu = *mu;
  const int d = params.d;
  LimitLaw law{*theta, *mu,
               params.stations == StationProcess::poisson
                   ? StationLaw::poisson(params.lambda_prime)
                   : StationLaw::shifted_lattice(std::pow(params.lambda_prime, -1.0 / d), d),
               d};
  law.validate();

  // Radius in Y1 units beyond which a thinned station is missed w.p. <= 1e-3.
  const double thin = params.stations == StationProcess::poisson ? *theta : -std::log1p(-std::min(*theta, 1.0 - 1e-12));
  const double reach = params.lambda_prime > 0.0 && thin > 0.0
                           ? std::pow(std::log(1000.0) / (thin * params.lambda_prime * kappa_d(d)), 1.0 / d)
                           : 1.0;
  const double lattice_slack = params.stations == StationProcess::poisson || params.lambda_prime == 0.0
                                   ? 0.0
                                   : std::pow(params.lambda_prime, -1.0 / d) * std::sqrt(static_cast<double>(d));

  for (std::size_t idx = 0; idx < r_list.size(); ++idx) {
    ModelParams p = params;
    p.r = r_list[idx];
    require(p.r > 0.0, ErrorKind::parameter, "r must be positive");
    LimitCheckRow row;
    row.r = p.r;
    row.half_width = p.r * (reach + lattice_slack) + 2.0;
    const Window window = Window::cube(d, row.half_width);

    auto hops = run_replicates(mc.n_reps, mc.threads, [&](std::size_t rep) {
      const std::uint64_t base = derive_seed(mc.seed, {kLimit, idx, rep});
      const PointSet stations_all = sample_stations(p, window, derive_seed(base, {kStations}));
      if (stations_all.empty()) return std::numeric_limits<double>::infinity();
      // Nested cubes: a path of h hops stays within distance h of the origin,
      // so h <= R found in the cube of half-width R is the full-window answer.
      // Users are drawn shell by shell (independent on disjoint sets) so the
      // outer shells are only sampled when needed.
      std::vector<double> coords;
      double inner = 0.0;
      for (int stage = 0;; ++stage) {
        double R = row.half_width / 8.0 * static_cast<double>(1 << stage);
        const bool last = R * 2.0 > row.half_width;
        if (last) R = row.half_width;
        const Window sub = Window::cube(d, R);
        const PointSet shell = sample_poisson(p.lambda, sub, derive_seed(base, {kUsers, static_cast<std::uint64_t>(stage)}));
        for (std::size_t i = 0; i < shell.size(); ++i) {
          bool outside = inner == 0.0;
          for (int j = 0; j < d && !outside; ++j) outside = std::abs(shell[i][j]) >= inner;
          if (outside) coords.insert(coords.end(), shell[i].begin(), shell[i].end());
        }
        inner = R;
        const GeometricGraph users(PointSet(sub, coords).with_point(origin(d), "palm_origin"), 1.0);
        const GeometricGraph station_index(restrict_to(stations_all, sub), 1.0);
        const HopCount h = hops_to_stations(users, users.size() - 1, station_index);
        if (h.is_finite() && (last || static_cast<double>(h.value()) <= R)) return static_cast<double>(h.value()) / p.r;
        if (last) return std::numeric_limits<double>::infinity();
      }
    });
    std::vector<double> infinite;
    infinite.reserve(hops.size());
    for (double h : hops) {
      infinite.push_back(std::isinf(h) ? 1.0 : 0.0);
      if (!std::isinf(h)) row.scaled_hops.push_back(h);
    }
    std::sort(row.scaled_hops.begin(), row.scaled_hops.end());
    row.p_infinite = Estimate::from_samples(infinite);
    const double se = row.p_infinite.std_error;
    const double gap = std::abs(row.p_infinite.value - (1.0 - *theta));
    row.atom_z = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    row.sup_distance = sup_distance(row.scaled_hops, hops.size(), law);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace bhp
