#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bhp/error.hpp"
#include "bhp/estimators.hpp"
#include "bhp/hops.hpp"
#include "oracles.hpp"

using namespace bhp;

TEST_CASE("estimate from samples") {
  const double xs[] = {1.0, 2.0, 3.0, 4.0};
  const Estimate e = Estimate::from_samples(xs);
  CHECK(e.value == doctest::Approx(2.5));
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.n_replicates == 4);
  CHECK(z_gap(Estimate{1.0, 0.0, 1}, Estimate{1.0, 0.0, 1}) == 0.0);
}

TEST_CASE("mass transport with one station counts its k-cluster") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const PointSet users = oracle::random_points(40, 2, 4.0, seed);
    const GeometricGraph g(users, 1.0);
    const PointSet station = PointSet::from_points(users.window(), {{0.3, -0.2}});
    for (std::uint32_t k : {1u, 2u, 5u}) {
      const auto ref = oracle::hops_from(users, station[0], 1.0);
      std::size_t want = 0;
      for (std::uint32_t h : ref) want += h <= k;
      CHECK(mass_transport_sum(g, station, k, users.window()) == doctest::Approx(static_cast<double>(want)));
    }
  }
}

TEST_CASE("mass transport sum equals the user count within k hops") {
  // Summing 1/kappa over every station's k-cluster counts each reached user once.
  for (std::uint64_t seed = 40; seed < 70; ++seed) {
    const PointSet users = oracle::random_points(40, 2, 4.0, seed);
    const PointSet stations = oracle::random_points(3, 2, 4.0, seed + 500);
    const GeometricGraph g(users, 1.0);
    const auto field = oracle::hop_field(users, stations, 1.0);
    for (std::uint32_t k : {1u, 3u}) {
      std::size_t want = 0;
      for (std::uint32_t h : field) want += h <= k;
      CHECK(mass_transport_sum(g, stations, k, users.window()) == doctest::Approx(static_cast<double>(want)));
    }
  }
}

TEST_CASE("no stations gives zero coverage") {
  ModelParams p{.lambda = 2.0, .lambda_prime = 0.0, .r = 3.0, .d = 2};
  const std::uint32_t ks[] = {1, 4};
  const McConfig mc{.seed = 5, .n_reps = 5, .threads = 1};
  for (const auto& res : {theta_kr_window(p, ks, 20.0, mc), theta_kr_mass_transport(p, ks, 30.0, mc)})
    for (const Estimate& e : res.estimates) {
      CHECK(e.value == 0.0);
      CHECK(e.std_error == 0.0);
    }
}

TEST_CASE("window estimator is monotone in k per replicate") {
  ModelParams p{.lambda = 1.0, .lambda_prime = 0.2, .r = 2.0, .d = 2};
  const std::uint32_t ks[] = {1, 2, 3, 6};
  const auto res = theta_kr_window(p, ks, 30.0, McConfig{.seed = 2, .n_reps = 6, .threads = 1});
  for (const auto& row : res.per_replicate)
    for (std::size_t i = 1; i < row.size(); ++i) CHECK(row[i] >= row[i - 1]);
}

TEST_CASE("one-hop coverage matches the closed form") {
  // Theta(1, r) = P(station within distance 1) = 1 - exp(-lambda' r^-d pi).
  ModelParams p{.lambda = 2.0, .lambda_prime = 1.0, .r = 2.0, .d = 2};
  const std::uint32_t ks[] = {1};
  const auto res = theta_kr_window(p, ks, 30.0, McConfig{.seed = 9, .n_reps = 40, .threads = 1});
  const double want = 1.0 - std::exp(-std::numbers::pi / 4.0);
  CHECK(std::abs(res.estimates[0].value - want) < 4.0 * res.estimates[0].std_error + 1e-3);
}

TEST_CASE("full Palm cluster diverges above criticality") {
  CHECK_THROWS_AS(palm_cluster_size(4.0, 2, std::nullopt, 30.0, McConfig{.seed = 1, .n_reps = 5, .threads = 1}),
                  Error);
  try {
    palm_cluster_size(4.0, 2, std::nullopt, 30.0, McConfig{.seed = 1, .n_reps = 5, .threads = 1});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::supercritical_divergence);
  }
  const auto sub = palm_cluster_size(0.5, 2, std::nullopt, 30.0, McConfig{.seed = 1, .n_reps = 50, .threads = 1});
  // E#C(o) >= E#B_1(o) = lambda pi.
  CHECK(sub.mean_size.value > 0.5 * std::numbers::pi * 0.8);
}

TEST_CASE("Palm k-cluster sizes are monotone and start at lambda kappa") {
  const std::uint32_t ks[] = {1, 2, 4};
  const auto rows = palm_cluster_sizes(0.5, 2, ks, 20.0, McConfig{.seed = 3, .n_reps = 400, .threads = 1});
  REQUIRE(rows.size() == 3);
  CHECK(std::abs(rows[0].mean_size.value - 0.5 * std::numbers::pi) < 4.0 * rows[0].mean_size.std_error);
  for (std::size_t rep = 0; rep < rows[0].per_replicate.size(); ++rep) {
    CHECK(rows[1].per_replicate[rep] >= rows[0].per_replicate[rep]);
    CHECK(rows[2].per_replicate[rep] >= rows[1].per_replicate[rep]);
  }
}

TEST_CASE("sup distance against a dense-grid oracle") {
  LimitLaw law{.theta = 0.8, .mu = 1.3, .stations = StationLaw::poisson(0.7), .d = 2};
  Stream rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(5 + trial);
    for (double& x : xs) x = rng.uniform(0.0, 3.0);
    std::sort(xs.begin(), xs.end());
    const std::size_t total = xs.size() + static_cast<std::size_t>(trial % 4);
    double want = std::abs(static_cast<double>(xs.size()) / static_cast<double>(total) - law.theta);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = limit_cdf(law, xs[i]);
      want = std::max(want, std::abs(static_cast<double>(i + 1) / static_cast<double>(total) - f));
      want = std::max(want, std::abs(static_cast<double>(i) / static_cast<double>(total) - f));
    }
    CHECK(sup_distance(xs, total, law) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("theta is positive above criticality and matches the Palm indicator") {
  const ThetaEstimate t = estimate_theta(4.0, 2, 30.0, McConfig{.seed = 11, .n_reps = 30, .threads = 1});
  CHECK(t.ball.value > 0.9);
  CHECK(t.palm.value > 0.8);
  CHECK(t.palm.value <= t.ball.value + 1e-12);
  CHECK_THROWS_AS(estimate_theta(0.5, 2, 30.0, McConfig{.seed = 11, .n_reps = 10, .threads = 1}), Error);
}

TEST_CASE("threads never change results") {
  ModelParams p{.lambda = 2.0, .lambda_prime = 0.3, .r = 2.0, .d = 2};
  const std::uint32_t ks[] = {1, 3};
  const auto a = theta_kr_window(p, ks, 20.0, McConfig{.seed = 4, .n_reps = 8, .threads = 1});
  const auto b = theta_kr_window(p, ks, 20.0, McConfig{.seed = 4, .n_reps = 8, .threads = 4});
  CHECK(a.per_replicate == b.per_replicate);
}
