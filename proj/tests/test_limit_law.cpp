#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bhp/error.hpp"
#include "bhp/limit_law.hpp"

using namespace bhp;

TEST_CASE("unit ball volumes") {
  CHECK(kappa_d(1) == doctest::Approx(2.0));
  CHECK(kappa_d(2) == doctest::Approx(std::numbers::pi));
  CHECK(kappa_d(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  CHECK(kappa_d(4) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2.0));
}

TEST_CASE("Poisson limit CDF closed form") {
  const LimitLaw law{.theta = 0.6, .mu = 1.5, .stations = StationLaw::poisson(0.2), .d = 2};
  for (double a : {0.0, 0.5, 1.0, 3.0, 10.0}) {
    const double want = 0.6 * (1.0 - std::exp(-0.6 * 0.2 * std::numbers::pi * (a / 1.5) * (a / 1.5)));
    CHECK(limit_cdf(law, a) == doctest::Approx(want));
  }
  CHECK(limit_cdf(law, 1e6) == doctest::Approx(0.6));
  CHECK(limit_cdf(law, std::numeric_limits<double>::infinity()) == doctest::Approx(0.6));
  double prev = 0.0;
  for (double a = 0.0; a < 20.0; a += 0.1) {
    const double f = limit_cdf(law, a);
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("limit CDF domain") {
  const LimitLaw law{.theta = 0.6, .mu = 1.5, .stations = StationLaw::poisson(0.2), .d = 2};
  CHECK_THROWS_AS(limit_cdf(law, -0.1), Error);
  LimitLaw bad = law;
  bad.theta = 1.5;
  CHECK_THROWS_AS(limit_cdf(bad, 1.0), Error);
  bad = law;
  bad.mu = 0.5;
  CHECK_THROWS_AS(limit_cdf(bad, 1.0), Error);
  LimitLaw none = law;
  none.theta = 0.0;
  CHECK(limit_cdf(none, 5.0) == 0.0);
}

TEST_CASE("shifted lattice contact distribution") {
  const double s = 2.0;
  const StationLaw lat = StationLaw::shifted_lattice(s, 2);
  // Below half the spacing at most one lattice point can be within t.
  for (double t : {0.2, 0.5, 0.9})
    for (double theta : {1.0, 0.5}) {
      const double want = theta * std::numbers::pi * t * t / (s * s);
      CHECK(lat.contact_cdf(theta, 2, t) == doctest::Approx(want).epsilon(0.03));
    }
  // Past the covering radius s / sqrt(2) an unthinned lattice always hits.
  CHECK(lat.contact_cdf(1.0, 2, 1.5) == doctest::Approx(1.0));
  CHECK(lat.contact_cdf(0.5, 2, 40.0) == doctest::Approx(1.0));
  double prev = 0.0;
  for (double t = 0.0; t < 6.0; t += 0.05) {
    const double f = lat.contact_cdf(0.7, 2, t);
    CHECK(f >= prev - 1e-12);
    prev = f;
  }
  CHECK_THROWS_AS(lat.contact_cdf(1.0, 3, 1.0), Error);
  // Far tails: exact count for a light thinning, saturation for a heavy one.
  CHECK(lat.contact_cdf(0.001, 2, 30.0) == doctest::Approx(1.0 - std::pow(0.999, std::numbers::pi * 900.0 / 4.0)).epsilon(0.01));
  CHECK(lat.contact_cdf(0.5, 2, 1e5) == 1.0);
  CHECK(lat.contact_cdf(0.0, 2, 1e5) == 0.0);
}

TEST_CASE("empirical station law reproduces a Poisson contact distribution") {
  const double intensity = 0.5;
  const StationLaw emp = StationLaw::empirical(
      [&](std::uint64_t seed) { return sample_poisson(intensity, Window::cube(2, 6.0), seed); }, 4000, 7);
  const StationLaw poi = StationLaw::poisson(intensity);
  for (double t : {0.3, 0.8, 1.5})
    CHECK(std::abs(emp.contact_cdf(0.9, 2, t) - poi.contact_cdf(0.9, 2, t)) < 0.03);
}
