#include <doctest.h>

#include <cmath>
#include <set>

#include "bhp/error.hpp"
#include "bhp/renorm.hpp"
#include "oracles.hpp"

using namespace bhp;

namespace {

SiteGrid grid_with_bad(double eps, const SiteBox& box, const std::vector<std::vector<long>>& bad) {
  std::vector<std::uint8_t> flags(box.size(), 1);
  for (const auto& z : bad) flags[box.index(z)] = 0;
  return SiteGrid::from_flags(eps, box, std::move(flags));
}

SiteGrid random_grid(double eps, const SiteBox& box, double p_bad, std::uint64_t seed) {
  Stream rng(seed);
  std::vector<std::uint8_t> flags(box.size());
  for (auto& f : flags) f = rng.uniform() >= p_bad;
  return SiteGrid::from_flags(eps, box, std::move(flags));
}

long linf(std::span<const long> a, std::span<const long> b) {
  long out = 0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

Window covering_window(double eps, const SiteBox& box) {
  const double s = 1.0 - eps;
  std::vector<double> lo(box.dim()), hi(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    lo[i] = s * box.lo[i] - 0.5;
    hi[i] = s * box.hi[i] + 0.5;
  }
  return Window::from_bounds(lo, hi);
}

}  // namespace

TEST_CASE("renormalisation scale") {
  CHECK_THROWS_AS(epsilon_of_lambda(std::exp(1.0), 2), Error);
  try {
    epsilon_of_lambda(std::exp(1.0), 2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::lambda_too_small);
  }
  CHECK(epsilon_of_lambda(1e4, 2) == doctest::Approx(2.0 * std::sqrt(std::log(1e4) / 1e4)));
  CHECK(epsilon_of_lambda(1e4, 2) == doctest::Approx(0.0607).epsilon(1e-3));
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda = 100.0; lambda < 1e6; lambda *= 1.3) {
    const double e = epsilon_of_lambda(lambda, 2);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("site badness bound") {
  const double want = 16.0 * std::exp(-50.0 * 0.8 * 0.8 / 16.0) + std::exp(-50.0 * 0.01);
  CHECK(q_bound(50.0, 0.2, 2) == doctest::Approx(want));
  CHECK_THROWS_AS(q_bound(50.0, 0.5, 2), Error);
  CHECK_THROWS_AS(q_bound(50.0, 0.0, 2), Error);
  const Estimate empty = estimate_q(0.0, 0.25, 2, McConfig{.seed = 1, .n_reps = 50, .threads = 1});
  CHECK(empty.value == 1.0);
  // Bound over epsilon vanishes along the renormalisation scale.
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1e2, 1e3, 1e4}) {
    const double e = epsilon_of_lambda(lambda, 2);
    const double v = q_bound(lambda, e, 2) / e;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("central cubes of neighbouring sites are within one hop") {
  for (int d : {2, 3, 4})
    for (int i = 1; i < 50; ++i) {
      const double eps = (1.0 / d) * i / 50.0;
      const double q = eps / 4.0;
      // Farthest pair: opposite corners of the two central cubes.
      const double along = (1.0 - eps) + 2.0 * q;
      const double across = 2.0 * q;
      CHECK(along * along + (d - 1) * across * across <= 1.0);
    }
}

TEST_CASE("classification of special configurations") {
  const double eps = 0.2;
  const SiteBox box = SiteBox::segment(2, 4, 1);
  const Window w = covering_window(eps, box);
  CHECK(classify_sites(PointSet(w, {}), eps, box).bad_count() == box.size());

  std::vector<double> coords;
  const double h = 0.02;
  for (double x = w.lo(0); x <= w.hi(0); x += h)
    for (double y = w.lo(1); y <= w.hi(1); y += h) {
      coords.push_back(x);
      coords.push_back(y);
    }
  CHECK(classify_sites(PointSet(w, std::move(coords)), eps, box).bad_count() == 0);

  const Window small = Window::cube(2, 1.0);
  CHECK_THROWS_AS(classify_sites(PointSet(small, {}), eps, box), Error);
}

TEST_CASE("classification equals point-in-cube oracle") {
  const double eps = 0.3;
  const SiteBox box = SiteBox::segment(2, 3, 1);
  const Window w = covering_window(eps, box);
  std::size_t good = 0, bad = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointSet pts = sample_poisson(80.0 + 10.0 * static_cast<double>(seed % 5), w, seed);
    const SiteGrid grid = classify_sites(pts, eps, box);
    for (std::size_t s = 0; s < box.size(); ++s) {
      const auto z = box.site(s);
      CHECK(grid.good(s) == oracle::site_good(pts, z, eps));
      (grid.good(s) ? good : bad) += 1;
    }
  }
  CHECK(good > 0);
  CHECK(bad > 0);
}

TEST_CASE("cube goodness for relative coordinates") {
  const double eps = 0.2;
  std::vector<double> pts;
  const double s = 0.8, sub = s / 4.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      pts.push_back(-s / 2 + (i + 0.5) * sub);
      pts.push_back(-s / 2 + (j + 0.5) * sub);
    }
  CHECK_FALSE(cube_is_good(pts, 2, eps));  // centre cube empty
  pts.push_back(0.0);
  pts.push_back(0.0);
  CHECK(cube_is_good(pts, 2, eps));
  pts.erase(pts.begin(), pts.begin() + 2);
  CHECK_FALSE(cube_is_good(pts, 2, eps));
}

TEST_CASE("decomposition of an all-good box") {
  const SiteBox box = SiteBox::segment(2, 10, 3);
  const auto dec = bad_decomposition(grid_with_bad(0.1, box, {}), 10);
  CHECK(dec.a() == std::vector<long>{0});
  CHECK(dec.b() == std::vector<long>{10});
  CHECK(dec.components().empty());
  CHECK(dec.u_m_size() == 0);
}

TEST_CASE("decomposition around a single bad site") {
  const SiteBox box = SiteBox::segment(2, 10, 3);
  const auto dec = bad_decomposition(grid_with_bad(0.1, box, {{5, 0}}), 10);
  REQUIRE(dec.components().size() == 1);
  const auto& c = dec.components()[0];
  CHECK(c.sites == std::vector<std::size_t>{box.index(std::vector<long>{5, 0})});
  CHECK(c.boundary.size() == 8);
  for (std::size_t t : c.boundary) CHECK(linf(box.site(t), std::vector<long>{5, 0}) == 1);
  CHECK(dec.a() == std::vector<long>{0, 6});
  CHECK(dec.b() == std::vector<long>{4, 10});
  CHECK(dec.u_m_size() == 1);
  CHECK(dec.u_prime_size() == 1);
  CHECK(dec.boundary_total() == 8);
}

TEST_CASE("decomposition of a three-component configuration") {
  // A blob engulfing the origin, a cup-shaped component in the middle and a
  // blob engulfing the end: runs start past the first blob, jump to the far
  // side of the cup and stop when the last boundary lies beyond m.
  const long m = 20;
  const SiteBox box = SiteBox::segment(2, m, 4);
  std::vector<std::vector<long>> bad = {{-1, 0}, {0, 0}, {1, 0}, {0, 1},
                                        {6, 0}, {6, 1}, {7, 1}, {8, 1}, {9, 1}, {9, 0}};
  for (long x = 15; x <= 22; ++x) bad.push_back({x, 0});
  bad.push_back({18, 1});
  const auto dec = bad_decomposition(grid_with_bad(0.1, box, bad), m);
  CHECK(dec.components().size() == 3);
  CHECK(dec.origin_engulfed());
  CHECK(dec.end_engulfed());
  CHECK(dec.a() == std::vector<long>{2, 10});
  CHECK(dec.b() == std::vector<long>{5, 14});
  // The cup's interior sites touch the segment but stay outside U'.
  CHECK_FALSE(dec.in_u_prime(box.index(std::vector<long>{7, 0})));
  const HopBound hb = hop_upper_bound(dec, static_cast<double>(m) * 0.9, 0.1);
  CHECK_FALSE(hb.certified);
  CHECK(hb.reason == "origin engulfed");
}

TEST_CASE("enclosed good sites join the filled component") {
  const SiteBox box = SiteBox::segment(2, 10, 4);
  std::vector<std::vector<long>> ring;
  for (long x = 3; x <= 7; ++x)
    for (long y = -2; y <= 2; ++y)
      if (x == 3 || x == 7 || y == -2 || y == 2) ring.push_back({x, y});
  const auto dec = bad_decomposition(grid_with_bad(0.1, box, ring), 10);
  REQUIRE(dec.components().size() == 1);
  CHECK(dec.components()[0].sites.size() == 25);
  CHECK(dec.u_m_size() == ring.size());
  CHECK(dec.in_u_prime(box.index(std::vector<long>{5, 0})));
  CHECK(dec.a() == std::vector<long>{0, 8});
  CHECK(dec.b() == std::vector<long>{2, 10});
  const HopBound hb = hop_upper_bound(dec, 10.0 * 0.9, 0.1);
  CHECK(hb.certified);
  CHECK(hb.value == 10 + 19 * dec.boundary_total() + 2 * default_c1(2) * 25);
}

TEST_CASE("bad component on the box face asks for a larger box") {
  const SiteBox box = SiteBox::segment(2, 10, 2);
  std::vector<std::vector<long>> bad = {{5, 0}, {5, 1}, {5, 2}};
  try {
    bad_decomposition(grid_with_bad(0.1, box, bad), 10);
    FAIL("expected enlarge_box");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::enlarge_box);
  }
  // Bad sites away from the segment are ignored even on the face.
  CHECK_NOTHROW(bad_decomposition(grid_with_bad(0.1, box, {{5, 2}}), 10));
}

TEST_CASE("boundary and size invariants on random grids") {
  const int d = 2;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const SiteBox box = SiteBox::segment(d, 30, 8);
    const SiteGrid grid = random_grid(0.1, box, 0.04 + 0.0005 * static_cast<double>(seed), seed);
    std::optional<BadDecomposition> dec;
    try {
      dec.emplace(bad_decomposition(grid, 30));
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::enlarge_box);
      continue;
    }
    ++checked;
    for (const auto& c : dec->components()) {
      CHECK(star_connected(box, c.boundary));
      CHECK(star_connected(box, c.sites));
      // Outer boundary = sites at l_inf distance 1 from the component, outside it.
      std::set<std::size_t> ref;
      std::set<std::size_t> members(c.sites.begin(), c.sites.end());
      for (std::size_t t = 0; t < box.size(); ++t) {
        if (members.count(t)) continue;
        for (std::size_t s : c.sites)
          if (linf(box.site(s), box.site(t)) == 1) {
            ref.insert(t);
            break;
          }
      }
      CHECK(std::vector<std::size_t>(ref.begin(), ref.end()) == c.boundary);
      for (std::size_t t : c.boundary) CHECK(grid.good(t));
      const double nb = static_cast<double>(c.boundary.size());
      CHECK(static_cast<double>(c.sites.size()) <= ipow(3, d) * d * d * nb * nb);
    }
    CHECK(dec->boundary_total() <= ipow(3, d) * dec->u_m_size());
    for (std::size_t i = 0; i < dec->a().size(); ++i)
      for (long j = dec->a()[i]; j <= dec->b()[i]; ++j) CHECK(grid.good(box.axis_site(j)));
    for (std::size_t i = 0; i + 1 < dec->a().size(); ++i) {
      const auto& bd = dec->components()[dec->detours()[i]].boundary;
      CHECK(std::binary_search(bd.begin(), bd.end(), box.axis_site(dec->b()[i])));
      CHECK(std::binary_search(bd.begin(), bd.end(), box.axis_site(dec->a()[i + 1])));
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("bound never decreases when a site turns bad") {
  const SiteBox box = SiteBox::segment(2, 20, 6);
  const double eps = 0.1;
  const double n = 20 * (1.0 - eps);
  REQUIRE(m_epsilon(n, eps) == 20);
  std::size_t compared = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Stream rng(seed + 77);
    std::vector<std::uint8_t> flags(box.size(), 1);
    for (auto& f : flags) f = rng.uniform() >= 0.05;
    std::vector<std::uint8_t> worse = flags;
    worse[rng() % worse.size()] = 0;
    try {
      const auto b1 = hop_upper_bound(bad_decomposition(SiteGrid::from_flags(eps, box, flags), 20), n, eps);
      const auto b2 = hop_upper_bound(bad_decomposition(SiteGrid::from_flags(eps, box, worse), 20), n, eps);
      CHECK(b2.value >= b1.value);
      ++compared;
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::enlarge_box);
    }
  }
  CHECK(compared > 50);
}

TEST_CASE("all-good bound is m_eps(n)") {
  for (double lambda : {200.0, 1e3, 1e4}) {
    const double eps = epsilon_of_lambda(lambda, 2);
    for (double n : {10.0, 50.0, 200.0}) {
      const long m = m_epsilon(n, eps);
      const SiteBox box = SiteBox::segment(2, m, 2);
      const auto hb = hop_upper_bound(bad_decomposition(grid_with_bad(eps, box, {}), m), n, eps);
      CHECK(hb.certified);
      CHECK(hb.value == static_cast<std::uint64_t>(m));
      CHECK(static_cast<double>(hb.value) / n <= 1.0 + 2.0 * eps);
      const auto wrong = bad_decomposition(grid_with_bad(eps, SiteBox::segment(2, m + 1, 2), {}), m + 1);
      CHECK_THROWS_AS(hop_upper_bound(wrong, n, eps), Error);
    }
  }
}

TEST_CASE("m_eps lies in its half-open interval") {
  Stream rng(3);
  for (int t = 0; t < 1000; ++t) {
    const double n = rng.uniform(0.0, 500.0);
    const double eps = rng.uniform(0.01, 0.49);
    const long m = m_epsilon(n, eps);
    const double c = n / (1.0 - eps);
    CHECK(static_cast<double>(m) >= c - 0.5);
    CHECK(static_cast<double>(m) < c + 0.5);
  }
}

TEST_CASE("covering constant") {
  CHECK(covering_constant(2) == 36);
  CHECK(default_c1(2) == 72);
  CHECK(covering_constant(3) == 27 * 8);
  CHECK(covering_constant(4) == 81 * 16);
}

TEST_CASE("good runs are crossed in one hop per site") {
  const double lambda = 300.0;
  const double eps = epsilon_of_lambda(lambda, 2);
  const long m = 6;
  const SiteBox box = SiteBox::segment(2, m, 1);
  const Window w = covering_window(eps, box);
  std::size_t runs = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const PointSet pts = sample_poisson(lambda, w, seed);
    const SiteGrid grid = classify_sites(pts, eps, box);
    const GeometricGraph g(pts, 1.0);
    for (long a = 0; a <= m; ++a) {
      if (!grid.good(box.axis_site(a))) continue;
      for (long b = a; b <= m && grid.good(box.axis_site(b)); ++b) {
        const auto pa = anchor_point(pts, eps, a);
        const auto pb = anchor_point(pts, eps, b);
        REQUIRE(pa.has_value());
        REQUIRE(pb.has_value());
        const HopCount h = chemical_distance(g, *pa, *pb);
        CHECK(h.within(static_cast<std::uint32_t>(b - a)));
        ++runs;
      }
    }
  }
  CHECK(runs > 50);
}

TEST_CASE("cluster tail invariants hold") {
  const double eps = epsilon_of_lambda(300.0, 2);
  const long ms[] = {20, 40};
  const TailReport rep = cluster_tail_check(300.0, eps, 2, ms, 3, McConfig{.seed = 8, .n_reps = 30, .threads = 1});
  CHECK(rep.realizations > 0);
  CHECK(rep.boundary_not_connected == 0);
  CHECK(rep.isoperimetry_violations == 0);
  CHECK(rep.boundary_sum_violations == 0);
  CHECK(rep.regime_threshold == doctest::Approx(std::pow(2.0, -10.0)));
}
