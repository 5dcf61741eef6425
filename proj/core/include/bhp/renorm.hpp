#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhp/estimate.hpp"
#include "bhp/hops.hpp"
#include "bhp/point_process.hpp"

namespace bhp {

/// 2 (log lambda / lambda)^(1/d). Throws lambda_too_small when the result
/// is not below 1/d.
double epsilon_of_lambda(double lambda, int d);

/// Closed-form upper bound on the probability that a site is eps-bad.
double q_bound(double lambda, double epsilon, int d);

/// Monte Carlo probability that a single site is eps-bad.
Estimate estimate_q(double lambda, double epsilon, int d, const McConfig& mc);

/// Goodness of the site cube [-(1-eps)/2, (1-eps)/2]^d for points given
/// relative to its centre.
bool cube_is_good(std::span<const double> relative_coords, int d, double epsilon);

/// Inclusive box of integer sites.
struct SiteBox {
  std::vector<long> lo;
  std::vector<long> hi;

  /// [-margin, m + margin] x [-margin, margin]^(d-1).
  static SiteBox segment(int d, long m, long margin);

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  std::size_t size() const noexcept;
  long extent(int axis) const noexcept { return hi[axis] - lo[axis] + 1; }
  bool contains(std::span<const long> z) const noexcept;
  std::size_t index(std::span<const long> z) const noexcept;
  std::vector<long> site(std::size_t index) const;
  bool on_face(std::size_t index) const noexcept;
  std::size_t axis_site(long j) const;  ///< index of j e_1
};

/// Site z owns the cube (1-eps) z + [-(1-eps)/2, (1-eps)/2]^d.
class SiteGrid {
 public:
  SiteGrid(double epsilon, SiteBox box, std::vector<std::uint8_t> good);

  /// Grid from explicit flags (row-major, axis 0 fastest); no points involved.
  static SiteGrid from_flags(double epsilon, SiteBox box, std::vector<std::uint8_t> good);

  double epsilon() const noexcept { return epsilon_; }
  double spacing() const noexcept { return 1.0 - epsilon_; }
  int dim() const noexcept { return box_.dim(); }
  const SiteBox& box() const noexcept { return box_; }
  std::size_t size() const noexcept { return good_.size(); }
  bool good(std::size_t index) const noexcept { return good_[index] != 0; }
  bool good(std::span<const long> z) const noexcept { return good_[box_.index(z)] != 0; }
  std::size_t bad_count() const noexcept;

  /// ell_inf neighbours inside the box.
  std::vector<std::size_t> star_neighbors(std::size_t index) const;

 private:
  double epsilon_;
  SiteBox box_;
  std::vector<std::uint8_t> good_;
};

/// The point window must cover (1-eps) box + [-1/2, 1/2]^d.
SiteGrid classify_sites(const PointSet& points, double epsilon, const SiteBox& box);

/// Classification of an independent Poisson(lambda) configuration sampled
/// site by site, without keeping the points.
SiteGrid classify_poisson(double lambda, double epsilon, const SiteBox& box, std::uint64_t seed);

struct FilledComponent {
  std::vector<std::size_t> sites;     ///< U^(i), sorted site indices
  std::vector<std::size_t> boundary;  ///< outer boundary, sorted
  std::size_t bad_sites = 0;          ///< #(U^(i) intersected with U_m)
};

class BadDecomposition {
 public:
  const SiteGrid& grid() const noexcept { return grid_; }
  long m() const noexcept { return m_; }

  std::size_t u_m_size() const noexcept { return u_m_size_; }
  std::size_t u_prime_size() const noexcept;
  std::size_t boundary_total() const noexcept;

  const std::vector<FilledComponent>& components() const noexcept { return components_; }
  /// Component id of a site in U', or -1.
  long component_of(std::size_t site) const noexcept { return component_of_[site]; }
  bool in_u_m(std::size_t site) const noexcept { return in_u_m_[site] != 0; }
  bool in_u_prime(std::size_t site) const noexcept { return component_of_[site] >= 0; }

  const std::vector<long>& a() const noexcept { return a_; }
  const std::vector<long>& b() const noexcept { return b_; }
  /// Component whose boundary links b_j to a_(j+1); the last entry is the
  /// component met after the final run when the construction stopped at a' > m.
  const std::vector<long>& detours() const noexcept { return detours_; }
  bool origin_engulfed() const noexcept { return origin_engulfed_; }
  bool end_engulfed() const noexcept { return end_engulfed_; }

 private:
  friend BadDecomposition bad_decomposition(const SiteGrid& grid, long m);
  explicit BadDecomposition(SiteGrid grid) : grid_(std::move(grid)) {}

  SiteGrid grid_;
  long m_ = 0;
  std::size_t u_m_size_ = 0;
  std::vector<std::uint8_t> in_u_m_;
  std::vector<long> component_of_;
  std::vector<FilledComponent> components_;
  std::vector<long> a_, b_, detours_;
  bool origin_engulfed_ = false;
  bool end_engulfed_ = false;
};

/// Bad *-components meeting {0,...,m} e_1, their filled components and
/// outer boundaries, and the (a_i, b_i) run sequences. Throws enlarge_box
/// when a relevant bad component reaches the face of the site box.
BadDecomposition bad_decomposition(const SiteGrid& grid, long m);

/// The unique integer in [n/(1-eps) - 1/2, n/(1-eps) + 1/2).
long m_epsilon(double n, double epsilon);

/// Size of the 1/2-covering of one site cube by a grid of spacing
/// 1/sqrt(d), times 3^d for the cubes of U and its boundary.
std::uint64_t covering_constant(int d);
std::uint64_t default_c1(int d);

/// True when the set of site indices is *-connected (empty counts as connected).
bool star_connected(const SiteBox& box, std::span<const std::size_t> sites);

struct BoundStep {
  enum class Kind { run, detour } kind = Kind::run;
  long from = 0;  ///< axis index
  long to = 0;
  long component = -1;
  std::uint64_t hops = 0;
};

struct HopBound {
  long m = 0;
  std::uint64_t value = 0;           ///< m + (3 + (2d)^d) sum #dU + 2 c1 #U'
  std::uint64_t boundary_total = 0;  ///< sum #dU^(i)
  std::uint64_t u_prime = 0;
  std::uint64_t c1 = 0;
  bool certified = false;
  std::string reason;                ///< why the certificate was withheld
  std::vector<BoundStep> steps;
  std::uint64_t certified_hops = 0;  ///< sum of step hops, <= value when certified
};

/// Throws contract when decomp.m() != m_epsilon(n, epsilon).
HopBound hop_upper_bound(const BadDecomposition& decomp, double n, double epsilon, std::optional<std::uint64_t> c1 = std::nullopt);

/// Lowest-index point in the central cube (1-eps) j e_1 + [-eps/4, eps/4]^d.
std::optional<std::size_t> anchor_point(const PointSet& points, double epsilon, long j);

// ---------------------------------------------------------------------------
// Per-realisation soundness of the bound against measured chemical distance.
// ---------------------------------------------------------------------------

struct SoundnessRow {
  enum class Status { certified, not_certified, enlarge_box } status = Status::not_certified;
  std::uint64_t bound = 0;
  HopCount measured = HopCount::infinite();
  bool all_good = false;
  std::string reason;
};

struct SoundnessReport {
  double lambda = 0.0;
  double epsilon = 0.0;
  double n = 0.0;
  long m = 0;
  std::vector<SoundnessRow> rows;
  std::size_t certified = 0;
  std::size_t violations = 0;  ///< certified rows with bound < measured
  std::size_t all_good = 0;
  double max_all_good_ratio = 0.0;  ///< max bound / n over all-good rows
};

SoundnessReport renorm_soundness(double lambda, int d, double n, double epsilon, long margin, const McConfig& mc);

// ---------------------------------------------------------------------------
// Cluster-size tails of the bad decomposition.
// ---------------------------------------------------------------------------

struct TailRow {
  long m = 0;
  double boundary_threshold = 0.0;  ///< 2^(3^d+2) 3^d q m
  double u_prime_threshold = 0.0;   ///< 2^(3^d+4) 3^(3d) d^2 q m
  Estimate boundary_exceed;
  Estimate u_prime_exceed;
  Estimate mean_boundary_total;
  Estimate mean_u_prime;
  std::size_t enlarge_box = 0;
};

struct TailReport {
  double lambda = 0.0;
  double epsilon = 0.0;
  Estimate q_hat;
  double regime_threshold = 0.0;  ///< 2^(-3^d-1)
  bool in_regime = false;
  std::vector<TailRow> rows;
  std::size_t realizations = 0;
  std::size_t boundary_not_connected = 0;
  std::size_t isoperimetry_violations = 0;
  std::size_t boundary_sum_violations = 0;
};

TailReport cluster_tail_check(double lambda, double epsilon, int d, std::span<const long> m_list, long margin,
                              const McConfig& mc);

}  // namespace bhp
