#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bhp/estimate.hpp"
#include "bhp/geom_graph.hpp"
#include "bhp/limit_law.hpp"
#include "bhp/point_process.hpp"

namespace bhp {

// ---------------------------------------------------------------------------
// Theta(k, r): fraction of users that reach a base station in <= k hops,
// normalised per unit user intensity.
// ---------------------------------------------------------------------------

struct ThetaKrResult {
  std::vector<std::uint32_t> k;
  std::vector<Estimate> estimates;                 ///< one per k
  std::vector<std::vector<double>> per_replicate;  ///< [replicate][k index]
  double core_volume = 0.0;
};

/// Window estimator. Users and stations are simulated in the cube of side
/// `window_size` centred at the origin; users are counted in the core
/// inset by max(k) + 1, where every hop path of length <= max(k) from a
/// counted user stays inside the simulated cube. One core for all k keeps
/// the per-replicate values monotone in k.
ThetaKrResult theta_kr_window(const ModelParams& params, std::span<const std::uint32_t> k_list, double window_size,
                              const McConfig& mc);

/// Station-side estimator: lambda^-1 * sum over stations in the core of
/// sum_{X_i in C_k(Y_j)} 1 / kappa(X_i), per unit core volume. The core is
/// inset by 2 max(k) + 1 so kappa sees every station within reach.
ThetaKrResult theta_kr_mass_transport(const ModelParams& params, std::span<const std::uint32_t> k_list,
                                      double window_size, const McConfig& mc);

/// Single-realisation double sum used by theta_kr_mass_transport. Every
/// station in `stations` contributes to kappa; only stations inside
/// `station_core` contribute to the outer sum.
double mass_transport_sum(const GeometricGraph& users, const PointSet& stations, std::uint32_t k,
                          const Window& station_core);

// ---------------------------------------------------------------------------
// Palm cluster sizes #C_k(o): users k-connectable to the origin. The origin
// itself is not a user and is not counted.
// ---------------------------------------------------------------------------

struct PalmResult {
  std::optional<std::uint32_t> k;  ///< none = full cluster
  Estimate mean_size;
  std::vector<double> per_replicate;
};

/// k = nullopt asks for E#C(o); that throws supercritical_divergence as
/// soon as the origin's cluster is the giant proxy in some replicate.
PalmResult palm_cluster_size(double lambda, int d, std::optional<std::uint32_t> k, double window_size,
                             const McConfig& mc);

/// Finite k only; one BFS per replicate serves every k.
std::vector<PalmResult> palm_cluster_sizes(double lambda, int d, std::span<const std::uint32_t> k_list,
                                           double window_size, const McConfig& mc);

// ---------------------------------------------------------------------------
// Subcritical bound sup_k Theta(k,r) <= lambda^-1 r^-d lambda' E#C(o) and the
// k = o(r) decay.
// ---------------------------------------------------------------------------

struct BoundRow {
  std::uint32_t k = 0;
  Estimate theta;
  Estimate bound;
  double z = 0.0;  ///< (theta - bound) / combined std error
  bool violation = false;
};

struct DecayRow {
  double r = 0.0;
  std::uint32_t k = 0;  ///< ceil(sqrt(r))
  Estimate theta;
  Estimate bound;  ///< lambda^-1 r^-d lambda' E#C_k(o)
};

struct SubcriticalReport {
  Estimate mean_cluster_size;
  std::vector<BoundRow> rows;
  std::vector<DecayRow> decay;
  double slack_sigmas = 3.0;
  bool any_violation = false;
};

struct BoundSettings {
  double window_size = 160.0;  ///< cube for the Theta window estimator
  double palm_window = 40.0;   ///< cube for the Palm estimate of E#C(o)
  McConfig theta_mc;
  McConfig palm_mc;
  std::vector<double> decay_r;  ///< r schedule for the k = ceil(sqrt(r)) check; empty skips it
  double decay_window = 100.0;
  double slack_sigmas = 3.0;
};

SubcriticalReport check_subcritical_bound(const ModelParams& params, std::span<const std::uint32_t> k_list,
                                          const BoundSettings& settings);

/// Theta(ceil(sqrt(r)), r) with its Palm bound for each r.
std::vector<DecayRow> small_k_decay(const ModelParams& params, std::span<const double> r_list, double window_size,
                                    const McConfig& theta_mc, const McConfig& palm_mc);

// ---------------------------------------------------------------------------
// Percolation probability theta.
// ---------------------------------------------------------------------------

struct ThetaEstimate {
  Estimate ball;  ///< P(giant proxy has a point in B_1(o))
  Estimate palm;  ///< P(a user inserted at o joins the giant proxy)
  std::size_t no_giant_replicates = 0;
};

/// Throws not_supercritical when more than half the replicates lack a giant.
ThetaEstimate estimate_theta(double lambda, int d, double window_size, const McConfig& mc);

/// Empirical P(o and at least one of m far-apart locations are all in the
/// giant) against theta (1 - (1 - theta)^m), with users inserted at every
/// location.
struct CoincidenceCheck {
  std::size_t m = 0;
  Estimate observed;
  Estimate theta_palm;
  double predicted = 0.0;
};

CoincidenceCheck giant_coincidence(double lambda, int d, std::size_t m, double separation, double window_size,
                                   const McConfig& mc);

// ---------------------------------------------------------------------------
// Time constant mu = lim D_n / n.
// ---------------------------------------------------------------------------

struct MuRow {
  std::uint32_t n = 0;
  Estimate ratio;  ///< D_n / n
  std::size_t discarded = 0;
};

struct MuEstimate {
  Estimate mu;  ///< ratio at the largest n
  std::vector<MuRow> rows;
};

/// Slab [-pad, n + pad] x [-w, w]^(d-1) with pad = w = aspect * n.
/// Replicates without a giant proxy are discarded; more than 20% discarded
/// at any n throws no_giant.
MuEstimate estimate_mu(double lambda, int d, std::span<const std::uint32_t> n_list, double aspect, const McConfig& mc);

// ---------------------------------------------------------------------------
// Limit law of H_r / r.
// ---------------------------------------------------------------------------

struct LimitCheckRow {
  double r = 0.0;
  double half_width = 0.0;        ///< simulated cube half-width
  Estimate p_infinite;            ///< P(H_r = inf) within the window
  double atom_z = 0.0;            ///< |p_inf - (1 - theta)| / std error
  double sup_distance = 0.0;      ///< sup_a |ECDF(a) - limit_cdf(a)|
  std::vector<double> scaled_hops;  ///< sorted finite H_r / r
};

struct LimitCheckReport {
  double theta = 0.0;
  double mu = 0.0;
  std::vector<LimitCheckRow> rows;
};

/// H_r of a user inserted at the origin, for each r. theta and mu must be
/// supplied (estimated elsewhere); missing values throw configuration.
LimitCheckReport empirical_limit_check(const ModelParams& params, std::span<const double> r_list,
                                       std::optional<double> theta, std::optional<double> mu, const McConfig& mc);

/// sup_a |F_n(a) - F(a)| where F_n is the empirical CDF of `sorted_finite`
/// with `n_total` samples in all (the rest are infinite).
double sup_distance(std::span<const double> sorted_finite, std::size_t n_total, const LimitLaw& law);

}  // namespace bhp
