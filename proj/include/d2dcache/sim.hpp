#pragma once

// Monte Carlo realization of the multi-hop D2D delivery scheme: Poisson
// placement on the unit square, square clustering with TDMA reuse, random
// decentralized caching, uniform source matching with virtual files,
// squarelet row-then-column routing, and symmetric per-user throughput.
//
// RNG consumption order per trial is fixed (and relied upon by the
// fast outage-only path and the single-hop baseline, which replay the same
// stream): Poisson count, per-user positions, per-user cache draws,
// per-user requests, then matching picks cluster-by-cluster (row-major) and
// user-by-user (ascending global index). Routing consumes no randomness.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "d2dcache/common.hpp"
#include "d2dcache/policy.hpp"
#include "d2dcache/popularity.hpp"
#include "d2dcache/rng.hpp"

namespace d2d {

// File ids are 1-based everywhere (f = 1..M); virtual deliveries use the
// sentinel below.
inline constexpr std::int32_t kVirtualFile = -1;

enum class SimMode { normalized, physical };

struct UserField {
  VecD x, y;       // positions in [0,1]^2
  Index count = 0; // Poisson(N) realized
};

struct ClusterConfig {
  double g_c = 100.0;  // mean users per cluster
  double N = 100.0;    // PPP mean over the unit square; cluster side = sqrt(g_c/N)
  int K = 4;           // TDMA reuse factor; must be a perfect square
  double c0 = 2.0;     // squarelet sizing constant (> 1)
  SimMode mode = SimMode::normalized;
  // Physical-model parameters (used in SimMode::physical only).
  double theta = 1.0;          // SINR threshold
  double pathloss_alpha = 4.0; // > 2
  double chi = 1.0;            // propagation constant
  double noise = 0.0;          // N0 >= 0
  double tx_power = 1.0;
  void validate() const;
};

struct Flow {
  std::int32_t src = 0;  // provider, cluster-local user index
  std::int32_t dst = 0;  // requester, cluster-local user index
  std::int32_t file = kVirtualFile;
  bool self_hit = false; // zero-hop real flow (src == dst, own cache)
  std::vector<std::int32_t> path;  // squarelet cells visited (routing fills)
};

struct TrialResult {
  double outage_fraction = 1.0;   // virtual flows / users; 1 for an empty network
  double sym_throughput = 0.0;    // min served-cluster rate; 0 iff no real flow
  std::int64_t max_load = 0;      // max squarelet load over clusters
  std::int64_t served_users = 0;
  std::int64_t cluster_count = 0;
  std::uint64_t seed = 0;
  // Extra observables (documented in the CSV schema).
  double cluster_miss_mean = 1.0;       // per-cluster mean of [empty -> 1, else miss fraction]
  double mean_user_throughput = 0.0;    // average over users (outage users contribute 0)
  std::int64_t user_count = 0;
  std::int64_t virtual_flows = 0;
  double infeasible_hop_fraction = 0.0; // physical mode; 0 otherwise
};

// Poisson(N) users placed i.i.d. uniformly on the unit square.
UserField place_users(double N, Rng& rng);

// Systematic (probability-proportional) sampling: each user independently
// selects exactly S distinct files; file f is included with marginal
// probability policy.probs[f] exactly. Returns a users*S array, 1-based file
// ids, ascending within each user.
std::vector<std::int32_t> realize_caches(Index users, const CachingPolicyD& policy, Index S,
                                         Rng& rng);

// One cluster's users (local indexing 0..n-1).
struct ClusterView {
  Index n = 0;
  const double* x = nullptr;
  const double* y = nullptr;
  const std::int32_t* requests = nullptr;  // size n, 1-based file ids
  const std::int32_t* caches = nullptr;    // size n*S, ascending per user
  Index S = 0;
};

// Per requester: self-cache hit -> zero-hop real flow; else a uniformly
// chosen caching user serves it; else a VIRTUAL flow from a uniformly chosen
// other user (self if alone). Exactly one flow per user, in user order.
std::vector<Flow> match_pairs(const ClusterView& cluster, Rng& rng);

struct ClusterGeometry {
  double x0 = 0, y0 = 0, side = 1;
};

struct RouteOutcome {
  std::vector<std::int32_t> loads;  // dim*dim, row-major (cell = cy*dim + cx)
  std::int32_t dim = 1;
  std::int32_t max_load = 0;
  VecD user_throughput;   // t for served users, 0 for outage users
  double cluster_rate = 0;  // t = 1/(K*max_load), or 1/K when max_load = 0; 0 if none served
  std::int64_t hops = 0;    // inter-cell hops over all flows
};

// Routes every non-self-hit flow row-then-column over the squarelet grid
// (side = cluster side * sqrt(min(1, c0*ln(n)/n)), grid of >= 1 cell),
// skipping empty squarelets; load = number of flows traversing a cell,
// endpoints included. Fills flow.path. Throws if the cluster is empty.
RouteOutcome route_and_load(const ClusterConfig& config, const ClusterGeometry& geom,
                            const ClusterView& cluster, std::vector<Flow>& flows, double c0);

// Physical-model link rate: log2(1+theta) if SINR >= theta else 0, with
// SINR = P*chi*d^-alpha / (noise + sum interferer powers at the receiver).
double link_rate(const ClusterConfig& config, double tx_x, double tx_y, double rx_x,
                 double rx_y, const std::vector<std::pair<double, double>>& interferers);

// Precomputed tables for running many trials at one parameter point.
class TrialContext {
 public:
  TrialContext(const PopularityModelD& model, const CachingPolicyD& policy,
               const ClusterConfig& config, Index S);

  TrialResult run_multi_hop(std::uint64_t seed) const;
  TrialResult run_single_hop(std::uint64_t seed) const;
  // Outage fields only (throughput fields zero); outage_fraction and
  // cluster_miss_mean equal run_multi_hop's exactly for the same seed.
  TrialResult run_outage_only(std::uint64_t seed) const;

  const ClusterConfig& config() const { return config_; }
  Index M() const { return M_; }
  Index S() const { return S_; }

 private:
  enum class Kind { multi_hop, single_hop, outage_only };
  TrialResult run(std::uint64_t seed, Kind kind) const;

  ClusterConfig config_;
  Index M_ = 0;
  Index S_ = 0;
  CachingPolicyD policy_;
  VecD request_cum_;  // cumulative pmf for request sampling
  VecD cache_cum_;    // cumulative caching probabilities (last entry = S)
};

// Full pipeline for one trial. M and S must match model.M and policy.budget.
TrialResult simulate_trial(const PopularityModelD& model, const CachingPolicyD& policy,
                           const ClusterConfig& config, Index M, Index S, std::uint64_t seed);

// Same placement/caching/matching (same seed => same realization, same
// outage); clusters serve real flows by direct in-cluster links time-shared
// per cluster: t = 1/(K * #real flows), self-hit-only clusters at 1/K.
TrialResult single_hop_baseline_trial(const PopularityModelD& model,
                                      const CachingPolicyD& policy,
                                      const ClusterConfig& config, std::uint64_t seed);

}  // namespace d2d
