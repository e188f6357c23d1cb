#include "d2dcache/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace d2d {

void ClusterConfig::validate() const {
  if (!(g_c > 0)) throw std::invalid_argument("ClusterConfig: g_c must be > 0");
  if (!(N > 0)) throw std::invalid_argument("ClusterConfig: N must be > 0");
  if (!(g_c <= N))
    throw std::invalid_argument("ClusterConfig: requires g_c <= N (cluster side <= 1)");
  if (K < 1) throw std::invalid_argument("ClusterConfig: K must be >= 1");
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(K))));
  if (r * r != K) throw std::invalid_argument("ClusterConfig: K must be a perfect square");
  if (!(c0 > 1)) throw std::invalid_argument("ClusterConfig: c0 must be > 1");
  if (!(theta > 0)) throw std::invalid_argument("ClusterConfig: theta must be > 0");
  if (!(pathloss_alpha > 2)) throw std::invalid_argument("ClusterConfig: pathloss_alpha must be > 2");
  if (!(chi > 0)) throw std::invalid_argument("ClusterConfig: chi must be > 0");
  if (!(noise >= 0)) throw std::invalid_argument("ClusterConfig: noise must be >= 0");
  if (!(tx_power > 0)) throw std::invalid_argument("ClusterConfig: tx_power must be > 0");
}

UserField place_users(double N, Rng& rng) {
  if (!(N > 0)) throw std::invalid_argument("place_users: N must be > 0");
  UserField field;
  std::poisson_distribution<Index> poisson(N);
  field.count = poisson(rng);
  field.x.resize(field.count);
  field.y.resize(field.count);
  for (Index i = 0; i < field.count; ++i) {
    field.x[i] = uniform01(rng);
    field.y[i] = uniform01(rng);
  }
  return field;
}

namespace {

// Cumulative caching probabilities with the final entry pinned to S so each
// systematic point lands in a valid interval.
VecD cache_cumulative(const CachingPolicyD& policy, Index S) {
  const Index M = policy.probs.size();
  if (S < 1) throw std::invalid_argument("realize_caches: S must be >= 1");
  if (S > M) throw std::invalid_argument("realize_caches: S must be <= M");
  if (std::abs(policy.budget - static_cast<double>(S)) >
      1e-6 * std::max(1.0, static_cast<double>(S)))
    throw std::invalid_argument("realize_caches: policy budget does not equal S");
  VecD cum(M);
  KahanSum<double> acc;
  for (Index f = 0; f < M; ++f) {
    const double p = policy.probs[f];
    if (!(p >= 0.0) || p > 1.0 + 1e-12)
      throw std::invalid_argument("realize_caches: infeasible policy entry (needs 0 <= P_c <= 1)");
    acc.add(p);
    cum[f] = acc.value();
  }
  cum[M - 1] = static_cast<double>(S);
  return cum;
}

// Systematic sampling for one user: points U + j, j = 0..S-1, mapped through
// the cumulative table. Intervals have length <= 1, so the S selections are
// distinct and ascending; marginals equal P_c(f) exactly.
inline void sample_cache(const VecD& cum, Index S, Rng& rng, std::int32_t* out) {
  const double U = uniform01(rng);
  const double* begin = cum.data();
  const double* end = begin + cum.size();
  for (Index j = 0; j < S; ++j) {
    const double* it = std::upper_bound(begin, end, U + static_cast<double>(j));
    if (it == end) --it;  // U + j < S = cum.back(); guard for rounding only
    out[j] = static_cast<std::int32_t>(it - begin) + 1;
  }
}

inline std::int32_t sample_from_cum(const VecD& cum, Rng& rng) {
  const double u = uniform01(rng);
  const double* begin = cum.data();
  const double* it = std::upper_bound(begin, begin + cum.size(), u);
  if (it == begin + cum.size()) --it;
  return static_cast<std::int32_t>(it - begin) + 1;
}

using FileUser = std::pair<std::int32_t, std::int32_t>;

// Sorted (file, user) pairs of a cluster; V_f = the equal range of f.
void build_cache_pairs(const ClusterView& cl, std::vector<FileUser>& pairs) {
  pairs.clear();
  pairs.reserve(static_cast<std::size_t>(cl.n) * cl.S);
  for (Index u = 0; u < cl.n; ++u)
    for (Index s = 0; s < cl.S; ++s)
      pairs.emplace_back(cl.caches[u * cl.S + s], static_cast<std::int32_t>(u));
  std::sort(pairs.begin(), pairs.end());
}

inline bool caches_own_request(const ClusterView& cl, Index u, std::int32_t f) {
  const std::int32_t* b = cl.caches + u * cl.S;
  return std::binary_search(b, b + cl.S, f);
}

}  // namespace

std::vector<std::int32_t> realize_caches(Index users, const CachingPolicyD& policy, Index S,
                                         Rng& rng) {
  if (users < 0) throw std::invalid_argument("realize_caches: users must be >= 0");
  const VecD cum = cache_cumulative(policy, S);
  std::vector<std::int32_t> caches(static_cast<std::size_t>(users) * S);
  for (Index u = 0; u < users; ++u) sample_cache(cum, S, rng, caches.data() + u * S);
  return caches;
}

std::vector<Flow> match_pairs(const ClusterView& cluster, Rng& rng) {
  std::vector<FileUser> pairs;
  build_cache_pairs(cluster, pairs);
  std::vector<Flow> flows;
  flows.reserve(cluster.n);
  for (Index u = 0; u < cluster.n; ++u) {
    const std::int32_t f = cluster.requests[u];
    Flow fl;
    fl.dst = static_cast<std::int32_t>(u);
    fl.file = f;
    if (caches_own_request(cluster, u, f)) {
      fl.src = fl.dst;
      fl.self_hit = true;
    } else {
      const auto lo = std::lower_bound(pairs.begin(), pairs.end(), FileUser{f, -1});
      const auto hi = std::lower_bound(pairs.begin(), pairs.end(), FileUser{f + 1, -1});
      if (lo != hi) {
        fl.src = (lo + uniform_index(rng, static_cast<std::size_t>(hi - lo)))->second;
      } else {
        fl.file = kVirtualFile;
        if (cluster.n == 1) {
          fl.src = fl.dst;
        } else {
          const std::size_t v = uniform_index(rng, static_cast<std::size_t>(cluster.n) - 1);
          fl.src = static_cast<std::int32_t>(v) >= fl.dst ? static_cast<std::int32_t>(v) + 1
                                                          : static_cast<std::int32_t>(v);
        }
      }
    }
    flows.push_back(std::move(fl));
  }
  return flows;
}

namespace {

inline std::int32_t squarelet_dim(Index n, double c0) {
  if (n < 2) return 1;
  const double ratio = std::min(1.0, c0 * std::log(static_cast<double>(n)) / static_cast<double>(n));
  return std::max<std::int32_t>(
      1, static_cast<std::int32_t>(std::floor(1.0 / std::sqrt(ratio) + 1e-9)));
}

}  // namespace

RouteOutcome route_and_load(const ClusterConfig& config, const ClusterGeometry& geom,
                            const ClusterView& cluster, std::vector<Flow>& flows, double c0) {
  config.validate();
  if (!(c0 > 1)) throw std::invalid_argument("route_and_load: c0 must be > 1");
  if (cluster.n == 0)
    throw std::invalid_argument("route_and_load: degenerate cluster with no users");
  if (!(geom.side > 0)) throw std::invalid_argument("route_and_load: cluster side must be > 0");

  const std::int32_t dim = squarelet_dim(cluster.n, c0);
  const double cell = geom.side / dim;

  RouteOutcome out;
  out.dim = dim;
  out.loads.assign(static_cast<std::size_t>(dim) * dim, 0);

  std::vector<std::int32_t> ucell(cluster.n);
  for (Index u = 0; u < cluster.n; ++u) {
    const auto cx = std::min<std::int32_t>(
        dim - 1, static_cast<std::int32_t>((cluster.x[u] - geom.x0) / cell));
    const auto cy = std::min<std::int32_t>(
        dim - 1, static_cast<std::int32_t>((cluster.y[u] - geom.y0) / cell));
    if (cx < 0 || cy < 0)
      throw std::invalid_argument("route_and_load: user outside the cluster bounds");
    ucell[u] = cy * dim + cx;
  }
  std::vector<std::int32_t> occ(static_cast<std::size_t>(dim) * dim, 0);
  for (Index u = 0; u < cluster.n; ++u) occ[ucell[u]]++;

  for (Flow& fl : flows) {
    fl.path.clear();
    if (fl.self_hit) continue;  // zero-hop, no load
    const std::int32_t s = ucell[fl.src], d = ucell[fl.dst];
    const std::int32_t sx = s % dim, sy = s / dim, dx = d % dim, dy = d / dim;
    // Row segment: row sy from sx to dx inclusive, skipping empty cells.
    const std::int32_t stepx = dx >= sx ? 1 : -1;
    for (std::int32_t cx = sx;; cx += stepx) {
      if (occ[sy * dim + cx] > 0) fl.path.push_back(sy * dim + cx);
      if (cx == dx) break;
    }
    // Column segment: column dx from sy (exclusive) to dy inclusive.
    if (dy != sy) {
      const std::int32_t stepy = dy >= sy ? 1 : -1;
      for (std::int32_t cy = sy + stepy;; cy += stepy) {
        if (occ[cy * dim + dx] > 0) fl.path.push_back(cy * dim + dx);
        if (cy == dy) break;
      }
    }
    for (const std::int32_t c : fl.path) out.loads[c]++;
    out.hops += static_cast<std::int64_t>(fl.path.size()) - 1;
  }

  out.max_load = *std::max_element(out.loads.begin(), out.loads.end());
  const double t = out.max_load >= 1
                       ? 1.0 / (config.K * static_cast<double>(out.max_load))
                       : 1.0 / config.K;  // all-self-hit cluster: full slot rate
  out.user_throughput = VecD::Zero(cluster.n);
  Index served = 0;
  for (const Flow& fl : flows) {
    if (fl.file != kVirtualFile) {
      out.user_throughput[fl.dst] = t;
      ++served;
    }
  }
  out.cluster_rate = served > 0 ? t : 0.0;
  return out;
}

double link_rate(const ClusterConfig& config, double tx_x, double tx_y, double rx_x,
                 double rx_y, const std::vector<std::pair<double, double>>& interferers) {
  config.validate();
  const double d = std::hypot(tx_x - rx_x, tx_y - rx_y);
  if (d == 0) throw std::invalid_argument("link_rate: coincident transmitter and receiver");
  const double signal = config.tx_power * config.chi * std::pow(d, -config.pathloss_alpha);
  double interference = 0;
  for (const auto& [ix, iy] : interferers) {
    const double di = std::hypot(ix - rx_x, iy - rx_y);
    if (di == 0) return 0.0;  // interferer on top of the receiver
    interference += config.tx_power * config.chi * std::pow(di, -config.pathloss_alpha);
  }
  const double denom = config.noise + interference;
  if (denom == 0) return std::log2(1 + config.theta);  // SINR -> infinity
  return signal / denom >= config.theta ? std::log2(1 + config.theta) : 0.0;
}

TrialContext::TrialContext(const PopularityModelD& model, const CachingPolicyD& policy,
                           const ClusterConfig& config, Index S)
    : config_(config), M_(model.M), S_(S), policy_(policy) {
  model.validate();
  config.validate();
  if (policy.probs.size() != model.M)
    throw std::invalid_argument("TrialContext: policy length does not match M");
  cache_cum_ = cache_cumulative(policy, S);
  const VecD pmf = mzipf_pmf(model);
  request_cum_.resize(model.M);
  KahanSum<double> acc;
  for (Index f = 0; f < model.M; ++f) {
    acc.add(pmf[f]);
    request_cum_[f] = acc.value();
  }
  request_cum_[model.M - 1] = 1.0;
}

TrialResult TrialContext::run_multi_hop(std::uint64_t seed) const {
  return run(seed, Kind::multi_hop);
}
TrialResult TrialContext::run_single_hop(std::uint64_t seed) const {
  return run(seed, Kind::single_hop);
}
TrialResult TrialContext::run_outage_only(std::uint64_t seed) const {
  return run(seed, Kind::outage_only);
}

namespace {

// Per-cluster record kept for the physical-model feasibility pass.
struct PhysicalRecord {
  std::int32_t ci = 0, cj = 0;              // cluster grid coordinates
  std::int32_t dim = 1;
  ClusterGeometry geom;
  std::vector<Flow> flows;
  std::vector<std::pair<double, double>> first_user;  // per cell; (-1,-1) if empty
  bool has_tx = false;
  std::pair<double, double> rep_tx{0, 0};  // first flow source (representative)
};

}  // namespace

TrialResult TrialContext::run(std::uint64_t seed, Kind kind) const {
  Rng rng = make_rng(seed);
  TrialResult res;
  res.seed = seed;

  const double side = std::sqrt(config_.g_c / config_.N);
  const auto dimc = static_cast<Index>(std::ceil(1.0 / side - 1e-9));
  res.cluster_count = dimc * dimc;

  // 1. Placement.
  std::poisson_distribution<Index> poisson(config_.N);
  const Index count = poisson(rng);
  res.user_count = count;
  if (count == 0) {
    res.outage_fraction = 1.0;  // empty-network outage term
    res.cluster_miss_mean = 1.0;
    return res;
  }
  VecD xs(count), ys(count);
  for (Index u = 0; u < count; ++u) {
    xs[u] = uniform01(rng);
    ys[u] = uniform01(rng);
  }

  // 2. Caches, then 3. requests, both in global user order.
  std::vector<std::int32_t> caches(static_cast<std::size_t>(count) * S_);
  for (Index u = 0; u < count; ++u) sample_cache(cache_cum_, S_, rng, caches.data() + u * S_);
  std::vector<std::int32_t> requests(count);
  for (Index u = 0; u < count; ++u) requests[u] = sample_from_cum(request_cum_, rng);

  // Cluster assignment with a stable counting sort (members in ascending
  // global index, clusters processed in row-major id order).
  std::vector<Index> cluster_of(count);
  std::vector<Index> csize(res.cluster_count, 0);
  for (Index u = 0; u < count; ++u) {
    const auto cx = std::min<Index>(dimc - 1, static_cast<Index>(xs[u] / side));
    const auto cy = std::min<Index>(dimc - 1, static_cast<Index>(ys[u] / side));
    cluster_of[u] = cy * dimc + cx;
    csize[cluster_of[u]]++;
  }
  std::vector<Index> offset(res.cluster_count + 1, 0);
  for (Index c = 0; c < res.cluster_count; ++c) offset[c + 1] = offset[c] + csize[c];
  std::vector<Index> members(count);
  {
    std::vector<Index> cursor(offset.begin(), offset.end() - 1);
    for (Index u = 0; u < count; ++u) members[cursor[cluster_of[u]]++] = u;
  }

  const bool physical = config_.mode == SimMode::physical;
  const double rate_scale =
      physical ? std::log2(1 + config_.theta) : static_cast<double>(config_.K);

  KahanSum<double> miss_sum;        // per-cluster outage estimator
  KahanSum<double> user_thr_sum;    // sum of per-user throughput
  std::int64_t virtual_total = 0;
  std::int64_t served_total = 0;
  std::int64_t max_load = 0;
  double min_rate = std::numeric_limits<double>::infinity();
  bool any_served = false;

  // Reused per-cluster buffers.
  std::vector<double> lx, ly;
  std::vector<std::int32_t> lreq, lcache;
  std::vector<PhysicalRecord> records;

  for (Index c = 0; c < res.cluster_count; ++c) {
    const Index n = csize[c];
    if (n == 0) {
      miss_sum.add(1.0);  // empty cluster counts as a full miss
      continue;
    }
    lx.resize(n);
    ly.resize(n);
    lreq.resize(n);
    lcache.resize(static_cast<std::size_t>(n) * S_);
    for (Index i = 0; i < n; ++i) {
      const Index u = members[offset[c] + i];
      lx[i] = xs[u];
      ly[i] = ys[u];
      lreq[i] = requests[u];
      std::copy_n(caches.data() + u * S_, S_, lcache.data() + i * S_);
    }
    ClusterView view{n, lx.data(), ly.data(), lreq.data(), lcache.data(), S_};

    if (kind == Kind::outage_only) {
      // Outage indicators need no matching randomness: a user is in outage
      // iff it neither caches its request nor has any cacher in the cluster.
      std::vector<FileUser> pairs;
      build_cache_pairs(view, pairs);
      Index misses = 0;
      for (Index u = 0; u < n; ++u) {
        const std::int32_t f = lreq[u];
        if (caches_own_request(view, u, f)) continue;
        const auto lo = std::lower_bound(pairs.begin(), pairs.end(), FileUser{f, -1});
        if (lo == pairs.end() || lo->first != f) ++misses;
      }
      virtual_total += misses;
      served_total += n - misses;
      miss_sum.add(static_cast<double>(misses) / static_cast<double>(n));
      continue;
    }

    std::vector<Flow> flows = match_pairs(view, rng);
    Index misses = 0;
    for (const Flow& fl : flows)
      if (fl.file == kVirtualFile) ++misses;
    virtual_total += misses;
    served_total += n - misses;
    miss_sum.add(static_cast<double>(misses) / static_cast<double>(n));

    const ClusterGeometry geom{static_cast<double>(c % dimc) * side,
                               static_cast<double>(c / dimc) * side, side};
    double rate = 0;  // mode-converted served-user rate
    if (kind == Kind::multi_hop) {
      RouteOutcome outcome = route_and_load(config_, geom, view, flows, config_.c0);
      max_load = std::max<std::int64_t>(max_load, outcome.max_load);
      rate = outcome.cluster_rate * rate_scale;
      for (Index i = 0; i < n; ++i) user_thr_sum.add(outcome.user_throughput[i] * rate_scale);
      if (physical) {
        PhysicalRecord rec;
        rec.ci = static_cast<std::int32_t>(c % dimc);
        rec.cj = static_cast<std::int32_t>(c / dimc);
        rec.dim = outcome.dim;
        rec.geom = geom;
        const double cell = side / outcome.dim;
        rec.first_user.assign(static_cast<std::size_t>(outcome.dim) * outcome.dim, {-1, -1});
        for (Index i = 0; i < n; ++i) {
          const auto cx = std::min<std::int32_t>(
              outcome.dim - 1, static_cast<std::int32_t>((lx[i] - geom.x0) / cell));
          const auto cy = std::min<std::int32_t>(
              outcome.dim - 1, static_cast<std::int32_t>((ly[i] - geom.y0) / cell));
          auto& slot = rec.first_user[cy * outcome.dim + cx];
          if (slot.first < 0) slot = {lx[i], ly[i]};
        }
        for (const Flow& fl : flows) {
          if (!fl.self_hit) {
            rec.has_tx = true;
            rec.rep_tx = {lx[fl.src], ly[fl.src]};
            break;
          }
        }
        rec.flows = flows;
        records.push_back(std::move(rec));
      }
    } else {  // single_hop
      Index n_real = 0;
      for (const Flow& fl : flows)
        if (fl.file != kVirtualFile && !fl.self_hit) ++n_real;
      max_load = std::max<std::int64_t>(max_load, static_cast<std::int64_t>(n_real));
      const double t = 1.0 / (config_.K * static_cast<double>(std::max<Index>(n_real, 1)));
      const Index served = n - misses;
      rate = served > 0 ? t * rate_scale : 0.0;
      user_thr_sum.add(rate * static_cast<double>(served));
    }
    if (n - misses > 0) {
      any_served = true;
      min_rate = std::min(min_rate, rate);
    }
  }

  res.outage_fraction = static_cast<double>(virtual_total) / static_cast<double>(count);
  res.cluster_miss_mean = miss_sum.value() / static_cast<double>(res.cluster_count);
  res.served_users = served_total;
  res.virtual_flows = virtual_total;
  if (kind != Kind::outage_only) {
    res.max_load = max_load;
    res.sym_throughput = any_served ? min_rate : 0.0;
    res.mean_user_throughput = user_thr_sum.value() / static_cast<double>(count);
  }

  if (physical && kind == Kind::multi_hop) {
    // Feasibility pass: one representative transmitter per concurrently
    // active same-color cluster; tx/rx are each cell's first user.
    const auto kappa = static_cast<std::int32_t>(std::lround(std::sqrt(config_.K)));
    std::int64_t hops = 0, infeasible = 0;
    std::vector<std::pair<double, double>> interferers;
    for (std::size_t a = 0; a < records.size(); ++a) {
      const PhysicalRecord& rec = records[a];
      interferers.clear();
      for (std::size_t b = 0; b < records.size(); ++b) {
        if (b == a || !records[b].has_tx) continue;
        if (records[b].ci % kappa == rec.ci % kappa && records[b].cj % kappa == rec.cj % kappa)
          interferers.push_back(records[b].rep_tx);
      }
      for (const Flow& fl : rec.flows) {
        for (std::size_t h = 0; h + 1 < fl.path.size(); ++h) {
          const auto& tx = rec.first_user[fl.path[h]];
          const auto& rx = rec.first_user[fl.path[h + 1]];
          ++hops;
          if (link_rate(config_, tx.first, tx.second, rx.first, rx.second, interferers) == 0.0)
            ++infeasible;
        }
      }
    }
    res.infeasible_hop_fraction =
        hops > 0 ? static_cast<double>(infeasible) / static_cast<double>(hops) : 0.0;
  }
  return res;
}

TrialResult simulate_trial(const PopularityModelD& model, const CachingPolicyD& policy,
                           const ClusterConfig& config, Index M, Index S, std::uint64_t seed) {
  if (M != model.M)
    throw std::invalid_argument("simulate_trial: M does not match the popularity model");
  return TrialContext(model, policy, config, S).run_multi_hop(seed);
}

TrialResult single_hop_baseline_trial(const PopularityModelD& model,
                                      const CachingPolicyD& policy,
                                      const ClusterConfig& config, std::uint64_t seed) {
  const auto S = static_cast<Index>(std::llround(policy.budget));
  return TrialContext(model, policy, config, S).run_single_hop(seed);
}

}  // namespace d2d
