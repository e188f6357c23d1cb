// Monte Carlo building blocks: placement, cache realization, matching,
// squarelet routing, link feasibility, and full-trial invariants.
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <d2dcache/analytics.hpp>
#include <d2dcache/policy.hpp>
#include <d2dcache/popularity.hpp>
#include <d2dcache/rng.hpp>
#include <d2dcache/sim.hpp>

using namespace d2d;

namespace {

// Mirrors the documented squarelet rule: cell side shrinks like
// sqrt(min(1, c0*ln(n)/n)) of the cluster side, at least one cell.
std::int32_t expected_dim(Index n, double c0) {
  if (n < 2) return 1;
  const double ratio =
      std::min(1.0, c0 * std::log(static_cast<double>(n)) / static_cast<double>(n));
  return std::max<std::int32_t>(
      1, static_cast<std::int32_t>(std::floor(1.0 / std::sqrt(ratio) + 1e-9)));
}

// Exact mean of the per-user outage ratio estimator under a k x k tiling
// with N = g_c*k^2: conditioning on the total user count makes the
// same-cluster companions Binomial, and averaging the ratio over the Poisson
// total gives, per file, (1-P_c)(e^{-g_c P_c} - e^{-N}) / (1 - P_c/k^2),
// plus e^{-N} for the empty-network convention.
double ratio_outage_mean(const VecD& pmf, const VecD& probs, double g_c, int k) {
  const double N = g_c * k * k;
  double acc = std::exp(-N);
  for (Index f = 0; f < pmf.size(); ++f) {
    const double pc = probs[f];
    if (pc >= 1.0) continue;
    acc += pmf[f] * (1.0 - pc) * (std::exp(-g_c * pc) - std::exp(-N)) /
           (1.0 - pc / static_cast<double>(k * k));
  }
  return acc;
}

struct MeanSe {
  double mean = 0;
  double se = 0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

ClusterConfig normalized_config(double g_c, double N, int K) {
  ClusterConfig cfg;
  cfg.g_c = g_c;
  cfg.N = N;
  cfg.K = K;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("sim");

TEST_CASE("cluster config validation") {
  ClusterConfig cfg = normalized_config(25.0, 100.0, 4);
  CHECK_NOTHROW(cfg.validate());
  auto expect_throw = [](ClusterConfig c) { CHECK_THROWS_AS(c.validate(), std::invalid_argument); };
  {
    ClusterConfig c = cfg;
    c.g_c = 0.0;
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.N = 0.0;
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.g_c = 200.0;  // cluster side would exceed the unit square
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.K = 3;  // not a perfect square
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.K = 0;
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.c0 = 1.0;
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.theta = 0.0;
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.pathloss_alpha = 2.0;
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.chi = 0.0;
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.noise = -1.0;
    expect_throw(c);
  }
  {
    ClusterConfig c = cfg;
    c.tx_power = 0.0;
    expect_throw(c);
  }
}

TEST_CASE("user placement is Poisson on the unit square") {
  Rng rng = make_rng(1234);
  const double N = 100.0;
  const int reps = 5000;
  std::vector<double> counts;
  counts.reserve(reps);
  bool in_range = true;
  for (int r = 0; r < reps; ++r) {
    const UserField field = place_users(N, rng);
    counts.push_back(static_cast<double>(field.count));
    for (Index i = 0; i < field.count; ++i) {
      in_range = in_range && field.x[i] >= 0.0 && field.x[i] < 1.0 && field.y[i] >= 0.0 &&
                 field.y[i] < 1.0;
    }
  }
  CHECK(in_range);
  const MeanSe ms = mean_se(counts);
  CHECK(std::abs(ms.mean - N) < 4.0 * std::sqrt(N / reps));
  // Poisson dispersion: variance over mean near 1.
  double ss = 0;
  for (const double c : counts) ss += (c - ms.mean) * (c - ms.mean);
  const double dispersion = ss / (reps - 1.0) / ms.mean;
  CHECK(dispersion > 0.9);
  CHECK(dispersion < 1.1);

  CHECK_THROWS_AS(place_users(0.0, rng), std::invalid_argument);
}

TEST_CASE("cache realization hits the marginals exactly") {
  const PopularityModelD model{20, 0.8, 2.0};
  const auto pol = optimal_policy_kkt(model, 10.0, 3.0);
  const Index users = 100000;
  Rng rng = make_rng(77);
  const auto caches = realize_caches(users, pol, 3, rng);
  REQUIRE(caches.size() == static_cast<std::size_t>(users) * 3);

  std::vector<Index> freq(model.M + 1, 0);
  bool rows_ok = true;
  for (Index u = 0; u < users; ++u) {
    const std::int32_t* row = caches.data() + u * 3;
    rows_ok = rows_ok && row[0] >= 1 && row[2] <= model.M && row[0] < row[1] && row[1] < row[2];
    for (int s = 0; s < 3; ++s) freq[row[s]]++;
  }
  CHECK(rows_ok);
  for (Index f = 0; f < model.M; ++f) {
    const double p = pol.probs[f];
    const double hat = static_cast<double>(freq[f + 1]) / static_cast<double>(users);
    const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(users));
    CHECK(std::abs(hat - p) <= 4.0 * se + 1e-9);
  }

  CHECK_THROWS_AS(realize_caches(10, pol, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(realize_caches(10, pol, 21, rng), std::invalid_argument);
  CHECK_THROWS_AS(realize_caches(10, pol, 2, rng), std::invalid_argument);  // budget is 3
  CachingPolicyD bad;
  bad.probs = VecD::Constant(4, 1.5);
  bad.budget = 6.0;
  CHECK_THROWS_AS(realize_caches(10, bad, 6, rng), std::invalid_argument);
}

TEST_CASE("matching prefers the local cache and randomizes fairly") {
  // Six users, S = 1. User 0 requests file 7 (held by users 1-4), user 5
  // requests file 9 (its own copy), user 1 requests file 50 (held by nobody).
  const Index n = 6, S = 1;
  const std::vector<double> xs(n, 0.5), ys(n, 0.5);
  const std::vector<std::int32_t> requests{7, 50, 7, 7, 7, 9};
  const std::vector<std::int32_t> caches{9, 7, 7, 7, 7, 9};
  ClusterView cl;
  cl.n = n;
  cl.x = xs.data();
  cl.y = ys.data();
  cl.requests = requests.data();
  cl.caches = caches.data();
  cl.S = S;

  Rng rng = make_rng(4242);
  std::array<Index, 6> holder_hits{};  // flow[0].src frequencies
  std::array<Index, 6> virtual_src{};  // flow[1].src frequencies
  const int reps = 40000;
  bool shape_ok = true;
  for (int r = 0; r < reps; ++r) {
    const auto flows = match_pairs(cl, rng);
    shape_ok = shape_ok && flows.size() == static_cast<std::size_t>(n);
    // Requester holding its own file short-circuits to a zero-hop self hit.
    shape_ok = shape_ok && flows[5].self_hit && flows[5].src == 5 && flows[5].file == 9;
    // Cached-elsewhere request: real flow from some holder.
    shape_ok = shape_ok && !flows[0].self_hit && flows[0].file == 7;
    holder_hits[static_cast<std::size_t>(flows[0].src)]++;
    // Uncached request: virtual flow from a uniformly random other user.
    shape_ok = shape_ok && flows[1].file == kVirtualFile && flows[1].src != 1;
    virtual_src[static_cast<std::size_t>(flows[1].src)]++;
    // Holders of their requested file are self hits too (users 2-4 hold 7).
    shape_ok = shape_ok && flows[2].self_hit && flows[3].self_hit && flows[4].self_hit;
  }
  CHECK(shape_ok);
  CHECK(holder_hits[0] == 0);
  CHECK(holder_hits[5] == 0);
  // Chi-square, uniform over the four holders (df = 3, 1% critical value).
  double chi_holders = 0;
  for (int u = 1; u <= 4; ++u) {
    const double expect = reps / 4.0;
    chi_holders += (holder_hits[u] - expect) * (holder_hits[u] - expect) / expect;
  }
  CHECK(chi_holders < 11.344866730144371);
  // Chi-square, uniform over the five non-requesters (df = 4).
  CHECK(virtual_src[1] == 0);
  double chi_virtual = 0;
  for (int u = 0; u < 6; ++u) {
    if (u == 1) continue;
    const double expect = reps / 5.0;
    chi_virtual += (virtual_src[u] - expect) * (virtual_src[u] - expect) / expect;
  }
  CHECK(chi_virtual < 13.276704135987622);

  // A lone user with an uncached request loops the virtual flow onto itself.
  ClusterView lone = cl;
  lone.n = 1;
  const auto lone_flows = match_pairs(lone, rng);
  REQUIRE(lone_flows.size() == 1);
  CHECK(lone_flows[0].file == kVirtualFile);
  CHECK(lone_flows[0].src == 0);
}

TEST_CASE("routing walks row-then-column over occupied cells") {
  // Twelve users on a 2x2 grid (c0 = 1.2 with n = 12 gives dim = 2):
  // A=(0.1,0.1) cell 0, B=(0.9,0.1) cell 1, D=(0.9,0.9) cell 3; cell 2 is
  // kept empty by parking the nine padding users in cell 0.
  std::vector<double> xs{0.1, 0.9, 0.9}, ys{0.1, 0.1, 0.9};
  std::vector<std::int32_t> requests{5, 4, 9}, caches{9, 4, 5};
  for (int i = 0; i < 9; ++i) {
    xs.push_back(0.2);
    ys.push_back(0.2);
    requests.push_back(1);
    caches.push_back(1);
  }
  ClusterView cl;
  cl.n = 12;
  cl.x = xs.data();
  cl.y = ys.data();
  cl.requests = requests.data();
  cl.caches = caches.data();
  cl.S = 1;
  const ClusterGeometry geom{0.0, 0.0, 1.0};
  ClusterConfig cfg = normalized_config(25.0, 25.0, 1);

  std::vector<Flow> flows(3);
  flows[0] = Flow{2, 0, 5, false, {}};  // D serves A: cell 3 -> cell 0
  flows[1] = Flow{0, 2, 9, false, {}};  // A serves D: cell 0 -> cell 3
  flows[2] = Flow{1, 1, 4, true, {}};   // B self hit

  const RouteOutcome out = route_and_load(cfg, geom, cl, flows, 1.2);
  CHECK(out.dim == 2);
  CHECK(out.dim == expected_dim(12, 1.2));
  // Row segment of D->A skips the empty cell 2; A->D passes through B's cell.
  CHECK(flows[0].path == std::vector<std::int32_t>{3, 0});
  CHECK(flows[1].path == std::vector<std::int32_t>{0, 1, 3});
  CHECK(flows[2].path.empty());
  REQUIRE(out.loads.size() == 4);
  CHECK(out.loads[0] == 2);
  CHECK(out.loads[1] == 1);
  CHECK(out.loads[2] == 0);
  CHECK(out.loads[3] == 2);
  CHECK(out.max_load == 2);
  CHECK(out.hops == 3);
  CHECK(out.cluster_rate == 0.5);  // K = 1, 1/max_load
  CHECK(out.user_throughput[0] == 0.5);
  CHECK(out.user_throughput[1] == 0.5);
  CHECK(out.user_throughput[2] == 0.5);

  // All-self-hit cluster: no load, full slot rate.
  std::vector<Flow> selfs{Flow{1, 1, 4, true, {}}};
  const RouteOutcome quiet = route_and_load(cfg, geom, cl, selfs, 1.2);
  CHECK(quiet.max_load == 0);
  CHECK(quiet.cluster_rate == 1.0);

  // Virtual-only cluster: the phantom flow loads cells but serves nobody.
  std::vector<Flow> virts{Flow{1, 0, kVirtualFile, false, {}}};
  const RouteOutcome ghost = route_and_load(cfg, geom, cl, virts, 1.2);
  CHECK(ghost.max_load == 1);
  CHECK(ghost.cluster_rate == 0.0);
  CHECK(virts[0].path == std::vector<std::int32_t>{1, 0});

  std::vector<Flow> one{Flow{0, 2, 9, false, {}}};
  CHECK_THROWS_AS(route_and_load(cfg, geom, cl, one, 1.0), std::invalid_argument);
  ClusterView empty = cl;
  empty.n = 0;
  CHECK_THROWS_AS(route_and_load(cfg, geom, empty, one, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(route_and_load(cfg, ClusterGeometry{0, 0, 0}, cl, one, 2.0),
                  std::invalid_argument);
  std::vector<double> bad_x = xs;
  bad_x[0] = -0.7;  // lands at cell index -1 once the 2x2 grid is active
  ClusterView outside = cl;
  outside.x = bad_x.data();
  CHECK_THROWS_AS(route_and_load(cfg, geom, outside, one, 1.2), std::invalid_argument);
}

TEST_CASE("squarelet grid follows the density rule") {
  Rng rng = make_rng(9);
  ClusterConfig cfg = normalized_config(25.0, 25.0, 1);
  const ClusterGeometry geom{0.0, 0.0, 1.0};
  for (const Index n : {Index(1), Index(2), Index(3), Index(30), Index(100), Index(1000)}) {
    std::vector<double> xs(n), ys(n);
    for (Index i = 0; i < n; ++i) {
      xs[i] = uniform01(rng);
      ys[i] = uniform01(rng);
    }
    const std::vector<std::int32_t> requests(n, 1);
    const std::vector<std::int32_t> caches(n, 1);
    ClusterView cl;
    cl.n = n;
    cl.x = xs.data();
    cl.y = ys.data();
    cl.requests = requests.data();
    cl.caches = caches.data();
    cl.S = 1;
    std::vector<Flow> flows;  // routing an empty flow list still sizes the grid
    const RouteOutcome out = route_and_load(cfg, geom, cl, flows, 2.0);
    CHECK(out.dim == expected_dim(n, 2.0));
    CHECK(out.max_load == 0);
  }
}

TEST_CASE("link rate thresholds on SINR") {
  ClusterConfig cfg = normalized_config(25.0, 25.0, 4);
  cfg.mode = SimMode::physical;
  cfg.theta = 3.0;
  cfg.pathloss_alpha = 4.0;
  cfg.chi = 1.0;
  cfg.noise = 1.0;
  cfg.tx_power = 1.0;
  const std::vector<std::pair<double, double>> nobody;

  // Close link, no interference: SINR = d^-4 >= 3 for d = 0.5 (16 > 3).
  CHECK(link_rate(cfg, 0.0, 0.0, 0.5, 0.0, nobody) == doctest::Approx(2.0));  // log2(1+3)
  // Far link: d = 1 gives SINR = 1 < 3.
  CHECK(link_rate(cfg, 0.0, 0.0, 1.0, 0.0, nobody) == 0.0);
  // Interferer sitting on the receiver kills the link.
  CHECK(link_rate(cfg, 0.0, 0.0, 0.5, 0.0, {{0.5, 0.0}}) == 0.0);
  // Strong nearby interferer pushes SINR below the threshold.
  CHECK(link_rate(cfg, 0.0, 0.0, 0.5, 0.0, {{0.6, 0.0}}) == 0.0);
  // No noise, no interference: rate is the capped slot rate.
  ClusterConfig quiet = cfg;
  quiet.noise = 0.0;
  CHECK(link_rate(quiet, 0.0, 0.0, 0.9, 0.0, nobody) == doctest::Approx(2.0));
  CHECK_THROWS_AS(link_rate(cfg, 0.3, 0.3, 0.3, 0.3, nobody), std::invalid_argument);
}

TEST_CASE("trials are deterministic in the seed") {
  const PopularityModelD model{200, 0.6, 20.0};
  const auto pol = optimal_policy_kkt(model, 25.0, 1.0);
  const ClusterConfig cfg = normalized_config(25.0, 100.0, 4);
  const TrialContext ctx_a(model, pol, cfg, 1);
  const TrialContext ctx_b(model, pol, cfg, 1);

  const TrialResult a1 = ctx_a.run_multi_hop(555);
  const TrialResult a2 = ctx_a.run_multi_hop(555);
  const TrialResult b1 = ctx_b.run_multi_hop(555);
  for (const TrialResult* r : {&a2, &b1}) {
    CHECK(r->outage_fraction == a1.outage_fraction);
    CHECK(r->sym_throughput == a1.sym_throughput);
    CHECK(r->cluster_miss_mean == a1.cluster_miss_mean);
    CHECK(r->mean_user_throughput == a1.mean_user_throughput);
    CHECK(r->max_load == a1.max_load);
    CHECK(r->served_users == a1.served_users);
    CHECK(r->user_count == a1.user_count);
    CHECK(r->virtual_flows == a1.virtual_flows);
  }
  const TrialResult other = ctx_a.run_multi_hop(556);
  CHECK((other.user_count != a1.user_count || other.outage_fraction != a1.outage_fraction ||
         other.sym_throughput != a1.sym_throughput));

  CHECK_THROWS_AS(TrialContext(model, pol, cfg, 2), std::invalid_argument);  // budget is 1
  CachingPolicyD short_pol = pol;
  short_pol.probs = pol.probs.head(100);
  CHECK_THROWS_AS(TrialContext(model, short_pol, cfg, 1), std::invalid_argument);
  ClusterConfig bad = cfg;
  bad.N = 10.0;  // g_c > N
  CHECK_THROWS_AS(TrialContext(model, pol, bad, 1), std::invalid_argument);
}

TEST_CASE("outage-only runs reproduce the full pipeline outage") {
  const PopularityModelD model{300, 1.2, 10.0};
  const auto pol = optimal_policy_kkt(model, 30.0, 2.0);
  const ClusterConfig cfg = normalized_config(30.0, 120.0, 4);
  const TrialContext ctx(model, pol, cfg, 2);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TrialResult full = ctx.run_multi_hop(seed);
    const TrialResult fast = ctx.run_outage_only(seed);
    CHECK(fast.outage_fraction == full.outage_fraction);
    CHECK(fast.cluster_miss_mean == full.cluster_miss_mean);
    CHECK(fast.served_users == full.served_users);
    CHECK(fast.virtual_flows == full.virtual_flows);
    CHECK(fast.user_count == full.user_count);
    CHECK(fast.sym_throughput == 0.0);
    CHECK(fast.max_load == 0);
  }
}

TEST_CASE("single-hop rate identity and shared realization") {
  const PopularityModelD model{200, 0.6, 20.0};
  const auto pol = optimal_policy_kkt(model, 25.0, 1.0);
  const ClusterConfig cfg = normalized_config(25.0, 100.0, 4);
  const TrialContext ctx(model, pol, cfg, 1);
  int nontrivial = 0;
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const TrialResult single = ctx.run_single_hop(seed);
    const TrialResult multi = ctx.run_multi_hop(seed);
    // Identical placement, caches, and matching: outage stats coincide.
    CHECK(single.outage_fraction == multi.outage_fraction);
    CHECK(single.cluster_miss_mean == multi.cluster_miss_mean);
    CHECK(single.served_users == multi.served_users);
    CHECK(single.user_count == multi.user_count);
    // Normalized symmetric rate: slowest cluster time-shares its real flows
    // (the K slot factor cancels against the normalized rate scale).
    if (single.max_load >= 1) {
      ++nontrivial;
      CHECK(single.sym_throughput == 1.0 / static_cast<double>(single.max_load));
    }
  }
  CHECK(nontrivial >= 25);
}

TEST_CASE("empty network degenerates cleanly") {
  const PopularityModelD model{10, 0.6, 1.0};
  const auto pol = optimal_policy_kkt(model, 5.0, 1.0);
  ClusterConfig cfg = normalized_config(1e-9, 1e-9, 1);
  const TrialContext ctx(model, pol, cfg, 1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TrialResult res = ctx.run_multi_hop(seed);
    CHECK(res.user_count == 0);
    CHECK(res.outage_fraction == 1.0);
    CHECK(res.cluster_miss_mean == 1.0);
    CHECK(res.sym_throughput == 0.0);
    CHECK(res.served_users == 0);
    CHECK(res.virtual_flows == 0);
  }
}

TEST_CASE("trial outage estimators match their closed-form means") {
  const PopularityModelD model{50, 0.6, 5.0};
  const double g_c = 25.0;
  const auto pol = optimal_policy_kkt(model, g_c, 1.0);
  const VecD pmf = mzipf_pmf(model);
  const double exact_outage = outage_exact(model, pol, g_c);

  // Single full cluster (k = 1): both estimators are unbiased for the same
  // closed form.
  {
    const TrialContext ctx(model, pol, normalized_config(g_c, g_c, 1), 1);
    const int trials = 3000;
    std::vector<double> miss, frac;
    for (int t = 0; t < trials; ++t) {
      const TrialResult r = ctx.run_outage_only(derive_seed(2024, 0, t));
      miss.push_back(r.cluster_miss_mean);
      frac.push_back(r.outage_fraction);
    }
    const MeanSe m = mean_se(miss);
    CHECK(std::abs(m.mean - exact_outage) <= 4.0 * m.se);
    const MeanSe fr = mean_se(frac);
    CHECK(ratio_outage_mean(pmf, pol.probs, g_c, 1) == doctest::Approx(exact_outage).epsilon(1e-12));
    CHECK(std::abs(fr.mean - exact_outage) <= 4.0 * fr.se);
  }

  // 2x2 tiling: the cluster-mean estimator stays unbiased for the closed
  // form; the per-user ratio estimator matches its finite-N mean.
  {
    const TrialContext ctx(model, pol, normalized_config(g_c, 4.0 * g_c, 4), 1);
    const int trials = 2500;
    std::vector<double> miss, frac;
    for (int t = 0; t < trials; ++t) {
      const TrialResult r = ctx.run_outage_only(derive_seed(2025, 0, t));
      miss.push_back(r.cluster_miss_mean);
      frac.push_back(r.outage_fraction);
    }
    const MeanSe m = mean_se(miss);
    CHECK(std::abs(m.mean - exact_outage) <= 4.0 * m.se);
    const MeanSe fr = mean_se(frac);
    const double ratio_mean = ratio_outage_mean(pmf, pol.probs, g_c, 2);
    CHECK(std::abs(fr.mean - ratio_mean) <= 4.0 * fr.se);
  }
}

TEST_CASE("larger clusters reduce outage") {
  const PopularityModelD model{80, 0.6, 8.0};
  std::vector<double> means;
  for (const double g_c : {8.0, 32.0}) {
    const auto pol = optimal_policy_kkt(model, g_c, 1.0);
    const TrialContext ctx(model, pol, normalized_config(g_c, 4.0 * g_c, 4), 1);
    std::vector<double> miss;
    for (int t = 0; t < 800; ++t)
      miss.push_back(ctx.run_outage_only(derive_seed(7, 0, t)).cluster_miss_mean);
    means.push_back(mean_se(miss).mean);
  }
  CHECK(means[0] > means[1] + 0.05);
}

TEST_CASE("physical mode smoke") {
  const PopularityModelD model{100, 0.6, 10.0};
  const auto pol = optimal_policy_kkt(model, 20.0, 1.0);
  ClusterConfig cfg = normalized_config(20.0, 80.0, 4);
  cfg.mode = SimMode::physical;
  cfg.theta = 1.0;
  const TrialContext ctx(model, pol, cfg, 1);
  const TrialResult a = ctx.run_multi_hop(31);
  const TrialResult b = ctx.run_multi_hop(31);
  CHECK(a.sym_throughput == b.sym_throughput);
  CHECK(a.infeasible_hop_fraction == b.infeasible_hop_fraction);
  CHECK(a.infeasible_hop_fraction >= 0.0);
  CHECK(a.infeasible_hop_fraction <= 1.0);
  // Physical rates are capped by the slot rate log2(1+theta)/K.
  CHECK(a.sym_throughput <= std::log2(1.0 + cfg.theta) / cfg.K + 1e-12);
  const TrialResult single = ctx.run_single_hop(31);
  CHECK(single.outage_fraction == a.outage_fraction);
  CHECK(single.sym_throughput <= std::log2(1.0 + cfg.theta) / cfg.K + 1e-12);
}

TEST_SUITE_END();
