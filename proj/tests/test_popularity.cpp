#include <array>
#include <cmath>
#include <random>

#include "doctest.h"

#include "d2dcache/popularity.hpp"

using namespace d2d;

namespace {
double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1e-300, std::abs(b));
}
}  // namespace

TEST_SUITE("popularity") {

TEST_CASE("model validation names the offending field") {
  CHECK_THROWS_WITH_AS((PopularityModelD{0, 0.6, 0.0}.validate()),
                       "PopularityModel: M must be >= 1", std::invalid_argument);
  CHECK_THROWS_WITH_AS((PopularityModelD{10, 0.0, 0.0}.validate()),
                       "PopularityModel: gamma must be > 0", std::invalid_argument);
  CHECK_THROWS_WITH_AS((PopularityModelD{10, 0.6, -1.0}.validate()),
                       "PopularityModel: q must be >= 0", std::invalid_argument);
  CHECK_NOTHROW((PopularityModelD{1, 1.0, 0.0}.validate()));
}

TEST_CASE("pmf is a normalized non-increasing distribution") {
  for (const auto& model : {PopularityModelD{1000, 0.6, 100.0},
                            PopularityModelD{1000, 1.6, 50.0},
                            PopularityModelD{500, 1.0, 0.0},
                            PopularityModelD{1, 2.0, 3.0}}) {
    const VecD p = mzipf_pmf(model);
    REQUIRE(p.size() == model.M);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    CHECK(p.minCoeff() > 0.0);
    for (Index f = 1; f < model.M; ++f) CHECK(p[f] <= p[f - 1]);
  }
}

TEST_CASE("pmf ratios follow the (f+q)^-gamma law exactly") {
  const PopularityModelD model{50, 1.3, 7.5};
  const VecD p = mzipf_pmf(model);
  for (Index f = 1; f < model.M; ++f) {
    const double expect = std::pow((1.0 + model.q) / (double(f + 1) + model.q), model.gamma);
    CHECK(rel_err(p[f] / p[0], expect) < 1e-13);
  }
}

TEST_CASE("log pmf agrees with the pmf") {
  const PopularityModelD model{2000, 0.6, 100.0};
  const VecD p = mzipf_pmf(model);
  const VecD lp = log_mzipf_pmf(model);
  REQUIRE(lp.size() == p.size());
  for (Index f = 0; f < model.M; ++f) CHECK(rel_err(std::exp(lp[f]), p[f]) < 1e-12);
}

TEST_CASE("harmonic_H matches a plain loop and rejects bad ranges") {
  double direct = 0;
  for (int f = 3; f <= 40; ++f) direct += std::pow(f + 2.5, -1.7);
  CHECK(rel_err(harmonic_H(3, 40, 1.7, 2.5), direct) < 1e-14);
  CHECK_THROWS_AS(harmonic_H(0, 5, 0.6, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(harmonic_H(6, 5, 0.6, 0.0), std::invalid_argument);
}

TEST_CASE("harmonic_H bracket holds on 10^4 random tuples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gam(0.05, 3.0);
  std::uniform_real_distribution<double> qd(0.0, 200.0);
  std::uniform_int_distribution<Index> ad(1, 50);
  std::uniform_int_distribution<Index> len(0, 2000);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    double gamma = gam(rng);
    if (std::abs(gamma - 1.0) < 1e-3) gamma += 0.01;
    const double q = qd(rng);
    const Index a = ad(rng);
    const Index b = a + len(rng);
    const double h = harmonic_H(a, b, gamma, q);
    const auto [lo, hi] = harmonic_H_bounds(a, b, gamma, q);
    REQUIRE(lo <= h * (1 + 1e-12) + 1e-15);
    REQUIRE(h <= hi * (1 + 1e-12) + 1e-15);
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("log-sum bracket holds on 10^4 random tuples") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> qd(0.0, 500.0);
  std::uniform_int_distribution<Index> Fd(2, 5000);
  for (int trial = 0; trial < 10000; ++trial) {
    const Index F = Fd(rng);
    const double q = qd(rng);
    KahanSum<double> s;
    for (Index f = 1; f <= F; ++f) s.add(std::log(double(f) + q));
    const double sum = s.value();
    const auto [lo, hi] = log_sum_bounds(F, q);
    REQUIRE(lo <= sum + 1e-9 * std::max(1.0, std::abs(sum)));
    REQUIRE(sum <= hi + 1e-9 * std::max(1.0, std::abs(sum)));
  }
  CHECK_THROWS_AS(log_sum_bounds(1, 0.0), std::invalid_argument);
}

TEST_CASE("request sampler hits the exact pmf (chi-square, df=3)") {
  const PopularityModelD model{4, 1.0, 1.0};
  const VecD p = mzipf_pmf(model);
  RequestSampler sampler(model);
  REQUIRE(sampler.size() == 4);
  Rng rng = make_rng(12345);
  const int n = 100000;
  std::array<int, 4> counts{};
  for (int i = 0; i < n; ++i) {
    const Index f = sampler.sample(rng);
    REQUIRE(f >= 1);
    REQUIRE(f <= 4);
    ++counts[static_cast<std::size_t>(f - 1)];
  }
  double chi2 = 0;
  for (Index f = 0; f < 4; ++f) {
    const double expect = n * p[f];
    chi2 += (counts[size_t(f)] - expect) * (counts[size_t(f)] - expect) / expect;
  }
  // 99th percentile of chi-square with 3 degrees of freedom.
  CHECK(chi2 < 11.344866730144371);
}

TEST_CASE("derived seeds decorrelate and reproduce") {
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 1, 0));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
  Rng a = make_rng(99), b = make_rng(99);
  for (int i = 0; i < 100; ++i) {
    const double u = uniform01(a);
    CHECK(u == uniform01(b));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng c = make_rng(5);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = uniform_index(c, 7);
    CHECK(k < 7);
  }
}

}  // TEST_SUITE
