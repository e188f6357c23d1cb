#pragma once

// Mandelbrot-Zipf request popularity: pmf, generalized harmonic sums, and the
// closed-form brackets used by the analytic outage/throughput expressions.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "d2dcache/common.hpp"
#include "d2dcache/rng.hpp"

namespace d2d {

// Library of M files ranked by popularity; file f in 1..M is requested with
// probability proportional to (f + q)^(-gamma). q >= 0 flattens the head
// ("plateau"); q = 0 is plain Zipf.
template <class Scalar>
struct PopularityModel {
  Index M = 0;
  Scalar gamma = Scalar(0);
  Scalar q = Scalar(0);

  void validate() const {
    if (M < 1) throw std::invalid_argument("PopularityModel: M must be >= 1");
    if (!(gamma > Scalar(0)))
      throw std::invalid_argument("PopularityModel: gamma must be > 0");
    if (!(q >= Scalar(0)))
      throw std::invalid_argument("PopularityModel: q must be >= 0");
  }
};

using PopularityModelD = PopularityModel<double>;

// H(a, b, gamma, q) = sum_{f=a}^{b} (f+q)^(-gamma), computed by exact
// compensated summation (the closed-form brackets live in harmonic_H_bounds).
template <class Scalar>
Scalar harmonic_H(Index a, Index b, Scalar gamma, Scalar q) {
  if (a < 1 || a > b) throw std::invalid_argument("harmonic_H: need 1 <= a <= b");
  KahanSum<Scalar> s;
  for (Index f = a; f <= b; ++f)
    s.add(std::pow(Scalar(f) + q, -gamma));
  return s.value();
}

// Closed-form bracket for H when gamma != 1:
//   [(b+q+1)^(1-g) - (a+q)^(1-g)]/(1-g)  <=  H  <=
//   [(b+q)^(1-g) - (a+q)^(1-g)]/(1-g) + (a+q)^(-g).
template <class Scalar>
std::pair<Scalar, Scalar> harmonic_H_bounds(Index a, Index b, Scalar gamma, Scalar q) {
  if (a < 1 || a > b) throw std::invalid_argument("harmonic_H_bounds: need 1 <= a <= b");
  if (gamma == Scalar(1))
    throw std::invalid_argument("harmonic_H_bounds: gamma = 1 not covered");
  const Scalar e = Scalar(1) - gamma;
  const Scalar lower = (std::pow(Scalar(b) + q + Scalar(1), e) - std::pow(Scalar(a) + q, e)) / e;
  const Scalar upper = (std::pow(Scalar(b) + q, e) - std::pow(Scalar(a) + q, e)) / e +
                       std::pow(Scalar(a) + q, -gamma);
  return {lower, upper};
}

// Bracket for sum_{f=1}^{F} log(f+q):
//   log(1+q) + (F+q)log(F+q) - F - (1+q)log(1+q) + 1  <=  sum  <=
//   (F+q+1)log(F+q+1) - F - (1+q)log(1+q).
template <class Scalar>
std::pair<Scalar, Scalar> log_sum_bounds(Index F, Scalar q) {
  if (F <= 1) throw std::invalid_argument("log_sum_bounds: F must be > 1");
  if (!(q >= Scalar(0))) throw std::invalid_argument("log_sum_bounds: q must be >= 0");
  const Scalar Fq = Scalar(F) + q;
  const Scalar oq = Scalar(1) + q;
  const Scalar upper = (Fq + Scalar(1)) * std::log(Fq + Scalar(1)) - Scalar(F) - oq * std::log(oq);
  const Scalar lower = std::log(oq) + Fq * std::log(Fq) - Scalar(F) - oq * std::log(oq) + Scalar(1);
  return {lower, upper};
}

// pmf entry f (1-based) is (f+q)^(-gamma) / H(1, M, gamma, q).
template <class Scalar>
Vec<Scalar> mzipf_pmf(const PopularityModel<Scalar>& model) {
  model.validate();
  Vec<Scalar> w(model.M);
  for (Index f = 0; f < model.M; ++f)
    w[f] = std::pow(Scalar(f + 1) + model.q, -model.gamma);
  // Normalize by the compensated sum rather than w.sum() so the unit-sum
  // invariant holds to ~1e-15 even for M in the 1e5 range.
  const Scalar h = harmonic_H(Index(1), model.M, model.gamma, model.q);
  return w / h;
}

// log pmf without the intermediate exp/log round-trip; the policy solvers
// work in this domain.
template <class Scalar>
Vec<Scalar> log_mzipf_pmf(const PopularityModel<Scalar>& model) {
  model.validate();
  const Scalar logH = std::log(harmonic_H(Index(1), model.M, model.gamma, model.q));
  Vec<Scalar> lp(model.M);
  for (Index f = 0; f < model.M; ++f)
    lp[f] = -model.gamma * std::log(Scalar(f + 1) + model.q) - logH;
  return lp;
}

// Draws file indices (1-based) with the exact pmf via a precomputed
// cumulative table; each draw is one binary search.
class RequestSampler {
 public:
  explicit RequestSampler(const VecD& pmf) : cum_(static_cast<std::size_t>(pmf.size())) {
    double acc = 0.0;
    for (Index f = 0; f < pmf.size(); ++f) {
      acc += pmf[f];
      cum_[static_cast<std::size_t>(f)] = acc;
    }
    if (!cum_.empty()) cum_.back() = 1.0;  // guard the final bin against rounding
  }

  explicit RequestSampler(const PopularityModelD& model)
      : RequestSampler(mzipf_pmf(model)) {}

  // File index in 1..M.
  Index sample(Rng& rng) const {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    const auto idx = static_cast<Index>(it - cum_.begin());
    return std::min<Index>(idx, static_cast<Index>(cum_.size()) - 1) + 1;
  }

  Index size() const { return static_cast<Index>(cum_.size()); }

 private:
  std::vector<double> cum_;
};

}  // namespace d2d
