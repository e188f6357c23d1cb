#pragma once

// Closed-form outage probabilities, throughput-outage curves (achievable and
// outer bound) for the four (gamma, q) regimes, the n_s-cache miss
// probability with its gamma > 1 lower bound, and the Poisson tail bound.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "d2dcache/common.hpp"
#include "d2dcache/policy.hpp"
#include "d2dcache/popularity.hpp"

namespace d2d {

// Exact outage of a caching policy in a cluster with Poisson(g_c) users:
// p_o = sum_f P_r(f) * exp(-g_c * P_c(f)). The f-th term covers both the
// empty-cluster event and the all-users-missed event for file f.
template <class Scalar>
Scalar outage_exact(const PopularityModel<Scalar>& model, const CachingPolicy<Scalar>& policy,
                    Scalar g_c) {
  model.validate();
  if (!(g_c > Scalar(0))) throw std::invalid_argument("outage_exact: g_c must be > 0");
  if (policy.probs.size() != model.M)
    throw std::invalid_argument("outage_exact: policy length does not match M");
  const Vec<Scalar> logp = log_mzipf_pmf(model);
  KahanSum<Scalar> sum;
  for (Index f = 0; f < model.M; ++f)
    sum.add(std::exp(logp[f] - g_c * policy.probs[f]));
  return sum.value();
}

template <class Scalar>
Scalar outage_exact_pmf(const Vec<Scalar>& pmf, const Vec<Scalar>& probs, Scalar g_c) {
  if (!(g_c > Scalar(0))) throw std::invalid_argument("outage_exact: g_c must be > 0");
  if (pmf.size() != probs.size())
    throw std::invalid_argument("outage_exact: policy length does not match pmf");
  KahanSum<Scalar> sum;
  for (Index f = 0; f < pmf.size(); ++f) sum.add(pmf[f] * std::exp(-g_c * probs[f]));
  return sum.value();
}

// Upper bound on outage for 0 < gamma < 1, q = D*M:
//   (1-gamma) * e^{-(rho/c1 - gamma)} * D^{gamma*D} * (1+D)^{-gamma*(1+D)}
//     / ((1+D)^{1-gamma} - D^{1-gamma}),
// with the D = 0 limit defined by continuity (D^{gamma*D} -> 1). The
// correction factor is evaluated as exp(-gamma*(log1p(D) + D*log1p(1/D)))
// so small and large D are both stable.
template <class Scalar>
Scalar outage_upper_gamma_lt1(Scalar gamma, Scalar D, Scalar rho, Scalar c1) {
  if (!(gamma > Scalar(0)) || !(gamma < Scalar(1)))
    throw std::invalid_argument("outage_upper_gamma_lt1: requires 0 < gamma < 1");
  if (!(D >= Scalar(0))) throw std::invalid_argument("outage_upper_gamma_lt1: D must be >= 0");
  if (!(rho >= gamma))
    throw std::invalid_argument("outage_upper_gamma_lt1: requires rho >= gamma");
  if (!(c1 >= Scalar(1))) throw std::invalid_argument("outage_upper_gamma_lt1: c1 must be >= 1");
  Scalar corr = Scalar(1);
  Scalar den = Scalar(1);
  if (D > Scalar(0)) {
    corr = std::exp(-gamma * (std::log1p(D) + D * std::log1p(Scalar(1) / D)));
    den = std::pow(Scalar(1) + D, Scalar(1) - gamma) - std::pow(D, Scalar(1) - gamma);
  }
  return (Scalar(1) - gamma) * std::exp(-(rho / c1 - gamma)) * corr / den;
}

namespace detail {

template <class Scalar>
void check_c1_consistency(const char* who, Scalar gamma, Scalar c1, Scalar c2) {
  (void)gamma;
  if (c2 > Scalar(0)) {
    if (std::abs(c1 - Scalar(1) - c2 * std::log1p(c1 / c2)) > Scalar(1e-6) * std::max(Scalar(1), c1))
      throw std::invalid_argument(std::string(who) + ": c1 is not the root for this c2");
  } else if (c1 != Scalar(1)) {
    throw std::invalid_argument(std::string(who) + ": c1 must be 1 when c2 = 0");
  }
}

// A = (c1/(c1+c2))^gamma * (c2/(c1+c2))^{gamma*c2/c1}, with the c2 -> 0
// limit 1 (x log x -> 0).
template <class Scalar>
Scalar shape_factor(Scalar gamma, Scalar c1, Scalar c2) {
  if (c2 == Scalar(0)) return Scalar(1);
  return std::exp(gamma * std::log(c1 / (c1 + c2)) +
                  (gamma * c2 / c1) * std::log(c2 / (c1 + c2)));
}

}  // namespace detail

// General finite-size outage expression, valid for gamma != 1 whenever the
// cutoff stays interior, i.e. g_c < gamma*M/(c1*S):
//   p_o = 1 + (1-gamma) e^{-gamma(1/c1-1)} X^{1-gamma} A / den
//           - X^{1-gamma} ((1+c2/c1)^{1-gamma} - (c2/c1)^{1-gamma}) / den,
// X = c1*S*g_c/(gamma*M), Y = c2*S*g_c/(gamma*M) = q/M,
// den = (1+Y)^{1-gamma} - Y^{1-gamma}.
template <class Scalar>
Scalar outage_expr_general(Scalar gamma, Scalar c1, Scalar c2, Scalar gc_over_M, Scalar S) {
  if (!(gamma > Scalar(0)) || gamma == Scalar(1))
    throw std::invalid_argument("outage_expr_general: requires gamma > 0, gamma != 1");
  if (!(gc_over_M > Scalar(0)) || !(S > Scalar(0)))
    throw std::invalid_argument("outage_expr_general: g_c/M and S must be > 0");
  if (!(c2 >= Scalar(0)))
    throw std::invalid_argument("outage_expr_general: c2 must be >= 0");
  if (gamma > Scalar(1) && c2 == Scalar(0))
    throw std::invalid_argument("outage_expr_general: gamma > 1 requires c2 > 0");
  detail::check_c1_consistency("outage_expr_general", gamma, c1, c2);

  const Scalar X = c1 * S * gc_over_M / gamma;
  if (!(X < Scalar(1)))
    throw std::invalid_argument("outage_expr_general: requires g_c < gamma*M/(c1*S)");
  const Scalar Y = c2 * S * gc_over_M / gamma;  // = q/M
  const Scalar omg = Scalar(1) - gamma;
  const Scalar den = std::pow(Scalar(1) + Y, omg) - (Y > Scalar(0) ? std::pow(Y, omg) : Scalar(0));
  const Scalar A = detail::shape_factor(gamma, c1, c2);
  const Scalar Xp = std::pow(X, omg);
  const Scalar bracket =
      std::pow(Scalar(1) + c2 / c1, omg) - (c2 > Scalar(0) ? std::pow(c2 / c1, omg) : Scalar(0));
  return Scalar(1) + omg * std::exp(-gamma * (Scalar(1) / c1 - Scalar(1))) * Xp * A / den -
         Xp * bracket / den;
}

// gamma > 1 limit expression (g_c = o(M), q = o(M)), evaluated in the
// cancellation-free equivalent form
//   p_o = (c2/(c1+c2))^{gamma-1}
//       + (gamma-1) e^{-gamma(1/c1-1)} A (c2/c1)^{gamma-1}.
// Floating rounding may exit [0,1] by < 1e-12; the result is then clamped
// and *clamped (when provided) set. Larger excursions raise invalid-regime.
template <class Scalar>
Scalar outage_expr_gamma_gt1(Scalar gamma, Scalar c1, Scalar c2, bool* clamped = nullptr) {
  if (clamped) *clamped = false;
  if (!(gamma > Scalar(1)))
    throw std::invalid_argument("outage_expr_gamma_gt1: requires gamma > 1");
  if (!(c2 > Scalar(0)))
    throw std::invalid_argument("outage_expr_gamma_gt1: c2 must be > 0");
  detail::check_c1_consistency("outage_expr_gamma_gt1", gamma, c1, c2);
  const Scalar A = detail::shape_factor(gamma, c1, c2);
  const Scalar v = std::pow(c2 / (c1 + c2), gamma - Scalar(1)) +
                   (gamma - Scalar(1)) * std::exp(-gamma * (Scalar(1) / c1 - Scalar(1))) * A *
                       std::pow(c2 / c1, gamma - Scalar(1));
  if (v < Scalar(0) || v > Scalar(1)) {
    if (v < Scalar(-1e-12) || v > Scalar(1) + Scalar(1e-12))
      throw std::invalid_argument("outage_expr_gamma_gt1: value outside [0,1]; out of regime");
    if (clamped) *clamped = true;
    return std::min(Scalar(1), std::max(Scalar(0), v));
  }
  return v;
}

enum class Regime { gamma_lt1, gamma_gt1, zipf_lt1, zipf_gt1 };
enum class CurveKind { achievable, outer };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::gamma_lt1: return "gamma_lt1";
    case Regime::gamma_gt1: return "gamma_gt1";
    case Regime::zipf_lt1: return "zipf_lt1";
    case Regime::zipf_gt1: return "zipf_gt1";
  }
  return "?";
}

inline const char* to_string(CurveKind k) {
  return k == CurveKind::achievable ? "achievable" : "outer";
}

inline Regime regime_from_string(const std::string& s) {
  if (s == "gamma_lt1") return Regime::gamma_lt1;
  if (s == "gamma_gt1") return Regime::gamma_gt1;
  if (s == "zipf_lt1") return Regime::zipf_lt1;
  if (s == "zipf_gt1") return Regime::zipf_gt1;
  throw std::invalid_argument("unknown regime: " + s);
}

template <class Scalar>
struct CurvePoint {
  Scalar param = 0;  // swept parameter (rho or alpha1, per regime)
  Scalar throughput = 0;
  Scalar outage = 0;
};

template <class Scalar>
struct TheoryCurve {
  std::vector<CurvePoint<Scalar>> points;  // sorted by outage
  Regime regime = Regime::gamma_lt1;
  CurveKind kind = CurveKind::achievable;
  Scalar constant_convention = 1;  // hidden Theta/Omega constant
};

using TheoryCurveD = TheoryCurve<double>;

namespace detail {

template <class Scalar>
void require_regime(Regime regime, const PopularityModel<Scalar>& model) {
  model.validate();
  const bool zipf = regime == Regime::zipf_lt1 || regime == Regime::zipf_gt1;
  const bool lt1 = regime == Regime::gamma_lt1 || regime == Regime::zipf_lt1;
  if (zipf && model.q != Scalar(0))
    throw std::invalid_argument("curve: zipf regimes require q = 0");
  if (!zipf && !(model.q > Scalar(0)))
    throw std::invalid_argument("curve: heavy-shift regimes require q > 0");
  if (lt1 && !(model.gamma < Scalar(1)))
    throw std::invalid_argument("curve: regime requires gamma < 1");
  if (!lt1 && !(model.gamma > Scalar(1)))
    throw std::invalid_argument("curve: regime requires gamma > 1");
}

template <class Scalar>
void finalize_curve(TheoryCurve<Scalar>& curve) {
  for (const auto& p : curve.points) {
    if (!(p.outage >= Scalar(0) && p.outage <= Scalar(1)) || !std::isfinite(p.throughput) ||
        p.throughput < Scalar(0))
      throw std::invalid_argument("curve: point outside its regime (outage or throughput invalid)");
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const auto& a, const auto& b) { return a.outage < b.outage; });
}

}  // namespace detail

// Achievable throughput-outage curve. The sweep parameter is rho (cluster
// size g_c = rho*M/(c1*S)) in the gamma < 1 regimes and alpha1 (g_c =
// alpha1*q/S, or alpha1/S when q = 0) in the gamma > 1 regimes. Throughput
// is normalized per user; K is the reuse factor.
template <class Scalar>
TheoryCurve<Scalar> achievable_curve(Regime regime, const PopularityModel<Scalar>& model,
                                     Scalar S, int K, const std::vector<Scalar>& sweep) {
  detail::require_regime(regime, model);
  if (K < 1) throw std::invalid_argument("achievable_curve: K must be >= 1");
  if (!(S > Scalar(0))) throw std::invalid_argument("achievable_curve: S must be > 0");
  if (sweep.empty()) throw std::invalid_argument("achievable_curve: empty sweep");
  TheoryCurve<Scalar> curve;
  curve.regime = regime;
  curve.kind = CurveKind::achievable;
  const Scalar M = Scalar(model.M);
  const Scalar D = model.q / M;
  for (const Scalar s : sweep) {
    if (!(s > Scalar(0))) throw std::invalid_argument("achievable_curve: sweep values must be > 0");
    CurvePoint<Scalar> pt;
    pt.param = s;
    switch (regime) {
      case Regime::gamma_lt1: {
        const Scalar c1 = c1_for_rho(model.gamma, D, s);
        pt.outage = outage_upper_gamma_lt1(model.gamma, D, s, c1);
        pt.throughput = (Scalar(1) - pt.outage) / Scalar(K) * std::sqrt(c1 * S / (s * M));
        break;
      }
      case Regime::gamma_gt1: {
        const Scalar c2 = model.gamma / s;
        const Scalar c1 = solve_c1(c2);
        pt.outage = outage_expr_gamma_gt1(model.gamma, c1, c2);
        pt.throughput = (Scalar(1) - pt.outage) / Scalar(K) * std::sqrt(S / (s * model.q));
        break;
      }
      case Regime::zipf_lt1: {
        if (!(s >= model.gamma))
          throw std::invalid_argument("achievable_curve: zipf_lt1 sweep requires rho >= gamma");
        pt.outage = (Scalar(1) - model.gamma) * std::exp(-(s - model.gamma));
        pt.throughput = (Scalar(1) - pt.outage) / Scalar(K) * std::sqrt(S / (s * M));
        break;
      }
      case Regime::zipf_gt1: {
        pt.outage = std::pow(s, -(model.gamma - Scalar(1)));
        if (pt.outage > Scalar(1))
          throw std::invalid_argument("achievable_curve: zipf_gt1 sweep requires alpha1 >= 1");
        pt.throughput = (Scalar(1) - pt.outage) / Scalar(K) * std::sqrt(S / s);
        break;
      }
    }
    pt.throughput *= curve.constant_convention;
    curve.points.push_back(pt);
  }
  detail::finalize_curve(curve);
  return curve;
}

// Order-accurate outer (converse) curve under constant_convention = 1; no
// reuse penalty and no (1 - P_o) factor. Sweep parameter: rho' (gamma < 1
// regimes) or alpha1' (gamma > 1 regimes).
template <class Scalar>
TheoryCurve<Scalar> outer_curve(Regime regime, const PopularityModel<Scalar>& model, Scalar S,
                                const std::vector<Scalar>& sweep) {
  detail::require_regime(regime, model);
  if (!(S > Scalar(0))) throw std::invalid_argument("outer_curve: S must be > 0");
  if (sweep.empty()) throw std::invalid_argument("outer_curve: empty sweep");
  TheoryCurve<Scalar> curve;
  curve.regime = regime;
  curve.kind = CurveKind::outer;
  const Scalar M = Scalar(model.M);
  for (const Scalar s : sweep) {
    if (!(s > Scalar(0))) throw std::invalid_argument("outer_curve: sweep values must be > 0");
    CurvePoint<Scalar> pt;
    pt.param = s;
    switch (regime) {
      case Regime::gamma_lt1:
      case Regime::zipf_lt1:
        pt.outage = std::exp(-s);
        pt.throughput = std::sqrt(S / (s * M));
        break;
      case Regime::gamma_gt1:
        if (!(s >= Scalar(1)))
          throw std::invalid_argument("outer_curve: gamma_gt1 sweep requires alpha1 >= 1");
        pt.outage = std::pow(s, -(model.gamma - Scalar(1)));
        pt.throughput = std::sqrt(S / (s * model.q));
        break;
      case Regime::zipf_gt1:
        if (!(s >= Scalar(1)))
          throw std::invalid_argument("outer_curve: zipf_gt1 sweep requires alpha1 >= 1");
        pt.outage = std::pow(s, -(model.gamma - Scalar(1)));
        pt.throughput = std::sqrt(S / s);
        break;
    }
    pt.throughput *= curve.constant_convention;
    curve.points.push_back(pt);
  }
  detail::finalize_curve(curve);
  return curve;
}

// Miss probability when each user can reach n_s caches filled by the
// outer-bound policy: p_miss = sum_f P_r(f) (1 - P_c**(f))^{n_s}. When the
// cutoff m** equals M this telescopes to the closed form
//   (M - S)^{n_s} * (sum_f P_r(f)^{-1/(n_s-1)})^{-(n_s-1)},
// evaluated in the log domain.
template <class Scalar>
Scalar p_miss_exact(const PopularityModel<Scalar>& model, Index n_s, Scalar S) {
  model.validate();
  if (n_s < 2) throw std::invalid_argument("p_miss_exact: n_s must be >= 2");
  if (!(S > Scalar(0)) || !(S < Scalar(model.M)))
    throw std::invalid_argument("p_miss_exact: requires 0 < S < M");
  const auto policy = outer_policy(model, n_s, S);
  const Vec<Scalar> logp = log_mzipf_pmf(model);
  if (policy.m_star == model.M) {
    // logsumexp of (-1/(n_s-1)) * log P_r(f)
    Scalar mx = -std::numeric_limits<Scalar>::infinity();
    for (Index f = 0; f < model.M; ++f)
      mx = std::max(mx, -logp[f] / Scalar(n_s - 1));
    KahanSum<Scalar> se;
    for (Index f = 0; f < model.M; ++f)
      se.add(std::exp(-logp[f] / Scalar(n_s - 1) - mx));
    const Scalar lse = mx + std::log(se.value());
    return std::exp(Scalar(n_s) * std::log(Scalar(model.M) - S) - Scalar(n_s - 1) * lse);
  }
  KahanSum<Scalar> sum;
  for (Index f = 0; f < model.M; ++f) {
    const Scalar pc = policy.probs[f];
    sum.add(std::exp(logp[f] + Scalar(n_s) * std::log1p(-pc)));
  }
  return sum.value();
}

// Computable lower-bound line for p_miss when gamma > 1:
//   [ ((1+q)/(S*n_s+q))^{gamma-1} - ((1+q)/(M+q))^{gamma-1} ]
//     / [ 1 - ((1+q)/(M+q))^{gamma-1} ],
// floored at 0 (a valid lower bound either way).
template <class Scalar>
Scalar p_miss_lower_gamma_gt1(Scalar gamma, Scalar q, Index M, Scalar S, Index n_s) {
  if (!(gamma > Scalar(1)))
    throw std::invalid_argument("p_miss_lower_gamma_gt1: requires gamma > 1");
  if (M < 1 || n_s < 1 || !(S > Scalar(0)) || !(q >= Scalar(0)))
    throw std::invalid_argument("p_miss_lower_gamma_gt1: invalid parameters");
  const Scalar e = gamma - Scalar(1);
  const Scalar tail = std::pow((Scalar(1) + q) / (Scalar(M) + q), e);
  const Scalar head = std::pow((Scalar(1) + q) / (S * Scalar(n_s) + q), e);
  return std::max(Scalar(0), (head - tail) / (Scalar(1) - tail));
}

// Chernoff bound on the lower Poisson tail: P(n <= U) <= e^{-(N(1-1/e) - U)}
// for n ~ Poisson(N). Can exceed 1 when U is large; returned unclamped.
template <class Scalar>
Scalar poisson_tail_bound(Scalar N, Scalar U) {
  if (!(N > Scalar(0))) throw std::invalid_argument("poisson_tail_bound: N must be > 0");
  if (!(U >= Scalar(0))) throw std::invalid_argument("poisson_tail_bound: U must be >= 0");
  return std::exp(-(N * (Scalar(1) - std::exp(Scalar(-1))) - U));
}

}  // namespace d2d
