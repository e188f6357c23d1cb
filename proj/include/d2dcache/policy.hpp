#pragma once

// Outage-minimizing decentralized caching policies:
//   - optimal_policy_closed_form: water-filling in log popularity, cutoff m*,
//     multiplier nu (falls back to the exact solver if the cap binds);
//   - optimal_policy_kkt: exact box-constrained minimizer of
//     sum_f P_r(f) exp(-g_c P_c(f)) via bisection on the multiplier;
//   - outer_policy: minimizer of sum_f P_r(f) (1-P_c(f))^n_s (search over
//     n_s users' caches), the basis of the converse curves;
//   - solve_c1 and the regime constants C1, C2, rho, alpha1.

#include <cmath>
#include <limits>

#include "d2dcache/common.hpp"
#include "d2dcache/popularity.hpp"

namespace d2d {

template <class Scalar>
struct CachingPolicy {
  Vec<Scalar> probs;        // P_c(f), non-increasing, in [0,1]
  Scalar budget = 0;        // S = sum of probs
  Index m_star = 0;         // number of files with positive probability
  Scalar multiplier = 0;    // nu (closed form / outer) or zeta (KKT)
  bool kkt_fallback = false;  // closed form deferred to the exact solver
};

using CachingPolicyD = CachingPolicy<double>;

// Unique root C1 > 1 of h(x) = x - 1 - c2*log(1 + x/c2). h is strictly
// increasing (h' = (x/c2)/(1+x/c2) > 0) and h(1) < 0, so bisection on
// [1, 1 + c2*log(1+(1+2c2)/c2) + 2*sqrt(c2) + 2] converges.
template <class Scalar>
Scalar solve_c1(Scalar c2, Scalar tol = Scalar(1e-12)) {
  if (!(c2 > Scalar(0))) throw std::invalid_argument("solve_c1: c2 must be > 0");
  if (!(tol > Scalar(0))) throw std::invalid_argument("solve_c1: tol must be > 0");
  const auto h = [c2](Scalar x) { return x - Scalar(1) - c2 * std::log(Scalar(1) + x / c2); };
  Scalar lo = Scalar(1);
  Scalar hi = Scalar(1) + c2 * std::log(Scalar(1) + (Scalar(1) + Scalar(2) * c2) / c2) +
              Scalar(2) * std::sqrt(c2) + Scalar(2);
  while (h(hi) <= Scalar(0)) hi *= Scalar(2);  // defensive; analytic bracket suffices
  for (int it = 0; it < 200; ++it) {
    const Scalar mid = (lo + hi) / Scalar(2);
    if (h(mid) < Scalar(0))
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= tol && std::abs(h((lo + hi) / Scalar(2))) <= tol) break;
  }
  const Scalar root = (lo + hi) / Scalar(2);
  if (std::abs(h(root)) > Scalar(100) * tol)
    throw internal_error("solve_c1: bisection failed to meet tolerance");
  return root;
}

namespace detail {

// Exact minimizer from the log-pmf (non-increasing). Bisection runs on
// lam = log(zeta): P_c(f) = clamp((log g_c + logp(f) - lam)/g_c, 0, 1) and the
// budget sum is continuous, piecewise-linear, non-increasing in lam.
template <class Scalar>
CachingPolicy<Scalar> kkt_from_logpmf(const Vec<Scalar>& logp, Scalar g_c, Scalar S,
                                      Scalar tol) {
  const Index M = logp.size();
  if (!(g_c > Scalar(0))) throw std::invalid_argument("optimal_policy_kkt: g_c must be > 0");
  if (!(S > Scalar(0))) throw std::invalid_argument("optimal_policy_kkt: S must be > 0");
  if (S > Scalar(M)) throw std::invalid_argument("optimal_policy_kkt: infeasible, S > M");
  if (!(tol > Scalar(0))) throw std::invalid_argument("optimal_policy_kkt: tol must be > 0");

  const Scalar logg = std::log(g_c);
  const auto fill = [&](Scalar lam, Vec<Scalar>& p) -> Scalar {
    Scalar budget = 0;
    for (Index f = 0; f < M; ++f) {
      Scalar v = (logg + logp[f] - lam) / g_c;
      v = std::min(Scalar(1), std::max(Scalar(0), v));
      p[f] = v;
      budget += v;
    }
    return budget;
  };

  Vec<Scalar> probs(M);
  // lam_hi zeroes every entry; lam_lo saturates every entry at 1.
  Scalar hi = logg + logp[0];
  Scalar lo = logg + logp[M - 1] - g_c;
  for (int guard = 0; fill(lo, probs) < S && guard < 64; ++guard) lo -= g_c + Scalar(1);
  for (int guard = 0; fill(hi, probs) > S && guard < 64; ++guard) hi += g_c + Scalar(1);

  Scalar lam = hi, budget = fill(lam, probs);
  for (int it = 0; it < 200 && std::abs(budget - S) > tol; ++it) {
    const Scalar mid = (lo + hi) / Scalar(2);
    budget = fill(mid, probs);
    if (budget > S)
      lo = mid;
    else
      hi = mid;
    lam = mid;
  }
  budget = fill(lam, probs);
  if (std::abs(budget - S) > std::max(tol, Scalar(1e-9)) * std::max(Scalar(1), S))
    throw internal_error("optimal_policy_kkt: bisection did not meet the budget");

  CachingPolicy<Scalar> policy;
  policy.probs = std::move(probs);
  policy.budget = S;
  policy.multiplier = std::exp(lam);  // zeta
  policy.m_star = 0;
  for (Index f = 0; f < M; ++f)
    if (policy.probs[f] > Scalar(0)) policy.m_star = f + 1;

  // Stationarity: interior entries share the gradient value
  // g_c * P_r(f) * exp(-g_c * P_c(f)) = zeta.
  Scalar worst = 0;
  for (Index f = 0; f < M; ++f) {
    const Scalar p = policy.probs[f];
    if (p > Scalar(0) && p < Scalar(1)) {
      const Scalar grad = std::exp(logg + logp[f] - g_c * p);
      worst = std::max(worst, std::abs(grad - policy.multiplier));
    }
  }
  if (worst > Scalar(1e-8) * std::max(policy.multiplier, Scalar(1e-300)))
    throw internal_error("optimal_policy_kkt: stationarity residual too large");
  return policy;
}

template <class Scalar>
Vec<Scalar> log_of_pmf(const Vec<Scalar>& pmf) {
  Vec<Scalar> lp(pmf.size());
  for (Index f = 0; f < pmf.size(); ++f) {
    if (!(pmf[f] > Scalar(0)))
      throw std::invalid_argument("policy: pmf entries must be positive");
    lp[f] = std::log(pmf[f]);
  }
  return lp;
}

}  // namespace detail

template <class Scalar>
CachingPolicy<Scalar> optimal_policy_kkt(const PopularityModel<Scalar>& model, Scalar g_c,
                                         Scalar S, Scalar tol = Scalar(1e-10)) {
  return detail::kkt_from_logpmf(log_mzipf_pmf(model), g_c, S, tol);
}

// Overload for caller-supplied (non-increasing) pmfs.
template <class Scalar>
CachingPolicy<Scalar> optimal_policy_kkt_pmf(const Vec<Scalar>& pmf, Scalar g_c, Scalar S,
                                             Scalar tol = Scalar(1e-10)) {
  return detail::kkt_from_logpmf(detail::log_of_pmf(pmf), g_c, S, tol);
}

namespace detail {

// Water-filling closed form on a log-pmf. P_c(f) = [log z_f - log nu]^+ with
// z_f = P_r(f)^(1/g_c) and log nu = (sum_{f<=m*} log z_f - S)/m*; the cutoff
// m* is the unique m whose multiplier keeps entry m positive and entry m+1
// non-positive. If the top entry exceeds 1 the cap is active and the exact
// solver takes over (kkt_fallback flag).
template <class Scalar>
CachingPolicy<Scalar> closed_form_from_logpmf(const Vec<Scalar>& logp, Scalar g_c, Scalar S) {
  const Index M = logp.size();
  if (!(g_c > Scalar(0)))
    throw std::invalid_argument("optimal_policy_closed_form: g_c must be > 0");
  if (!(S > Scalar(0))) throw std::invalid_argument("optimal_policy_closed_form: S must be > 0");
  if (S > Scalar(M)) throw std::invalid_argument("optimal_policy_closed_form: infeasible, S > M");

  // Prefix sums of log z_f = logp(f)/g_c.
  Vec<Scalar> pref(M + 1);
  pref[0] = Scalar(0);
  KahanSum<Scalar> acc;
  for (Index f = 0; f < M; ++f) {
    acc.add(logp[f] / g_c);
    pref[f + 1] = acc.value();
  }

  Index m = 0;
  Scalar lognu = 0;
  for (Index cand = 1; cand <= M; ++cand) {
    const Scalar ln = (pref[cand] - S) / Scalar(cand);
    const bool pos_here = logp[cand - 1] / g_c - ln > Scalar(0);
    const bool zero_next = (cand == M) || (logp[cand] / g_c - ln <= Scalar(0));
    if (pos_here && zero_next) {
      m = cand;
      lognu = ln;
      break;
    }
  }
  if (m == 0)
    throw internal_error("optimal_policy_closed_form: cutoff scan found no water level");

  if (logp[0] / g_c - lognu > Scalar(1)) {
    // Cap active at finite parameters; defer to the exact solver.
    auto policy = kkt_from_logpmf(logp, g_c, S, Scalar(1e-10));
    policy.kkt_fallback = true;
    return policy;
  }

  CachingPolicy<Scalar> policy;
  policy.probs = Vec<Scalar>::Zero(M);
  for (Index f = 0; f < m; ++f)
    policy.probs[f] = std::max(Scalar(0), logp[f] / g_c - lognu);
  policy.budget = S;
  policy.m_star = m;
  policy.multiplier = std::exp(lognu);  // nu
  return policy;
}

}  // namespace detail

template <class Scalar>
CachingPolicy<Scalar> optimal_policy_closed_form(const PopularityModel<Scalar>& model,
                                                 Scalar g_c, Scalar S) {
  return detail::closed_form_from_logpmf(log_mzipf_pmf(model), g_c, S);
}

template <class Scalar>
CachingPolicy<Scalar> optimal_policy_closed_form_pmf(const Vec<Scalar>& pmf, Scalar g_c,
                                                     Scalar S) {
  return detail::closed_form_from_logpmf(detail::log_of_pmf(pmf), g_c, S);
}

// Order-accurate cutoff predictor round(min(C1*S*g_c/gamma, M)); compared
// against the exact solver's m*, never used inside it.
template <class Scalar>
Index m_star_theory(const PopularityModel<Scalar>& model, Scalar g_c, Scalar S) {
  model.validate();
  if (!(g_c > Scalar(0))) throw std::invalid_argument("m_star_theory: g_c must be > 0");
  if (!(S > Scalar(0))) throw std::invalid_argument("m_star_theory: S must be > 0");
  const Scalar c2 = model.q * model.gamma / (S * g_c);
  const Scalar c1 = c2 > Scalar(0) ? solve_c1(c2) : Scalar(1);
  const Scalar m = std::min(c1 * S * g_c / model.gamma, Scalar(model.M));
  const auto r = static_cast<Index>(std::llround(static_cast<double>(m)));
  return std::max<Index>(1, std::min<Index>(model.M, r));
}

// Minimizer of sum_f P_r(f) * (1 - P_c(f))^{n_s} under the budget S and box
// [0,1]: P_c(f) = [1 - nu/z_f]^+ with z_f = P_r(f)^(1/(n_s-1)) and
// nu = (m - S)/sum_{f<=m} 1/z_f at the cutoff m. The scan runs in a factored
// domain (running R_m = sum_{f<=m} exp(ell_f - ell_m), ell_f = -log P_r(f)/(n_s-1),
// so R_m in [1, m]) and never overflows.
template <class Scalar>
CachingPolicy<Scalar> outer_policy(const PopularityModel<Scalar>& model, Index n_s, Scalar S) {
  model.validate();
  if (n_s < 2) throw std::invalid_argument("outer_policy: n_s must be >= 2");
  if (!(S > Scalar(0))) throw std::invalid_argument("outer_policy: S must be > 0");
  if (!(S < Scalar(model.M))) throw std::invalid_argument("outer_policy: S must be < M");

  const Index M = model.M;
  const Vec<Scalar> logp = log_mzipf_pmf(model);
  Vec<Scalar> ell(M);
  for (Index f = 0; f < M; ++f) ell[f] = -logp[f] / Scalar(n_s - 1);  // non-decreasing

  Index m = 0;
  Scalar Rm = 0;
  Scalar R = 0;  // running R_cand
  for (Index cand = 1; cand <= M; ++cand) {
    R = (cand == 1) ? Scalar(1) : R * std::exp(ell[cand - 2] - ell[cand - 1]) + Scalar(1);
    if (Scalar(cand) - S <= Scalar(0)) continue;  // nu must be positive
    const bool pos_here = Scalar(cand) - S < R;
    const bool zero_next =
        (cand == M) || ((Scalar(cand) - S) * std::exp(ell[cand] - ell[cand - 1]) >= R);
    if (pos_here && zero_next) {
      m = cand;
      Rm = R;
      break;
    }
  }
  if (m == 0) throw internal_error("outer_policy: cutoff scan found no water level");

  CachingPolicy<Scalar> policy;
  policy.probs = Vec<Scalar>::Zero(M);
  const Scalar scale = (Scalar(m) - S) / Rm;  // = nu * exp(ell[m-1]) <= 1
  for (Index f = 0; f < m; ++f) {
    const Scalar v = Scalar(1) - scale * std::exp(ell[f] - ell[m - 1]);
    policy.probs[f] = std::max(Scalar(0), v);
    if (policy.probs[f] > Scalar(1))
      throw internal_error("outer_policy: cap violated");  // impossible: nu > 0
  }
  policy.budget = S;
  policy.m_star = m;
  policy.multiplier = scale * std::exp(-ell[m - 1]);  // nu
  return policy;
}

// Constants shared by the regime expressions and curve generators.
template <class Scalar>
struct RegimeParams {
  Scalar c1 = 1;      // root of c1 = 1 + c2*log(1 + c1/c2); 1 when q = 0
  Scalar c2 = 0;      // q*gamma/(S*g_c)
  Scalar g_c = 0;     // mean users per cluster
  Scalar rho = 0;     // g_c expressed as rho*M/(C1*S)
  Scalar alpha1 = 0;  // g_c expressed as alpha1*q/S (0 when q = 0)
  Scalar D = 0;       // q/M
};

template <class Scalar>
RegimeParams<Scalar> regime_params(const PopularityModel<Scalar>& model, Scalar S, Scalar g_c) {
  model.validate();
  if (!(g_c > Scalar(0))) throw std::invalid_argument("regime_params: g_c must be > 0");
  if (!(S > Scalar(0))) throw std::invalid_argument("regime_params: S must be > 0");
  RegimeParams<Scalar> r;
  r.g_c = g_c;
  r.D = model.q / Scalar(model.M);
  r.c2 = model.q * model.gamma / (S * g_c);
  r.c1 = r.c2 > Scalar(0) ? solve_c1(r.c2) : Scalar(1);
  r.rho = g_c * r.c1 * S / Scalar(model.M);
  r.alpha1 = model.q > Scalar(0) ? g_c * S / model.q : Scalar(0);
  return r;
}

// Self-consistent C1 when the cluster size is parameterized as
// g_c = rho*M/(C1*S) (so c2 = gamma*D*C1/rho appears on both sides):
// with kappa = gamma*D/rho, C1 = 1/(1 - kappa*log(1 + 1/kappa)).
template <class Scalar>
Scalar c1_for_rho(Scalar gamma, Scalar D, Scalar rho) {
  if (!(rho > Scalar(0))) throw std::invalid_argument("c1_for_rho: rho must be > 0");
  if (!(D >= Scalar(0))) throw std::invalid_argument("c1_for_rho: D must be >= 0");
  if (D == Scalar(0)) return Scalar(1);
  const Scalar kappa = gamma * D / rho;
  const Scalar denom = Scalar(1) - kappa * std::log1p(Scalar(1) / kappa);
  if (!(denom > Scalar(0))) throw internal_error("c1_for_rho: degenerate denominator");
  const Scalar c1 = Scalar(1) / denom;
  const Scalar c2 = kappa * c1;
  if (std::abs(c1 - Scalar(1) - c2 * std::log1p(c1 / c2)) > Scalar(1e-9) * c1)
    throw internal_error("c1_for_rho: fixed point residual too large");
  return c1;
}

}  // namespace d2d
