#pragma once

// Experiment orchestration: parameter sweeps, theory-vs-simulation
// comparison tables, scaling-exponent fits, confidence intervals, CSV and
// JSON emission. Deterministic for a fixed master seed at any thread count.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "d2dcache/analytics.hpp"
#include "d2dcache/sim.hpp"

namespace d2d {

enum class ExperimentMode {
  outage_validation,   // outage-only trials vs the exact and regime formulas
  m_star_validation,   // closed-form vs KKT cutoff table (no simulation)
  tradeoff,            // full multi-hop simulation vs the theory curve
  single_hop_compare,  // multi-hop and single-hop baselines, same seeds
  scaling_fit          // tradeoff sweep plus a log-log exponent fit
};

enum class SweepKind {
  gc,       // sweep g_c directly
  rho,      // g_c = rho*M/(c1*S), c1 self-consistent in rho
  alpha1,   // g_c = alpha1*q/S (alpha1/S when q = 0)
  files_M,  // sweep M at fixed rho (fixed_param) and fixed q/M
  shift_q   // sweep q at fixed alpha1 (fixed_param) and fixed M
};

enum class PolicyMethod { closed_form, kkt };

const char* to_string(ExperimentMode m);
const char* to_string(SweepKind k);
const char* to_string(PolicyMethod p);
const char* to_string(SimMode m);
ExperimentMode experiment_mode_from_string(const std::string& s);
SweepKind sweep_kind_from_string(const std::string& s);
PolicyMethod policy_method_from_string(const std::string& s);
SimMode sim_mode_from_string(const std::string& s);

struct ExperimentConfig {
  PopularityModelD model{1000, 0.6, 100.0};  // base model (M, gamma, q)
  double S = 1;
  int K = 4;
  double c0 = 2.0;
  int clusters_per_side = 1;  // PPP mean N = g_c * clusters_per_side^2
  Index trials = 1000;
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0 = all hardware threads; affects scheduling only
  ExperimentMode mode = ExperimentMode::outage_validation;
  SweepKind sweep_kind = SweepKind::gc;
  std::vector<double> sweep;
  double fixed_param = 0;  // rho (files_M) or alpha1 (shift_q)
  SimMode sim_mode = SimMode::normalized;
  PolicyMethod policy_method = PolicyMethod::closed_form;
  double theta = 1.0;
  double pathloss_alpha = 4.0;
  double chi = 1.0;
  double noise = 0.0;
  double tx_power = 1.0;
  std::string csv_path;   // empty: CSV not written to disk
  std::string json_path;  // empty: derived from csv_path when that is set
  void validate() const;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SummaryRow {
  double sweep_value = kNaN;
  double gamma = kNaN, q = kNaN;
  Index M = 0;
  double S = kNaN, g_c = kNaN, N = kNaN;
  Index K_reuse = 0;
  Index trials = 0;
  double users_mean = kNaN;
  double outage_mean = kNaN, outage_lo = kNaN, outage_hi = kNaN;  // Wilson 95%
  double cluster_miss_mean = kNaN, cluster_miss_se = kNaN;
  double outage_exact = kNaN;  // exact formula at the realized policy
  double outage_expr = kNaN;   // regime limit expression
  bool expr_valid = false;     // finite-size validity of outage_expr
  double sym_mean = kNaN, sym_lo = kNaN, sym_hi = kNaN;  // normal 95%
  double single_mean = kNaN, single_lo = kNaN, single_hi = kNaN;
  double theory_throughput = kNaN;  // matches the reporting convention (sim_mode)
  double ratio_theory_over_sim = kNaN;
  double max_load_mean = kNaN, served_mean = kNaN, virtual_mean = kNaN;
  double infeasible_mean = kNaN;
  Index m_star_closed = 0, m_star_kkt = 0, m_star_pred = 0;
  double m_star_ratio = kNaN;  // closed form / KKT
};

struct ExperimentSummary {
  std::vector<SummaryRow> rows;
  ExperimentMode mode = ExperimentMode::outage_validation;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  double slope = kNaN, r2 = kNaN;  // scaling_fit only
  std::string csv_path, json_path;
};

// Executes the sweep. Writes CSV/JSON when paths are configured; the files
// are byte-identical across thread counts for a fixed master seed.
ExperimentSummary run_experiment(const ExperimentConfig& config);

// OLS slope of log T vs log x with its coefficient of determination.
std::pair<double, double> fit_scaling_exponent(
    const std::vector<std::pair<double, double>>& points);

struct MStarRow {
  double gamma = 0, q = 0;
  Index M = 0;
  double g_c = 0;
  Index m_closed = 0, m_kkt = 0, m_pred = 0;
  double ratio = kNaN;  // closed form / KKT
};

std::vector<MStarRow> m_star_report(const std::vector<PopularityModelD>& models,
                                    const std::vector<double>& gc_grid, double S);

struct Interval {
  double lo = 0, hi = 1;
};

// Wilson score 95% interval for a mean of n observations in [0,1]
// (conservative for non-Bernoulli observations by Var <= p(1-p)).
Interval wilson_interval(double successes, Index n);
// mean +- z * sd / sqrt(n).
Interval normal_interval(double mean, double sd, Index n);

// Serialization helpers shared with the CLI.
std::string summary_to_csv(const ExperimentSummary& summary);
std::string config_to_json(const ExperimentConfig& config, const ExperimentSummary* summary);
std::uint64_t config_fingerprint(const ExperimentConfig& config);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace d2d
