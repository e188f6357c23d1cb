#include "d2dcache/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace d2d {

namespace {
constexpr double kZ95 = 1.959963984540054;  // Phi^-1(0.975)
}

const char* to_string(ExperimentMode m) {
  switch (m) {
    case ExperimentMode::outage_validation: return "outage_validation";
    case ExperimentMode::m_star_validation: return "m_star_validation";
    case ExperimentMode::tradeoff: return "tradeoff";
    case ExperimentMode::single_hop_compare: return "single_hop_compare";
    case ExperimentMode::scaling_fit: return "scaling_fit";
  }
  return "?";
}

const char* to_string(SweepKind k) {
  switch (k) {
    case SweepKind::gc: return "gc";
    case SweepKind::rho: return "rho";
    case SweepKind::alpha1: return "alpha1";
    case SweepKind::files_M: return "M";
    case SweepKind::shift_q: return "q";
  }
  return "?";
}

const char* to_string(PolicyMethod p) {
  return p == PolicyMethod::closed_form ? "closed_form" : "kkt";
}

const char* to_string(SimMode m) { return m == SimMode::normalized ? "normalized" : "physical"; }

ExperimentMode experiment_mode_from_string(const std::string& s) {
  if (s == "outage_validation") return ExperimentMode::outage_validation;
  if (s == "m_star_validation") return ExperimentMode::m_star_validation;
  if (s == "tradeoff") return ExperimentMode::tradeoff;
  if (s == "single_hop_compare") return ExperimentMode::single_hop_compare;
  if (s == "scaling_fit") return ExperimentMode::scaling_fit;
  throw std::invalid_argument("unknown experiment mode: " + s);
}

SweepKind sweep_kind_from_string(const std::string& s) {
  if (s == "gc") return SweepKind::gc;
  if (s == "rho") return SweepKind::rho;
  if (s == "alpha1") return SweepKind::alpha1;
  if (s == "M") return SweepKind::files_M;
  if (s == "q") return SweepKind::shift_q;
  throw std::invalid_argument("unknown sweep kind: " + s);
}

PolicyMethod policy_method_from_string(const std::string& s) {
  if (s == "closed_form") return PolicyMethod::closed_form;
  if (s == "kkt") return PolicyMethod::kkt;
  throw std::invalid_argument("unknown policy method: " + s);
}

SimMode sim_mode_from_string(const std::string& s) {
  if (s == "normalized") return SimMode::normalized;
  if (s == "physical") return SimMode::physical;
  throw std::invalid_argument("unknown sim mode: " + s);
}

void ExperimentConfig::validate() const {
  model.validate();
  if (sweep.empty()) throw std::invalid_argument("config.sweep: must be non-empty");
  for (const double v : sweep)
    if (!(v > 0)) throw std::invalid_argument("config.sweep: values must be > 0");
  if (trials < 1) throw std::invalid_argument("config.trials: must be >= 1");
  if (!(S > 0)) throw std::invalid_argument("config.S: must be > 0");
  if (K < 1) throw std::invalid_argument("config.K: must be >= 1");
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(K))));
  if (r * r != K) throw std::invalid_argument("config.K: must be a perfect square");
  if (!(c0 > 1)) throw std::invalid_argument("config.c0: must be > 1");
  if (clusters_per_side < 1)
    throw std::invalid_argument("config.clusters_per_side: must be >= 1");
  if (threads < 0) throw std::invalid_argument("config.threads: must be >= 0");
  if (mode != ExperimentMode::m_star_validation &&
      std::abs(S - std::round(S)) > 1e-9)
    throw std::invalid_argument("config.S: simulation modes need an integer cache size");
  if ((sweep_kind == SweepKind::files_M || sweep_kind == SweepKind::shift_q) &&
      !(fixed_param > 0))
    throw std::invalid_argument(
        "config.fixed_param: M and q sweeps need the fixed rho/alpha1 value");
  if (sweep_kind == SweepKind::alpha1 || sweep_kind == SweepKind::shift_q) {
    // The alpha1 parameterization only exists in the gamma > 1 regime.
    if (!(model.gamma > 1))
      throw std::invalid_argument("config.sweep_kind: alpha1/q sweeps require gamma > 1");
  }
  if (sweep_kind == SweepKind::shift_q && !(model.q > 0))
    throw std::invalid_argument("config.sweep_kind: q sweep needs a q > 0 base model");
}

namespace {

void parallel_for(Index n, int threads, const std::function<void(Index)>& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers == 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

template <class Fn>
VecD column(const std::vector<TrialResult>& rs, Fn fn) {
  VecD out(static_cast<Index>(rs.size()));
  for (Index i = 0; i < out.size(); ++i) out[i] = fn(rs[i]);
  return out;
}

double mean_of(const VecD& v) { return pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size()); }

double sd_of(const VecD& v, double mean) {
  if (v.size() < 2) return 0.0;
  VecD sq = (v - mean).square();
  return std::sqrt(pairwise_sum(sq.data(), sq.size()) / static_cast<double>(v.size() - 1));
}

struct PointParams {
  PopularityModelD model;
  double g_c = 0;
};

PointParams point_params(const ExperimentConfig& cfg, double v) {
  PointParams pp;
  pp.model = cfg.model;
  switch (cfg.sweep_kind) {
    case SweepKind::gc:
      pp.g_c = v;
      break;
    case SweepKind::rho: {
      const double D = pp.model.q / static_cast<double>(pp.model.M);
      const double c1 = c1_for_rho(pp.model.gamma, D, v);
      pp.g_c = v * static_cast<double>(pp.model.M) / (c1 * cfg.S);
      break;
    }
    case SweepKind::alpha1:
      pp.g_c = pp.model.q > 0 ? v * pp.model.q / cfg.S : v / cfg.S;
      break;
    case SweepKind::files_M: {
      const double D = cfg.model.q / static_cast<double>(cfg.model.M);
      pp.model.M = static_cast<Index>(std::llround(v));
      pp.model.q = D * static_cast<double>(pp.model.M);
      const double c1 = c1_for_rho(pp.model.gamma, D, cfg.fixed_param);
      pp.g_c = cfg.fixed_param * static_cast<double>(pp.model.M) / (c1 * cfg.S);
      break;
    }
    case SweepKind::shift_q:
      pp.model.q = v;
      pp.g_c = cfg.fixed_param * v / cfg.S;
      break;
  }
  return pp;
}

struct TheoryPoint {
  double exact = kNaN;
  double expr = kNaN;
  bool valid = false;
  double throughput = kNaN;  // in the sim reporting convention
};

TheoryPoint theory_for_point(const ExperimentConfig& cfg, const PopularityModelD& model,
                             double g_c, const CachingPolicyD& policy) {
  TheoryPoint tp;
  tp.exact = outage_exact(model, policy, g_c);
  const double gamma = model.gamma;
  const double M = static_cast<double>(model.M);
  if (model.q > 0 && gamma != 1.0) {
    const auto rp = regime_params(model, cfg.S, g_c);
    if (gamma < 1) {
      if (rp.rho >= gamma) {
        tp.expr = outage_upper_gamma_lt1(gamma, rp.D, rp.rho, rp.c1);
        tp.valid = tp.expr <= 1.0;
      }
    } else {
      bool clamped = false;
      tp.expr = outage_expr_gamma_gt1(gamma, rp.c1, rp.c2, &clamped);
      // Finite-size validity: the limit expression is trusted where it agrees
      // with the general (non-asymptotic) expression to 2%.
      const double X = rp.c1 * cfg.S * (g_c / M) / gamma;
      if (X < 1) {
        const double general = outage_expr_general(gamma, rp.c1, rp.c2, g_c / M, cfg.S);
        tp.valid = general > 0 && std::abs(tp.expr - general) / general <= 0.02;
      }
    }
  } else if (model.q == 0 && gamma != 1.0) {
    if (gamma < 1) {
      const double rho = g_c * cfg.S / M;
      if (rho >= gamma) {
        tp.expr = (1 - gamma) * std::exp(-(rho - gamma));
        tp.valid = true;
      }
    } else {
      const double a = g_c * cfg.S;  // alpha1' in the q = Theta(1) convention
      if (a >= 1) {
        tp.expr = std::pow(a, -(gamma - 1));
        tp.valid = true;
      }
    }
  }
  if (std::isfinite(tp.expr) && tp.expr <= 1.0) {
    double t = (1.0 - tp.expr) / std::sqrt(g_c);
    if (cfg.sim_mode == SimMode::physical) t *= std::log2(1 + cfg.theta) / cfg.K;
    tp.throughput = t;
  }
  return tp;
}

void append_field(std::string& out, double v) {
  if (std::isfinite(v)) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out += buf;
  }
  out += ',';
}

void append_field(std::string& out, Index v) {
  out += std::to_string(static_cast<long long>(v));
  out += ',';
}

nlohmann::ordered_json config_json_body(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema"] = "d2dcache-experiment-v1";
  j["mode"] = to_string(cfg.mode);
  j["sweep_kind"] = to_string(cfg.sweep_kind);
  j["model"] = {{"M", cfg.model.M}, {"gamma", cfg.model.gamma}, {"q", cfg.model.q}};
  j["S"] = cfg.S;
  j["K"] = cfg.K;
  j["c0"] = cfg.c0;
  j["clusters_per_side"] = cfg.clusters_per_side;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["sweep"] = cfg.sweep;
  j["fixed_param"] = cfg.fixed_param;
  j["sim_mode"] = to_string(cfg.sim_mode);
  j["policy_method"] = to_string(cfg.policy_method);
  j["physical"] = {{"theta", cfg.theta},
                   {"pathloss_alpha", cfg.pathloss_alpha},
                   {"chi", cfg.chi},
                   {"noise", cfg.noise},
                   {"tx_power", cfg.tx_power}};
  return j;  // threads and output paths are reporting details, not identity
}

}  // namespace

Interval wilson_interval(double successes, Index n) {
  if (n < 1) throw std::invalid_argument("wilson_interval: n must be >= 1");
  const double nn = static_cast<double>(n);
  if (successes < 0 || successes > nn)
    throw std::invalid_argument("wilson_interval: successes out of [0, n]");
  const double p = successes / nn;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2 * nn)) / denom;
  const double half =
      kZ95 * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Interval normal_interval(double mean, double sd, Index n) {
  if (n < 1) throw std::invalid_argument("normal_interval: n must be >= 1");
  if (!(sd >= 0)) throw std::invalid_argument("normal_interval: sd must be >= 0");
  const double half = kZ95 * sd / std::sqrt(static_cast<double>(n));
  return {mean - half, mean + half};
}

std::pair<double, double> fit_scaling_exponent(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4)
    throw std::invalid_argument("fit_scaling_exponent: needs at least 4 points");
  const auto n = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (const auto& [x, t] : points) {
    if (!(x > 0) || !(t > 0))
      throw std::invalid_argument("fit_scaling_exponent: points must be positive");
    sx += std::log(x);
    sy += std::log(t);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, t] : points) {
    const double dx = std::log(x) - mx, dy = std::log(t) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0) throw std::invalid_argument("fit_scaling_exponent: degenerate abscissae");
  const double slope = sxy / sxx;
  const double ss_res = syy - slope * sxy;
  const double r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return {slope, r2};
}

std::vector<MStarRow> m_star_report(const std::vector<PopularityModelD>& models,
                                    const std::vector<double>& gc_grid, double S) {
  if (models.empty() || gc_grid.empty())
    throw std::invalid_argument("m_star_report: empty grid");
  std::vector<MStarRow> rows;
  rows.reserve(models.size() * gc_grid.size());
  for (const auto& model : models) {
    for (const double g_c : gc_grid) {
      MStarRow row;
      row.gamma = model.gamma;
      row.q = model.q;
      row.M = model.M;
      row.g_c = g_c;
      row.m_closed = optimal_policy_closed_form(model, g_c, S).m_star;
      row.m_kkt = optimal_policy_kkt(model, g_c, S).m_star;
      row.m_pred = m_star_theory(model, g_c, S);
      row.ratio = static_cast<double>(row.m_closed) / static_cast<double>(row.m_kkt);
      rows.push_back(row);
    }
  }
  return rows;
}

std::uint64_t config_fingerprint(const ExperimentConfig& config) {
  return fnv1a64(config_json_body(config).dump());
}

std::string config_to_json(const ExperimentConfig& config, const ExperimentSummary* summary) {
  nlohmann::ordered_json j = config_json_body(config);
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config_fingerprint(config)));
  j["config_hash"] = hex;
  if (summary) {
    if (std::isfinite(summary->slope)) {
      j["fit"] = {{"slope", summary->slope}, {"r2", summary->r2}};
    }
    j["rows"] = summary->rows.size();
  }
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::invalid_argument("failed writing: " + path);
}

std::string summary_to_csv(const ExperimentSummary& summary) {
  std::string out =
      "mode,sweep_value,gamma,q,M,S,g_c,N,K,trials,users_mean,"
      "outage_mean,outage_lo,outage_hi,cluster_miss_mean,cluster_miss_se,"
      "outage_exact,outage_expr,expr_valid,sym_mean,sym_lo,sym_hi,"
      "single_mean,single_lo,single_hi,theory_throughput,ratio_theory_over_sim,"
      "max_load_mean,served_mean,virtual_mean,infeasible_mean,"
      "m_star_closed,m_star_kkt,m_star_pred,m_star_ratio\n";
  for (const auto& r : summary.rows) {
    out += to_string(summary.mode);
    out += ',';
    append_field(out, r.sweep_value);
    append_field(out, r.gamma);
    append_field(out, r.q);
    append_field(out, r.M);
    append_field(out, r.S);
    append_field(out, r.g_c);
    append_field(out, r.N);
    append_field(out, r.K_reuse);
    append_field(out, r.trials);
    append_field(out, r.users_mean);
    append_field(out, r.outage_mean);
    append_field(out, r.outage_lo);
    append_field(out, r.outage_hi);
    append_field(out, r.cluster_miss_mean);
    append_field(out, r.cluster_miss_se);
    append_field(out, r.outage_exact);
    append_field(out, r.outage_expr);
    out += r.expr_valid ? "1," : "0,";
    append_field(out, r.sym_mean);
    append_field(out, r.sym_lo);
    append_field(out, r.sym_hi);
    append_field(out, r.single_mean);
    append_field(out, r.single_lo);
    append_field(out, r.single_hi);
    append_field(out, r.theory_throughput);
    append_field(out, r.ratio_theory_over_sim);
    append_field(out, r.max_load_mean);
    append_field(out, r.served_mean);
    append_field(out, r.virtual_mean);
    append_field(out, r.infeasible_mean);
    append_field(out, r.m_star_closed);
    append_field(out, r.m_star_kkt);
    append_field(out, r.m_star_pred);
    char buf[40];
    if (std::isfinite(r.m_star_ratio)) {
      std::snprintf(buf, sizeof(buf), "%.12g", r.m_star_ratio);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentSummary summary;
  summary.mode = config.mode;
  summary.master_seed = config.master_seed;
  summary.config_hash = config_fingerprint(config);

  const bool simulated = config.mode != ExperimentMode::m_star_validation;
  const bool compare = config.mode == ExperimentMode::single_hop_compare;
  const bool outage_only = config.mode == ExperimentMode::outage_validation;

  for (std::size_t i = 0; i < config.sweep.size(); ++i) {
    const auto pp = point_params(config, config.sweep[i]);
    pp.model.validate();
    SummaryRow row;
    row.sweep_value = config.sweep[i];
    row.gamma = pp.model.gamma;
    row.q = pp.model.q;
    row.M = pp.model.M;
    row.S = config.S;
    row.g_c = pp.g_c;
    row.K_reuse = config.K;

    CachingPolicyD closed = optimal_policy_closed_form(pp.model, pp.g_c, config.S);
    CachingPolicyD kkt = optimal_policy_kkt(pp.model, pp.g_c, config.S);
    const CachingPolicyD& policy =
        config.policy_method == PolicyMethod::closed_form ? closed : kkt;
    row.m_star_closed = closed.m_star;
    row.m_star_kkt = kkt.m_star;
    row.m_star_pred = m_star_theory(pp.model, pp.g_c, config.S);
    row.m_star_ratio =
        static_cast<double>(row.m_star_closed) / static_cast<double>(row.m_star_kkt);

    const TheoryPoint tp = theory_for_point(config, pp.model, pp.g_c, policy);
    row.outage_exact = tp.exact;
    row.outage_expr = tp.expr;
    row.expr_valid = tp.valid;
    row.theory_throughput = tp.throughput;

    if (simulated) {
      ClusterConfig cc;
      cc.g_c = pp.g_c;
      cc.N = pp.g_c * static_cast<double>(config.clusters_per_side) *
             static_cast<double>(config.clusters_per_side);
      cc.K = config.K;
      cc.c0 = config.c0;
      cc.mode = config.sim_mode;
      cc.theta = config.theta;
      cc.pathloss_alpha = config.pathloss_alpha;
      cc.chi = config.chi;
      cc.noise = config.noise;
      cc.tx_power = config.tx_power;
      row.N = cc.N;
      row.trials = config.trials;

      const TrialContext ctx(pp.model, policy, cc, static_cast<Index>(std::llround(config.S)));
      std::vector<TrialResult> multi(config.trials);
      std::vector<TrialResult> single(compare ? config.trials : 0);
      parallel_for(config.trials, config.threads, [&](Index t) {
        const std::uint64_t seed = derive_seed(config.master_seed, i, t);
        multi[t] = outage_only ? ctx.run_outage_only(seed) : ctx.run_multi_hop(seed);
        if (compare) single[t] = ctx.run_single_hop(seed);
      });

      const Index n = config.trials;
      const VecD users = column(multi, [](const TrialResult& r) { return double(r.user_count); });
      row.users_mean = mean_of(users);
      const VecD outage = column(multi, [](const TrialResult& r) { return r.outage_fraction; });
      row.outage_mean = mean_of(outage);
      const Interval wi = wilson_interval(pairwise_sum(outage.data(), outage.size()), n);
      row.outage_lo = wi.lo;
      row.outage_hi = wi.hi;
      const VecD miss = column(multi, [](const TrialResult& r) { return r.cluster_miss_mean; });
      row.cluster_miss_mean = mean_of(miss);
      row.cluster_miss_se = sd_of(miss, row.cluster_miss_mean) / std::sqrt(double(n));
      const VecD served = column(multi, [](const TrialResult& r) { return double(r.served_users); });
      row.served_mean = mean_of(served);
      const VecD virt = column(multi, [](const TrialResult& r) { return double(r.virtual_flows); });
      row.virtual_mean = mean_of(virt);

      if (!outage_only) {
        const VecD sym = column(multi, [](const TrialResult& r) { return r.sym_throughput; });
        row.sym_mean = mean_of(sym);
        const Interval si = normal_interval(row.sym_mean, sd_of(sym, row.sym_mean), n);
        row.sym_lo = si.lo;
        row.sym_hi = si.hi;
        const VecD load = column(multi, [](const TrialResult& r) { return double(r.max_load); });
        row.max_load_mean = mean_of(load);
        if (config.sim_mode == SimMode::physical) {
          const VecD inf =
              column(multi, [](const TrialResult& r) { return r.infeasible_hop_fraction; });
          row.infeasible_mean = mean_of(inf);
        }
        if (std::isfinite(row.theory_throughput) && row.sym_mean > 0)
          row.ratio_theory_over_sim = row.theory_throughput / row.sym_mean;
      }
      if (compare) {
        const VecD sh = column(single, [](const TrialResult& r) { return r.sym_throughput; });
        row.single_mean = mean_of(sh);
        const Interval sc = normal_interval(row.single_mean, sd_of(sh, row.single_mean), n);
        row.single_lo = sc.lo;
        row.single_hi = sc.hi;
      }
    }
    summary.rows.push_back(row);
  }

  if (config.mode == ExperimentMode::scaling_fit) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : summary.rows)
      if (std::isfinite(r.sym_mean) && r.sym_mean > 0) pts.emplace_back(r.sweep_value, r.sym_mean);
    const auto [slope, r2] = fit_scaling_exponent(pts);
    summary.slope = slope;
    summary.r2 = r2;
  }

  if (!config.csv_path.empty()) {
    summary.csv_path = config.csv_path;
    write_text_file(config.csv_path, summary_to_csv(summary));
    summary.json_path =
        config.json_path.empty() ? config.csv_path + ".json" : config.json_path;
    write_text_file(summary.json_path, config_to_json(config, &summary));
  } else if (!config.json_path.empty()) {
    summary.json_path = config.json_path;
    write_text_file(summary.json_path, config_to_json(config, &summary));
  }
  return summary;
}

}  // namespace d2d
