#include "d2dcache/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "d2dcache/analytics.hpp"
#include "d2dcache/harness.hpp"

namespace d2d {
namespace {

// ---------------------------------------------------------------------------
// Key/value configuration layer. Every tunable is a `key=value` entry; a
// config file supplies a flat table of them, `--set key=value` overrides the
// file, and dedicated flags (--gamma, --trials, ...) override both.
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::pair<std::string, std::string> split_kv(const std::string& entry,
                                             const std::string& origin) {
  const auto eq = entry.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument(origin + ": expected key=value, got '" + entry + "'");
  const std::string key = trim(entry.substr(0, eq));
  const std::string value = trim(entry.substr(eq + 1));
  if (key.empty()) throw std::invalid_argument(origin + ": empty key in '" + entry + "'");
  return {key, value};
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto [key, value] =
        split_kv(line, path + ":" + std::to_string(lineno));
    out[key] = value;  // later lines win
  }
  return out;
}

double parse_num(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw std::invalid_argument("key '" + key + "': not a number: '" + value + "'");
  return v;
}

struct KeyedArgs {
  std::string subcommand;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::string str(const std::string& key, const std::string& def) const {
    const auto it = values.find(key);
    return it == values.end() ? def : it->second;
  }

  double num(const std::string& key, double def) const {
    const auto it = values.find(key);
    return it == values.end() ? def : parse_num(key, it->second);
  }

  double require_num(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end())
      throw std::invalid_argument(subcommand + ": missing required key '" + key + "'");
    return parse_num(key, it->second);
  }

  Index idx(const std::string& key, Index def) const {
    const double v = num(key, static_cast<double>(def));
    const auto r = static_cast<Index>(std::llround(v));
    if (std::abs(v - static_cast<double>(r)) > 1e-9)
      throw std::invalid_argument("key '" + key + "': expected an integer");
    return r;
  }

  std::vector<double> list(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end())
      throw std::invalid_argument(subcommand + ": missing required key '" + key + "'");
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) out.push_back(parse_num(key, tok));
    }
    if (out.empty())
      throw std::invalid_argument("key '" + key + "': expected a comma-separated list");
    return out;
  }
};

const std::map<std::string, const char*>& key_help() {
  static const std::map<std::string, const char*> table = {
      {"gamma", "MZipf tail exponent gamma > 0"},
      {"q", "MZipf plateau factor q >= 0"},
      {"M", "library size (number of files)"},
      {"S", "per-user cache slots"},
      {"gc", "mean users per cluster g_c"},
      {"K", "TDMA reuse factor (perfect square, default 4)"},
      {"c0", "squarelet sizing constant > 1 (default 2)"},
      {"clusters_per_side", "grid side in clusters; PPP mean N = gc*side^2 (default 1)"},
      {"trials", "Monte Carlo trials per sweep point"},
      {"seed", "master RNG seed (default 1)"},
      {"threads", "worker threads, 0 = all cores (default 0)"},
      {"mode", "outage_validation|m_star_validation|tradeoff|single_hop_compare|scaling_fit"},
      {"sweep_kind", "swept parameter: gc|rho|alpha1|M|q"},
      {"sweep", "comma-separated sweep values"},
      {"fixed_param", "fixed rho (M sweep) or alpha1 (q sweep)"},
      {"sim_mode", "normalized|physical (default normalized)"},
      {"policy_method", "closed_form|kkt (default closed_form)"},
      {"theta", "SINR threshold (physical mode, default 1)"},
      {"pathloss_alpha", "path-loss exponent > 2 (default 4)"},
      {"chi", "propagation constant (default 1)"},
      {"noise", "noise power N0 (default 0)"},
      {"tx_power", "transmit power (default 1)"},
      {"out", "output CSV path (relative paths land in $D2DCACHE_OUT_DIR)"},
      {"json_out", "run-summary JSON path (default: <out>.json)"},
      {"method", "policy method: closed_form|kkt (default closed_form)"},
      {"n_s", "users per cluster for the pooled-cache outer policy (>= 2)"},
      {"D", "plateau ratio q/M (default 0)"},
      {"rho", "cache-to-demand ratio rho = c1*S*gc/M"},
      {"rho_mult", "rho as a multiple of the self-consistent c1"},
      {"alpha1", "alpha1 = gc*S/q (gamma > 1 convention)"},
      {"regime", "gamma_lt1|gamma_gt1|zipf_lt1|zipf_gt1"},
      {"kind", "curve kind: achievable|outer (default achievable)"},
      {"figure", "validation preset: 3 (m*), 4 (outage), 5 (ratio), 6 (multi vs single hop)"},
      {"scenario", "preset 6 scenario: 1|2 (default 1)"},
  };
  return table;
}

std::string flag_for(const std::string& key) {
  std::string f = "--" + key;
  for (auto& c : f)
    if (c == '_') c = '-';
  return f;
}

struct SubCtx {
  SubCtx(CLI::App* s, std::string n) : sub(s), name(std::move(n)) {}

  CLI::App* sub = nullptr;
  std::string name;
  std::set<std::string> allowed;
  std::map<std::string, std::string> flag_vals;
  std::string config_path;
  std::vector<std::string> sets;

  KeyedArgs finalize() const {
    KeyedArgs ka;
    ka.subcommand = name;
    if (!config_path.empty()) ka.values = parse_kv_file(config_path);
    for (const auto& s : sets) {
      const auto [k, v] = split_kv(s, "--set");
      ka.values[k] = v;
    }
    for (const auto& [k, v] : flag_vals) ka.values[k] = v;
    for (const auto& [k, v] : ka.values)
      if (!allowed.count(k))
        throw std::invalid_argument(name + ": unknown config key '" + k + "'");
    return ka;
  }
};

void register_keys(SubCtx& ctx, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    const std::string k(key);
    ctx.allowed.insert(k);
    ctx.sub->add_option_function<std::string>(
        flag_for(k), [&ctx, k](const std::string& v) { ctx.flag_vals[k] = v; },
        key_help().at(k));
  }
  ctx.sub->add_option("--config", ctx.config_path,
                      "flat key=value config file (# comments); flags override it");
  ctx.sub->add_option("--set", ctx.sets, "extra key=value override (repeatable)");
}

std::string resolve_out(const KeyedArgs& ka, const std::string& default_name) {
  namespace fs = std::filesystem;
  fs::path p(ka.str("out", default_name));
  if (p.is_relative()) {
    const char* dir = std::getenv("D2DCACHE_OUT_DIR");
    if (dir && *dir) p = fs::path(dir) / p;
  }
  return p.string();
}

std::string fmt(double v, const char* spec = "%.12g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void csv_cell(std::string& out, double v) {
  if (std::isfinite(v)) out += fmt(v);
  out += ',';
}

PopularityModelD model_from(const KeyedArgs& ka) {
  return PopularityModelD{ka.idx("M", 1000), ka.num("gamma", 0.6), ka.num("q", 0.0)};
}

void overlay_experiment_keys(const KeyedArgs& ka, ExperimentConfig& cfg) {
  if (ka.has("gamma")) cfg.model.gamma = ka.require_num("gamma");
  if (ka.has("q")) cfg.model.q = ka.require_num("q");
  if (ka.has("M")) cfg.model.M = ka.idx("M", cfg.model.M);
  if (ka.has("S")) cfg.S = ka.require_num("S");
  if (ka.has("K")) cfg.K = static_cast<int>(ka.idx("K", cfg.K));
  if (ka.has("c0")) cfg.c0 = ka.require_num("c0");
  if (ka.has("clusters_per_side"))
    cfg.clusters_per_side = static_cast<int>(ka.idx("clusters_per_side", cfg.clusters_per_side));
  if (ka.has("trials")) cfg.trials = ka.idx("trials", cfg.trials);
  if (ka.has("seed")) cfg.master_seed = static_cast<std::uint64_t>(ka.idx("seed", 1));
  if (ka.has("threads")) cfg.threads = static_cast<int>(ka.idx("threads", 0));
  if (ka.has("sim_mode")) cfg.sim_mode = sim_mode_from_string(ka.str("sim_mode", ""));
  if (ka.has("policy_method"))
    cfg.policy_method = policy_method_from_string(ka.str("policy_method", ""));
  if (ka.has("theta")) cfg.theta = ka.require_num("theta");
  if (ka.has("pathloss_alpha")) cfg.pathloss_alpha = ka.require_num("pathloss_alpha");
  if (ka.has("chi")) cfg.chi = ka.require_num("chi");
  if (ka.has("noise")) cfg.noise = ka.require_num("noise");
  if (ka.has("tx_power")) cfg.tx_power = ka.require_num("tx_power");
}

void attach_outputs(const KeyedArgs& ka, ExperimentConfig& cfg,
                    const std::string& default_name) {
  cfg.csv_path = resolve_out(ka, default_name);
  if (ka.has("json_out")) cfg.json_path = ka.str("json_out", "");
}

// ---------------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------------

int run_policy(const KeyedArgs& ka) {
  const PopularityModelD model = model_from(ka);
  const double S = ka.num("S", 1.0);
  CachingPolicyD pol;
  std::string method = ka.str("method", "closed_form");
  if (ka.has("n_s")) {
    const Index n_s = ka.idx("n_s", 0);
    pol = outer_policy(model, n_s, S);
    method = "outer(n_s=" + std::to_string(n_s) + ")";
  } else {
    const double g_c = ka.require_num("gc");
    if (method == "closed_form")
      pol = optimal_policy_closed_form(model, g_c, S);
    else if (method == "kkt")
      pol = optimal_policy_kkt(model, g_c, S);
    else
      throw std::invalid_argument("key 'method': expected closed_form|kkt, got '" + method + "'");
  }
  std::string csv = "f,p_c,m_star,nu,kkt_fallback\n";
  const std::string tail = "," + std::to_string(static_cast<long long>(pol.m_star)) + "," +
                           fmt(pol.multiplier, "%.17g") + "," +
                           (pol.kkt_fallback ? "1" : "0") + "\n";
  for (Index f = 0; f < model.M; ++f)
    csv += std::to_string(static_cast<long long>(f + 1)) + "," + fmt(pol.probs[f], "%.17g") + tail;
  const std::string path = resolve_out(ka, "policy.csv");
  write_text_file(path, csv);
  std::cout << "policy method=" << method << " M=" << model.M << " gamma=" << model.gamma
            << " q=" << model.q << " S=" << S << " m_star=" << pol.m_star
            << " nu=" << fmt(pol.multiplier, "%.17g")
            << " kkt_fallback=" << (pol.kkt_fallback ? 1 : 0) << "\n"
            << "wrote " << path << "\n";
  return 0;
}

int run_outage(const KeyedArgs& ka) {
  const double gamma = ka.require_num("gamma");
  double D = kNaN, rho = kNaN, rho_mult = kNaN, alpha1 = kNaN, c1 = kNaN, c2 = kNaN;
  double value = kNaN;
  if (gamma < 1) {
    D = ka.num("D", 0.0);
    if (ka.has("rho_mult") == ka.has("rho"))
      throw std::invalid_argument("outage: gamma < 1 needs exactly one of 'rho' or 'rho_mult'");
    if (ka.has("rho_mult")) {
      rho_mult = ka.require_num("rho_mult");
      if (!(rho_mult > 0)) throw std::invalid_argument("key 'rho_mult': must be > 0");
      c1 = D > 0 ? solve_c1(gamma * D / rho_mult) : 1.0;
      rho = rho_mult * c1;
    } else {
      rho = ka.require_num("rho");
      c1 = c1_for_rho(gamma, D, rho);
    }
    value = outage_upper_gamma_lt1(gamma, D, rho, c1);
  } else if (gamma > 1) {
    alpha1 = ka.require_num("alpha1");
    if (!(alpha1 > 0)) throw std::invalid_argument("key 'alpha1': must be > 0");
    c2 = gamma / alpha1;
    c1 = solve_c1(c2);
    value = outage_expr_gamma_gt1(gamma, c1, c2);
  } else {
    throw std::invalid_argument("outage: gamma = 1 has no regime expression");
  }
  std::string csv = "gamma,D,rho,rho_mult,alpha1,c1,c2,outage\n";
  csv_cell(csv, gamma);
  csv_cell(csv, D);
  csv_cell(csv, rho);
  csv_cell(csv, rho_mult);
  csv_cell(csv, alpha1);
  csv_cell(csv, c1);
  csv_cell(csv, c2);
  csv += fmt(value, "%.17g");
  csv += '\n';
  const std::string path = resolve_out(ka, "outage.csv");
  write_text_file(path, csv);
  std::cout << "outage = " << fmt(value, "%.17g") << " (c1=" << fmt(c1, "%.17g") << ")\n"
            << "wrote " << path << "\n";
  return 0;
}

int run_tradeoff(const KeyedArgs& ka) {
  const Regime regime = regime_from_string(ka.str("regime", ""));
  const std::string kind = ka.str("kind", "achievable");
  PopularityModelD model = model_from(ka);
  if (!ka.has("q") && (regime == Regime::zipf_lt1 || regime == Regime::zipf_gt1))
    model.q = 0;
  const double S = ka.num("S", 1.0);
  const int K = static_cast<int>(ka.idx("K", 4));
  const std::vector<double> sweep = ka.list("sweep");
  TheoryCurveD curve;
  if (kind == "achievable")
    curve = achievable_curve(regime, model, S, K, sweep);
  else if (kind == "outer")
    curve = outer_curve(regime, model, S, sweep);
  else
    throw std::invalid_argument("key 'kind': expected achievable|outer, got '" + kind + "'");
  std::string csv = "param,throughput,outage\n";
  for (const auto& p : curve.points) {
    csv += fmt(p.param, "%.17g");
    csv += ',';
    csv += fmt(p.throughput, "%.17g");
    csv += ',';
    csv += fmt(p.outage, "%.17g");
    csv += '\n';
  }
  const std::string path = resolve_out(ka, "tradeoff.csv");
  write_text_file(path, csv);
  std::cout << "tradeoff regime=" << to_string(regime) << " kind=" << kind
            << " points=" << curve.points.size() << "\n"
            << "wrote " << path << "\n";
  return 0;
}

void print_rows_brief(const ExperimentSummary& summary) {
  for (const auto& r : summary.rows) {
    std::cout << "  sweep=" << fmt(r.sweep_value) << " gc=" << fmt(r.g_c)
              << " outage=" << fmt(r.outage_mean) << " [" << fmt(r.outage_lo) << ","
              << fmt(r.outage_hi) << "] exact=" << fmt(r.outage_exact);
    if (std::isfinite(r.outage_expr))
      std::cout << " expr=" << fmt(r.outage_expr) << (r.expr_valid ? "" : " (out of regime)");
    if (std::isfinite(r.sym_mean)) std::cout << " sym=" << fmt(r.sym_mean);
    if (std::isfinite(r.single_mean)) std::cout << " single=" << fmt(r.single_mean);
    if (std::isfinite(r.ratio_theory_over_sim))
      std::cout << " ratio=" << fmt(r.ratio_theory_over_sim);
    std::cout << "\n";
  }
}

int run_simulate(const KeyedArgs& ka) {
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::tradeoff;
  cfg.sweep_kind = SweepKind::gc;
  cfg.sweep = {ka.require_num("gc")};
  overlay_experiment_keys(ka, cfg);
  attach_outputs(ka, cfg, "simulate.csv");
  const ExperimentSummary summary = run_experiment(cfg);
  std::cout << "simulate trials=" << cfg.trials << " seed=" << cfg.master_seed << "\n";
  print_rows_brief(summary);
  std::cout << "wrote " << summary.csv_path << "\n";
  return 0;
}

int run_sweep(const KeyedArgs& ka) {
  ExperimentConfig cfg;
  cfg.mode = experiment_mode_from_string(ka.str("mode", "tradeoff"));
  cfg.sweep_kind = sweep_kind_from_string(ka.str("sweep_kind", "gc"));
  cfg.sweep = ka.list("sweep");
  cfg.fixed_param = ka.num("fixed_param", 0.0);
  overlay_experiment_keys(ka, cfg);
  attach_outputs(ka, cfg, "sweep.csv");
  const ExperimentSummary summary = run_experiment(cfg);
  std::cout << "sweep mode=" << to_string(cfg.mode) << " kind=" << to_string(cfg.sweep_kind)
            << " points=" << summary.rows.size() << " trials=" << cfg.trials << "\n";
  print_rows_brief(summary);
  if (std::isfinite(summary.slope))
    std::cout << "fit slope=" << fmt(summary.slope) << " r2=" << fmt(summary.r2) << "\n";
  std::cout << "wrote " << summary.csv_path << "\n";
  return 0;
}

ExperimentConfig validate_preset(const KeyedArgs& ka) {
  const Index figure = ka.idx("figure", 0);
  ExperimentConfig cfg;
  const double gamma = ka.num("gamma", 0.6);
  switch (figure) {
    case 3:
      cfg.mode = ExperimentMode::m_star_validation;
      if (gamma < 1) {
        cfg.model = {5000, gamma, 500.0};
        cfg.sweep = {25, 50, 100, 200, 400, 800, 1600, 3200};
      } else {
        cfg.model = {1000, gamma, 50.0};
        cfg.sweep = {30, 60, 120, 240, 480, 960, 1920, 3840};
      }
      break;
    case 4:
      cfg.mode = ExperimentMode::outage_validation;
      cfg.trials = 10000;
      cfg.clusters_per_side = 2;
      if (gamma < 1) {
        cfg.model = {1000, gamma, 100.0};
        cfg.sweep = {500, 650, 800, 950, 1100, 1300, 1500, 1800};
      } else {
        cfg.model = {1000, gamma, 50.0};
        cfg.sweep = {5, 8, 12, 30, 90, 160, 300, 520};
      }
      break;
    case 5:
      cfg.mode = ExperimentMode::tradeoff;
      cfg.model = {1000, gamma, 100.0};
      cfg.trials = 300;
      cfg.clusters_per_side = 2;
      cfg.sweep = {800, 1000, 1250, 1550, 1900, 2300};
      break;
    case 6: {
      cfg.mode = ExperimentMode::single_hop_compare;
      cfg.sweep_kind = SweepKind::alpha1;
      const Index scenario = ka.idx("scenario", 1);
      if (scenario == 1)
        cfg.model = {7345, 1.16, 22.0};
      else if (scenario == 2)
        cfg.model = {5405, 1.11, 18.0};
      else
        throw std::invalid_argument("key 'scenario': expected 1 or 2");
      cfg.S = 5;
      cfg.trials = 200;
      cfg.clusters_per_side = 2;
      cfg.sweep = {100, 150, 200, 250};
      break;
    }
    default:
      throw std::invalid_argument("key 'figure': expected 3, 4, 5, or 6");
  }
  return cfg;
}

int run_validate(const KeyedArgs& ka) {
  ExperimentConfig cfg = validate_preset(ka);
  overlay_experiment_keys(ka, cfg);
  const Index figure = ka.idx("figure", 0);
  attach_outputs(ka, cfg, "validate_fig" + std::to_string(figure) + ".csv");
  const ExperimentSummary summary = run_experiment(cfg);
  std::cout << "validate figure=" << figure << " mode=" << to_string(cfg.mode)
            << " gamma=" << cfg.model.gamma << " M=" << cfg.model.M << " q=" << cfg.model.q
            << "\n";
  if (cfg.mode == ExperimentMode::m_star_validation) {
    for (const auto& r : summary.rows)
      std::cout << "  gc=" << fmt(r.g_c) << " m_closed=" << r.m_star_closed
                << " m_kkt=" << r.m_star_kkt << " m_pred=" << r.m_star_pred
                << " ratio=" << fmt(r.m_star_ratio) << "\n";
  } else {
    print_rows_brief(summary);
    if (cfg.mode == ExperimentMode::tradeoff) {
      double sum = 0, sum2 = 0;
      Index n = 0;
      for (const auto& r : summary.rows)
        if (std::isfinite(r.ratio_theory_over_sim)) {
          sum += r.ratio_theory_over_sim;
          sum2 += r.ratio_theory_over_sim * r.ratio_theory_over_sim;
          ++n;
        }
      if (n > 1) {
        const double mean = sum / static_cast<double>(n);
        const double var = (sum2 - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
        std::cout << "ratio mean=" << fmt(mean)
                  << " cv=" << fmt(std::sqrt(std::max(0.0, var)) / mean) << "\n";
      }
    }
    if (cfg.mode == ExperimentMode::single_hop_compare) {
      bool all = true;
      for (const auto& r : summary.rows) all = all && r.sym_mean > r.single_mean;
      std::cout << "multi-hop dominates single-hop at every point: " << (all ? "yes" : "no")
                << "\n";
    }
  }
  std::cout << "wrote " << summary.csv_path << "\n";
  return 0;
}

int run_pmiss(const KeyedArgs& ka) {
  const PopularityModelD model = model_from(ka);
  const double S = ka.num("S", 1.0);
  const Index n_s = ka.idx("n_s", 0);
  const double pm = p_miss_exact(model, n_s, S);
  double lower = kNaN;
  if (model.gamma > 1)
    lower = p_miss_lower_gamma_gt1(model.gamma, model.q, model.M, S, n_s);
  std::string csv = "gamma,q,M,S,n_s,p_miss_exact,p_miss_lower\n";
  csv_cell(csv, model.gamma);
  csv_cell(csv, model.q);
  csv += std::to_string(static_cast<long long>(model.M)) + ",";
  csv_cell(csv, S);
  csv += std::to_string(static_cast<long long>(n_s)) + ",";
  csv += fmt(pm, "%.17g");
  csv += ',';
  if (std::isfinite(lower)) csv += fmt(lower, "%.17g");
  csv += '\n';
  const std::string path = resolve_out(ka, "pmiss.csv");
  write_text_file(path, csv);
  std::cout << "p_miss_exact = " << fmt(pm, "%.17g");
  if (std::isfinite(lower)) std::cout << "  lower_bound = " << fmt(lower, "%.17g");
  std::cout << "\nwrote " << path << "\n";
  return 0;
}

int run_app(int argc, const char* const* argv) {
  CLI::App app{
      "d2dcache: caching policy, throughput-outage formulas, and Monte Carlo "
      "simulation for cache-aided D2D networks"};
  app.require_subcommand(1);

  SubCtx policy{app.add_subcommand("policy", "compute a caching policy and write P_c(f) as CSV"),
                "policy"};
  register_keys(policy, {"gamma", "q", "M", "S", "gc", "method", "n_s", "out"});

  SubCtx outage{app.add_subcommand("outage", "evaluate the regime outage expression"), "outage"};
  register_keys(outage, {"gamma", "D", "rho", "rho_mult", "alpha1", "out"});

  SubCtx tradeoff{app.add_subcommand("tradeoff", "tabulate a theory throughput-outage curve"),
                  "tradeoff"};
  register_keys(tradeoff, {"regime", "kind", "gamma", "q", "M", "S", "K", "sweep", "out"});

  SubCtx simulate{app.add_subcommand("simulate", "Monte Carlo trials at a single cluster size"),
                  "simulate"};
  register_keys(simulate,
                {"gamma", "q", "M", "S", "gc", "K", "c0", "clusters_per_side", "trials", "seed",
                 "threads", "sim_mode", "policy_method", "theta", "pathloss_alpha", "chi",
                 "noise", "tx_power", "out", "json_out"});

  SubCtx sweep{app.add_subcommand("sweep", "run a full experiment sweep"), "sweep"};
  register_keys(sweep, {"mode",   "sweep_kind", "sweep",    "fixed_param",    "gamma",
                        "q",      "M",          "S",        "K",              "c0",
                        "clusters_per_side",    "trials",   "seed",           "threads",
                        "sim_mode",             "policy_method",              "theta",
                        "pathloss_alpha",       "chi",      "noise",          "tx_power",
                        "out",    "json_out"});

  SubCtx validate{app.add_subcommand("validate", "preset theory-vs-simulation reports"),
                  "validate"};
  register_keys(validate, {"figure", "scenario", "gamma", "q", "M", "S", "K", "c0",
                           "clusters_per_side", "trials", "seed", "threads", "out", "json_out"});

  SubCtx pmiss{app.add_subcommand("pmiss", "pooled-cache miss probability and its lower bound"),
               "pmiss"};
  register_keys(pmiss, {"gamma", "q", "M", "S", "n_s", "out"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (policy.sub->parsed()) return run_policy(policy.finalize());
  if (outage.sub->parsed()) return run_outage(outage.finalize());
  if (tradeoff.sub->parsed()) return run_tradeoff(tradeoff.finalize());
  if (simulate.sub->parsed()) return run_simulate(simulate.finalize());
  if (sweep.sub->parsed()) return run_sweep(sweep.finalize());
  if (validate.sub->parsed()) return run_validate(validate.finalize());
  if (pmiss.sub->parsed()) return run_pmiss(pmiss.finalize());
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run_app(argc, argv);
  } catch (const internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.emplace_back("d2dcache");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& s : full) argv.push_back(s.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace d2d
