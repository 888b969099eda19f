// rmdecon: simulate datasets, fit deconvolution estimates and run simulation studies.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include <charconv>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rmdecon/error.hpp"
#include "rmdecon/harness.hpp"
#include "rmdecon/serialization.hpp"

namespace {

using namespace rmdecon;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

double to_number(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ValidationError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> number_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split_commas(s)) out.push_back(to_number(p));
  return out;
}

std::size_t to_count(double v) {
  if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ValidationError("expected a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

// "m,nu_est,h"
EstimatorParams parse_params(const std::string& s) {
  const auto v = number_list(s);
  if (v.size() != 3) throw ValidationError("parameter set must be m,nu_est,h: '" + s + "'");
  EstimatorParams p{to_count(v[0]), v[1], v[2]};
  p.validate();
  return p;
}

std::pair<double, double> parse_window(const std::string& s) {
  const auto v = number_list(s);
  if (v.size() != 2 || !(v[1] > v[0])) throw ValidationError("window must be lo,hi with lo < hi");
  return {v[0], v[1]};
}

struct Globals {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string mode = "desk";
  std::string out;
  std::size_t quad_nodes = 0;
  std::size_t eval_points = 0;
  std::string init = "zeros";
  std::string method = "quasi-newton-fd";
  std::size_t max_iters = 200;
  std::size_t restarts = 0;
  bool clamp = false;
  bool fd_gradient = false;
};

PipelineConfig pipeline(const Globals& g) {
  PipelineConfig cfg;
  cfg.mode = run_mode_from_name(g.mode);
  if (g.quad_nodes > 0) cfg.quad_nodes = g.quad_nodes;
  if (g.eval_points > 0) cfg.eval_points = g.eval_points;
  cfg.workers = g.workers == 0 ? 1 : g.workers;
  auto& o = cfg.optimizer;
  if (g.method == "nelder-mead") {
    o.method = OptimizerMethod::nelder_mead;
  } else if (g.method != "quasi-newton-fd") {
    throw ValidationError("unknown optimizer method '" + g.method + "'");
  }
  if (g.init == "oracle") {
    o.init = InitKind::oracle_projection;
  } else if (g.init != "zeros") {
    throw ValidationError("unknown init '" + g.init + "' (expected zeros or oracle)");
  }
  o.max_iters = g.max_iters;
  o.restarts = g.restarts;
  o.seed = g.seed;
  o.clamp = g.clamp;
  o.analytic_gradient = !g.fd_gradient;
  o.validate();
  return cfg;
}

std::string require_out(const Globals& g) {
  if (g.out.empty()) throw ValidationError("--out is required");
  return g.out;
}

ScenarioSpec load_scenario(const std::string& name, const std::string& json_path, std::size_t n,
                           std::uint64_t seed) {
  if (!json_path.empty()) {
    auto spec = scenario_from_json(read_text_file(json_path));
    if (n > 0) spec.n = n;
    spec.seed = seed;
    return spec;
  }
  return catalog_scenario(name, n, seed);
}

void report_error(const char* kind, const std::exception& e, const std::vector<double>* iterate = nullptr) {
  nlohmann::ordered_json j{{"error", kind}, {"message", e.what()}};
  if (iterate) j["iterate"] = *iterate;
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density deconvolution from repeated noisy measurements"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads")->capture_default_str();
  app.add_option("--mode", g.mode, "desk (500x500 criterion grid, 2000-point output) or repro (8000, 8000)")
      ->check(CLI::IsMember({"desk", "repro"}))
      ->capture_default_str();
  app.add_option("--out", g.out, "Output file");
  app.add_option("--quad-nodes", g.quad_nodes, "Criterion grid nodes per axis (overrides --mode)");
  app.add_option("--eval-points", g.eval_points, "Density grid points (overrides --mode)");
  app.add_option("--init", g.init, "Optimizer start: zeros or oracle")->capture_default_str();
  app.add_option("--method", g.method, "quasi-newton-fd or nelder-mead")->capture_default_str();
  app.add_option("--max-iters", g.max_iters, "Optimizer iteration cap")->capture_default_str();
  app.add_option("--restarts", g.restarts, "Jittered optimizer restarts")->capture_default_str();
  app.add_flag("--clamp", g.clamp, "Project coefficients onto the Upsilon box each iteration");
  app.add_flag("--fd-gradient", g.fd_gradient, "Use central differences instead of the exact gradient");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw a paired dataset from a scenario");
  std::string sim_scenario = "I", sim_json;
  std::size_t sim_n = 500;
  sim->add_option("--scenario", sim_scenario, "Catalog scenario (I..VI, CK1..CK4)")->capture_default_str();
  sim->add_option("--scenario-json", sim_json, "Scenario JSON file (overrides --scenario)");
  sim->add_option("--n", sim_n, "Sample size")->capture_default_str();

  // estimate
  auto* est = app.add_subcommand("estimate", "Fit and invert on a dataset");
  std::string est_data, est_params = "15,2,1", est_window = "-5,5", est_poly;
  std::size_t est_fit_degree = 15;
  est->add_option("--data", est_data, "Dataset CSV (y1,y2)")->required();
  est->add_option("--params", est_params, "m,nu_est,h")->capture_default_str();
  est->add_option("--fit-degree", est_fit_degree, "Degree of the fitted polynomial")->capture_default_str();
  est->add_option("--window", est_window, "Evaluation window lo,hi")->capture_default_str();
  est->add_option("--emit-poly", est_poly, "Write the fitted polynomial and fit report as JSON");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Loss table over (m, nu_est, h) on one dataset");
  std::string sw_scenario = "CK3", sw_json, sw_m, sw_nu, sw_h, sw_window;
  std::size_t sw_n = 1000, sw_top = 0;
  sw->add_option("--scenario", sw_scenario)->capture_default_str();
  sw->add_option("--scenario-json", sw_json);
  sw->add_option("--n", sw_n)->capture_default_str();
  sw->add_option("--m-list", sw_m, "Comma list (default 3..15)");
  sw->add_option("--nu-list", sw_nu, "Comma list (default 0.33,0.5,1,...,4.5)");
  sw->add_option("--h-list", sw_h, "Comma list (default 0.25,0.5,...,2)");
  sw->add_option("--window", sw_window, "Evaluation window lo,hi (default per signal)");
  sw->add_option("--top-k", sw_top, "Print the k lowest-loss cells");

  // risk
  auto* rk = app.add_subcommand("risk", "Monte-Carlo risk over repeated datasets");
  std::string rk_scenario = "CK3", rk_json, rk_window;
  std::size_t rk_n = 1000, rk_reps = 20;
  std::vector<std::string> rk_params;
  rk->add_option("--scenario", rk_scenario)->capture_default_str();
  rk->add_option("--scenario-json", rk_json);
  rk->add_option("--n", rk_n)->capture_default_str();
  rk->add_option("--reps", rk_reps)->capture_default_str();
  rk->add_option("--params", rk_params, "m,nu_est,h (repeat up to 4 times)")->required();
  rk->add_option("--window", rk_window, "Evaluation window lo,hi (default per signal)");

  // cv
  auto* cv = app.add_subcommand("cv", "Cross-validated choice of (m, nu_est, h)");
  std::string cv_data, cv_q;
  std::vector<std::string> cv_params;
  cv->add_option("--data", cv_data)->required();
  cv->add_option("--params", cv_params, "Candidate m,nu_est,h (repeatable)")->required();
  cv->add_option("--q-list", cv_q, "Noise cutoffs (default k/(4 pi), k^4 <= n)");

  // adapt-rho
  auto* ar = app.add_subcommand("adapt-rho", "Select the tail parameter rho");
  std::string ar_data, ar_rhos = "1.5,2,3", ar_params, ar_window = "-5,5";
  double ar_beta = 0.0, ar_csigma = 1.0, ar_S = 10.0, ar_ch = 0.018, ar_nu = 2.0;
  std::size_t ar_fit_degree = 15;
  ar->add_option("--data", ar_data)->required();
  ar->add_option("--rhos", ar_rhos)->capture_default_str();
  ar->add_option("--beta", ar_beta, "Smoothness parameter of the signal density")->required();
  ar->add_option("--c-sigma", ar_csigma)->capture_default_str();
  ar->add_option("--S", ar_S)->capture_default_str();
  ar->add_option("--c-h", ar_ch)->capture_default_str();
  ar->add_option("--nu", ar_nu, "nu_est for theoretical parameters")->capture_default_str();
  ar->add_option("--params", ar_params, "m,nu_est,h used for every rho instead of the theoretical values");
  ar->add_option("--fit-degree", ar_fit_degree)->capture_default_str();
  ar->add_option("--window", ar_window)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    const auto cfg = pipeline(g);
    if (*sim) {
      const auto out = require_out(g);
      cmd_simulate(load_scenario(sim_scenario, sim_json, sim_n, g.seed), out);
    } else if (*est) {
      EstimateCommand cmd;
      cmd.dataset = est_data;
      cmd.params = parse_params(est_params);
      cmd.fit_degree = est_fit_degree;
      cmd.window = parse_window(est_window);
      if (!est_poly.empty()) cmd.poly_out = est_poly;
      const auto r = cmd_estimate(cmd, cfg, require_out(g));
      std::cout << "objective " << r.fit.objective << " (start " << r.fit.init_objective << ", "
                << r.fit.iterations << " iterations)\n";
    } else if (*sw) {
      auto spec = SweepSpec::defaults(load_scenario(sw_scenario, sw_json, sw_n, g.seed));
      if (!sw_m.empty()) {
        spec.m_list.clear();
        for (double v : number_list(sw_m)) spec.m_list.push_back(to_count(v));
      }
      if (!sw_nu.empty()) spec.nu_list = number_list(sw_nu);
      if (!sw_h.empty()) spec.h_list = number_list(sw_h);
      if (!sw_window.empty()) spec.window = parse_window(sw_window);
      const auto out = require_out(g);
      const auto rows = run_sweep(spec, cfg);
      write_sweep_csv(rows, out);
      for (const auto& r : top_k(rows, sw_top)) {
        std::cout << r.params.m << ',' << r.params.nu_est << ',' << r.params.h << ',' << r.loss << '\n';
      }
    } else if (*rk) {
      RiskSpec spec;
      spec.scenario = load_scenario(rk_scenario, rk_json, rk_n, g.seed);
      spec.repetitions = rk_reps;
      spec.base_seed = g.seed;
      for (const auto& p : rk_params) spec.param_sets.push_back(parse_params(p));
      if (!rk_window.empty()) spec.window = parse_window(rk_window);
      const auto out = require_out(g);
      const auto report = run_risk(spec, cfg);
      write_risk_json(report, spec, out);
      std::cout << "100*r_hat " << 100.0 * report.r_hat << " CI (" << 100.0 * report.ci_low << ", "
                << 100.0 * report.ci_high << ")\n";
    } else if (*cv) {
      CvCommand cmd;
      cmd.dataset = cv_data;
      for (const auto& p : cv_params) cmd.candidates.push_back(parse_params(p));
      if (!cv_q.empty()) cmd.q_grid = number_list(cv_q);
      cmd.split_seed = g.seed;
      const auto r = cmd_cv(cmd, cfg, require_out(g));
      std::cout << "best " << r.best.m << ',' << r.best.nu_est << ',' << r.best.h << " q " << r.best_q << '\n';
    } else if (*ar) {
      AdaptRhoSpec spec;
      spec.rhos = number_list(ar_rhos);
      spec.beta = ar_beta;
      spec.c_sigma = ar_csigma;
      spec.S = ar_S;
      spec.c_h = ar_ch;
      spec.nu_est = ar_nu;
      spec.fit_degree = ar_fit_degree;
      spec.window = parse_window(ar_window);
      if (!ar_params.empty()) {
        const auto p = parse_params(ar_params);
        for (double rho : spec.rhos) spec.params[rho] = p;
      }
      const auto out = require_out(g);
      const auto sample = read_paired_csv(ar_data);
      const auto report = run_adapt_rho(sample, spec, cfg);
      write_adapt_rho_json(report, spec, out);
      std::cout << "rho_hat " << report.selection.rho_hat << '\n';
    }
  } catch (const NumericalFailure& e) {
    report_error("numerical-failure", e, &e.iterate());
    return kExitNumerical;
  } catch (const ValidationError& e) {
    report_error("validation", e);
    return kExitValidation;
  } catch (const IoError& e) {
    report_error("io", e);
    return kExitValidation;
  } catch (const Error& e) {
    report_error("numerical-failure", e);
    return kExitNumerical;
  } catch (const std::exception& e) {
    report_error("internal", e);
    return kExitNumerical;
  }
  return 0;
}
