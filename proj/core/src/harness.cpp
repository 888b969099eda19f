#include "rmdecon/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "rmdecon/criterion.hpp"
#include "rmdecon/error.hpp"
#include "rmdecon/parallel.hpp"
#include "rmdecon/serialization.hpp"
#include "text_util.hpp"

namespace rmdecon {

using nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QuadGrid square_grid(double nu, std::size_t k) {
  QuadGrid g;
  g.nu = nu;
  g.k1 = k;
  g.k2 = k;
  return g;
}

OptimizerConfig with_init(OptimizerConfig cfg, bool oracle) {
  if (oracle) cfg.init = InitKind::oracle_projection;
  return cfg;
}

ordered_json params_json(const EstimatorParams& p) {
  return ordered_json{{"m", p.m}, {"nu_est", p.nu_est}, {"h", p.h}};
}

}  // namespace

ModeSettings mode_settings(RunMode mode) {
  return mode == RunMode::repro ? ModeSettings{8000, 8000} : ModeSettings{500, 2000};
}

RunMode run_mode_from_name(const std::string& name) {
  if (name == "desk") return RunMode::desk;
  if (name == "repro") return RunMode::repro;
  throw ValidationError("unknown run mode '" + name + "' (expected desk or repro)");
}

std::size_t PipelineConfig::resolved_quad_nodes() const {
  return quad_nodes.value_or(mode_settings(mode).quad_nodes);
}

std::size_t PipelineConfig::resolved_eval_points() const {
  return eval_points.value_or(mode_settings(mode).eval_points);
}

EstimateOutput run_estimate(const PairedSample& sample, const EstimatorParams& params,
                            std::size_t fit_degree, std::pair<double, double> window,
                            const PipelineConfig& cfg, const Law* oracle_law) {
  params.validate();
  const auto grid = regular_grid(window.first, window.second, cfg.resolved_eval_points());
  CriterionOptions copt;
  copt.workers = cfg.workers;
  const CriterionContext ctx(sample, square_grid(params.nu_est, cfg.resolved_quad_nodes()), copt);
  EstimateOutput out;
  out.fit = fit_cf(ctx, fit_degree, cfg.optimizer, oracle_law);
  out.estimate = clip(invert(out.fit.phi_hat, params, grid, cfg.inversion_nodes));
  return out;
}

void cmd_simulate(const ScenarioSpec& spec, const std::filesystem::path& out) {
  validate(spec);
  write_paired_csv(simulate(spec), out);
  write_text_file(sidecar_path(out), to_json(spec));
}

EstimateOutput cmd_estimate(const EstimateCommand& cmd, const PipelineConfig& cfg,
                            const std::filesystem::path& out) {
  cmd.params.validate();
  if (cfg.optimizer.init == InitKind::oracle_projection) {
    throw ValidationError("oracle initialization needs a known signal law; use a simulation command");
  }
  const auto sample = read_paired_csv(cmd.dataset);
  auto result = run_estimate(sample, cmd.params, cmd.fit_degree, cmd.window, cfg);
  write_density_csv(result.estimate, out);
  if (cmd.poly_out) write_text_file(*cmd.poly_out, to_json(result.fit, cfg.optimizer));
  return result;
}

SweepSpec SweepSpec::defaults(ScenarioSpec scenario) {
  SweepSpec s;
  s.scenario = std::move(scenario);
  for (std::size_t m = 3; m <= 15; ++m) s.m_list.push_back(m);
  s.nu_list = {0.33, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5};
  for (int k = 1; k <= 8; ++k) s.h_list.push_back(0.25 * k);
  return s;
}

void SweepSpec::validate() const {
  rmdecon::validate(scenario);
  if (m_list.empty() || nu_list.empty() || h_list.empty()) throw ValidationError("sweep lists must be nonempty");
  for (double nu : nu_list) {
    if (!(nu > 0.0)) throw ValidationError("nu_est values must be > 0");
  }
  for (double h : h_list) {
    if (!(h > 0.0)) throw ValidationError("h values must be > 0");
  }
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PipelineConfig& cfg) {
  spec.validate();
  const auto sample = simulate(spec.scenario);
  const auto window = spec.window.value_or(default_window(spec.scenario));
  const auto eval = regular_grid(window.first, window.second, cfg.resolved_eval_points());
  const auto opt = with_init(cfg.optimizer, spec.oracle_init);
  const bool has_truth = spec.scenario.signal.has_density();

  const std::size_t nm = spec.m_list.size();
  const std::size_t nn = spec.nu_list.size();
  const std::size_t nh = spec.h_list.size();
  std::vector<SweepRow> rows(nm * nn * nh);
  for (std::size_t a = 0; a < nm; ++a) {
    for (std::size_t b = 0; b < nn; ++b) {
      for (std::size_t c = 0; c < nh; ++c) {
        rows[(a * nn + b) * nh + c].params = {spec.m_list[a], spec.nu_list[b], spec.h_list[c]};
        rows[(a * nn + b) * nh + c].loss = kInf;
      }
    }
  }
  if (!has_truth) throw NoDensityError("sweep losses need a signal with a density");

  parallel_for(nm * nn, cfg.workers, [&](std::size_t cell) {
    const std::size_t m = spec.m_list[cell / nn];
    const double nu = spec.nu_list[cell % nn];
    try {
      const CriterionContext ctx(sample, square_grid(nu, cfg.resolved_quad_nodes()));
      const auto fit = fit_cf(ctx, m, opt, &spec.scenario.signal);
      for (std::size_t c = 0; c < nh; ++c) {
        auto& row = rows[cell * nh + c];
        try {
          const auto est = clip(invert(fit.phi_hat, row.params, eval, cfg.inversion_nodes));
          const double loss = l2_loss(est, spec.scenario.signal);
          row.loss = std::isfinite(loss) ? loss : kInf;
        } catch (const Error&) {
          row.loss = kInf;
        }
      }
    } catch (const Error&) {
      // every h of this (m, nu) stays at +inf
    }
  });
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "m,nu_est,h,loss\n";
  for (const auto& r : rows) {
    out << r.params.m << ',' << detail::format_double(r.params.nu_est) << ','
        << detail::format_double(r.params.h) << ','
        << (std::isfinite(r.loss) ? detail::format_double(r.loss) : std::string("inf")) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<SweepRow> top_k(const std::vector<SweepRow>& rows, std::size_t k) {
  std::vector<SweepRow> finite;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(finite),
               [](const SweepRow& r) { return std::isfinite(r.loss); });
  std::stable_sort(finite.begin(), finite.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.loss < b.loss; });
  if (finite.size() > k) finite.resize(k);
  return finite;
}

void RiskSpec::validate() const {
  rmdecon::validate(scenario);
  if (repetitions == 0) throw ValidationError("risk study needs at least one repetition");
  if (param_sets.empty() || param_sets.size() > 4) throw ValidationError("risk study takes 1 to 4 parameter sets");
  for (const auto& p : param_sets) p.validate();
  if (!scenario.signal.has_density()) throw NoDensityError("risk needs a signal with a density");
}

RiskReport run_risk(const RiskSpec& spec, const PipelineConfig& cfg) {
  spec.validate();
  const auto window = spec.window.value_or(default_window(spec.scenario));
  const auto eval = regular_grid(window.first, window.second, cfg.resolved_eval_points());
  const auto opt = with_init(cfg.optimizer, spec.oracle_init);

  std::vector<double> best(spec.repetitions, kInf);
  std::vector<std::size_t> best_idx(spec.repetitions, 0);
  parallel_for(spec.repetitions, cfg.workers, [&](std::size_t rep) {
    auto scenario = spec.scenario;
    scenario.seed = derive_seed(spec.base_seed, rep);
    const auto sample = simulate(scenario);
    for (std::size_t s = 0; s < spec.param_sets.size(); ++s) {
      const auto& p = spec.param_sets[s];
      try {
        const CriterionContext ctx(sample, square_grid(p.nu_est, cfg.resolved_quad_nodes()));
        const auto fit = fit_cf(ctx, p.m, opt, &scenario.signal);
        const auto est = clip(invert(fit.phi_hat, p, eval, cfg.inversion_nodes));
        const double loss = l2_loss(est, scenario.signal);
        if (std::isfinite(loss) && loss < best[rep]) {
          best[rep] = loss;
          best_idx[rep] = s;
        }
      } catch (const Error&) {
        // a failed set simply does not compete
      }
    }
  });

  RiskReport r;
  r.repetitions = spec.repetitions;
  for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
    if (std::isfinite(best[rep])) {
      r.losses.push_back(best[rep]);
      r.best_set.push_back(best_idx[rep]);
      r.kept_indices.push_back(rep);
    } else {
      ++r.dropped;
    }
  }
  if (r.losses.empty()) throw NumericalFailure("every repetition of the risk study failed", {});
  const auto k = static_cast<double>(r.losses.size());
  r.r_hat = std::accumulate(r.losses.begin(), r.losses.end(), 0.0) / k;
  double ss = 0.0;
  for (double v : r.losses) ss += (v - r.r_hat) * (v - r.r_hat);
  r.sd = r.losses.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
  const double half = 1.96 * r.sd / std::sqrt(k);
  r.ci_low = r.r_hat - half;
  r.ci_high = r.r_hat + half;
  return r;
}

void write_risk_json(const RiskReport& report, const RiskSpec& spec, const std::filesystem::path& path) {
  ordered_json sets = ordered_json::array();
  for (const auto& p : spec.param_sets) sets.push_back(params_json(p));
  ordered_json reps = ordered_json::array();
  for (std::size_t i = 0; i < report.losses.size(); ++i) {
    reps.push_back({{"repetition", report.kept_indices[i]},
                    {"loss", report.losses[i]},
                    {"param_set", report.best_set[i]}});
  }
  ordered_json j{{"scenario", ordered_json::parse(to_json(spec.scenario))},
                 {"repetitions", report.repetitions},
                 {"dropped", report.dropped},
                 {"base_seed", spec.base_seed},
                 {"param_sets", sets},
                 {"r_hat", report.r_hat},
                 {"r_hat_x100", 100.0 * report.r_hat},
                 {"sd", report.sd},
                 {"ci95", {report.ci_low, report.ci_high}},
                 {"per_repetition", reps}};
  write_text_file(path, j.dump(2));
}

CvResult cmd_cv(const CvCommand& cmd, const PipelineConfig& cfg, const std::filesystem::path& out) {
  if (cfg.optimizer.init == InitKind::oracle_projection) {
    throw ValidationError("oracle initialization needs a known signal law");
  }
  const auto sample = read_paired_csv(cmd.dataset);
  auto cv = CvConfig::defaults(sample.size(), cmd.split_seed);
  if (cmd.q_grid) cv.q_grid = *cmd.q_grid;
  cv.candidates = cmd.candidates;
  cv.workers = cfg.workers;
  const auto result = cross_validate(sample, cv, default_fit_pipeline(cfg.resolved_quad_nodes(), cfg.optimizer));
  write_cv_csv(result, out);
  write_text_file(sidecar_path(out), to_json(result));
  return result;
}

AdaptRhoReport run_adapt_rho(const PairedSample& sample, const AdaptRhoSpec& spec,
                             const PipelineConfig& cfg) {
  RhoGrid g{spec.rhos, spec.beta, spec.c_sigma, sample.size()};
  g.validate();
  if (sample.size() < 16) throw DomainError("rho selection needs n >= 16");
  const auto eval = regular_grid(spec.window.first, spec.window.second, cfg.resolved_eval_points());

  AdaptRhoReport report;
  std::map<double, DensityEstimate> fits;
  std::map<std::pair<std::size_t, double>, FitResult> fit_cache;
  for (double rho : spec.rhos) {
    try {
      EstimatorParams p;
      if (auto it = spec.params.find(rho); it != spec.params.end()) {
        p = it->second;
      } else {
        p = theoretical_params(sample.size(), rho, spec.S, spec.c_h);
        p.nu_est = spec.nu_est;
      }
      p.validate();
      report.params[rho] = p;
      const auto key = std::make_pair(spec.fit_degree, p.nu_est);
      auto it = fit_cache.find(key);
      if (it == fit_cache.end()) {
        CriterionOptions copt;
        copt.workers = cfg.workers;
        const CriterionContext ctx(sample, square_grid(p.nu_est, cfg.resolved_quad_nodes()), copt);
        it = fit_cache.emplace(key, fit_cf(ctx, spec.fit_degree, cfg.optimizer)).first;
      }
      fits.emplace(rho, clip(invert(it->second.phi_hat, p, eval, cfg.inversion_nodes)));
    } catch (const Error& e) {
      report.failures[rho] = e.what();
    }
  }
  if (fits.empty()) throw NumericalFailure("no rho value produced an estimate", {});
  report.selection = select_rho(fits, g);
  return report;
}

void write_adapt_rho_json(const AdaptRhoReport& report, const AdaptRhoSpec& spec,
                          const std::filesystem::path& path) {
  ordered_json table = ordered_json::array();
  for (double rho : spec.rhos) {
    ordered_json row{{"rho", rho}};
    if (auto it = report.params.find(rho); it != report.params.end()) row["params"] = params_json(it->second);
    if (auto it = report.selection.a_values.find(rho); it != report.selection.a_values.end()) {
      row["a_n"] = it->second;
      row["sigma_n"] = report.selection.sigma_values.at(rho);
      row["a_plus_sigma"] = it->second + report.selection.sigma_values.at(rho);
    }
    if (auto it = report.failures.find(rho); it != report.failures.end()) row["error"] = it->second;
    table.push_back(row);
  }
  ordered_json j{{"rho_hat", report.selection.rho_hat},
                 {"beta", spec.beta},
                 {"c_sigma", spec.c_sigma},
                 {"table", table}};
  write_text_file(path, j.dump(2));
}

}  // namespace rmdecon
