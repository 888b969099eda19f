#pragma once

// Simulation studies and file-level commands behind the rmdecon CLI.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmdecon/adaptation.hpp"
#include "rmdecon/density_estimator.hpp"
#include "rmdecon/ecf.hpp"
#include "rmdecon/optimizer.hpp"
#include "rmdecon/scenario.hpp"

namespace rmdecon {

enum class RunMode { desk, repro };

struct ModeSettings {
  std::size_t quad_nodes;   // per axis of the criterion grid
  std::size_t eval_points;  // density evaluation grid
};

ModeSettings mode_settings(RunMode mode);
RunMode run_mode_from_name(const std::string& name);

// Settings shared by every pipeline run.
struct PipelineConfig {
  RunMode mode = RunMode::desk;
  std::optional<std::size_t> quad_nodes;   // overrides the mode value
  std::optional<std::size_t> eval_points;  // overrides the mode value
  std::size_t inversion_nodes = kDefaultInversionNodes;
  OptimizerConfig optimizer{};
  std::size_t workers = 1;

  std::size_t resolved_quad_nodes() const;
  std::size_t resolved_eval_points() const;
};

struct EstimateOutput {
  FitResult fit;
  DensityEstimate estimate;  // clipped
};

// Fit of degree fit_degree on [-nu_est, nu_est]^2, truncation to params.m,
// inversion on the window, clipping.
EstimateOutput run_estimate(const PairedSample& sample, const EstimatorParams& params,
                            std::size_t fit_degree, std::pair<double, double> window,
                            const PipelineConfig& cfg, const Law* oracle_law = nullptr);

// ---- commands ----

// Dataset CSV plus a JSON sidecar of the scenario.
void cmd_simulate(const ScenarioSpec& spec, const std::filesystem::path& out);

struct EstimateCommand {
  std::filesystem::path dataset;
  EstimatorParams params;
  std::size_t fit_degree = 15;
  std::pair<double, double> window{-5.0, 5.0};
  std::optional<std::filesystem::path> poly_out;
};

// Writes the density CSV and its sidecar; returns the pipeline result.
EstimateOutput cmd_estimate(const EstimateCommand& cmd, const PipelineConfig& cfg,
                            const std::filesystem::path& out);

struct SweepSpec {
  ScenarioSpec scenario;
  std::vector<std::size_t> m_list;
  std::vector<double> nu_list;
  std::vector<double> h_list;
  std::optional<std::pair<double, double>> window;  // default: scenario window
  bool oracle_init = true;

  // Default grid: m = 3..15, h = 0.25..2, nu in {0.33, 0.5, 1, ..., 4.5}.
  static SweepSpec defaults(ScenarioSpec scenario);
  void validate() const;
};

struct SweepRow {
  EstimatorParams params;
  double loss = 0.0;  // +inf when the cell failed
};

// One dataset for the whole sweep; the fit for (m, nu) is shared by all h.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PipelineConfig& cfg);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
// The k rows with the smallest finite losses, in increasing loss order.
std::vector<SweepRow> top_k(const std::vector<SweepRow>& rows, std::size_t k);

struct RiskSpec {
  ScenarioSpec scenario;
  std::size_t repetitions = 500;
  std::vector<EstimatorParams> param_sets;
  std::uint64_t base_seed = 0;
  std::optional<std::pair<double, double>> window;
  bool oracle_init = true;

  void validate() const;
};

struct RiskReport {
  double r_hat = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t repetitions = 0;
  std::size_t dropped = 0;
  std::vector<double> losses;            // kept repetitions, in repetition order
  std::vector<std::size_t> best_set;     // index of the winning parameter set
  std::vector<std::size_t> kept_indices; // repetition index of each kept loss
};

// Repetition r draws a fresh dataset with seed derive_seed(base_seed, r) and keeps
// the smallest loss over the parameter sets.
RiskReport run_risk(const RiskSpec& spec, const PipelineConfig& cfg);
void write_risk_json(const RiskReport& report, const RiskSpec& spec, const std::filesystem::path& path);

struct CvCommand {
  std::filesystem::path dataset;
  std::vector<EstimatorParams> candidates;
  std::optional<std::vector<double>> q_grid;  // default: k / (4 pi), k^4 <= n
  std::uint64_t split_seed = 0;
};

// Writes the CV table CSV and the selection JSON sidecar.
CvResult cmd_cv(const CvCommand& cmd, const PipelineConfig& cfg, const std::filesystem::path& out);

struct AdaptRhoSpec {
  std::vector<double> rhos;
  double beta = 0.0;  // required, > 0
  double c_sigma = 1.0;
  // Per-rho parameters. Missing entries use theoretical_params(n, rho, S, c_h) with nu_est.
  std::map<double, EstimatorParams> params;
  double S = 10.0;
  double c_h = 0.018;
  double nu_est = 2.0;
  std::size_t fit_degree = 15;
  std::pair<double, double> window{-5.0, 5.0};
};

struct AdaptRhoReport {
  RhoSelection selection;
  std::map<double, EstimatorParams> params;
  std::map<double, std::string> failures;
};

// Throws NumericalFailure when no rho survives.
AdaptRhoReport run_adapt_rho(const PairedSample& sample, const AdaptRhoSpec& spec,
                             const PipelineConfig& cfg);
void write_adapt_rho_json(const AdaptRhoReport& report, const AdaptRhoSpec& spec,
                          const std::filesystem::path& path);

}  // namespace rmdecon
