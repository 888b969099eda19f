#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "rmdecon/criterion.hpp"
#include "rmdecon/error.hpp"
#include "rmdecon/harness.hpp"
#include "rmdecon/parallel.hpp"
#include "rmdecon/serialization.hpp"

using namespace rmdecon;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "rmdecon_harness_test";
  fs::create_directories(dir);
  return dir / name;
}

PipelineConfig light() {
  PipelineConfig cfg;
  cfg.quad_nodes = 120;
  cfg.eval_points = 400;
  return cfg;
}

double column_sd(const PairedSample& s) {
  const auto y = s.y1();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(y.size() - 1));
}

}  // namespace

TEST(Mode, SettingsAndOverrides) {
  EXPECT_EQ(mode_settings(RunMode::desk).quad_nodes, 500u);
  EXPECT_EQ(mode_settings(RunMode::desk).eval_points, 2000u);
  EXPECT_EQ(mode_settings(RunMode::repro).quad_nodes, 8000u);
  EXPECT_EQ(run_mode_from_name("repro"), RunMode::repro);
  EXPECT_THROW(run_mode_from_name("fast"), ValidationError);
  PipelineConfig cfg;
  EXPECT_EQ(cfg.resolved_quad_nodes(), 500u);
  cfg.quad_nodes = 64;
  EXPECT_EQ(cfg.resolved_quad_nodes(), 64u);
}

TEST(Simulate, WritesDatasetAndSidecar) {
  const auto spec = catalog_scenario("I", 500, 1);
  const auto out = scratch("sim.csv");
  cmd_simulate(spec, out);
  const auto s = read_paired_csv(out);
  EXPECT_EQ(s.size(), 500u);
  const double sd = column_sd(s);
  EXPECT_GE(sd, 1.2);
  EXPECT_LE(sd, 1.6);
  EXPECT_EQ(to_json(scenario_from_json(read_text_file(sidecar_path(out)))), to_json(spec));

  const auto again = scratch("sim2.csv");
  cmd_simulate(spec, again);
  EXPECT_EQ(read_text_file(out), read_text_file(again));
  auto bad = spec;
  bad.n = 0;
  EXPECT_THROW(cmd_simulate(bad, scratch("bad.csv")), ValidationError);
}

TEST(Estimate, GaussianSignalPeak) {
  const auto data = scratch("est_in.csv");
  cmd_simulate(catalog_scenario("I", 1000, 2), data);
  EstimateCommand cmd;
  cmd.dataset = data;
  cmd.params = {15, 2.0, 1.0};
  cmd.poly_out = scratch("est_poly.json");
  const auto out = scratch("est.csv");
  const auto r = cmd_estimate(cmd, PipelineConfig{}, out);
  const double at0 = interpolate(r.estimate, 0.0);
  EXPECT_GE(at0, 0.25);
  EXPECT_LE(at0, 0.55);
  for (double v : r.estimate.values) EXPECT_GE(v, 0.0);
  EXPECT_TRUE(fs::exists(sidecar_path(out)));
  EXPECT_TRUE(fs::exists(*cmd.poly_out));

  PipelineConfig oracle;
  oracle.optimizer.init = InitKind::oracle_projection;
  EXPECT_THROW(cmd_estimate(cmd, oracle, out), ValidationError);
  cmd.dataset = scratch("missing.csv");
  EXPECT_THROW(cmd_estimate(cmd, PipelineConfig{}, out), IoError);
}

TEST(Sweep, ShapeAndSingleCellAgreement) {
  SweepSpec spec;
  spec.scenario = catalog_scenario("I", 300, 4);
  spec.m_list = {3, 5};
  spec.nu_list = {1.0, 2.0};
  spec.h_list = {0.5, 1.0, 1.5};
  const auto cfg = light();
  const auto rows = run_sweep(spec, cfg);
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0].params, (EstimatorParams{3, 1.0, 0.5}));
  EXPECT_EQ(rows[11].params, (EstimatorParams{5, 2.0, 1.5}));

  SweepSpec one = spec;
  one.m_list = {5};
  one.nu_list = {2.0};
  one.h_list = {1.0};
  const auto cell = run_sweep(one, cfg);
  ASSERT_EQ(cell.size(), 1u);
  EXPECT_EQ(cell[0].loss, rows[10].loss);

  // The same cell through the estimate pipeline.
  const auto sample = simulate(spec.scenario);
  auto ocfg = cfg;
  ocfg.optimizer.init = InitKind::oracle_projection;
  const auto est = run_estimate(sample, {5, 2.0, 1.0}, 5, default_window(spec.scenario), ocfg,
                                &spec.scenario.signal);
  EXPECT_NEAR(l2_loss(est.estimate, spec.scenario.signal), cell[0].loss, 1e-15);

  const auto best = top_k(rows, 3);
  ASSERT_EQ(best.size(), 3u);
  EXPECT_LE(best[0].loss, best[1].loss);
  EXPECT_LE(best[1].loss, best[2].loss);

  const auto csv = scratch("sweep.csv");
  write_sweep_csv(rows, csv);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "m,nu_est,h,loss");
}

TEST(Sweep, ComparisonCellIsInRange) {
  SweepSpec spec;
  spec.scenario = catalog_scenario("CK3", 1000, 5);
  spec.m_list = {14};
  spec.nu_list = {2.5};
  spec.h_list = {2.0};
  const auto rows = run_sweep(spec, PipelineConfig{});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GE(rows[0].loss, 1e-4);
  EXPECT_LE(rows[0].loss, 1e-2);
}

TEST(Sweep, Validation) {
  SweepSpec spec;
  spec.scenario = catalog_scenario("I", 100, 1);
  spec.m_list = {3};
  spec.nu_list = {1.0};
  EXPECT_THROW(run_sweep(spec, light()), ValidationError);
  spec.h_list = {0.0};
  EXPECT_THROW(run_sweep(spec, light()), ValidationError);
  spec.h_list = {1.0};
  spec.scenario.signal = DiracUniformMix{};
  EXPECT_THROW(run_sweep(spec, light()), NoDensityError);
  const auto d = SweepSpec::defaults(catalog_scenario("CK1", 1000, 1));
  EXPECT_EQ(d.m_list.front(), 3u);
  EXPECT_EQ(d.m_list.back(), 15u);
  EXPECT_EQ(d.h_list.front(), 0.25);
  EXPECT_EQ(d.h_list.back(), 2.0);
}

TEST(Risk, SingleRepetitionIsTheLoss) {
  RiskSpec spec;
  spec.scenario = catalog_scenario("I", 300, 0);
  spec.repetitions = 1;
  spec.param_sets = {{4, 1.5, 1.0}};
  spec.base_seed = 99;
  const auto cfg = light();
  const auto r = run_risk(spec, cfg);
  ASSERT_EQ(r.losses.size(), 1u);
  EXPECT_EQ(r.r_hat, r.losses[0]);
  EXPECT_EQ(r.sd, 0.0);

  auto scenario = spec.scenario;
  scenario.seed = derive_seed(99, 0);
  auto ocfg = cfg;
  ocfg.optimizer.init = InitKind::oracle_projection;
  const auto est = run_estimate(simulate(scenario), spec.param_sets[0], 4, default_window(scenario), ocfg,
                                &scenario.signal);
  EXPECT_NEAR(l2_loss(est.estimate, scenario.signal), r.r_hat, 1e-15);
}

TEST(Risk, SummaryStatistics) {
  RiskSpec spec;
  spec.scenario = catalog_scenario("I", 200, 0);
  spec.repetitions = 4;
  spec.param_sets = {{3, 1.0, 1.0}, {5, 1.5, 1.0}};
  spec.base_seed = 7;
  const auto r = run_risk(spec, light());
  ASSERT_EQ(r.losses.size() + r.dropped, 4u);
  const double k = static_cast<double>(r.losses.size());
  const double mean = std::accumulate(r.losses.begin(), r.losses.end(), 0.0) / k;
  EXPECT_NEAR(r.r_hat, mean, 1e-15);
  double ss = 0.0;
  for (double v : r.losses) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(r.sd, std::sqrt(ss / (k - 1.0)), 1e-15);
  EXPECT_NEAR(r.ci_high - r.ci_low, 2.0 * 1.96 * r.sd / std::sqrt(k), 1e-15);
  for (std::size_t idx : r.best_set) EXPECT_LT(idx, 2u);

  const auto again = run_risk(spec, light());
  EXPECT_EQ(again.losses, r.losses);
  const auto json = scratch("risk.json");
  write_risk_json(r, spec, json);
  EXPECT_NE(read_text_file(json).find("r_hat"), std::string::npos);

  spec.param_sets.clear();
  EXPECT_THROW(run_risk(spec, light()), ValidationError);
  spec.param_sets.assign(5, {3, 1.0, 1.0});
  EXPECT_THROW(run_risk(spec, light()), ValidationError);
}

TEST(AdaptRho, Selection) {
  const auto sample = simulate(catalog_scenario("I", 400, 8));
  AdaptRhoSpec spec;
  spec.beta = 1.0;
  spec.fit_degree = 6;
  spec.rhos = {2.0};
  const auto cfg = light();
  EXPECT_EQ(run_adapt_rho(sample, spec, cfg).selection.rho_hat, 2.0);

  spec.rhos = {1.5, 2.0, 3.0};
  for (double r : spec.rhos) spec.params[r] = {6, 1.5, 1.0};
  const auto rep = run_adapt_rho(sample, spec, cfg);
  EXPECT_EQ(rep.selection.rho_hat, 1.5);
  EXPECT_TRUE(rep.failures.empty());
  const auto json = scratch("adapt.json");
  write_adapt_rho_json(rep, spec, json);
  EXPECT_NE(read_text_file(json).find("rho_hat"), std::string::npos);

  spec.beta = 0.0;
  EXPECT_THROW(run_adapt_rho(sample, spec, cfg), ValidationError);
}

TEST(AdaptRho, TheoreticalParamsWhenUnset) {
  const auto sample = simulate(catalog_scenario("I", 1000, 8));
  AdaptRhoSpec spec;
  spec.beta = 1.0;
  spec.rhos = {4.0};
  spec.fit_degree = 6;
  const auto rep = run_adapt_rho(sample, spec, light());
  EXPECT_EQ(rep.params.at(4.0).m, 3u);
  EXPECT_EQ(rep.params.at(4.0).nu_est, 2.0);
}

TEST(Cv, CommandWritesTable) {
  const auto data = scratch("cv_in.csv");
  cmd_simulate(catalog_scenario("I", 200, 3), data);
  CvCommand cmd;
  cmd.dataset = data;
  cmd.candidates = {{3, 1.0, 1.0}, {4, 1.0, 0.5}};
  cmd.q_grid = std::vector<double>{0.1, 0.2};
  const auto out = scratch("cv.csv");
  const auto r = cmd_cv(cmd, light(), out);
  EXPECT_EQ(r.table.size(), 4u);
  EXPECT_TRUE(fs::exists(out));
  EXPECT_TRUE(fs::exists(sidecar_path(out)));
}
