#include <gtest/gtest.h>

#include <limits>

#include "rmdecon/cf_model.hpp"
#include "rmdecon/criterion.hpp"
#include "rmdecon/error.hpp"
#include "rmdecon/optimizer.hpp"
#include "rmdecon/scenario.hpp"

using namespace rmdecon;

namespace {

QuadGrid grid(double nu, std::size_t k) {
  QuadGrid g;
  g.nu = nu;
  g.k1 = k;
  g.k2 = k;
  return g;
}

void expect_contract(const FitResult& r, std::size_t n) {
  EXPECT_LE(r.objective, r.init_objective + 1.0 / static_cast<double>(n));
  EXPECT_LE(r.objective, r.init_objective);
}

}  // namespace

TEST(OptimizerConfig, Validation) {
  OptimizerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.ftol = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.init = InitKind::given;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(InitialPoint, Modes) {
  OptimizerConfig c;
  EXPECT_EQ(initial_point(3, c, nullptr), PolyCF::constant(3));
  c.init = InitKind::oracle_projection;
  const Law g = Gaussian{};
  EXPECT_EQ(initial_point(4, c, &g), project_cf(g, 4));
  EXPECT_THROW(initial_point(4, c, nullptr), ValidationError);
  c.init = InitKind::given;
  c.given = PolyCF({0.1, 0.2, 0.3});
  EXPECT_EQ(initial_point(2, c, nullptr), PolyCF({0.1, 0.2}));
  EXPECT_EQ(initial_point(5, c, nullptr), PolyCF({0.1, 0.2, 0.3, 0.0, 0.0}));
}

TEST(FitCf, SingleObservationReachesZero) {
  const PairedSample s({0.7}, {-0.2});
  const CriterionContext ctx(s, grid(1.0, 30));
  const auto r = fit_cf(ctx, 2, OptimizerConfig{});
  EXPECT_LT(r.objective, 1e-12);
  EXPECT_EQ(r.phi_hat, PolyCF::constant(2));
  expect_contract(r, 1);
}

TEST(FitCf, OracleInitAndRestarts) {
  const auto sc = catalog_scenario("I", 500, 4);
  const auto s = simulate(sc);
  const CriterionContext ctx(s, grid(2.0, 120));
  OptimizerConfig c;
  c.init = InitKind::oracle_projection;
  const auto single = fit_cf(ctx, 15, c, &sc.signal);
  expect_contract(single, 500);
  c.restarts = 3;
  c.seed = 9;
  const auto multi = fit_cf(ctx, 15, c, &sc.signal);
  expect_contract(multi, 500);
  EXPECT_LE(single.objective, 1.05 * multi.objective + 1e-15);
  EXPECT_LE(multi.objective, single.objective);
}

TEST(FitCf, Deterministic) {
  const auto s = simulate(catalog_scenario("II", 200, 8));
  const CriterionContext ctx(s, grid(1.5, 60));
  OptimizerConfig c;
  c.restarts = 2;
  c.seed = 3;
  const auto a = fit_cf(ctx, 6, c);
  const auto b = fit_cf(ctx, 6, c);
  EXPECT_EQ(a.phi_hat, b.phi_hat);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(FitCf, ContractAcrossMatrix) {
  const char* scenarios[] = {"I", "V", "CK1"};
  for (const char* name : scenarios) {
    const auto sc = catalog_scenario(name, 150, 12);
    const auto s = simulate(sc);
    for (double nu : {0.5, 2.0}) {
      const CriterionContext ctx(s, grid(nu, 50));
      for (auto method : {OptimizerMethod::quasi_newton_fd, OptimizerMethod::nelder_mead}) {
        for (auto init : {InitKind::zeros, InitKind::oracle_projection}) {
          for (bool clamp : {false, true}) {
            OptimizerConfig c;
            c.method = method;
            c.init = init;
            c.clamp = clamp;
            c.max_iters = method == OptimizerMethod::nelder_mead ? 300 : 100;
            const auto r = fit_cf(ctx, 5, c, &sc.signal);
            expect_contract(r, s.size());
            if (clamp) {
              const auto cl = clamp_to_upsilon(r.phi_hat, c.upsilon);
              for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(cl.coeffs()[k], r.phi_hat.coeffs()[k], 1e-12);
            }
          }
        }
      }
    }
  }
}

TEST(FitCf, FiniteDifferenceModeWorks) {
  const auto s = simulate(catalog_scenario("I", 200, 1));
  const CriterionContext ctx(s, grid(1.0, 50));
  OptimizerConfig c;
  c.analytic_gradient = false;
  const auto fd = fit_cf(ctx, 4, c);
  c.analytic_gradient = true;
  const auto an = fit_cf(ctx, 4, c);
  expect_contract(fd, 200);
  EXPECT_NEAR(fd.objective, an.objective, 1e-3 * an.init_objective);
}

TEST(FitCf, GradientSmallAtConvergedMinimum) {
  const auto s = simulate(catalog_scenario("I", 300, 2));
  const CriterionContext ctx(s, grid(1.0, 60));
  OptimizerConfig c;
  c.gtol = 1e-9;
  c.max_iters = 500;
  const auto r = fit_cf(ctx, 4, c);
  ASSERT_TRUE(r.converged);
  double norm = 0.0;
  for (double v : criterion_gradient(ctx, r.phi_hat)) norm += v * v;
  EXPECT_LT(std::sqrt(norm), 1e-4 * (1.0 + r.objective));
}

TEST(FitCf, NonFiniteStartIsNumericalFailure) {
  const auto s = simulate(catalog_scenario("I", 50, 2));
  const CriterionContext ctx(s, grid(1.0, 20));
  OptimizerConfig c;
  c.init = InitKind::given;
  c.given = PolyCF({0.0, std::numeric_limits<double>::max()});
  try {
    fit_cf(ctx, 2, c);
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_EQ(e.iterate().size(), 2u);
  }
}

TEST(FitCf, OracleInitWithoutLawIsRejected) {
  const auto s = simulate(catalog_scenario("I", 50, 2));
  const CriterionContext ctx(s, grid(1.0, 20));
  OptimizerConfig c;
  c.init = InitKind::oracle_projection;
  EXPECT_THROW(fit_cf(ctx, 3, c), ValidationError);
}

TEST(FitOverDegrees, IndependentAndValidated) {
  const auto s = simulate(catalog_scenario("I", 200, 6));
  const CriterionContext ctx(s, grid(1.0, 50));
  const std::vector<std::size_t> zero{0};
  const auto r0 = fit_cf_over_degrees(ctx, zero, {});
  ASSERT_TRUE(r0.at(0).result);
  EXPECT_EQ(r0.at(0).result->objective, criterion_value(ctx, PolyCF::constant(0)));
  const std::vector<std::size_t> degrees{3, 4, 5};
  const auto r = fit_cf_over_degrees(ctx, degrees, {});
  ASSERT_EQ(r.size(), 3u);
  for (const auto& [m, fit] : r) {
    ASSERT_TRUE(fit.result) << fit.error;
    EXPECT_EQ(fit.result->phi_hat.degree(), m);
    expect_contract(*fit.result, 200);
    EXPECT_EQ(fit.result->objective, fit_cf(ctx, m, {}).objective);
  }
  const std::vector<std::size_t> dup{3, 3};
  EXPECT_THROW(fit_cf_over_degrees(ctx, dup, {}), ValidationError);
  EXPECT_THROW(fit_cf_over_degrees(ctx, std::span<const std::size_t>{}, {}), ValidationError);
}

TEST(FitOverDegrees, FailuresAreFlagged) {
  const auto s = simulate(catalog_scenario("I", 50, 6));
  const CriterionContext ctx(s, grid(1.0, 20));
  OptimizerConfig c;
  c.init = InitKind::oracle_projection;
  const std::vector<std::size_t> degrees{2, 3};
  const auto r = fit_cf_over_degrees(ctx, degrees, c);
  for (const auto& [m, fit] : r) {
    EXPECT_FALSE(fit.result);
    EXPECT_FALSE(fit.error.empty());
  }
}

TEST(FitCf, OracleInitUsuallyBeatsZeros) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto sc = catalog_scenario("I", 500, 100 + seed);
    const auto s = simulate(sc);
    const CriterionContext ctx(s, grid(2.0, 500));
    OptimizerConfig c;
    const auto z = fit_cf(ctx, 15, c);
    c.init = InitKind::oracle_projection;
    const auto o = fit_cf(ctx, 15, c, &sc.signal);
    if (o.objective <= z.objective) ++wins;
  }
  EXPECT_GE(wins, 8);
}
