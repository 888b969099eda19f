#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rmdecon/density_estimator.hpp"
#include "rmdecon/distributions.hpp"
#include "rmdecon/error.hpp"

using namespace rmdecon;
using cplx = std::complex<double>;

namespace {

EstimatorParams params(std::size_t m, double h) { return {m, 1.0, h}; }

double sinc_kernel(double h, double t) {
  return t == 0.0 ? h / std::numbers::pi : std::sin(h * t) / (std::numbers::pi * t);
}

DensityEstimate fixture(std::vector<double> grid, std::vector<double> values) {
  DensityEstimate e;
  e.grid = std::move(grid);
  e.values = std::move(values);
  return e;
}

}  // namespace

TEST(Grid, Regular) {
  const auto g = regular_grid(-5.0, 5.0, 11);
  EXPECT_EQ(g.front(), -5.0);
  EXPECT_EQ(g.back(), 5.0);
  EXPECT_NEAR(g[3], -2.0, 1e-15);
  EXPECT_THROW(regular_grid(1.0, 1.0, 5), ValidationError);
  EXPECT_THROW(regular_grid(0.0, 1.0, 1), ValidationError);
}

TEST(Params, Validation) {
  EXPECT_NO_THROW(params(3, 1.0).validate());
  EXPECT_THROW(params(3, 0.0).validate(), ValidationError);
  EXPECT_THROW((EstimatorParams{3, 0.0, 1.0}).validate(), ValidationError);
}

TEST(Invert, ConstantIsSinc) {
  const std::vector<double> at{0.0, std::numbers::pi / 2.0};
  const auto e = invert(PolyCF::constant(0), params(0, 2.0), at);
  EXPECT_NEAR(e.values[0], 0.6366198, 1e-7);
  EXPECT_NEAR(e.values[1], 0.0, 1e-8);
  EXPECT_FALSE(e.clipped);
  const auto g = regular_grid(-10.0, 10.0, 100);
  const auto s = invert(PolyCF::constant(3), params(3, 1.7), g, 65536);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(s.values[i], sinc_kernel(1.7, g[i]), 1e-8);
}

TEST(Invert, GaussianFixture) {
  const auto g = regular_grid(-5.0, 5.0, 1001);
  const auto e = invert_cf([](double u) { return cplx(std::exp(-0.5 * u * u), 0.0); }, 6.0, g);
  EXPECT_NEAR(e.values[500], 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-4);
}

TEST(Invert, LinearInMixtures) {
  const auto g = regular_grid(-4.0, 4.0, 81);
  const auto f1 = [](double u) { return cplx(std::exp(-0.5 * u * u), 0.0); };
  const auto f2 = [](double u) { return cf(Laplace{0.5, 1.0}, u); };
  const auto a = invert_cf(f1, 3.0, g);
  const auto b = invert_cf(f2, 3.0, g);
  const auto mix = invert_cf([&](double u) { return 0.3 * f1(u) + 0.7 * f2(u); }, 3.0, g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(mix.values[i], 0.3 * a.values[i] + 0.7 * b.values[i], 1e-10);
}

TEST(Invert, AppliesTruncation) {
  const auto g = regular_grid(-3.0, 3.0, 31);
  const PolyCF p({0.1, -0.4, 0.05, 0.02});
  const auto full = invert(truncate(p, 2), params(2, 1.5), g);
  const auto direct = invert(p, params(2, 1.5), g);
  EXPECT_EQ(full.values, direct.values);
}

TEST(Invert, HermitianPolynomialsAreReal) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d(0.0, 0.3);
  const auto g = regular_grid(-5.0, 5.0, 101);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> theta(15);
    for (auto& v : theta) v = d(rng);
    EXPECT_NO_THROW(invert(PolyCF(theta), params(15, 2.0), g));
  }
}

TEST(Invert, NonHermitianFixtureIsRejected) {
  const std::vector<double> g{0.3, 1.0};
  EXPECT_THROW(invert_cf([](double u) { return cplx(1.0, u * u); }, 1.0, g), InternalConsistencyError);
}

TEST(Invert, QuadratureConverges) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0.0, 1.0);
  const auto g = regular_grid(-5.0, 5.0, 41);
  for (std::size_t m : {3u, 9u, 15u}) {
    // Coefficients with factorial decay, as for an entire characteristic function.
    std::vector<double> theta(m);
    double fact = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      fact *= static_cast<double>(k + 1);
      theta[k] = d(rng) / fact;
    }
    const auto a = invert(PolyCF(theta), params(m, 2.0), g, 4096);
    const auto b = invert(PolyCF(theta), params(m, 2.0), g, 8192);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-6);
  }
}

TEST(Invert, RejectsBadInputs) {
  const auto g = regular_grid(-1.0, 1.0, 5);
  EXPECT_THROW(invert(PolyCF::constant(0), params(0, 1.0), g, 32), ValidationError);
  EXPECT_THROW(invert(PolyCF::constant(0), params(0, 0.0), g), ValidationError);
}

TEST(Clip, Basic) {
  auto e = fixture({0.0, 1.0}, {-0.1, 0.2});
  const auto c = clip(e);
  EXPECT_EQ(c.values, (std::vector<double>{0.0, 0.2}));
  EXPECT_TRUE(c.clipped);
  auto pos = fixture({0.0, 1.0}, {0.1, 0.2});
  EXPECT_EQ(clip(pos).values, pos.values);
  EXPECT_EQ(clip(c).values, c.values);
}

TEST(Clip, LipschitzAndProjection) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> d(0.0, 0.2);
  const auto g = regular_grid(-5.0, 5.0, 201);
  const Law truth = Gaussian{0.0, 1.0};
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(g.size()), b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] = density(truth, g[i]) + d(rng);
      b[i] = a[i] + 0.1 * d(rng);
    }
    const auto ea = fixture(g, a), eb = fixture(g, b);
    const auto ca = clip(ea), cb = clip(eb);
    double sup_in = 0.0, sup_out = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      sup_in = std::max(sup_in, std::abs(a[i] - b[i]));
      sup_out = std::max(sup_out, std::abs(ca.values[i] - cb.values[i]));
    }
    EXPECT_LE(sup_out, sup_in);
    EXPECT_LE(l2_loss(ca, truth), l2_loss(ea, truth));
  }
}

TEST(Loss, Values) {
  const auto g = regular_grid(-5.0, 5.0, 4001);
  const Law n01 = Gaussian{0.0, 1.0};
  std::vector<double> truth(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) truth[i] = density(n01, g[i]);
  EXPECT_LT(l2_loss(fixture(g, truth), n01), 1e-12);
  EXPECT_NEAR(l2_loss(fixture(g, std::vector<double>(g.size(), 0.0)), n01), 1.0 / (2.0 * std::sqrt(std::numbers::pi)), 1e-4);
  EXPECT_THROW(l2_loss(fixture(g, truth), DiracUniformMix{}), NoDensityError);
}

TEST(Loss, DistanceNeedsCommonGrid) {
  const auto a = fixture(regular_grid(0.0, 1.0, 11), std::vector<double>(11, 1.0));
  const auto b = fixture(regular_grid(0.0, 1.0, 11), std::vector<double>(11, 0.0));
  EXPECT_NEAR(l2_distance_squared(a, b), 11 * 0.1, 1e-12);
  const auto c = fixture(regular_grid(0.0, 2.0, 11), std::vector<double>(11, 0.0));
  EXPECT_THROW(l2_distance_squared(a, c), DomainError);
}

TEST(Interpolate, Linear) {
  const auto e = fixture({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(interpolate(e, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(interpolate(e, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(interpolate(e, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(interpolate(e, 1.0), 2.0);
}

TEST(TheoreticalParams, Formulas) {
  const auto p = theoretical_params(1000, 4.0, 10.0, std::exp(-4.0));
  EXPECT_EQ(p.m, 3u);
  const double ln_n = std::log(1000.0);
  EXPECT_NEAR(ln_n / std::log(ln_n), 3.574250, 1e-6);
  EXPECT_NEAR(p.h, std::exp(-4.0) * std::pow(3.0, 0.25) / 10.0, 1e-15);
  EXPECT_THROW(theoretical_params(1000, 1.0, 10.0, 0.01), DegenerateParametersError);
  EXPECT_THROW(theoretical_params(1000, 4.0, 10.0, std::exp(-4.0) * 1.0001), DomainError);
  EXPECT_THROW(theoretical_params(15, 4.0, 10.0, 0.01), DomainError);
  EXPECT_THROW(theoretical_params(1000, 4.0, 10.0, 0.01, 2), DomainError);
  EXPECT_THROW(theoretical_params(1000, 0.5, 10.0, 0.01), DomainError);
}

TEST(DensityCsv, WritesDataAndSidecar) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "rmdecon_density_test.csv";
  auto e = clip(invert(PolyCF({0.0, -0.5}), {2, 1.5, 1.0}, regular_grid(-1.0, 1.0, 5)));
  write_density_csv(e, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,value");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
  std::ifstream side(dir / "rmdecon_density_test.json");
  ASSERT_TRUE(side.good());
  std::string json((std::istreambuf_iterator<char>(side)), {});
  EXPECT_NE(json.find("\"nu_est\": 1.5"), std::string::npos);
  EXPECT_NE(json.find("\"clipped\": true"), std::string::npos);
}
