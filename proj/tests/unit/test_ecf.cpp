#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rmdecon/ecf.hpp"
#include "rmdecon/error.hpp"
#include "rmdecon/quad_grid.hpp"

using namespace rmdecon;
using cplx = std::complex<double>;

namespace {

PairedSample random_sample(std::size_t n, std::uint64_t seed, double scale = 2.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = d(rng);
    b[i] = d(rng);
  }
  return PairedSample(a, b);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rmdecon_ecf_" + name);
}

}  // namespace

TEST(PairedSample, Validation) {
  EXPECT_THROW(PairedSample({}, {}), ValidationError);
  EXPECT_THROW(PairedSample({1.0}, {1.0, 2.0}), ValidationError);
  EXPECT_THROW(PairedSample({std::nan("")}, {1.0}), ValidationError);
  EXPECT_THROW(PairedSample({1.0}, {INFINITY}), ValidationError);
  const PairedSample s({1.0, 2.0, 3.0}, {4.0, 5.0, 6.0});
  const std::vector<std::size_t> idx{2, 0};
  const auto sub = s.subset(idx);
  EXPECT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub.y1()[0], 3.0);
  EXPECT_EQ(sub.y2()[1], 4.0);
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(s.subset(bad), ValidationError);
}

TEST(EcfAt, HandValues) {
  const PairedSample one({1.0}, {2.0});
  const auto z = ecf_at(one, std::numbers::pi, 0.0);
  EXPECT_NEAR(z.real(), -1.0, 1e-15);
  EXPECT_NEAR(z.imag(), 0.0, 1e-15);
  const auto s = random_sample(17, 3);
  EXPECT_EQ(ecf_at(s, 0.0, 0.0), cplx(1.0, 0.0));
  const PairedSample two({0.0, std::numbers::pi}, {0.0, 0.0});
  EXPECT_NEAR(std::abs(ecf_at(two, 1.0, 0.0)), 0.0, 1e-15);
}

TEST(EcfAt, HermitianAndBounded) {
  const auto s = random_sample(31, 5);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double t1 = u(rng), t2 = u(rng);
    const auto a = ecf_at(s, t1, t2);
    const auto b = ecf_at(s, -t1, -t2);
    EXPECT_NEAR(a.real(), b.real(), 1e-12);
    EXPECT_NEAR(a.imag(), -b.imag(), 1e-12);
    EXPECT_LE(std::abs(a), 1.0 + 1e-12);
  }
}

TEST(EcfAt, Marginals) {
  const auto s = random_sample(9, 8);
  EXPECT_EQ(ecf_marginal(s, 1, 0.7), ecf_at(s, 0.7, 0.0));
  EXPECT_EQ(ecf_marginal(s, 2, 0.7), ecf_at(s, 0.0, 0.7));
  EXPECT_THROW(ecf_marginal(s, 3, 0.7), ValidationError);
}

TEST(EcfTable, MatchesNaiveDoubleLoop) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = random_sample(1 + seed % 5 + (seed % 2 ? 5 : 0), seed);
    QuadGrid g;
    g.nu = 0.5 + 0.3 * static_cast<double>(seed % 7);
    g.k1 = 8;
    g.k2 = 8;
    const auto tab = ecf_table(s, g);
    const auto t1 = oracle::midpoints(g.nu, 8);
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_NEAR(tab.grid1[i], t1[i], 1e-15);
      EXPECT_NEAR(std::abs(tab.marginal1[i] - oracle::ecf(s, t1[i], 0.0)), 0.0, 1e-12);
      EXPECT_NEAR(std::abs(tab.marginal2[i] - oracle::ecf(s, 0.0, t1[i])), 0.0, 1e-12);
      for (std::size_t j = 0; j < 8; ++j) {
        EXPECT_NEAR(std::abs(tab.at(i, j) - oracle::ecf(s, t1[i], t1[j])), 0.0, 1e-12);
      }
    }
  }
}

TEST(EcfTable, RectangularGridMatchesPointwise) {
  const auto s = random_sample(3, 77);
  QuadGrid g;
  g.nu = 1.3;
  g.k1 = 4;
  g.k2 = 6;
  const auto tab = ecf_table(s, g);
  ASSERT_EQ(tab.values.size(), 24u);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_NEAR(std::abs(tab.at(i, j) - ecf_at(s, tab.grid1[i], tab.grid2[j])), 0.0, 1e-12);
    }
  }
}

TEST(EcfTable, SingleObservationFactorizes) {
  const double y = 0.83;
  const PairedSample s({y}, {y});
  QuadGrid g;
  g.nu = 2.0;
  g.k1 = 10;
  g.k2 = 10;
  const auto tab = ecf_table(s, g);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 10; ++j) {
      EXPECT_NEAR(std::abs(tab.at(i, j) - std::polar(1.0, (tab.grid1[i] + tab.grid2[j]) * y)), 0.0, 1e-14);
      EXPECT_NEAR(std::abs(tab.at(i, j) - tab.marginal1[i] * tab.marginal2[j]), 0.0, 1e-14);
    }
  }
}

TEST(EcfTable, ExplicitGridsAndZero) {
  const auto s = random_sample(12, 4);
  const std::vector<double> g1{0.0, 0.5}, g2{-1.0, 0.0};
  const auto tab = ecf_table(s, g1, g2);
  EXPECT_NEAR(std::abs(tab.marginal1[0] - cplx(1.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(tab.at(0, 1) - cplx(1.0, 0.0)), 0.0, 1e-15);
  for (const auto& v : tab.values) EXPECT_LE(std::abs(v), 1.0 + 1e-12);
  EXPECT_THROW(ecf_table(s, std::vector<double>{}, g2), DomainError);
}

TEST(QuadGrid, ValidationAndNodes) {
  QuadGrid g;
  g.nu = 1.0;
  g.k1 = 1;
  EXPECT_THROW(g.validate(), ValidationError);
  g.k1 = 4;
  g.nu = 0.0;
  EXPECT_THROW(g.validate(), ValidationError);
  g.nu = 2.0;
  g.k2 = 8;
  EXPECT_DOUBLE_EQ(g.cell_weight(), 1.0 * 0.5);
  const auto n = g.nodes1();
  EXPECT_DOUBLE_EQ(n.front(), -1.5);
  EXPECT_DOUBLE_EQ(n.back(), 1.5);
}

TEST(PairedCsv, RoundTripIsExact) {
  const auto s = random_sample(50, 21, 1e3);
  const auto p = temp_file("roundtrip.csv");
  write_paired_csv(s, p);
  const auto r = read_paired_csv(p);
  ASSERT_EQ(r.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(r.y1()[i], s.y1()[i]);
    EXPECT_EQ(r.y2()[i], s.y2()[i]);
  }
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "y1,y2");
}

TEST(PairedCsv, ParseErrorsCarryLineNumbers) {
  const auto p = temp_file("bad.csv");
  {
    std::ofstream out(p);
    out << "y1,y2\n1.0,2.0\n3.0,abc\n";
  }
  try {
    read_paired_csv(p);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  {
    std::ofstream out(p);
    out << "a,b\n1,2\n";
  }
  EXPECT_THROW(read_paired_csv(p), ParseError);
  EXPECT_THROW(read_paired_csv(temp_file("missing_dir/none.csv")), IoError);
}
