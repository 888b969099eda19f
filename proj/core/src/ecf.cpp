#include "rmdecon/ecf.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <string>

#include "rmdecon/error.hpp"
#include "text_util.hpp"

namespace rmdecon {

using cplx = std::complex<double>;

void QuadGrid::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("quadrature half-width nu must be > 0");
  if (k1 < 2 || k2 < 2) throw DomainError("quadrature grid needs at least 2 nodes per axis");
}

std::vector<double> midpoint_nodes(double half_width, std::size_t k) {
  std::vector<double> out(k);
  const double step = 2.0 * half_width / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = -half_width + (static_cast<double>(i) + 0.5) * step;
  }
  return out;
}

std::vector<double> QuadGrid::nodes1() const { return midpoint_nodes(nu, k1); }
std::vector<double> QuadGrid::nodes2() const { return midpoint_nodes(nu, k2); }

PairedSample::PairedSample(std::vector<double> y1, std::vector<double> y2)
    : y1_(std::move(y1)), y2_(std::move(y2)) {
  if (y1_.size() != y2_.size()) throw ValidationError("paired sample columns differ in length");
  if (y1_.empty()) throw ValidationError("paired sample must hold at least one observation");
  for (std::size_t l = 0; l < y1_.size(); ++l) {
    if (!std::isfinite(y1_[l]) || !std::isfinite(y2_[l])) {
      throw ValidationError("paired sample entry " + std::to_string(l) + " is not finite");
    }
  }
}

PairedSample PairedSample::subset(std::span<const std::size_t> indices) const {
  std::vector<double> a;
  std::vector<double> b;
  a.reserve(indices.size());
  b.reserve(indices.size());
  for (const auto i : indices) {
    if (i >= size()) throw DomainError("subset index out of range");
    a.push_back(y1_[i]);
    b.push_back(y2_[i]);
  }
  return PairedSample(std::move(a), std::move(b));
}

cplx ecf_at(const PairedSample& sample, double t1, double t2) {
  const auto y1 = sample.y1();
  const auto y2 = sample.y2();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t l = 0; l < y1.size(); ++l) {
    const double phase = t1 * y1[l] + t2 * y2[l];
    re += std::cos(phase);
    im += std::sin(phase);
  }
  const double n = static_cast<double>(y1.size());
  return {re / n, im / n};
}

cplx ecf_marginal(const PairedSample& sample, int coordinate, double t) {
  if (coordinate == 1) return ecf_at(sample, t, 0.0);
  if (coordinate == 2) return ecf_at(sample, 0.0, t);
  throw DomainError("coordinate must be 1 or 2");
}

EcfTable ecf_table(const PairedSample& sample, const QuadGrid& grid) {
  grid.validate();
  const auto g1 = grid.nodes1();
  const auto g2 = grid.nodes2();
  return ecf_table(sample, g1, g2);
}

EcfTable ecf_table(const PairedSample& sample, std::span<const double> grid1,
                   std::span<const double> grid2) {
  if (grid1.empty() || grid2.empty()) throw DomainError("ECF grid must be non-empty");
  const auto n = static_cast<Eigen::Index>(sample.size());
  const auto k1 = static_cast<Eigen::Index>(grid1.size());
  const auto k2 = static_cast<Eigen::Index>(grid2.size());
  const auto y1 = sample.y1();
  const auto y2 = sample.y2();

  using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat e1(k1, n);
  Mat e2(n, k2);
  for (Eigen::Index i = 0; i < k1; ++i) {
    for (Eigen::Index l = 0; l < n; ++l) {
      const double ph = grid1[static_cast<std::size_t>(i)] * y1[static_cast<std::size_t>(l)];
      e1(i, l) = cplx(std::cos(ph), std::sin(ph));
    }
  }
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index j = 0; j < k2; ++j) {
      const double ph = grid2[static_cast<std::size_t>(j)] * y2[static_cast<std::size_t>(l)];
      e2(l, j) = cplx(std::cos(ph), std::sin(ph));
    }
  }

  EcfTable table;
  table.grid1.assign(grid1.begin(), grid1.end());
  table.grid2.assign(grid2.begin(), grid2.end());
  table.values.resize(static_cast<std::size_t>(k1 * k2));
  Eigen::Map<Mat> out(table.values.data(), k1, k2);
  out.noalias() = e1 * e2;
  out /= static_cast<double>(n);

  table.marginal1.resize(grid1.size());
  table.marginal2.resize(grid2.size());
  for (std::size_t i = 0; i < grid1.size(); ++i) table.marginal1[i] = ecf_at(sample, grid1[i], 0.0);
  for (std::size_t j = 0; j < grid2.size(); ++j) table.marginal2[j] = ecf_at(sample, 0.0, grid2[j]);
  return table;
}

void write_paired_csv(const PairedSample& sample, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "y1,y2\n";
  const auto y1 = sample.y1();
  const auto y2 = sample.y2();
  for (std::size_t l = 0; l < y1.size(); ++l) {
    out << detail::format_double(y1[l]) << ',' << detail::format_double(y2[l]) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

PairedSample read_paired_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty dataset '" + path.string() + "'", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "y1,y2") throw ParseError("expected header 'y1,y2' in '" + path.string() + "'", 1);

  std::vector<double> y1;
  std::vector<double> y2;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    double a = 0.0;
    double b = 0.0;
    if (fields.size() != 2 || !detail::parse_double(fields[0], a) ||
        !detail::parse_double(fields[1], b)) {
      throw ParseError("malformed row in '" + path.string() + "'", lineno);
    }
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw ParseError("non-finite value in '" + path.string() + "'", lineno);
    }
    y1.push_back(a);
    y2.push_back(b);
  }
  if (y1.empty()) throw ParseError("dataset '" + path.string() + "' has no observations", lineno);
  return PairedSample(std::move(y1), std::move(y2));
}

}  // namespace rmdecon
