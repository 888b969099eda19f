#include "rmdecon/criterion.hpp"

#include <algorithm>
#include <cmath>

#include "rmdecon/error.hpp"
#include "rmdecon/parallel.hpp"

namespace rmdecon {

using cplx = std::complex<double>;

namespace {

struct Split {
  std::vector<double> re;
  std::vector<double> im;

  explicit Split(std::size_t n = 0) : re(n), im(n) {}
  void set(std::size_t i, cplx z) {
    re[i] = z.real();
    im[i] = z.imag();
  }
};

Split evaluate_split(const PolyCF& p, std::span<const double> t) {
  Split out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out.set(i, p(t[i]));
  return out;
}

Split to_split(std::span<const cplx> z) {
  Split out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out.set(i, z[i]);
  return out;
}

// Per-block accumulators. Gradient terms are
//   G[s]  = sum_{i+j=s} conj(A) P_ij,
//   R1[i] = sum_j conj(A) V_ij phi(t2_j),
//   R2[j] = sum_i conj(A) V_ij phi(t1_i),
// with A_ij = phi(s) P_ij - V_ij phi(t1_i) phi(t2_j) and P_ij = phi_n(t1_i,0) phi_n(0,t2_j).
struct BlockSums {
  double value = 0.0;
  std::vector<cplx> g;
  std::vector<cplx> r1;
  std::vector<cplx> r2;
  // Only used without a sum grid: sum over pairs of conj(A) P_ij (t1_i + t2_j)^k.
  std::vector<cplx> gpow;
};

struct Kernel {
  const CriterionContext& ctx;
  const PolyCF& p;
  bool with_gradient;
  bool use_sumgrid;

  Split a1, a2, f1, f2, fs;

  Kernel(const CriterionContext& c, const PolyCF& poly, bool grad, bool sums)
      : ctx(c), p(poly), with_gradient(grad), use_sumgrid(sums) {
    const auto& tab = ctx.table();
    a1 = to_split(tab.marginal1);
    a2 = to_split(tab.marginal2);
    f1 = evaluate_split(p, tab.grid1);
    f2 = evaluate_split(p, tab.grid2);
    if (use_sumgrid) fs = evaluate_split(p, ctx.sumgrid());
  }

  BlockSums run(std::size_t row0, std::size_t row1) const {
    const auto& tab = ctx.table();
    const std::size_t k2 = tab.grid2.size();
    const std::size_t m = p.degree();
    BlockSums out;
    if (with_gradient) {
      out.r1.assign(row1 - row0, 0.0);
      out.r2.assign(k2, 0.0);
      if (use_sumgrid) {
        out.g.assign(ctx.sumgrid().size(), 0.0);
      } else {
        out.gpow.assign(m, 0.0);
      }
    }
    const auto* vals = reinterpret_cast<const double*>(tab.values.data());
    std::vector<double> pow_buf(m);

    double acc = 0.0;
    for (std::size_t i = row0; i < row1; ++i) {
      const double a1r = a1.re[i], a1i = a1.im[i];
      const double f1r = f1.re[i], f1i = f1.im[i];
      const double* vrow = vals + 2 * i * k2;
      double r1r = 0.0, r1i = 0.0;
      for (std::size_t j = 0; j < k2; ++j) {
        const double pr = a1r * a2.re[j] - a1i * a2.im[j];
        const double pi = a1r * a2.im[j] + a1i * a2.re[j];
        const double qr = f1r * f2.re[j] - f1i * f2.im[j];
        const double qi = f1r * f2.im[j] + f1i * f2.re[j];
        double sr, si;
        double s = 0.0;
        if (use_sumgrid) {
          sr = fs.re[i + j];
          si = fs.im[i + j];
        } else {
          s = tab.grid1[i] + tab.grid2[j];
          const cplx z = p(s);
          sr = z.real();
          si = z.imag();
        }
        const double vr = vrow[2 * j], vi = vrow[2 * j + 1];
        const double ar = sr * pr - si * pi - (vr * qr - vi * qi);
        const double ai = sr * pi + si * pr - (vr * qi + vi * qr);
        acc += ar * ar + ai * ai;
        if (with_gradient) {
          // conj(A) P and conj(A) V
          const double cpr = ar * pr + ai * pi, cpi = ar * pi - ai * pr;
          const double wr = ar * vr + ai * vi, wi = ar * vi - ai * vr;
          if (use_sumgrid) {
            out.g[i + j] += cplx(cpr, cpi);
          } else {
            double pw = 1.0;
            for (std::size_t k = 0; k < m; ++k) {
              pw *= s;
              out.gpow[k] += cplx(cpr * pw, cpi * pw);
            }
          }
          r1r += wr * f2.re[j] - wi * f2.im[j];
          r1i += wr * f2.im[j] + wi * f2.re[j];
          out.r2[j] += cplx(wr * f1r - wi * f1i, wr * f1i + wi * f1r);
        }
      }
      if (with_gradient) out.r1[i - row0] = cplx(r1r, r1i);
    }
    out.value = acc;
    return out;
  }
};

ValueAndGradient evaluate(const CriterionContext& ctx, const PolyCF& p, bool with_gradient,
                          bool use_sumgrid) {
  const auto& tab = ctx.table();
  const std::size_t k1 = tab.grid1.size();
  const std::size_t k2 = tab.grid2.size();
  const std::size_t m = p.degree();
  const Kernel kernel(ctx, p, with_gradient, use_sumgrid);

  const std::size_t blocks = std::clamp<std::size_t>(ctx.options().partitions, 1, k1);
  std::vector<BlockSums> partial(blocks);
  auto row_begin = [&](std::size_t b) { return b * k1 / blocks; };
  parallel_for(blocks, ctx.options().workers,
               [&](std::size_t b) { partial[b] = kernel.run(row_begin(b), row_begin(b + 1)); });

  const double w = ctx.grid().cell_weight();
  ValueAndGradient out;
  double total = 0.0;
  for (const auto& blk : partial) total += blk.value;
  out.value = total * w;
  if (!with_gradient || m == 0) {
    out.gradient.assign(m, 0.0);
    return out;
  }

  // Combine block accumulators in block order.
  std::vector<cplx> g(use_sumgrid ? ctx.sumgrid().size() : 0, 0.0);
  std::vector<cplx> gpow(use_sumgrid ? 0 : m, 0.0);
  std::vector<cplx> r1(k1, 0.0);
  std::vector<cplx> r2(k2, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto& blk = partial[b];
    for (std::size_t s = 0; s < g.size(); ++s) g[s] += blk.g[s];
    for (std::size_t k = 0; k < gpow.size(); ++k) gpow[k] += blk.gpow[k];
    for (std::size_t j = 0; j < k2; ++j) r2[j] += blk.r2[j];
    std::copy(blk.r1.begin(), blk.r1.end(), r1.begin() + static_cast<long>(row_begin(b)));
  }

  // T[k] = sum_s G_s s^k - sum_i R1_i t1_i^k - sum_j R2_j t2_j^k
  std::vector<cplx> terms(m, 0.0);
  auto add_powers = [&](std::span<const double> t, const std::vector<cplx>& coef, double sign) {
    for (std::size_t a = 0; a < t.size(); ++a) {
      double pw = 1.0;
      for (std::size_t k = 0; k < m; ++k) {
        pw *= t[a];
        terms[k] += sign * pw * coef[a];
      }
    }
  };
  if (use_sumgrid) {
    add_powers(ctx.sumgrid(), g, 1.0);
  } else {
    for (std::size_t k = 0; k < m; ++k) terms[k] += gpow[k];
  }
  add_powers(tab.grid1, r1, -1.0);
  add_powers(tab.grid2, r2, -1.0);

  out.gradient.resize(m);
  for (std::size_t k = 1; k <= m; ++k) {
    // d phi / d theta_k = t^k (even k) or i t^k (odd k); Re(i z) = -Im(z).
    const cplx t = terms[k - 1];
    const double re = (k % 2 == 0) ? t.real() : -t.imag();
    out.gradient[k - 1] = 2.0 * w * re;
  }
  return out;
}

}  // namespace

CriterionContext::CriterionContext(const PairedSample& sample, const QuadGrid& grid,
                                   CriterionOptions options)
    : grid_(grid), options_(options), n_(sample.size()) {
  grid_.validate();
  if (options_.partitions == 0) throw ValidationError("criterion partitions must be >= 1");
  if (options_.workers == 0) options_.workers = 1;
  table_ = ecf_table(sample, grid_);
  if (grid_.k1 == grid_.k2) {
    // t1_i + t2_j = -2 nu + (i + j + 1) step
    const std::size_t count = grid_.k1 + grid_.k2 - 1;
    const double step = grid_.step1();
    sumgrid_.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
      sumgrid_[s] = -2.0 * grid_.nu + (static_cast<double>(s) + 1.0) * step;
    }
  }
}

double criterion_value(const CriterionContext& ctx, const PolyCF& p) {
  return evaluate(ctx, p, false, ctx.has_sumgrid()).value;
}

double criterion_value_direct(const CriterionContext& ctx, const PolyCF& p) {
  return evaluate(ctx, p, false, false).value;
}

ValueAndGradient criterion_value_and_gradient(const CriterionContext& ctx, const PolyCF& p) {
  return evaluate(ctx, p, true, ctx.has_sumgrid());
}

std::vector<double> criterion_gradient(const CriterionContext& ctx, const PolyCF& p, double h_fd) {
  if (!(h_fd > 0.0)) throw ValidationError("finite-difference step must be > 0");
  const std::size_t m = p.degree();
  std::vector<double> theta(p.coeffs().begin(), p.coeffs().end());
  std::vector<double> grad(m);
  const double base_scale = 1.0 / (2.0 * ctx.grid().nu);
  double natural = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    natural *= base_scale;
    const double step = h_fd * std::max(std::abs(theta[k]), natural);
    auto shifted = theta;
    shifted[k] = theta[k] + step;
    const double fp = criterion_value(ctx, PolyCF(shifted));
    shifted[k] = theta[k] - step;
    const double fm = criterion_value(ctx, PolyCF(shifted));
    grad[k] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

}  // namespace rmdecon
