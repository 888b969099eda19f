#include "rmdecon/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "rmdecon/criterion.hpp"
#include "rmdecon/error.hpp"
#include "rmdecon/parallel.hpp"
#include "text_util.hpp"

namespace rmdecon {

namespace {

double log_ratio_base(std::size_t n) {
  if (n < 16) throw DomainError("rate term needs n >= 16, got n = " + std::to_string(n));
  const double ln_n = std::log(static_cast<double>(n));
  return std::log(ln_n) / ln_n;
}

double l2_distance(const DensityEstimate& a, const DensityEstimate& b) {
  return std::sqrt(l2_distance_squared(a, b));
}

}  // namespace

void RhoGrid::validate() const {
  if (rhos.empty()) throw ValidationError("rho grid is empty");
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (!(rhos[i] >= 1.0) || !std::isfinite(rhos[i])) throw ValidationError("rho values must be >= 1");
    if (i > 0 && !(rhos[i] > rhos[i - 1])) throw ValidationError("rho grid must be strictly increasing");
  }
  if (!(beta > 0.0)) throw ValidationError("beta must be > 0");
  if (!(c_sigma > 0.0)) throw ValidationError("c_sigma must be > 0");
}

double sigma_n(const RhoGrid& g, double rho) {
  g.validate();
  const double base = log_ratio_base(g.n);
  if (rho < 1.0 || rho > g.rho0()) throw DomainError("rho outside [1, rho_0]");
  return g.c_sigma * std::pow(base, 2.0 * g.beta / rho);
}

RhoSelection select_rho(const std::map<double, DensityEstimate>& fits, const RhoGrid& g) {
  g.validate();
  if (fits.empty()) throw ValidationError("select_rho needs at least one estimate");
  for (const auto& [rho, est] : fits) {
    if (std::find(g.rhos.begin(), g.rhos.end(), rho) == g.rhos.end()) {
      throw ValidationError("estimate for rho = " + detail::format_double(rho) + " is not on the grid");
    }
    if (!same_grid(est, fits.begin()->second)) throw DomainError("estimates live on different evaluation grids");
  }
  RhoSelection out;
  for (const auto& [rho, est] : fits) out.sigma_values[rho] = sigma_n(g, rho);
  double best = std::numeric_limits<double>::infinity();
  for (auto it = fits.begin(); it != fits.end(); ++it) {
    double a = 0.0;
    for (auto jt = it; jt != fits.end(); ++jt) {
      a = std::max(a, l2_distance(jt->second, it->second) - out.sigma_values[jt->first]);
    }
    out.a_values[it->first] = a;
    const double score = a + out.sigma_values[it->first];
    if (score < best) {
      best = score;
      out.rho_hat = it->first;
    }
  }
  return out;
}

void CombinationConfig::validate() const {
  if (!(c_adapt > 0.0)) throw ValidationError("c_adapt must be > 0");
  if (!(beta > 0.0)) throw ValidationError("beta must be > 0");
  if (!(rho >= 1.0)) throw ValidationError("rho must be >= 1");
}

double combination_threshold(const CombinationConfig& cfg, std::size_t n) {
  cfg.validate();
  return cfg.c_adapt * std::pow(log_ratio_base(n), 2.0 * cfg.beta / cfg.rho);
}

Combination combine(const DensityEstimate& f_main, const DensityEstimate& f_alt,
                    const CombinationConfig& cfg, std::size_t n) {
  Combination out;
  out.threshold = combination_threshold(cfg, n);
  out.distance_squared = l2_distance_squared(f_main, f_alt);
  if (out.distance_squared <= out.threshold) {
    out.branch = CombineBranch::alt;
    out.estimate = f_alt;
  } else {
    out.branch = CombineBranch::main;
    out.estimate = f_main;
  }
  return out;
}

DensityEstimate averaged_kde(const PairedSample& sample, std::span<const double> eval_grid) {
  const std::size_t n = sample.size();
  if (n < 2) throw ValidationError("kernel density estimate needs n >= 2");
  std::vector<double> z(n);
  for (std::size_t l = 0; l < n; ++l) z[l] = 0.5 * (sample.y1()[l] + sample.y2()[l]);
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw NumericalFailure("kernel bandwidth is zero (constant data)", {});
  const double bw = 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
  const double norm = 1.0 / (static_cast<double>(n) * bw * std::sqrt(2.0 * std::numbers::pi));
  DensityEstimate est;
  est.grid.assign(eval_grid.begin(), eval_grid.end());
  est.values.resize(eval_grid.size());
  for (std::size_t a = 0; a < eval_grid.size(); ++a) {
    double s = 0.0;
    for (double v : z) {
      const double u = (eval_grid[a] - v) / bw;
      s += std::exp(-0.5 * u * u);
    }
    est.values[a] = s * norm;
  }
  est.params.m = 0;
  est.params.h = bw;
  est.clipped = true;
  return est;
}

DensityEstimate estimate_noise_density(const PairedSample& sample, const PolyCF& phi_hat,
                                       int coordinate, double q,
                                       std::span<const double> eval_grid,
                                       const NoiseOptions& opts) {
  if (coordinate != 1 && coordinate != 2) throw ValidationError("coordinate must be 1 or 2");
  if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("noise cutoff q must be > 0");
  if (q > opts.max_cutoff) {
    throw DomainError("noise cutoff q = " + detail::format_double(q) + " exceeds the limit " +
                      detail::format_double(opts.max_cutoff));
  }
  auto ratio = [&](double t) -> std::complex<double> {
    const auto denom = phi_hat(t);
    if (std::abs(denom) < opts.cf_floor) return 0.0;
    auto r = ecf_marginal(sample, coordinate, t) / denom;
    const double mod = std::abs(r);
    if (mod > 1.0) r /= mod;
    return r;
  };
  auto est = clip(invert_cf(ratio, q, eval_grid, opts.quad_points));
  est.params.m = phi_hat.degree();
  return est;
}

DensityEstimate convolve(const DensityEstimate& f, const DensityEstimate& g) {
  if (f.grid.size() < 2 || g.grid.size() < 2) throw ValidationError("convolution needs gridded factors");
  const double step = std::min(f.spacing(), g.spacing());
  const double lo = f.grid.front() + g.grid.front();
  const double hi = f.grid.back() + g.grid.back();
  const auto out_points = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  const auto x_points = static_cast<std::size_t>(std::ceil((f.grid.back() - f.grid.front()) / step)) + 1;
  const auto xs = regular_grid(f.grid.front(), f.grid.back(), x_points);
  const double dx = (xs.back() - xs.front()) / static_cast<double>(x_points - 1);
  std::vector<double> fx(x_points);
  for (std::size_t a = 0; a < x_points; ++a) {
    fx[a] = interpolate(f, xs[a]) * ((a == 0 || a + 1 == x_points) ? 0.5 : 1.0);
  }
  DensityEstimate out;
  out.grid = regular_grid(lo, hi, out_points);
  out.values.resize(out_points);
  for (std::size_t b = 0; b < out_points; ++b) {
    double s = 0.0;
    for (std::size_t a = 0; a < x_points; ++a) {
      if (fx[a] != 0.0) s += fx[a] * interpolate(g, out.grid[b] - xs[a]);
    }
    out.values[b] = s * dx;
  }
  out.params = f.params;
  out.clipped = f.clipped && g.clipped;
  return out;
}

CvSplit make_cv_split(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n1 = n * 2 / 5;
  const std::size_t n2 = n * 2 / 5;
  CvSplit s;
  s.e1.assign(idx.begin(), idx.begin() + static_cast<long>(n1));
  s.e2.assign(idx.begin() + static_cast<long>(n1), idx.begin() + static_cast<long>(n1 + n2));
  s.t.assign(idx.begin() + static_cast<long>(n1 + n2), idx.end());
  return s;
}

std::vector<double> cv_q_grid(std::size_t n) {
  if (n < 81) throw ValidationError("cross-validation needs n >= 81");
  std::vector<double> q;
  for (std::size_t k = 1; k * k * k * k <= n; ++k) {
    q.push_back(static_cast<double>(k) / (4.0 * std::numbers::pi));
  }
  return q;
}

CvConfig CvConfig::defaults(std::size_t n, std::uint64_t seed) {
  CvConfig cfg;
  cfg.q_grid = cv_q_grid(n);
  cfg.split = make_cv_split(n, seed);
  return cfg;
}

void CvConfig::validate(std::size_t n) const {
  if (candidates.empty()) throw ValidationError("cross-validation needs at least one candidate");
  for (const auto& c : candidates) c.validate();
  if (q_grid.empty()) throw ValidationError("q grid is empty");
  for (double q : q_grid) {
    if (!(q > 0.0)) throw ValidationError("q values must be > 0");
  }
  if (!(floor_eps > 0.0)) throw ValidationError("floor_eps must be > 0");
  if (split.e1.size() < 10 || split.e2.size() < 10 || split.t.size() < 10) {
    throw ValidationError("each cross-validation block needs at least 10 observations");
  }
  std::vector<char> seen(n, 0);
  for (const auto* block : {&split.e1, &split.e2, &split.t}) {
    for (std::size_t i : *block) {
      if (i >= n || seen[i]) throw ValidationError("cross-validation blocks must partition the sample");
      seen[i] = 1;
    }
  }
  if (split.e1.size() + split.e2.size() + split.t.size() != n) {
    throw ValidationError("cross-validation blocks must cover the sample");
  }
  if (signal_points < 16 || noise_points < 16) throw ValidationError("cross-validation grids need >= 16 points");
}

FitPipeline default_fit_pipeline(std::size_t k, OptimizerConfig cfg) {
  return [k, cfg](const PairedSample& e1, const EstimatorParams& params) {
    QuadGrid grid;
    grid.nu = params.nu_est;
    grid.k1 = k;
    grid.k2 = k;
    const CriterionContext ctx(e1, grid);
    return fit_cf(ctx, params.m, cfg).phi_hat;
  };
}

CvResult cross_validate(const PairedSample& sample, const CvConfig& cfg,
                        const FitPipeline& pipeline) {
  cfg.validate(sample.size());
  const auto e1 = sample.subset(cfg.split.e1);
  const auto e2 = sample.subset(cfg.split.e2);
  const auto held = sample.subset(cfg.split.t);

  const auto [ymin, ymax] = std::minmax({*std::min_element(sample.y1().begin(), sample.y1().end()),
                                         *std::max_element(sample.y1().begin(), sample.y1().end()),
                                         *std::min_element(sample.y2().begin(), sample.y2().end()),
                                         *std::max_element(sample.y2().begin(), sample.y2().end())});
  const double span = ymax - ymin;
  const auto signal_grid = regular_grid(ymin, ymax, cfg.signal_points);
  const double q_min = *std::min_element(cfg.q_grid.begin(), cfg.q_grid.end());
  const double noise_half = std::max(span, 2.0 * std::numbers::pi / q_min);
  const auto noise_grid = regular_grid(-noise_half, noise_half, cfg.noise_points);

  const std::size_t nq = cfg.q_grid.size();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> scores(cfg.candidates.size(), std::vector<double>(nq, neg_inf));
  std::vector<std::string> errors(cfg.candidates.size());

  parallel_for(cfg.candidates.size(), cfg.workers, [&](std::size_t c) {
    const auto& params = cfg.candidates[c];
    try {
      const PolyCF phi_hat = pipeline(e1, params);
      const auto f_hat = clip(invert(phi_hat, params, signal_grid));
      for (std::size_t iq = 0; iq < nq; ++iq) {
        double cv = 0.0;
        for (int coord = 1; coord <= 2; ++coord) {
          const auto g_hat = estimate_noise_density(e2, phi_hat, coord, cfg.q_grid[iq], noise_grid, cfg.noise);
          const auto p_hat = convolve(f_hat, g_hat);
          const auto ys = coord == 1 ? held.y1() : held.y2();
          for (double y : ys) cv += std::log(std::max(interpolate(p_hat, y), cfg.floor_eps));
        }
        scores[c][iq] = std::isfinite(cv) ? cv : neg_inf;
      }
    } catch (const std::exception& e) {
      errors[c] = e.what();
      std::fill(scores[c].begin(), scores[c].end(), neg_inf);
    }
  });

  CvResult out;
  out.best = cfg.candidates.front();
  out.best_q = cfg.q_grid.front();
  for (std::size_t c = 0; c < cfg.candidates.size(); ++c) {
    if (!errors[c].empty()) out.failures.push_back(errors[c]);
    for (std::size_t iq = 0; iq < nq; ++iq) {
      out.table.push_back({cfg.candidates[c], cfg.q_grid[iq], scores[c][iq]});
      if (scores[c][iq] > out.best_cv) {
        out.best_cv = scores[c][iq];
        out.best = cfg.candidates[c];
        out.best_q = cfg.q_grid[iq];
      }
    }
  }
  return out;
}

void write_cv_csv(const CvResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "m,nu_est,h,q,cv\n";
  for (const auto& row : result.table) {
    out << row.params.m << ',' << detail::format_double(row.params.nu_est) << ','
        << detail::format_double(row.params.h) << ',' << detail::format_double(row.q) << ','
        << (std::isfinite(row.cv) ? detail::format_double(row.cv) : std::string("-inf")) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace rmdecon
