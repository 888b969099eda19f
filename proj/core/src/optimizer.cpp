#include "rmdecon/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "rmdecon/error.hpp"
#include "rmdecon/parallel.hpp"

namespace rmdecon {

namespace {

using Vec = std::vector<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const Vec& a) {
  double s = 0.0;
  for (const double v : a) s = std::max(s, std::abs(v));
  return s;
}

bool all_finite(const Vec& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

// Objective in search coordinates z, with theta_k = scale_k z_k.
class Objective {
public:
  Objective(const CriterionContext& ctx, const OptimizerConfig& cfg, std::size_t m)
      : ctx_(ctx), cfg_(cfg), scale_(m, 1.0) {
    if (cfg.precondition) {
      const double base = 1.0 / (2.0 * ctx.grid().nu);
      double s = 1.0;
      for (auto& v : scale_) v = (s *= base);
    }
  }

  Vec to_theta(const Vec& z) const {
    Vec t(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) t[k] = z[k] * scale_[k];
    return t;
  }
  Vec to_z(std::span<const double> theta) const {
    Vec z(theta.size());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = theta[k] / scale_[k];
    return z;
  }

  // Applies the optional Upsilon projection in theta space.
  Vec project(const Vec& z) const {
    if (!cfg_.clamp) return z;
    return to_z(clamp_to_upsilon(PolyCF(to_theta(z)), cfg_.upsilon).coeffs());
  }

  double value(const Vec& z) const {
    ++evaluations;
    const double v = criterion_value(ctx_, PolyCF(to_theta(z)));
    return std::isfinite(v) ? v : kInf;
  }

  // Value and gradient with respect to z. Also reports the theta-gradient norm.
  double value_grad(const Vec& z, Vec& gz, double& theta_grad_norm) const {
    ++evaluations;
    const PolyCF p(to_theta(z));
    double v = 0.0;
    Vec gt;
    if (cfg_.analytic_gradient) {
      auto vg = criterion_value_and_gradient(ctx_, p);
      v = vg.value;
      gt = std::move(vg.gradient);
    } else {
      v = criterion_value(ctx_, p);
      gt = criterion_gradient(ctx_, p, cfg_.fd_step);
    }
    theta_grad_norm = inf_norm(gt);
    gz.resize(gt.size());
    for (std::size_t k = 0; k < gt.size(); ++k) gz[k] = gt[k] * scale_[k];
    if (!std::isfinite(v) || !all_finite(gz)) return kInf;
    return v;
  }

  mutable std::size_t evaluations = 0;

private:
  const CriterionContext& ctx_;
  const OptimizerConfig& cfg_;
  Vec scale_;
};

struct SearchOutcome {
  Vec z;
  double f = kInf;
  std::size_t iterations = 0;
  bool converged = false;
};

struct LinePoint {
  double alpha = 0.0;
  double f = kInf;
  double d = 0.0;
  Vec g;
  double gnorm = 0.0;
};

// Strong Wolfe line search (bracketing + safeguarded cubic zoom).
std::optional<LinePoint> wolfe_search(const Objective& obj, const Vec& x, double f0, double d0,
                                      const Vec& dir, double alpha1) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  auto eval = [&](double a) {
    LinePoint p;
    p.alpha = a;
    Vec xt(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + a * dir[i];
    p.f = obj.value_grad(xt, p.g, p.gnorm);
    p.d = std::isfinite(p.f) ? dot(p.g, dir) : 0.0;
    return p;
  };
  auto armijo = [&](const LinePoint& p) { return p.f <= f0 + c1 * p.alpha * d0; };

  std::optional<LinePoint> best_armijo;
  auto note = [&](const LinePoint& p) {
    if (std::isfinite(p.f) && p.f < f0 && armijo(p) && (!best_armijo || p.f < best_armijo->f)) {
      best_armijo = p;
    }
  };

  auto zoom = [&](LinePoint lo, LinePoint hi) -> std::optional<LinePoint> {
    for (int it = 0; it < 40; ++it) {
      double a;
      const double lo_a = std::min(lo.alpha, hi.alpha), hi_a = std::max(lo.alpha, hi.alpha);
      if (std::isfinite(hi.f)) {
        // Cubic interpolation from the two endpoints' values and slopes.
        const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
        const double disc = d1 * d1 - lo.d * hi.d;
        if (disc >= 0.0) {
          const double d2 = std::copysign(std::sqrt(disc), hi.alpha - lo.alpha);
          a = hi.alpha - (hi.alpha - lo.alpha) * (hi.d + d2 - d1) / (hi.d - lo.d + 2.0 * d2);
        } else {
          a = 0.5 * (lo.alpha + hi.alpha);
        }
      } else {
        a = 0.5 * (lo.alpha + hi.alpha);
      }
      const double margin = 0.1 * (hi_a - lo_a);
      if (!std::isfinite(a) || a < lo_a + margin || a > hi_a - margin) a = 0.5 * (lo_a + hi_a);
      if (hi_a - lo_a < 1e-16 * std::max(1.0, hi_a)) break;
      const auto p = eval(a);
      note(p);
      if (!std::isfinite(p.f) || !armijo(p) || p.f >= lo.f) {
        hi = p;
      } else {
        if (std::abs(p.d) <= -c2 * d0) return p;
        if (p.d * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = p;
      }
    }
    return std::nullopt;
  };

  LinePoint prev;
  prev.alpha = 0.0;
  prev.f = f0;
  prev.d = d0;
  double a = alpha1;
  for (int it = 0; it < 30; ++it) {
    const auto p = eval(a);
    note(p);
    std::optional<LinePoint> r;
    bool done = false;
    if (!std::isfinite(p.f) || !armijo(p) || (it > 0 && p.f >= prev.f)) {
      r = zoom(prev, p);
      done = true;
    } else if (std::abs(p.d) <= -c2 * d0) {
      return p;
    } else if (p.d >= 0.0) {
      r = zoom(p, prev);
      done = true;
    }
    if (done) return r ? r : best_armijo;
    prev = p;
    a *= 2.0;
  }
  return best_armijo;
}

SearchOutcome bfgs(const Objective& obj, Vec x, const OptimizerConfig& cfg) {
  const std::size_t n = x.size();
  SearchOutcome out;
  Vec g;
  double gnorm_theta = 0.0;
  double f = obj.value_grad(x, g, gnorm_theta);
  out.z = x;
  out.f = f;
  if (!std::isfinite(f)) return out;
  if (n == 0) {
    out.converged = true;
    return out;
  }

  std::vector<Vec> H(n, Vec(n, 0.0));
  auto reset_h = [&](double diag) {
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(H[i].begin(), H[i].end(), 0.0);
      H[i][i] = diag;
    }
  };
  reset_h(1.0);
  bool identity = true;
  double alpha_init = 1.0 / std::max(1.0, inf_norm(g));

  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    if (gnorm_theta <= cfg.gtol) {
      out.converged = true;
      break;
    }
    Vec dir(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) dir[i] -= H[i][j] * g[j];
    }
    double d0 = dot(g, dir);
    if (!(d0 < 0.0)) {
      reset_h(1.0);
      identity = true;
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      d0 = dot(g, dir);
    }
    auto step = wolfe_search(obj, x, f, d0, dir, identity ? alpha_init : 1.0);
    if (!step && !identity) {
      reset_h(1.0);
      identity = true;
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      d0 = dot(g, dir);
      step = wolfe_search(obj, x, f, d0, dir, 1.0 / std::max(1.0, inf_norm(g)));
    }
    out.iterations = iter + 1;
    if (!step) break;  // no descent possible along any tried direction

    Vec xn(n);
    for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step->alpha * dir[i];
    Vec gn = step->g;
    double fn = step->f;
    double gnorm_n = step->gnorm;
    if (cfg.clamp) {
      const Vec projected = obj.project(xn);
      if (projected != xn) {
        xn = projected;
        fn = obj.value_grad(xn, gn, gnorm_n);
        if (!std::isfinite(fn) || fn > f) break;
      }
    }

    Vec s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
    }
    const double sy = dot(s, y);
    const double rel_decrease = (f - fn) / std::max({std::abs(f), std::abs(fn), 1e-300});
    x = std::move(xn);
    g = std::move(gn);
    f = fn;
    gnorm_theta = gnorm_n;

    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (identity) {
        reset_h(sy / dot(y, y));
        identity = false;
      }
      // H <- (I - r s y^T) H (I - r y s^T) + r s s^T
      const double r = 1.0 / sy;
      Vec hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) hy[i] += H[i][j] * y[j];
      }
      const double yhy = dot(y, hy);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i][j] += (1.0 + r * yhy) * r * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
      }
    }
    if (rel_decrease < cfg.ftol) {
      out.converged = true;
      break;
    }
  }
  out.z = x;
  out.f = f;
  if (!out.converged && gnorm_theta <= cfg.gtol) out.converged = true;
  return out;
}

SearchOutcome nelder_mead(const Objective& obj, const Vec& x0, const OptimizerConfig& cfg) {
  const std::size_t n = x0.size();
  SearchOutcome out;
  out.z = x0;
  out.f = obj.value(x0);
  if (!std::isfinite(out.f)) return out;
  if (n == 0) {
    out.converged = true;
    return out;
  }
  constexpr double rho = 1.0, chi = 2.0, psi = 0.5, sigma = 0.5;
  std::vector<Vec> simplex(n + 1, x0);
  std::vector<double> fv(n + 1, out.f);
  for (std::size_t k = 0; k < n; ++k) {
    simplex[k + 1][k] = x0[k] != 0.0 ? 1.05 * x0[k] : 0.00025;
    simplex[k + 1] = obj.project(simplex[k + 1]);
    fv[k + 1] = obj.value(simplex[k + 1]);
  }
  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    std::vector<Vec> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = simplex[order[i]];
      f2[i] = fv[order[i]];
    }
    simplex = std::move(s2);
    fv = std::move(f2);
  };
  auto affine = [&](const Vec& c, const Vec& w, double t) {
    Vec r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = c[i] + t * (w[i] - c[i]);
    return obj.project(r);
  };

  sort_simplex();
  double last_best = fv[0];
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    out.iterations = iter + 1;
    Vec centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    }
    const Vec xr = affine(centroid, simplex[n], -rho);
    const double fr = obj.value(xr);
    if (fr < fv[0]) {
      const Vec xe = affine(centroid, simplex[n], -rho * chi);
      const double fe = obj.value(xe);
      if (fe < fr) {
        simplex[n] = xe, fv[n] = fe;
      } else {
        simplex[n] = xr, fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr, fv[n] = fr;
    } else {
      bool shrink = false;
      if (fr < fv[n]) {
        const Vec xc = affine(centroid, simplex[n], -rho * psi);
        const double fc = obj.value(xc);
        if (fc <= fr) {
          simplex[n] = xc, fv[n] = fc;
        } else {
          shrink = true;
        }
      } else {
        const Vec xcc = affine(centroid, simplex[n], psi);
        const double fcc = obj.value(xcc);
        if (fcc < fv[n]) {
          simplex[n] = xcc, fv[n] = fcc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 1; i <= n; ++i) {
          simplex[i] = affine(simplex[0], simplex[i], sigma);
          fv[i] = obj.value(simplex[i]);
        }
      }
    }
    sort_simplex();
    const double spread = fv[n] - fv[0];
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[0][k]));
      }
    }
    const bool flat = std::isfinite(spread) && spread <= cfg.ftol * std::max(std::abs(fv[0]), 1e-300);
    if (flat && diameter < 1e-8 * (1.0 + inf_norm(simplex[0]))) {
      out.converged = true;
      break;
    }
    if (iter > 5 * n && last_best - fv[0] == 0.0 && flat) {
      out.converged = true;
      break;
    }
    last_best = fv[0];
  }
  out.z = simplex[0];
  out.f = fv[0];
  return out;
}

SearchOutcome run_search(const Objective& obj, const Vec& z0, const OptimizerConfig& cfg) {
  return cfg.method == OptimizerMethod::nelder_mead ? nelder_mead(obj, z0, cfg) : bfgs(obj, z0, cfg);
}

}  // namespace

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw ValidationError("optimizer max_iters must be >= 1");
  if (!(ftol > 0.0)) throw ValidationError("optimizer ftol must be > 0");
  if (!(gtol >= 0.0)) throw ValidationError("optimizer gtol must be >= 0");
  if (!(fd_step > 0.0)) throw ValidationError("finite-difference step must be > 0");
  if (init == InitKind::given && !given) throw ValidationError("init 'given' requires a polynomial");
  if (clamp) upsilon.validate();
}

PolyCF initial_point(std::size_t m, const OptimizerConfig& cfg, const Law* oracle_law) {
  switch (cfg.init) {
    case InitKind::oracle_projection:
      if (oracle_law == nullptr) {
        throw ValidationError("oracle-projection init requires the signal law");
      }
      return project_cf(*oracle_law, m);
    case InitKind::zeros:
      return PolyCF::constant(m);
    case InitKind::given: {
      std::vector<double> c(m, 0.0);
      const auto src = cfg.given->coeffs();
      std::copy_n(src.begin(), std::min(m, src.size()), c.begin());
      return PolyCF(std::move(c));
    }
  }
  return PolyCF::constant(m);
}

FitResult fit_cf(const CriterionContext& ctx, std::size_t m, const OptimizerConfig& cfg,
                 const Law* oracle_law) {
  cfg.validate();
  const Objective obj(ctx, cfg, m);

  PolyCF start = initial_point(m, cfg, oracle_law);
  if (cfg.clamp) start = clamp_to_upsilon(start, cfg.upsilon);
  const Vec start_theta(start.coeffs().begin(), start.coeffs().end());
  const Vec z0 = obj.to_z(start_theta);
  const double f0 = obj.value(z0);
  if (!std::isfinite(f0)) {
    throw NumericalFailure("criterion is not finite at the starting point", start_theta);
  }

  SearchOutcome best = run_search(obj, z0, cfg);
  std::size_t total_iters = best.iterations;

  for (std::size_t r = 1; r <= cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, r));
    std::normal_distribution<double> jitter(0.0, 1.0);
    Vec theta = start_theta;
    for (std::size_t k = 0; k < m; ++k) {
      const double sd = cfg.clamp ? 0.1 * cfg.upsilon.bound(k + 1) : 0.1;
      theta[k] += sd * jitter(rng);
    }
    const Vec zr = obj.project(obj.to_z(theta));
    const SearchOutcome cand = run_search(obj, zr, cfg);
    total_iters += cand.iterations;
    if (cand.f < best.f) best = cand;
  }

  FitResult res;
  res.init_objective = f0;
  res.iterations = total_iters;
  if (!std::isfinite(best.f) || best.f > f0) {
    res.phi_hat = start;
    res.objective = f0;
    res.fell_back = true;
    res.converged = false;
  } else {
    res.phi_hat = PolyCF(obj.to_theta(best.z));
    res.objective = best.f;
    res.converged = best.converged;
  }
  if (!std::isfinite(res.objective)) {
    throw NumericalFailure("objective diverged", Vec(res.phi_hat.coeffs().begin(), res.phi_hat.coeffs().end()));
  }
  return res;
}

std::map<std::size_t, DegreeFit> fit_cf_over_degrees(const CriterionContext& ctx,
                                                     std::span<const std::size_t> degrees,
                                                     const OptimizerConfig& cfg,
                                                     const Law* oracle_law) {
  if (degrees.empty()) throw ValidationError("degree list must be non-empty");
  const std::set<std::size_t> unique(degrees.begin(), degrees.end());
  if (unique.size() != degrees.size()) throw ValidationError("degree list contains duplicates");
  std::map<std::size_t, DegreeFit> out;
  for (const auto m : degrees) {
    DegreeFit entry;
    try {
      entry.result = fit_cf(ctx, m, cfg, oracle_law);
    } catch (const Error& e) {
      entry.error = e.what();
    }
    out.emplace(m, std::move(entry));
  }
  return out;
}

}  // namespace rmdecon
