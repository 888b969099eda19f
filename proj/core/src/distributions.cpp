#include "rmdecon/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "rmdecon/error.hpp"

namespace rmdecon {

namespace detail {

// Bilateral gamma density on a regular grid, obtained by convolving the two
// gamma densities with the trapezoid rule. Built once per law instance.
struct DensityTable {
  std::once_flag once;
  double lo = 0.0;
  double step = 0.0;
  std::vector<double> values;

  double at(double t) const {
    if (values.empty()) return 0.0;
    const double pos = (t - lo) / step;
    if (pos < 0.0 || pos > static_cast<double>(values.size() - 1)) return 0.0;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
  }
};

}  // namespace detail

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTableStep = 0.001;
constexpr double kTailCut = 1e-12;

using cplx = std::complex<double>;
const cplx kI{0.0, 1.0};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterDomainError(std::string(what) + " must be a finite positive number");
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ParameterDomainError(std::string(what) + " must be finite");
}

void validate(const LawParams& p) {
  std::visit(overloaded{
                 [](const Gaussian& g) {
                   require_finite(g.mean, "gaussian mean");
                   require_positive(g.sd, "gaussian sd");
                 },
                 [](const Laplace& l) {
                   require_finite(l.location, "laplace location");
                   require_positive(l.scale, "laplace scale");
                 },
                 [](const Beta22&) {},
                 [](const Uniform& u) {
                   require_finite(u.a, "uniform a");
                   require_finite(u.b, "uniform b");
                   if (!(u.b > u.a)) throw ParameterDomainError("uniform requires a < b");
                 },
                 [](const DiracUniformMix&) {},
                 [](const Gamma& g) {
                   require_positive(g.shape, "gamma shape");
                   require_positive(g.rate, "gamma rate");
                 },
                 [](const BilateralGamma& b) {
                   require_positive(b.alpha, "bilateral gamma alpha");
                   require_positive(b.beta, "bilateral gamma beta");
                   require_positive(b.gamma, "bilateral gamma gamma");
                   require_positive(b.delta, "bilateral gamma delta");
                 },
                 [](const GaussianMixture& m) {
                   require_finite(m.m1, "mixture m1");
                   require_finite(m.m2, "mixture m2");
                   require_positive(m.s1, "mixture s1");
                   require_positive(m.s2, "mixture s2");
                   if (!(m.w >= 0.0 && m.w <= 1.0)) {
                     throw ParameterDomainError("mixture weight must lie in [0, 1]");
                   }
                 },
                 [](const ShiftedGamma& s) {
                   require_positive(s.shape, "shifted gamma shape");
                   require_positive(s.rate, "shifted gamma rate");
                   require_finite(s.shift, "shifted gamma shift");
                 },
             },
             p);
}

double gaussian_pdf(double t, double mean, double sd) {
  const double z = (t - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}

double gamma_pdf(double x, double shape, double rate) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (shape == 1.0) return rate;
    return shape < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                  std::lgamma(shape));
}

cplx gaussian_cf(double t, double mean, double sd) {
  return std::exp(cplx(-0.5 * sd * sd * t * t, mean * t));
}

cplx gamma_cf(double t, double shape, double rate) {
  return std::pow(cplx(1.0, -t / rate), -shape);
}

// (e^w - 1) / w for w purely imaginary.
cplx expm1_over(cplx w) {
  if (std::abs(w) < 0.5) {
    cplx term = 1.0;
    cplx sum = 1.0;
    for (int k = 1; k < 30; ++k) {
      term *= w / static_cast<double>(k + 1);
      sum += term;
    }
    return sum;
  }
  return (std::exp(w) - 1.0) / w;
}

cplx uniform_cf(double t, double a, double b) {
  return std::exp(kI * (a * t)) * expm1_over(kI * (t * (b - a)));
}

cplx beta22_cf(double t) {
  if (std::abs(t) < 1.0) {
    // sum_k (i t)^k mu_k / k!, mu_k = 6 / ((k + 2)(k + 3))
    cplx sum = 0.0;
    cplx power = 1.0;
    double fact = 1.0;
    for (int k = 0; k < 30; ++k) {
      if (k > 0) {
        power *= kI * t;
        fact *= k;
      }
      sum += power * (6.0 / ((k + 2.0) * (k + 3.0)) / fact);
    }
    return sum;
  }
  return 6.0 * (2.0 * kI - t - (t + 2.0 * kI) * std::exp(kI * t)) / (t * t * t);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

double std_normal_moment(int k) {
  if (k % 2 != 0) return 0.0;
  double r = 1.0;
  for (int j = k - 1; j > 0; j -= 2) r *= j;
  return r;
}

double gaussian_moment(int k, double mean, double sd) {
  double s = 0.0;
  for (int j = 0; j <= k; j += 2) {
    s += binomial(k, j) * std::pow(mean, k - j) * std::pow(sd, j) * std_normal_moment(j);
  }
  return s;
}

double gamma_moment(int k, double shape, double rate) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= (shape + j) / rate;
  return r;
}

double uniform_moment(int k, double a, double b) {
  return (std::pow(b, k + 1) - std::pow(a, k + 1)) / ((k + 1) * (b - a));
}

void build_bilateral_table(const BilateralGamma& bg, detail::DensityTable& table) {
  const double h = kTableStep;
  auto tail_end = [h](double shape, double rate) {
    const double mode = shape > 1.0 ? (shape - 1.0) / rate : 0.0;
    double x = mode + h;
    while (gamma_pdf(x, shape, rate) >= kTailCut) x += 0.25;
    return x;
  };
  const auto nu = static_cast<long>(std::ceil(tail_end(bg.alpha, bg.beta) / h));
  const auto nv = static_cast<long>(std::ceil(tail_end(bg.gamma, bg.delta) / h));

  std::vector<double> fu(static_cast<std::size_t>(nu + 1));
  std::vector<double> fv(static_cast<std::size_t>(nv + 1));
  for (long j = 0; j <= nu; ++j) fu[static_cast<std::size_t>(j)] = gamma_pdf(j * h, bg.alpha, bg.beta);
  for (long j = 0; j <= nv; ++j) fv[static_cast<std::size_t>(j)] = gamma_pdf(j * h, bg.gamma, bg.delta);
  // A singular endpoint (shape < 1) is replaced by the value half a step inside.
  if (!std::isfinite(fu[0])) fu[0] = gamma_pdf(0.5 * h, bg.alpha, bg.beta);
  if (!std::isfinite(fv[0])) fv[0] = gamma_pdf(0.5 * h, bg.gamma, bg.delta);

  // f(z_k) = int fU(u) fV(u - z_k) du with z_k = k h, u_j = j h, v = (j - k) h.
  table.lo = -static_cast<double>(nv) * h;
  table.step = h;
  table.values.assign(static_cast<std::size_t>(nu + nv + 1), 0.0);
  for (long k = -nv; k <= nu; ++k) {
    const long jlo = std::max(0L, k);
    const long jhi = std::min(nu, nv + k);
    double s = 0.0;
    for (long j = jlo; j <= jhi; ++j) {
      const double w = (j == jlo || j == jhi) ? 0.5 : 1.0;
      s += w * fu[static_cast<std::size_t>(j)] * fv[static_cast<std::size_t>(j - k)];
    }
    table.values[static_cast<std::size_t>(k + nv)] = jhi > jlo ? s * h : 0.0;
  }
}

}  // namespace

Law::Law(LawParams params) : params_(std::move(params)) {
  validate(params_);
  if (std::holds_alternative<BilateralGamma>(params_)) {
    table_ = std::make_shared<detail::DensityTable>();
  }
}

LawKind Law::kind() const noexcept { return static_cast<LawKind>(params_.index()); }

std::string Law::kind_name() const { return rmdecon::kind_name(kind()); }

std::string Law::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Gaussian& g) { os << "N(" << g.mean << ", " << g.sd << "^2)"; },
                 [&](const Laplace& l) { os << "Laplace(" << l.location << ", " << l.scale << ")"; },
                 [&](const Beta22&) { os << "Beta(2,2)"; },
                 [&](const Uniform& u) { os << "U(" << u.a << ", " << u.b << ")"; },
                 [&](const DiracUniformMix&) { os << "1/2 delta(-1) + 1/2 U(-1,3)"; },
                 [&](const Gamma& g) { os << "Gamma(" << g.shape << ", " << g.rate << ")"; },
                 [&](const BilateralGamma& b) {
                   os << "bGamma(" << b.alpha << ", " << b.beta << ", " << b.gamma << ", "
                      << b.delta << ")";
                 },
                 [&](const GaussianMixture& m) {
                   os << m.w << " N(" << m.m1 << ", " << m.s1 << "^2) + " << (1.0 - m.w) << " N("
                      << m.m2 << ", " << m.s2 << "^2)";
                 },
                 [&](const ShiftedGamma& s) {
                   os << "Gamma(" << s.shape << ", " << s.rate << ") + " << s.shift;
                 },
             },
             params_);
  return os.str();
}

const detail::DensityTable& Law::density_table() const {
  const auto* bg = std::get_if<BilateralGamma>(&params_);
  if (bg == nullptr || !table_) throw DomainError("density table exists only for bilateral gamma");
  std::call_once(table_->once, [&] { build_bilateral_table(*bg, *table_); });
  return *table_;
}

std::vector<double> sample(const Law& law, std::size_t n, Rng& rng) {
  if (n == 0) throw ValidationError("sample size must be >= 1");
  std::vector<double> out(n);
  std::visit(overloaded{
                 [&](const Gaussian& g) {
                   std::normal_distribution<double> d(g.mean, g.sd);
                   for (auto& x : out) x = d(rng);
                 },
                 [&](const Laplace& l) {
                   std::exponential_distribution<double> e(1.0);
                   for (auto& x : out) {
                     const double a = e(rng);
                     x = l.location + l.scale * (a - e(rng));
                   }
                 },
                 [&](const Beta22&) {
                   std::gamma_distribution<double> g(2.0, 1.0);
                   for (auto& x : out) {
                     const double a = g(rng);
                     const double b = g(rng);
                     x = a / (a + b);
                   }
                 },
                 [&](const Uniform& u) {
                   std::uniform_real_distribution<double> d(u.a, u.b);
                   for (auto& x : out) x = d(rng);
                 },
                 [&](const DiracUniformMix&) {
                   std::bernoulli_distribution atom(0.5);
                   std::uniform_real_distribution<double> d(-1.0, 3.0);
                   for (auto& x : out) x = atom(rng) ? -1.0 : d(rng);
                 },
                 [&](const Gamma& g) {
                   std::gamma_distribution<double> d(g.shape, 1.0 / g.rate);
                   for (auto& x : out) x = d(rng);
                 },
                 [&](const BilateralGamma& b) {
                   std::gamma_distribution<double> du(b.alpha, 1.0 / b.beta);
                   std::gamma_distribution<double> dv(b.gamma, 1.0 / b.delta);
                   for (auto& x : out) {
                     const double u = du(rng);
                     x = u - dv(rng);
                   }
                 },
                 [&](const GaussianMixture& m) {
                   std::bernoulli_distribution first(m.w);
                   std::normal_distribution<double> z(0.0, 1.0);
                   for (auto& x : out) {
                     const bool c = first(rng);
                     x = c ? m.m1 + m.s1 * z(rng) : m.m2 + m.s2 * z(rng);
                   }
                 },
                 [&](const ShiftedGamma& s) {
                   std::gamma_distribution<double> d(s.shape, 1.0 / s.rate);
                   for (auto& x : out) x = d(rng) + s.shift;
                 },
             },
             law.params());
  return out;
}

double density(const Law& law, double t) {
  return std::visit(
      overloaded{
          [&](const Gaussian& g) { return gaussian_pdf(t, g.mean, g.sd); },
          [&](const Laplace& l) {
            return std::exp(-std::abs(t - l.location) / l.scale) / (2.0 * l.scale);
          },
          [&](const Beta22&) { return (t > 0.0 && t < 1.0) ? 6.0 * t * (1.0 - t) : 0.0; },
          [&](const Uniform& u) { return (t >= u.a && t <= u.b) ? 1.0 / (u.b - u.a) : 0.0; },
          [&](const DiracUniformMix&) -> double {
            throw NoDensityError("1/2 delta(-1) + 1/2 U(-1,3) has an atom and no density");
          },
          [&](const Gamma& g) { return gamma_pdf(t, g.shape, g.rate); },
          [&](const BilateralGamma&) { return law.density_table().at(t); },
          [&](const GaussianMixture& m) {
            return m.w * gaussian_pdf(t, m.m1, m.s1) + (1.0 - m.w) * gaussian_pdf(t, m.m2, m.s2);
          },
          [&](const ShiftedGamma& s) { return gamma_pdf(t - s.shift, s.shape, s.rate); },
      },
      law.params());
}

std::complex<double> cf(const Law& law, double t) {
  return std::visit(
      overloaded{
          [&](const Gaussian& g) { return gaussian_cf(t, g.mean, g.sd); },
          [&](const Laplace& l) {
            return std::exp(kI * (l.location * t)) / (1.0 + l.scale * l.scale * t * t);
          },
          [&](const Beta22&) { return beta22_cf(t); },
          [&](const Uniform& u) { return uniform_cf(t, u.a, u.b); },
          [&](const DiracUniformMix&) {
            return 0.5 * std::exp(cplx(0.0, -t)) + 0.5 * uniform_cf(t, -1.0, 3.0);
          },
          [&](const Gamma& g) { return gamma_cf(t, g.shape, g.rate); },
          [&](const BilateralGamma& b) {
            return gamma_cf(t, b.alpha, b.beta) * gamma_cf(-t, b.gamma, b.delta);
          },
          [&](const GaussianMixture& m) {
            return m.w * gaussian_cf(t, m.m1, m.s1) + (1.0 - m.w) * gaussian_cf(t, m.m2, m.s2);
          },
          [&](const ShiftedGamma& s) {
            return std::exp(kI * (s.shift * t)) * gamma_cf(t, s.shape, s.rate);
          },
      },
      law.params());
}

double raw_moment(const Law& law, int k) {
  if (k < 0) throw DomainError("moment order must be >= 0");
  if (k == 0) return 1.0;
  return std::visit(
      overloaded{
          [&](const Gaussian& g) { return gaussian_moment(k, g.mean, g.sd); },
          [&](const Laplace& l) {
            // E[(loc + b L)^k] with E[L^j] = j! for even j, 0 for odd j.
            double s = 0.0;
            double fact = 1.0;
            for (int j = 0; j <= k; ++j) {
              if (j > 0) fact *= j;
              if (j % 2 == 0) {
                s += binomial(k, j) * std::pow(l.location, k - j) * std::pow(l.scale, j) * fact;
              }
            }
            return s;
          },
          [&](const Beta22&) { return 6.0 / ((k + 2.0) * (k + 3.0)); },
          [&](const Uniform& u) { return uniform_moment(k, u.a, u.b); },
          [&](const DiracUniformMix&) {
            return 0.5 * (k % 2 == 0 ? 1.0 : -1.0) + 0.5 * uniform_moment(k, -1.0, 3.0);
          },
          [&](const Gamma& g) { return gamma_moment(k, g.shape, g.rate); },
          [&](const BilateralGamma& b) {
            double s = 0.0;
            for (int j = 0; j <= k; ++j) {
              const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
              s += binomial(k, j) * gamma_moment(j, b.alpha, b.beta) * sign *
                   gamma_moment(k - j, b.gamma, b.delta);
            }
            return s;
          },
          [&](const GaussianMixture& m) {
            return m.w * gaussian_moment(k, m.m1, m.s1) +
                   (1.0 - m.w) * gaussian_moment(k, m.m2, m.s2);
          },
          [&](const ShiftedGamma& s) {
            double r = 0.0;
            for (int j = 0; j <= k; ++j) {
              r += binomial(k, j) * gamma_moment(j, s.shape, s.rate) * std::pow(s.shift, k - j);
            }
            return r;
          },
      },
      law.params());
}

std::string kind_name(LawKind kind) {
  switch (kind) {
    case LawKind::gaussian: return "gaussian";
    case LawKind::laplace: return "laplace";
    case LawKind::beta22: return "beta22";
    case LawKind::uniform: return "uniform";
    case LawKind::dirac_uniform_mix: return "dirac_uniform_mix";
    case LawKind::gamma: return "gamma";
    case LawKind::bilateral_gamma: return "bilateral_gamma";
    case LawKind::gaussian_mixture: return "gaussian_mixture";
    case LawKind::shifted_gamma: return "shifted_gamma";
  }
  return "unknown";
}

LawKind kind_from_name(const std::string& name) {
  for (int k = 0; k < static_cast<int>(std::variant_size_v<LawParams>); ++k) {
    const auto kind = static_cast<LawKind>(k);
    if (kind_name(kind) == name) return kind;
  }
  throw ValidationError("unknown law kind '" + name + "'");
}

}  // namespace rmdecon
