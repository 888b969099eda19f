#include "rmdecon/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rmdecon/error.hpp"

namespace rmdecon {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

ordered_json law_json(const Law& law) {
  ordered_json params = std::visit(
      overloaded{
          [](const Gaussian& p) { return ordered_json{{"mean", p.mean}, {"sd", p.sd}}; },
          [](const Laplace& p) { return ordered_json{{"location", p.location}, {"scale", p.scale}}; },
          [](const Beta22&) { return ordered_json::object(); },
          [](const Uniform& p) { return ordered_json{{"a", p.a}, {"b", p.b}}; },
          [](const DiracUniformMix&) { return ordered_json::object(); },
          [](const Gamma& p) { return ordered_json{{"shape", p.shape}, {"rate", p.rate}}; },
          [](const BilateralGamma& p) {
            return ordered_json{{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"delta", p.delta}};
          },
          [](const GaussianMixture& p) {
            return ordered_json{{"m1", p.m1}, {"s1", p.s1}, {"m2", p.m2}, {"s2", p.s2}, {"w", p.w}};
          },
          [](const ShiftedGamma& p) {
            return ordered_json{{"shape", p.shape}, {"rate", p.rate}, {"shift", p.shift}};
          },
      },
      law.params());
  return ordered_json{{"kind", law.kind_name()}, {"params", params}};
}

Law law_of(const json& j) {
  const auto kind = kind_from_name(j.at("kind").get<std::string>());
  const json p = j.value("params", json::object());
  switch (kind) {
    case LawKind::gaussian: return Gaussian{p.at("mean"), p.at("sd")};
    case LawKind::laplace: return Laplace{p.at("location"), p.at("scale")};
    case LawKind::beta22: return Beta22{};
    case LawKind::uniform: return Uniform{p.at("a"), p.at("b")};
    case LawKind::dirac_uniform_mix: return DiracUniformMix{};
    case LawKind::gamma: return Gamma{p.at("shape"), p.at("rate")};
    case LawKind::bilateral_gamma:
      return BilateralGamma{p.at("alpha"), p.at("beta"), p.at("gamma"), p.at("delta")};
    case LawKind::gaussian_mixture:
      return GaussianMixture{p.at("m1"), p.at("s1"), p.at("m2"), p.at("s2"), p.at("w")};
    case LawKind::shifted_gamma: return ShiftedGamma{p.at("shape"), p.at("rate"), p.at("shift")};
  }
  throw ParseError("unknown law kind");
}

ordered_json params_json(const EstimatorParams& p) {
  return ordered_json{{"m", p.m}, {"nu_est", p.nu_est}, {"h", p.h}};
}

const char* method_name(OptimizerMethod m) {
  return m == OptimizerMethod::nelder_mead ? "nelder-mead" : "quasi-newton-fd";
}

const char* init_name(InitKind k) {
  switch (k) {
    case InitKind::oracle_projection: return "oracle-projection";
    case InitKind::zeros: return "zeros";
    case InitKind::given: return "given";
  }
  return "zeros";
}

ordered_json poly_json(const PolyCF& p) {
  return ordered_json{{"convention", "even-real-odd-imag"},
                      {"m", p.degree()},
                      {"coeffs", std::vector<double>(p.coeffs().begin(), p.coeffs().end())}};
}

ordered_json optimizer_json(const OptimizerConfig& c) {
  return ordered_json{{"method", method_name(c.method)},
                      {"max_iters", c.max_iters},
                      {"ftol", c.ftol},
                      {"gtol", c.gtol},
                      {"init", init_name(c.init)},
                      {"clamp", c.clamp},
                      {"upsilon", {{"rho", c.upsilon.rho}, {"S", c.upsilon.S}}},
                      {"restarts", c.restarts},
                      {"seed", c.seed},
                      {"analytic_gradient", c.analytic_gradient},
                      {"fd_step", c.fd_step},
                      {"precondition", c.precondition}};
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string("unexpected JSON content: ") + e.what());
  }
}

// Non-finite numbers have no JSON literal; they are written as strings.
ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string to_json(const Law& law) { return law_json(law).dump(2); }

std::string to_json(const ScenarioSpec& spec) {
  ordered_json j{{"name", spec.name},
                 {"signal", law_json(spec.signal)},
                 {"noise", law_json(spec.noise)},
                 {"n", spec.n},
                 {"seed", spec.seed}};
  return j.dump(2);
}

std::string to_json(const PolyCF& p) { return poly_json(p).dump(2); }

std::string to_json(const EstimatorParams& params) { return params_json(params).dump(2); }

std::string to_json(const OptimizerConfig& cfg) { return optimizer_json(cfg).dump(2); }

std::string to_json(const FitResult& fit, const OptimizerConfig& cfg) {
  ordered_json j{{"phi_hat", poly_json(fit.phi_hat)},
                 {"objective", number(fit.objective)},
                 {"init_objective", number(fit.init_objective)},
                 {"iterations", fit.iterations},
                 {"converged", fit.converged},
                 {"fell_back", fit.fell_back},
                 {"config", optimizer_json(cfg)}};
  return j.dump(2);
}

std::string to_json(const DensityEstimate& est) {
  ordered_json j{{"params", params_json(est.params)},
                 {"clipped", est.clipped},
                 {"points", est.grid.size()},
                 {"lo", est.grid.empty() ? 0.0 : est.grid.front()},
                 {"hi", est.grid.empty() ? 0.0 : est.grid.back()}};
  return j.dump(2);
}

std::string to_json(const CvResult& result) {
  ordered_json j{{"best", params_json(result.best)},
                 {"best_q", result.best_q},
                 {"best_cv", number(result.best_cv)},
                 {"failures", result.failures}};
  return j.dump(2);
}

Law law_from_json(const std::string& text) {
  const auto j = parse(text);
  return guarded([&] { return law_of(j); });
}

ScenarioSpec scenario_from_json(const std::string& text) {
  const auto j = parse(text);
  return guarded([&] {
    ScenarioSpec s;
    s.name = j.value("name", std::string("custom"));
    s.signal = law_of(j.at("signal"));
    s.noise = law_of(j.at("noise"));
    s.n = j.at("n").get<std::size_t>();
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
  });
}

PolyCF poly_from_json(const std::string& text) {
  const auto j = parse(text);
  return guarded([&] {
    if (j.value("convention", std::string("even-real-odd-imag")) != "even-real-odd-imag") {
      throw ParseError("unsupported coefficient convention");
    }
    auto coeffs = j.at("coeffs").get<std::vector<double>>();
    if (j.contains("m") && j.at("m").get<std::size_t>() != coeffs.size()) {
      throw ParseError("coefficient count does not match m");
    }
    return PolyCF(std::move(coeffs));
  });
}

EstimatorParams params_from_json(const std::string& text) {
  const auto j = parse(text);
  return guarded([&] {
    EstimatorParams p;
    p.m = j.at("m").get<std::size_t>();
    p.nu_est = j.at("nu_est").get<double>();
    p.h = j.at("h").get<double>();
    return p;
  });
}

std::filesystem::path sidecar_path(const std::filesystem::path& data_path) {
  auto p = data_path;
  p.replace_extension(".json");
  if (p == data_path) p += ".meta.json";
  return p;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rmdecon
