#include "biteuler/models.hpp"

#include "biteuler/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace biteuler {

namespace {

// Lyapunov scale of the Ginzburg-Landau entry. Coercivity with c = 1 needs
// |x| <= 1 + eps (1 + x^2) for all x, i.e. eps >= (sqrt(2) - 1) / 2.
constexpr double kGinzburgLandauEps = 0.25;

// Headroom multiplied onto the analytic rho so that the generator inequality
// holds with a strict margin at its maximiser.
constexpr double kRhoHeadroom = 1.05;

// Hoelder split of the L^2 error: 1/4 + 1/4 + 0 = 1/2.
constexpr double kHolderP = 4.0;
constexpr double kHolderQ0 = 4.0;
constexpr double kErrorExponent = 2.0;

LyapunovSpec holder_defaults() {
  LyapunovSpec spec;
  spec.p = kHolderP;
  spec.q0 = kHolderQ0;
  spec.q1 = std::numeric_limits<double>::infinity();
  spec.r = kErrorExponent;
  spec.U_bar = [](const Vector&) { return 0.0; };
  return spec;
}

// max over s >= 0 of (A + B s - 2 beta s^2) / (1 + s).
double max_rational_quartic(double A, double B, double beta) {
  double best = A;
  const double disc = 1.0 + (B - A) / (2.0 * beta);
  if (disc > 1.0) {
    const double s = -1.0 + std::sqrt(disc);
    best = std::max(best, (A + B * s - 2.0 * beta * s * s) / (1.0 + s));
  }
  return best;
}

}  // namespace

SdeModel model_gbm(double a, double b) {
  SdeModel model;
  model.name = "gbm";
  model.d = 1;
  model.m = 1;
  model.drift = [a](const Vector& x) -> Vector { return a * x; };
  model.diffusion = [b](const Vector& x) -> Matrix { return b * x; };
  model.exact_solution = [a, b](const Vector& x0, double t, const Vector& w) -> Vector {
    return x0 * std::exp((a - 0.5 * b * b) * t + b * w[0]);
  };
  return model;
}

SdeModel model_ginzburg_landau(double alpha, double beta, double sigma0) {
  if (!(beta > 0.0)) throw std::invalid_argument("model_ginzburg_landau: beta must be positive");

  SdeModel model;
  model.name = "ginzburg-landau";
  model.d = 1;
  model.m = 1;
  model.drift = [alpha, beta](const Vector& x) -> Vector {
    Vector out(1);
    out[0] = alpha * x[0] - beta * x[0] * x[0] * x[0];
    return out;
  };
  model.diffusion = [sigma0](const Vector&) -> Matrix { return Matrix::Constant(1, 1, sigma0); };

  constexpr double eps = kGinzburgLandauEps;
  LyapunovSpec spec = holder_defaults();
  spec.U = [](const Vector& x) { return eps * (1.0 + x[0] * x[0]); };
  spec.grad_U = [](const Vector& x) -> Vector { return Vector::Constant(1, 2.0 * eps * x[0]); };
  spec.hess_U = [](const Vector&) -> Matrix { return Matrix::Constant(1, 1, 2.0 * eps); };
  // Generator / U = (s0^2 + (2 alpha + 2 eps s0^2) s - 2 beta s^2) / (1 + s), s = x^2.
  const double s2 = sigma0 * sigma0;
  const double rho_min = max_rational_quartic(s2, 2.0 * alpha + 2.0 * eps * s2, beta);
  spec.rho = std::max(0.0, kRhoHeadroom * rho_min);
  // One-sided Lipschitz constant: alpha - beta (x^2 + xy + y^2) <= alpha.
  spec.c = std::max(1.0, alpha);
  model.lyapunov = spec;
  return model;
}

SdeModel model_vdp(double a, double b, double c_damp, double sigma0) {
  if (!(b > 0.0)) throw std::invalid_argument("model_vdp: b must be positive");
  if (!(sigma0 >= 0.0)) throw std::invalid_argument("model_vdp: sigma0 must be nonnegative");

  SdeModel model;
  model.name = "vdp";
  model.d = 2;
  model.m = 1;
  model.drift = [a, b, c_damp](const Vector& z) -> Vector {
    const double x = z[0];
    const double v = z[1];
    Vector out(2);
    out[0] = v;
    out[1] = a * v - b * x * x * x - c_damp * x * x * v;
    return out;
  };
  model.diffusion = [sigma0](const Vector& z) -> Matrix {
    Matrix out(2, 1);
    out(0, 0) = 0.0;
    out(1, 0) = sigma0 * z[0];
    return out;
  };

  // The x^2 v^2 term of the generator is eps (2 eps s0^2 - 2 c_damp) x^2 v^2,
  // so eps <= c_damp / s0^2 keeps it nonpositive.
  const double s2 = sigma0 * sigma0;
  const double eps = s2 > 0.0 ? std::min(1.0, c_damp / s2) : 1.0;
  if (!(eps > 0.0)) return model;  // no quadratic-energy Lyapunov function

  LyapunovSpec spec = holder_defaults();
  spec.U = [eps, b](const Vector& z) {
    const double x2 = z[0] * z[0];
    return eps * (1.0 + 0.5 * b * x2 * x2 + z[1] * z[1]);
  };
  spec.grad_U = [eps, b](const Vector& z) -> Vector {
    Vector g(2);
    g[0] = eps * 2.0 * b * z[0] * z[0] * z[0];
    g[1] = eps * 2.0 * z[1];
    return g;
  };
  spec.hess_U = [eps, b](const Vector& z) -> Matrix {
    Matrix hess = Matrix::Zero(2, 2);
    hess(0, 0) = eps * 6.0 * b * z[0] * z[0];
    hess(1, 1) = eps * 2.0;
    return hess;
  };
  // 2a v^2 <= rho v^2 and s0^2 x^2 <= rho (1 + b x^4 / 2).
  spec.rho = kRhoHeadroom * std::max({0.0, 2.0 * a, s2 / std::sqrt(2.0 * b)});

  // Quotient <= 1/2 + a+ + 3 s0^2 + (3b/4)(x^2 + y^2) + (c_damp/2)|v'|(|x| + |y|)
  // (using c >= 1). Absorb the state terms into K (b x^4/2 + v^2), K the
  // coefficient of U in the bound at horizon T = 1, by Young's inequality.
  constexpr double horizon = 1.0;
  const double K = eps / (2.0 * spec.q0 * horizon * std::exp(spec.rho * horizon));
  const double quad = 0.75 * b + c_damp * c_damp / (8.0 * K);
  spec.c = 0.5 + std::max(0.0, a) + 3.0 * s2 + quad * quad / (K * b);
  model.lyapunov = spec;
  return model;
}

std::vector<ModelCatalogEntry> catalog() {
  std::vector<ModelCatalogEntry> entries;

  ModelCatalogEntry gbm;
  gbm.id = "gbm";
  gbm.model = model_gbm(0.05, 0.2);
  gbm.region = {"centred ball of radius 10", 10.0};
  gbm.default_x0 = Vector::Constant(1, 1.0);
  gbm.notes = "a=0.05, b=0.2; closed-form solution; globally Lipschitz, ships without Lyapunov data";
  entries.push_back(std::move(gbm));

  ModelCatalogEntry gl;
  gl.id = "ginzburg-landau";
  gl.model = model_ginzburg_landau(1.0, 1.0, 1.0);
  gl.region = {"centred ball of radius 10", 10.0};
  gl.default_x0 = Vector::Constant(1, 1.0);
  gl.growth = ginzburg_landau_growth();
  gl.notes = "alpha=beta=sigma0=1; U = 0.25 (1 + x^2), U_bar = 0; rho from the exact maximiser of "
             "the generator ratio plus 5%; c = max(1, alpha)";
  entries.push_back(std::move(gl));

  ModelCatalogEntry vdp;
  vdp.id = "vdp";
  vdp.model = model_vdp(1.0, 1.0, 1.0, 0.5);
  vdp.region = {"centred ball of radius 10", 10.0};
  vdp.default_x0 = Vector::Zero(2);
  vdp.default_x0[0] = 1.0;
  vdp.growth = GrowthConstants{8.0, 4};
  vdp.notes = "a=1, b=1, c_damp=1, sigma0=0.5; U = eps (1 + x^4/2 + v^2); c from a Young-inequality "
              "bound at horizon T=1";
  entries.push_back(std::move(vdp));

  return entries;
}

ModelCatalogEntry catalog_entry(std::string_view id) {
  for (auto& entry : catalog()) {
    if (entry.id == id) return entry;
  }
  throw std::invalid_argument("unknown model '" + std::string(id) + "'");
}

GrowthConstants ginzburg_landau_growth() { return GrowthConstants{4.0, 3}; }

std::string_view to_string(Condition condition) {
  switch (condition) {
    case Condition::Generator:
      return "generator";
    case Condition::Monotonicity:
      return "monotonicity";
    case Condition::Coercivity:
      return "coercivity";
  }
  return "unknown";
}

double generator_lhs(const SdeModel& model, const LyapunovSpec& spec, const Vector& x) {
  const Vector grad = spec.grad_U(x);
  const Matrix sigma = model.diffusion(x);
  const Matrix hess = spec.hess_U(x);
  const double drift_term = grad.dot(model.drift(x));
  const double ito_term = 0.5 * (sigma.array() * (hess * sigma).array()).sum();
  const double gradient_term = 0.5 * (sigma.transpose() * grad).squaredNorm();
  return drift_term + ito_term + gradient_term + spec.U_bar(x);
}

double monotonicity_quotient(const SdeModel& model, const LyapunovSpec& spec, const Vector& x,
                             const Vector& y) {
  const Vector diff = x - y;
  const double coeff = (spec.p - 1.0) * (1.0 + 1.0 / spec.c) / 2.0;
  const double num = diff.dot(model.drift(x) - model.drift(y)) +
                     coeff * (model.diffusion(x) - model.diffusion(y)).squaredNorm();
  return num / diff.squaredNorm();
}

double monotonicity_rhs(const LyapunovSpec& spec, double T, const Vector& x, const Vector& y) {
  const double growth = std::exp(spec.rho * T);
  const double u_term = (std::abs(spec.U(x)) + std::abs(spec.U(y))) / (2.0 * spec.q0 * T * growth);
  double ubar_term = 0.0;
  if (std::isfinite(spec.q1)) {
    ubar_term = (std::abs(spec.U_bar(x)) + std::abs(spec.U_bar(y))) / (2.0 * spec.q1 * growth);
  }
  return spec.c + u_term + ubar_term;
}

Vector sample_ball(int d, double radius, std::uint64_t key) {
  NormalGenerator gen(key);
  Vector dir(d);
  for (int i = 0; i < d; ++i) dir[i] = gen.normal();
  const double n = dir.norm();
  if (n == 0.0) return Vector::Zero(d);
  const double rad = radius * std::pow(gen.uniform_closed_open(), 1.0 / d);
  return dir * (rad / n);
}

namespace {

constexpr std::uint64_t kPointTag = 0x706f696e74ULL;
constexpr std::uint64_t kPairTag = 0x70616972ULL;

Vector sample_point(int d, const SamplerConfig& sampler, std::uint64_t tag, std::int64_t i) {
  const std::uint64_t key = stream_key({tag, sampler.seed, static_cast<std::uint64_t>(i)});
  if (i % 2 == 0) return sample_ball(d, sampler.radius, key);
  // Gaussian draw concentrated near the origin, clipped to the ball.
  NormalGenerator gen(key);
  Vector x(d);
  for (int j = 0; j < d; ++j) x[j] = gen.normal() * sampler.radius / 3.0;
  const double n = x.norm();
  if (n > sampler.radius) x *= sampler.radius / n;
  return x;
}

bool violates(double lhs, double rhs) {
  return lhs - rhs > 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace

ConditionReport check_conditions(const SdeModel& model, const LyapunovSpec& spec, double T,
                                 const SamplerConfig& sampler, std::int64_t n_points) {
  spec.validate();
  if (!(T > 0.0)) throw std::invalid_argument("check_conditions: T must be positive");
  if (n_points < 1) throw std::invalid_argument("check_conditions: n_points must be positive");

  ConditionReport report;
  const int d = model.d;

  for (std::int64_t i = 0; i < n_points; ++i) {
    const Vector x = sample_point(d, sampler, kPointTag, i);
    ++report.points_checked;

    const double gen_lhs = generator_lhs(model, spec, x);
    const double gen_rhs = spec.rho * spec.U(x);
    report.min_generator_margin = std::min(report.min_generator_margin, gen_rhs - gen_lhs);
    if (violates(gen_lhs, gen_rhs)) report.violations.push_back({Condition::Generator, x, std::nullopt, gen_lhs, gen_rhs});

    const double coer_lhs = std::pow(x.norm(), 1.0 / spec.c) / spec.c;
    const double coer_rhs = 1.0 + std::abs(spec.U(x));
    report.min_coercivity_margin = std::min(report.min_coercivity_margin, coer_rhs - coer_lhs);
    if (violates(coer_lhs, coer_rhs)) {
      report.violations.push_back({Condition::Coercivity, x, std::nullopt, coer_lhs, coer_rhs});
    }
  }

  for (std::int64_t i = 0; i < n_points; ++i) {
    const Vector x = sample_point(d, sampler, kPairTag, 2 * i);
    Vector y;
    if (i % 2 == 0) {
      y = sample_point(d, sampler, kPairTag, 2 * i + 1);
    } else {
      NormalGenerator gen(stream_key({kPairTag, sampler.seed, static_cast<std::uint64_t>(i), 1}));
      Vector dir(d);
      for (int j = 0; j < d; ++j) dir[j] = gen.normal();
      y = x + dir * (sampler.near_pair_distance / dir.norm());
    }
    if ((x - y).squaredNorm() == 0.0) {
      ++report.degenerate_pairs_skipped;
      continue;
    }
    ++report.pairs_checked;
    const double lhs = monotonicity_quotient(model, spec, x, y);
    const double rhs = monotonicity_rhs(spec, T, x, y);
    report.min_monotonicity_margin = std::min(report.min_monotonicity_margin, rhs - lhs);
    if (violates(lhs, rhs)) report.violations.push_back({Condition::Monotonicity, x, y, lhs, rhs});
  }
  return report;
}

DerivativeCheck check_lyapunov_derivatives(const LyapunovSpec& spec, int d, const SamplerConfig& sampler,
                                           std::int64_t n_points) {
  DerivativeCheck out;
  for (std::int64_t i = 0; i < n_points; ++i) {
    const Vector x = sample_point(d, sampler, kPointTag, i);
    const double scale = std::max(1.0, x.norm());
    const double delta = 1e-5 * scale;
    const Vector grad = spec.grad_U(x);
    const Matrix hess = spec.hess_U(x);
    Vector grad_fd(d);
    Matrix hess_fd(d, d);
    for (int j = 0; j < d; ++j) {
      Vector e = Vector::Zero(d);
      e[j] = delta;
      grad_fd[j] = (spec.U(x + e) - spec.U(x - e)) / (2.0 * delta);
      hess_fd.col(j) = (spec.grad_U(x + e) - spec.grad_U(x - e)) / (2.0 * delta);
    }
    out.max_grad_rel_error =
        std::max(out.max_grad_rel_error, (grad - grad_fd).norm() / std::max(1.0, grad.norm()));
    out.max_hess_rel_error =
        std::max(out.max_hess_rel_error, (hess - hess_fd).norm() / std::max(1.0, hess.norm()));
    ++out.points;
  }
  return out;
}

}  // namespace biteuler
