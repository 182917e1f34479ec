#pragma once

#include "biteuler/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biteuler {

/// Polynomial growth constants (c, p) with
///   |mu(x) - mu(y)| + |sigma(x) - sigma(y)|_F <= c (1 + |x|^p + |y|^p) |x - y|
///   |U_bar| + |Hess U| + |grad U| + |U| + |mu| + |sigma|_F <= c (1 + |x|^p)
/// used by the moment, exponential-moment and regularity diagnostics.
struct GrowthConstants {
  double c = 1.0;
  int p = 1;
};

struct AdmissibleRegion {
  std::string description;
  double radius = 10.0;  // the checker samples the centred ball of this radius

  [[nodiscard]] bool contains(const Vector& x) const { return x.norm() <= radius; }
};

struct ModelCatalogEntry {
  std::string id;
  SdeModel model;
  AdmissibleRegion region;
  Vector default_x0;
  std::optional<GrowthConstants> growth;
  std::string notes;
};

/// dX = aX dt + bX dW; closed form x0 exp((a - b^2/2)t + b W_t). No Lyapunov data:
/// the sigma* grad U term of any quadratic U grows quartically.
SdeModel model_gbm(double a, double b);

/// dX = (alpha X - beta X^3) dt + sigma0 dW with U(x) = eps (1 + x^2).
/// Throws std::invalid_argument unless beta > 0.
SdeModel model_ginzburg_landau(double alpha, double beta, double sigma0);

/// Stochastic Duffing-van der Pol oscillator on (x, v):
///   mu = (v, a v - b x^3 - c_damp x^2 v), sigma = (0, sigma0 x)^T
/// with U = eps (1 + b x^4 / 2 + v^2). Throws std::invalid_argument unless
/// b > 0, sigma0 >= 0.
SdeModel model_vdp(double a, double b, double c_damp, double sigma0);

/// Shipped entries: "gbm", "ginzburg-landau", "vdp" with default parameters.
std::vector<ModelCatalogEntry> catalog();

/// Throws std::invalid_argument for unknown ids.
ModelCatalogEntry catalog_entry(std::string_view id);

/// Growth constants of the shipped Ginzburg-Landau entry (alpha = beta = sigma0 = 1).
GrowthConstants ginzburg_landau_growth();

// ---------------------------------------------------------------------------
// Sampled condition checker

enum class Condition {
  Generator,     // <grad U, mu> + 1/2 <sigma, Hess U sigma>_F + 1/2 |sigma* grad U|^2 + U_bar <= rho U
  Monotonicity,  // local monotonicity quotient <= c + (|U(x)|+|U(y)|)/(2 q0 T e^{rho T}) + (|U_bar(x)|+|U_bar(y)|)/(2 q1 e^{rho T})
  Coercivity,    // (1/c)|x|^{1/c} <= 1 + |U(x)|
};

std::string_view to_string(Condition condition);

struct SamplerConfig {
  double radius = 10.0;
  std::uint64_t seed = 0;
  double near_pair_distance = 1e-3;
};

struct Violation {
  Condition condition;
  Vector x;
  std::optional<Vector> y;
  double lhs = 0.0;
  double rhs = 0.0;

  [[nodiscard]] double margin() const { return rhs - lhs; }
};

struct ConditionReport {
  std::vector<Violation> violations;
  std::int64_t points_checked = 0;
  std::int64_t pairs_checked = 0;
  std::int64_t degenerate_pairs_skipped = 0;
  // Smallest observed rhs - lhs per condition (negative means violated).
  double min_generator_margin = std::numeric_limits<double>::infinity();
  double min_monotonicity_margin = std::numeric_limits<double>::infinity();
  double min_coercivity_margin = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool passed() const { return violations.empty(); }
};

double generator_lhs(const SdeModel& model, const LyapunovSpec& spec, const Vector& x);

/// The quotient (<x-y, mu(x)-mu(y)> + (p-1)(1+1/c)/2 |sigma(x)-sigma(y)|_F^2) / |x-y|^2.
double monotonicity_quotient(const SdeModel& model, const LyapunovSpec& spec, const Vector& x,
                             const Vector& y);

double monotonicity_rhs(const LyapunovSpec& spec, double T, const Vector& x, const Vector& y);

/// Evaluates the three conditions at n_points sampled points (half uniform in
/// the ball, half Gaussian clipped to it) and at n_points pairs: independent
/// pairs alternate with near-coincident pairs |x - y| = near_pair_distance.
/// Pairs with x == y are skipped. Throws std::invalid_argument if the spec is invalid.
ConditionReport check_conditions(const SdeModel& model, const LyapunovSpec& spec, double T,
                                 const SamplerConfig& sampler, std::int64_t n_points);

struct DerivativeCheck {
  double max_grad_rel_error = 0.0;
  double max_hess_rel_error = 0.0;
  std::int64_t points = 0;
};

/// Compares grad_U and hess_U with central differences of U and grad_U at
/// sampled points; relative errors are taken against max(1, |analytic|).
DerivativeCheck check_lyapunov_derivatives(const LyapunovSpec& spec, int d, const SamplerConfig& sampler,
                                           std::int64_t n_points);

/// Uniform draw from the centred ball of the given radius in R^d.
Vector sample_ball(int d, double radius, std::uint64_t key);

}  // namespace biteuler
