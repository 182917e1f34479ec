#pragma once

#include "biteuler/types.hpp"

#include <cmath>
#include <cstdint>

namespace biteuler {

/// Per-step scale h = T/N and noise dimension of the quartic-exponential taming
/// Pi(x) = (x_i exp(-x_i^4 / h))_i.
struct TamingParams {
  double h = 1.0;
  int m = 1;

  void validate() const;
};

namespace detail {

// Beyond this exponent exp(-q) underflows to zero; the three functions return
// their limit 0 instead of evaluating inf * 0.
inline constexpr double kTamingExponentCutoff = 745.2;

inline double quartic_exponent(double x, double h) {
  const double x2 = x * x;
  return x2 * x2 / h;
}

}  // namespace detail

/// Scalar taming x exp(-x^4/h).
inline double tame_component(double h, double x) {
  const double q = detail::quartic_exponent(x, h);
  if (!(q < detail::kTamingExponentCutoff)) return 0.0;
  return x * std::exp(-q);
}

/// d/dx of tame_component: exp(-q)(1 - 4q), q = x^4/h.
inline double tame_derivative(double h, double x) {
  const double q = detail::quartic_exponent(x, h);
  if (!(q < detail::kTamingExponentCutoff)) return 0.0;
  return std::exp(-q) * (1.0 - 4.0 * q);
}

/// d^2/dx^2 of tame_component: exp(-q)(16x^7/h^2 - 20x^3/h), written as
/// exp(-q)(x^3/h)(16q - 20) so that large |x| cannot overflow x^7.
inline double tame_second_derivative(double h, double x) {
  const double q = detail::quartic_exponent(x, h);
  if (!(q < detail::kTamingExponentCutoff)) return 0.0;
  return std::exp(-q) * (x * x * x / h) * (16.0 * q - 20.0);
}

Vector tame(const TamingParams& params, const Vector& x);

/// Diagonal of the Jacobian DPi(x); off-diagonal entries vanish.
Vector tame_jacobian_diag(const TamingParams& params, const Vector& x);

/// Componentwise Laplacian (Delta Pi)(x).
Vector tame_laplacian(const TamingParams& params, const Vector& x);

/// exp(sqrt(|log(N/T)|)), the radius of the ball outside which the stopped
/// scheme freezes.
double stopping_threshold(std::int64_t N, double T);

/// Increment map applied to Brownian increments by the steppers. The identity
/// member turns the stopped stepper into plain Euler-Maruyama.
class IncrementTaming {
 public:
  enum class Kind { Identity, QuarticExponential };

  static IncrementTaming identity() { return IncrementTaming(Kind::Identity, 0.0); }
  static IncrementTaming quartic_exponential(double h);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double h() const { return h_; }

  [[nodiscard]] Vector apply(const Vector& x) const;
  [[nodiscard]] Vector jacobian_diag(const Vector& x) const;
  [[nodiscard]] Vector laplacian(const Vector& x) const;

 private:
  IncrementTaming(Kind kind, double h) : kind_(kind), h_(h) {}

  Kind kind_;
  double h_;
};

/// Monte Carlo check of the three taming-function bounds at W ~ Normal(0, h I_m):
///   sup-norm   |Pi(W)|                 <= h^{1/4} sqrt(m)  (pathwise)
///   L2 norm of |DPi(W) - I|_op        <= 52 h sqrt(m)
///   L2 norm of |Delta Pi(W)|          <= 32 sqrt(h m)
/// The moments grow with t on [0, h], so sampling at t = h is the worst case.
struct TamingBoundsReport {
  TamingParams params;
  std::int64_t sample_count = 0;
  std::uint64_t seed = 0;
  double evaluated_at_t = 0.0;

  double sup_norm_max = 0.0;
  double sup_norm_bound = 0.0;
  std::int64_t sup_norm_violations = 0;
  bool sup_norm_holds = false;

  double jacobian_l2 = 0.0;
  double jacobian_l2_stderr = 0.0;
  double jacobian_bound = 0.0;
  bool jacobian_holds = false;  // bound - estimate >= 3 stderr

  double laplacian_l2 = 0.0;
  double laplacian_l2_stderr = 0.0;
  double laplacian_bound = 0.0;
  bool laplacian_holds = false;  // bound - estimate >= 3 stderr

  [[nodiscard]] bool all_hold() const { return sup_norm_holds && jacobian_holds && laplacian_holds; }
};

/// Throws std::invalid_argument if sample_count < 1000 or params are invalid.
TamingBoundsReport verify_taming_bounds(const TamingParams& params, std::int64_t sample_count,
                                        std::uint64_t seed);

}  // namespace biteuler
