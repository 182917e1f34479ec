#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace biteuler {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using DriftFn = std::function<Vector(const Vector&)>;
using DiffusionFn = std::function<Matrix(const Vector&)>;
using ScalarFieldFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;
using HessianFn = std::function<Matrix(const Vector&)>;

/// Closed-form solution X_t as a function of the start point, the time and W_t - W_0.
using ExactSolutionFn = std::function<Vector(const Vector& x0, double t, const Vector& w)>;

/// Lyapunov-type data for the exponential-moment and local-monotonicity conditions.
///
/// `c` and `p` here are the constants of the convergence theorem: `c` bounds the
/// monotonicity quotient and sets the coercivity exponent, `p` is the Hoelder
/// exponent that enters the factor (p-1)(1+1/c)/2 in front of the diffusion
/// difference. Growth constants for the analysis lemmas live in AnalysisConstants.
struct LyapunovSpec {
  ScalarFieldFn U;
  GradientFn grad_U;
  HessianFn hess_U;
  ScalarFieldFn U_bar;
  double rho = 0.0;
  double c = 1.0;
  double p = 4.0;
  double q0 = 4.0;
  double q1 = std::numeric_limits<double>::infinity();
  double r = 2.0;

  /// Throws std::invalid_argument if rho < 0, p < 2, r < 2, q0/q1 not in (0, inf]
  /// or 1/p + 1/q0 + 1/q1 != 1/r (within 1e-12).
  void validate() const;
};

struct SdeModel {
  std::string name;
  int d = 1;
  int m = 1;
  DriftFn drift;
  DiffusionFn diffusion;
  ExactSolutionFn exact_solution;  // empty when no closed form exists
  std::optional<LyapunovSpec> lyapunov;

  [[nodiscard]] bool has_exact_solution() const { return static_cast<bool>(exact_solution); }
};

/// Uniform grid t_k = kT/N, k = 0..N.
struct GridSpec {
  double T = 1.0;
  std::int64_t N = 1;

  [[nodiscard]] double step() const { return T / static_cast<double>(N); }
  void validate() const;
};

/// t_k = kT/N. Throws std::out_of_range unless 0 <= k <= N.
double grid_point(const GridSpec& grid, std::int64_t k);

/// Index of sup({0, T/N, ..., T} ∩ [0, t)), with t = 0 mapped to 0.
/// An interior grid time kT/N therefore maps to k-1. Throws std::out_of_range
/// for t outside [0, T].
std::int64_t floor_index(const GridSpec& grid, double t);

/// One path of a scheme on a uniform grid.
struct SchemeRun {
  GridSpec grid;
  Matrix states;               // d x (N+1), column k is Y_{kT/N}
  std::int64_t tau_index = 0;  // first k with |Y_k| > threshold, N if none
  bool frozen = false;         // the stopping indicator switched the update off
  bool overflow = false;       // a non-finite state was produced
  std::int64_t overflow_index = -1;

  [[nodiscard]] Vector state(std::int64_t k) const { return states.col(k); }
  [[nodiscard]] double tau() const { return grid_point(grid, tau_index); }
};

struct ErrorRow {
  std::int64_t N = 0;
  std::int64_t M = 0;
  double sup_error = 0.0;
  std::vector<double> per_gridpoint_errors;  // L^r estimate at each t_k, k = 0..N
  double std_error = 0.0;
  std::uint64_t seed = 0;
  double overflow_fraction = 0.0;
};

/// Strong-error estimates; sup_error is the max over k of the per-gridpoint L^r
/// norms (sup of norms, not norm of sup).
struct ErrorTable {
  std::string scheme;
  std::string model;
  double r = 2.0;
  std::vector<ErrorRow> rows;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::vector<std::pair<double, double>> points;  // (log step size, log error)
  std::size_t excluded_rows = 0;                   // rows dropped for non-positive error
};

}  // namespace biteuler
