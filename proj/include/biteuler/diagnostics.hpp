#pragma once

#include "biteuler/brownian.hpp"
#include "biteuler/models.hpp"
#include "biteuler/schemes.hpp"
#include "biteuler/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace biteuler {

/// Constants of the moment and exponential-moment lemmas.
struct AnalysisConstants {
  double c = 1.0;  // growth constant, c >= T^{1/32}
  int p = 1;       // polynomial growth degree
  double T = 1.0;
  int m = 1;
  double rho = 0.0;
  std::int64_t N = 1;

  /// Throws std::invalid_argument if c < T^{1/32}, p < 1, T <= 0, m < 1, rho < 0 or N < 1.
  void validate() const;
};

/// The exponential-moment growth rate eps^N. Returns +inf when the exponent
/// overflows (small N); the bound is then vacuous.
double epsilon_n(const AnalysisConstants& consts);

/// Gronwall constants C and C_bar of the moment estimate.
struct MomentConstants {
  double C = 0.0;
  double C_bar = 0.0;
};

MomentConstants moment_constants(const AnalysisConstants& consts);

/// EU0 e^{Ct} + (C_bar/C)(e^{Ct} - 1); C_bar t when C = 0.
double moment_bound(const AnalysisConstants& consts, double t, double EU0);

/// Intra-step displacement bound 2 c^{p+1} (T/N)^{7/32} (T^{3/4} + sqrt(m)).
double regularity_bound(const AnalysisConstants& consts);

// ---------------------------------------------------------------------------
// Growth preflight

/// Sampled check of the Lipschitz and growth inequalities for (c, p), and the
/// analytic threshold N0 from which the two step-size conditions
///   e^{sqrt|log(N/T)|} <= c (N/T)^{1/(32p)}
///   c^p (T/N)^{7/32} (T^{3/4} + sqrt m) <= (N/T)^{1/(32p)}
/// hold for every N >= N0.
struct GrowthPreflight {
  std::int64_t points_checked = 0;
  std::int64_t lipschitz_violations = 0;
  std::int64_t growth_violations = 0;
  double min_lipschitz_margin = std::numeric_limits<double>::infinity();
  double min_growth_margin = std::numeric_limits<double>::infinity();
  double log_N0 = 0.0;              // natural log of N0
  std::optional<std::int64_t> N0;   // empty when N0 exceeds the 64-bit range

  [[nodiscard]] bool constants_admissible() const {
    return lipschitz_violations == 0 && growth_violations == 0;
  }
  /// True when N >= N0.
  [[nodiscard]] bool step_admissible(std::int64_t N) const;
};

/// log N0 for the two step-size conditions (0 if they hold for all N >= T).
double log_n0(const GrowthConstants& growth, double T, int m);

/// ceil(exp(log_N0)), or empty when that exceeds the 64-bit range.
std::optional<std::int64_t> n0_from_log(double log_N0);

/// Samples n_points points and pairs in the ball of sampler.radius. U-terms of
/// the growth inequality are included when the model has a Lyapunov spec.
GrowthPreflight growth_preflight(const SdeModel& model, const GrowthConstants& growth, double T,
                                 const SamplerConfig& sampler, std::int64_t n_points);

// ---------------------------------------------------------------------------
// Intra-step regularity

struct RegularitySample {
  std::int64_t k = 0;
  double s = 0.0;
  double lhs = 0.0;  // |Y_{t_k+s} - Y_{t_k}|
  double rhs = 0.0;
  [[nodiscard]] bool passed() const { return lhs <= rhs; }
};

struct RegularityReport {
  bool constants_admissible = true;  // false: growth preflight failed, no samples taken
  bool step_admissible = true;       // N >= N0; otherwise the bound is not guaranteed
  double bound = 0.0;
  std::vector<RegularitySample> samples;

  [[nodiscard]] std::int64_t failures() const;
  [[nodiscard]] bool passed() const { return constants_admissible && failures() == 0; }
};

/// Evaluates the stopped-scheme interpolant at `samples_per_path` uniformly drawn
/// times in (0, T) and tests the displacement from the last grid point against
/// regularity_bound. `path` must be the Brownian path that drove `run`
/// (grid.N dividing path.N_fine()). Throws std::invalid_argument otherwise.
RegularityReport regularity_check(const SchemeRun& run, const SdeModel& model, const BrownianGrid& path,
                                  const AnalysisConstants& consts, const GrowthPreflight& preflight,
                                  std::int64_t samples_per_path, std::uint64_t sub_seed);

// ---------------------------------------------------------------------------
// Monte Carlo functionals

/// exp of this argument is replaced by this cap and flagged.
inline constexpr double kSaturationCap = 1e300;

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  bool saturated = false;
};

struct MonteCarloSpec {
  double T = 1.0;
  std::int64_t N = 1;
  std::int64_t M = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Mean over paths of exp(e^{-rho (t ^ tau)} U(Y_t) + int_0^{t ^ tau} e^{-rho r} U_bar(Y_r) dr),
/// the integral by the left-endpoint rule on the grid. For off-grid t the
/// terminal value uses the interpolant with a bridge draw.
Estimate exp_moment_estimate(SchemeKind kind, const SdeModel& model, const LyapunovSpec& spec,
                             const MonteCarloSpec& mc, const Vector& x0, double t);

/// The same functional at every grid time t_k, k = 0..N.
std::vector<Estimate> exp_moment_profile(SchemeKind kind, const SdeModel& model, const LyapunovSpec& spec,
                                         const MonteCarloSpec& mc, const Vector& x0);

struct StoppingProbability {
  Estimate probability;  // fraction of paths with tau_index < N
  double C1 = 0.0;       // squared sup over the grid of the exp-moment profile
  double bound = 0.0;    // C1 exp(1 - log(T/N)^2 / (24 c^5 e^{rho T}))
};

/// Estimates P[tau^N < T] for the stopped scheme. When `spec` is given, C1 is
/// estimated from exp_moment_profile and the tail bound is evaluated with the
/// spec's c and rho; otherwise C1 and bound are NaN.
StoppingProbability stopping_probability(const SdeModel& model, const MonteCarloSpec& mc, const Vector& x0,
                                         const std::optional<LyapunovSpec>& spec);

/// C1 exp(1 - log(T/N)^2 / (24 c^5 e^{rho T})).
double stopping_tail_bound(double C1, double c, double rho, double T, std::int64_t N);

}  // namespace biteuler
