#pragma once

#include "biteuler/diagnostics.hpp"
#include "biteuler/models.hpp"
#include "biteuler/schemes.hpp"
#include "biteuler/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace biteuler {

enum class ReferenceKind { Exact, FineGrid };

struct ConvergenceConfig {
  SdeModel model;
  std::string model_id;  // label written to tables; defaults to model.name
  Vector x0;
  SchemeKind scheme = SchemeKind::StoppedBIT;
  double T = 1.0;
  double r = 2.0;
  std::vector<std::int64_t> Ns;
  std::int64_t N_ref = 0;  // FineGrid only
  std::int64_t M = 1000;
  std::uint64_t seed = 0;
  ReferenceKind reference = ReferenceKind::Exact;
  SchemeKind reference_scheme = SchemeKind::StoppedBIT;
  unsigned threads = 1;

  /// Throws std::invalid_argument for empty or non-positive Ns, M < 2, r < 1,
  /// an Exact reference without closed form, or (FineGrid) N_ref not a multiple
  /// of every N.
  void validate() const;
};

/// Strong error sup_k ||X_{t_k} - Y^N_{t_k}||_{L^r} per N, with all Ns and the
/// reference driven by coarsenings of one Brownian path per sample. Paths whose
/// approximation or reference overflows are excluded from the norms and counted
/// in overflow_fraction. std_error is the batch-means error of the sup estimate.
ErrorTable strong_error(const ConvergenceConfig& config);

/// Least squares of log(error) on log(T/N). Rows with non-positive or non-finite
/// error are excluded and counted. Throws std::invalid_argument with fewer than
/// 3 usable rows.
RateFit fit_rate(const ErrorTable& table, double T = 1.0);

// ---------------------------------------------------------------------------

/// Magnitude treated as an explosion even when the state is still finite.
inline constexpr double kExplosionMagnitude = 1e10;

struct DivergenceRow {
  std::int64_t N = 0;
  double em_fraction = 0.0;   // Euler-Maruyama paths overflowed or beyond 1e10
  double bit_fraction = 0.0;  // stopped scheme, same criterion
  double em_second_moment = 0.0;   // E[min(|Y_T|^2, 1e300)]
  double bit_second_moment = 0.0;
};

struct DivergenceReport {
  std::string model;
  Vector x0;
  std::int64_t M = 0;
  std::uint64_t seed = 0;
  std::vector<DivergenceRow> rows;
};

DivergenceReport divergence_comparison(const SdeModel& model, const std::vector<std::int64_t>& Ns,
                                       std::int64_t M, const Vector& x0, std::uint64_t seed, double T = 1.0,
                                       unsigned threads = 1);

// ---------------------------------------------------------------------------

struct MomentRow {
  std::int64_t N = 0;
  Estimate mean_U;      // E[U(Y_T)]
  Estimate exp_moment;  // exponential-moment functional at t = T
  double epsilon = 0.0;       // eps^N
  double exp_bound = 0.0;     // exp(U(x0)) e^{eps^N T}
  double moment_bound = 0.0;  // Gronwall bound on E[U(Y_T)]
  bool bound_applicable = false;  // N >= N0
  bool within_bound = true;       // mean_U <= moment_bound + 3 stderr (checked when applicable)
};

struct MomentReport {
  std::string model;
  std::int64_t M = 0;
  std::uint64_t seed = 0;
  GrowthConstants growth;
  double log_N0 = 0.0;
  std::optional<std::int64_t> N0;
  std::vector<MomentRow> rows;
  double flatness_ratio = 0.0;      // max/min of mean_U across N
  double flatness_tolerance = 0.0;  // 1 + 5 * max relative stderr
  [[nodiscard]] bool flat() const { return flatness_ratio <= flatness_tolerance; }
  [[nodiscard]] bool all_within_bound() const;
};

/// Requires model.lyapunov. Runs the stopped scheme at each N.
MomentReport moment_sweep(const SdeModel& model, const GrowthConstants& growth,
                          const std::vector<std::int64_t>& Ns, std::int64_t M, std::uint64_t seed,
                          const Vector& x0, double T = 1.0, unsigned threads = 1);

}  // namespace biteuler
