#pragma once

#include "biteuler/brownian.hpp"
#include "biteuler/taming.hpp"
#include "biteuler/types.hpp"

#include <string_view>

namespace biteuler {

enum class SchemeKind {
  EulerMaruyama,  // y + mu h + sigma dW
  DriftTamed,     // y + mu/(1 + |mu| h) h + sigma dW
  StoppedBIT,     // y + 1{|y| <= e^{sqrt|log(N/T)|}} (mu h + sigma Pi^N(dW))
};

std::string_view to_string(SchemeKind kind);

/// Accepts "em", "euler-maruyama", "drift-tamed", "tamed", "bit", "stopped-bit".
/// Throws std::invalid_argument otherwise.
SchemeKind parse_scheme(std::string_view name);

/// Outcome of an unstopped step; `overflow` is set when the new state is not finite.
struct StepOutcome {
  Vector y;
  bool overflow = false;
};

/// Stopped Brownian-increment tamed step over [kT/N, (k+1)T/N].
/// Throws std::domain_error if drift or diffusion evaluate to non-finite values.
Vector step_bit(const SdeModel& model, const GridSpec& grid, const Vector& y, const Vector& dW);

StepOutcome step_em(const SdeModel& model, const GridSpec& grid, const Vector& y, const Vector& dW);

StepOutcome step_drift_tamed(const SdeModel& model, const GridSpec& grid, const Vector& y,
                             const Vector& dW);

/// Update shared by all schemes: y + 1{|y| <= threshold} (drift * dt + sigma(y) Pi(dW)).
/// StoppedBIT is (quartic taming, stopping threshold); EulerMaruyama is
/// (identity, +inf). Does not validate finiteness.
Vector tamed_update(const SdeModel& model, const Vector& y, double dt, const Vector& dW,
                    const IncrementTaming& taming, double threshold);

/// Iterates the scheme over grid.N steps driven by the given increments
/// (m x grid.N). States stay constant from tau_index on for StoppedBIT.
/// Unstopped schemes that overflow are kept, flagged, and padded with the
/// first non-finite state.
SchemeRun run_path(SchemeKind kind, const SdeModel& model, const GridSpec& grid, const Vector& x0,
                   const Matrix& increments);

/// Same, using the coarsening of a Brownian path. Throws std::invalid_argument
/// unless grid.N divides path.N_fine() and path.T() == grid.T.
SchemeRun run_path(SchemeKind kind, const SdeModel& model, const GridSpec& grid, const Vector& x0,
                   const BrownianGrid& path);

/// Continuous-time value Y_{t_k + s} given bridge = W_{t_k + s} - W_{t_k}.
/// StoppedBIT uses the tamed interpolant; the other schemes are linear in the
/// increment. Throws std::out_of_range for k outside 0..N-1 or s outside [0, T/N].
Vector interpolate(SchemeKind kind, const SdeModel& model, const SchemeRun& run, std::int64_t k,
                   double s, const Vector& bridge);

}  // namespace biteuler
