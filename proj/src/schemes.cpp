#include "biteuler/schemes.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace biteuler {

namespace {

constexpr double kNoThreshold = std::numeric_limits<double>::infinity();

void check_finite_coefficients(const Vector& mu, const Matrix& sigma) {
  if (!mu.allFinite() || !sigma.allFinite()) {
    throw std::domain_error("step_bit: drift or diffusion is not finite at the current state");
  }
}

Vector drift_tamed_value(const Vector& mu, double h) { return mu / (1.0 + mu.stableNorm() * h); }

void check_step_args(const SdeModel& model, const Vector& y, const Vector& dW) {
  if (y.size() != model.d || dW.size() != model.m) {
    throw std::invalid_argument("step: state or increment has the wrong dimension");
  }
}

}  // namespace

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::EulerMaruyama:
      return "em";
    case SchemeKind::DriftTamed:
      return "drift-tamed";
    case SchemeKind::StoppedBIT:
      return "bit";
  }
  return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
  if (name == "em" || name == "euler-maruyama") return SchemeKind::EulerMaruyama;
  if (name == "drift-tamed" || name == "tamed") return SchemeKind::DriftTamed;
  if (name == "bit" || name == "stopped-bit") return SchemeKind::StoppedBIT;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

Vector tamed_update(const SdeModel& model, const Vector& y, double dt, const Vector& dW,
                    const IncrementTaming& taming, double threshold) {
  if (y.norm() > threshold) return y;
  const Vector mu = model.drift(y);
  const Matrix sigma = model.diffusion(y);
  return y + (mu * dt + sigma * taming.apply(dW));
}

Vector step_bit(const SdeModel& model, const GridSpec& grid, const Vector& y, const Vector& dW) {
  check_step_args(model, y, dW);
  const double threshold = stopping_threshold(grid.N, grid.T);
  if (y.norm() > threshold) return y;
  const double h = grid.step();
  const Vector mu = model.drift(y);
  const Matrix sigma = model.diffusion(y);
  check_finite_coefficients(mu, sigma);
  return y + (mu * h + sigma * IncrementTaming::quartic_exponential(h).apply(dW));
}

StepOutcome step_em(const SdeModel& model, const GridSpec& grid, const Vector& y, const Vector& dW) {
  check_step_args(model, y, dW);
  StepOutcome out;
  out.y = tamed_update(model, y, grid.step(), dW, IncrementTaming::identity(), kNoThreshold);
  out.overflow = !out.y.allFinite();
  return out;
}

StepOutcome step_drift_tamed(const SdeModel& model, const GridSpec& grid, const Vector& y,
                             const Vector& dW) {
  check_step_args(model, y, dW);
  const double h = grid.step();
  const Vector mu = drift_tamed_value(model.drift(y), h);
  const Matrix sigma = model.diffusion(y);
  StepOutcome out;
  out.y = y + (mu * h + sigma * dW);
  out.overflow = !out.y.allFinite();
  return out;
}

SchemeRun run_path(SchemeKind kind, const SdeModel& model, const GridSpec& grid, const Vector& x0,
                   const Matrix& increments) {
  grid.validate();
  if (x0.size() != model.d) throw std::invalid_argument("run_path: x0 has the wrong dimension");
  if (increments.cols() != grid.N || increments.rows() != model.m) {
    throw std::invalid_argument("run_path: increments must be m x N");
  }

  const double threshold = stopping_threshold(grid.N, grid.T);
  SchemeRun run;
  run.grid = grid;
  run.states.resize(model.d, grid.N + 1);
  run.states.col(0) = x0;
  run.tau_index = grid.N;

  if (kind == SchemeKind::StoppedBIT) {
    for (std::int64_t k = 0; k < grid.N; ++k) {
      const Vector y = run.states.col(k);
      if (y.norm() > threshold) {
        // Indicator is off from here on: the path is constant.
        run.tau_index = k;
        run.frozen = true;
        for (std::int64_t j = k + 1; j <= grid.N; ++j) run.states.col(j) = y;
        break;
      }
      run.states.col(k + 1) = step_bit(model, grid, y, increments.col(k));
    }
    return run;
  }

  bool tau_found = false;
  for (std::int64_t k = 0; k < grid.N; ++k) {
    const Vector y = run.states.col(k);
    if (!tau_found && y.norm() > threshold) {
      run.tau_index = k;
      tau_found = true;
    }
    const StepOutcome next = kind == SchemeKind::EulerMaruyama
                                 ? step_em(model, grid, y, increments.col(k))
                                 : step_drift_tamed(model, grid, y, increments.col(k));
    run.states.col(k + 1) = next.y;
    if (next.overflow) {
      run.overflow = true;
      run.overflow_index = k + 1;
      for (std::int64_t j = k + 2; j <= grid.N; ++j) run.states.col(j) = next.y;
      if (!tau_found) run.tau_index = k + 1;
      return run;
    }
  }
  return run;
}

SchemeRun run_path(SchemeKind kind, const SdeModel& model, const GridSpec& grid, const Vector& x0,
                   const BrownianGrid& path) {
  if (path.T() != grid.T) throw std::invalid_argument("run_path: Brownian path horizon differs from grid");
  if (path.m() != model.m) throw std::invalid_argument("run_path: Brownian dimension differs from model");
  if (path.N_fine() % grid.N != 0) throw std::invalid_argument("run_path: grid.N must divide N_fine");
  return run_path(kind, model, grid, x0, path.coarsen(grid.N));
}

Vector interpolate(SchemeKind kind, const SdeModel& model, const SchemeRun& run, std::int64_t k,
                   double s, const Vector& bridge) {
  const GridSpec& grid = run.grid;
  if (k < 0 || k >= grid.N) throw std::out_of_range("interpolate: step index out of range");
  const double h = grid.step();
  if (!(s >= 0.0) || !(s <= h)) throw std::out_of_range("interpolate: offset outside [0, T/N]");
  if (bridge.size() != model.m) throw std::invalid_argument("interpolate: bridge has the wrong dimension");

  const Vector y = run.states.col(k);
  switch (kind) {
    case SchemeKind::StoppedBIT: {
      const double threshold = stopping_threshold(grid.N, grid.T);
      if (y.norm() > threshold) return y;
      const Vector mu = model.drift(y);
      const Matrix sigma = model.diffusion(y);
      return y + (mu * s + sigma * IncrementTaming::quartic_exponential(h).apply(bridge));
    }
    case SchemeKind::EulerMaruyama:
      return tamed_update(model, y, s, bridge, IncrementTaming::identity(), kNoThreshold);
    case SchemeKind::DriftTamed: {
      const Vector mu = drift_tamed_value(model.drift(y), h);
      return y + (mu * s + model.diffusion(y) * bridge);
    }
  }
  throw std::invalid_argument("interpolate: unknown scheme");
}

}  // namespace biteuler
