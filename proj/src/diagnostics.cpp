#include "biteuler/diagnostics.hpp"

#include "biteuler/parallel.hpp"
#include "biteuler/random.hpp"
#include "biteuler/taming.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace biteuler {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kPreflightTag = 0x707265666cULL;
constexpr std::uint64_t kRegularityTag = 0x7265677560ULL;
constexpr std::uint64_t kTerminalBridgeTag = 0x7465726dULL;

}  // namespace

void AnalysisConstants::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("AnalysisConstants: T must be positive");
  if (!(c >= std::pow(T, 1.0 / 32.0))) throw std::invalid_argument("AnalysisConstants: c must be >= T^{1/32}");
  if (p < 1) throw std::invalid_argument("AnalysisConstants: p must be a positive integer");
  if (m < 1) throw std::invalid_argument("AnalysisConstants: m must be positive");
  if (!(rho >= 0.0)) throw std::invalid_argument("AnalysisConstants: rho must be nonnegative");
  if (N < 1) throw std::invalid_argument("AnalysisConstants: N must be positive");
}

double epsilon_n(const AnalysisConstants& k) {
  k.validate();
  const double c = k.c;
  const double p = k.p;
  const double h = k.T / static_cast<double>(k.N);  // T/N
  const double inv = 1.0 / h;                         // N/T
  const double sm = std::sqrt(static_cast<double>(k.m));
  const double tm = std::pow(k.T, 0.75) + sm;

  const double exponent = std::pow(4.0, p + 0.5) * std::pow(c, 2 * p + 3) * std::pow(h, 3.0 / 16.0) * tm +
                          (c * c + std::pow(3.0, p) * std::pow(c, 2 * p + 1)) * std::pow(h, 31.0 / 32.0);
  const double first = 4.0 * std::pow(c, 2 * p + 2) * std::pow(3.0, 2 * p) * std::pow(inv, 1.0 / 16.0) *
                       (2.0 * std::pow(c, p + 1) * std::pow(h, 7.0 / 32.0) * tm + 16.0 * sm * std::sqrt(h));
  const double bracket = 104.0 * sm * std::pow(c, p + 1) * std::pow(h, 15.0 / 32.0) +
                         2.0 * std::pow(c, 2 * p + 2) * std::pow(3.0, p) * std::pow(h, 3.0 / 16.0) * tm;
  const double sum = first + bracket * (bracket + 4.0 * c * c * std::pow(inv, 1.0 / 32.0));
  const double tail = std::pow(3.0, 2 * p) * 4.0 * std::pow(c, 4 * p + 2) * std::pow(inv, 1.0 / 16.0);

  // Multiply in log space so a huge exponential factor gives +inf, not inf * 0.
  const double log_eps = exponent + std::log(sum) + std::log(tail);
  if (!std::isfinite(log_eps)) return kInf;
  return std::exp(log_eps);
}

MomentConstants moment_constants(const AnalysisConstants& k) {
  k.validate();
  const double c = k.c;
  const double p = k.p;
  const double h = k.T / static_cast<double>(k.N);
  MomentConstants out;
  out.C = k.rho + 2.0 * std::pow(c, p + 3) * std::pow(h, 15.0 / 16.0) +
          32.0 * std::pow(c, 3 * p + 4) * std::pow(h, 13.0 / 32.0);
  out.C_bar = std::pow(h, 13.0 / 32.0) *
              (32.0 * std::pow(c, 3 * p + 4) +
               std::pow(4.0, p + 3) / 2.0 * std::pow(c, p * p + 4 * p + 4) * std::pow(h, p));
  return out;
}

double moment_bound(const AnalysisConstants& consts, double t, double EU0) {
  if (!(t >= 0.0)) throw std::invalid_argument("moment_bound: t must be nonnegative");
  if (!(EU0 >= 0.0)) throw std::invalid_argument("moment_bound: EU0 must be nonnegative");
  const MomentConstants mc = moment_constants(consts);
  if (t == 0.0) return EU0;
  if (mc.C == 0.0) return mc.C_bar * t;
  const double growth = std::expm1(mc.C * t);
  return EU0 * (growth + 1.0) + mc.C_bar / mc.C * growth;
}

double regularity_bound(const AnalysisConstants& k) {
  k.validate();
  const double h = k.T / static_cast<double>(k.N);
  return 2.0 * std::pow(k.c, k.p + 1) * std::pow(h, 7.0 / 32.0) *
         (std::pow(k.T, 0.75) + std::sqrt(static_cast<double>(k.m)));
}

// ---------------------------------------------------------------------------

bool GrowthPreflight::step_admissible(std::int64_t N) const {
  if (!N0) return false;
  return N >= *N0;
}

double log_n0(const GrowthConstants& growth, double T, int m) {
  if (!(growth.c > 0.0) || growth.p < 1) throw std::invalid_argument("log_n0: invalid growth constants");
  const double p = growth.p;
  const double log_c = std::log(growth.c);

  // With u = sqrt(L), L = log(N/T) >= 0, the first condition reads
  // u^2 - 32p u + 32p log c >= 0; it fails strictly between the two roots.
  double L13 = 0.0;
  const double disc = 256.0 * p * p - 32.0 * p * log_c;
  if (disc > 0.0) {
    const double u_hi = 16.0 * p + std::sqrt(disc);
    if (u_hi > 0.0) L13 = u_hi * u_hi;
  }

  // Second condition: p log c + log(T^{3/4} + sqrt m) <= (7/32 + 1/(32p)) L.
  const double lhs = p * log_c + std::log(std::pow(T, 0.75) + std::sqrt(static_cast<double>(m)));
  const double L14 = std::max(0.0, lhs / (7.0 / 32.0 + 1.0 / (32.0 * p)));

  return std::log(T) + std::max(L13, L14);
}

std::optional<std::int64_t> n0_from_log(double log_N0) {
  if (!(log_N0 < 43.0)) return std::nullopt;
  const double N0 = std::ceil(std::exp(log_N0) * (1.0 - 1e-15));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(N0));
}

GrowthPreflight growth_preflight(const SdeModel& model, const GrowthConstants& growth, double T,
                                 const SamplerConfig& sampler, std::int64_t n_points) {
  if (n_points < 1) throw std::invalid_argument("growth_preflight: n_points must be positive");
  GrowthPreflight out;
  const double c = growth.c;
  const double p = growth.p;
  const int d = model.d;
  const auto& spec = model.lyapunov;

  for (std::int64_t i = 0; i < n_points; ++i) {
    const Vector x = sample_ball(d, sampler.radius, stream_key({kPreflightTag, sampler.seed, std::uint64_t(i), 0}));
    Vector y;
    if (i % 2 == 0) {
      y = sample_ball(d, sampler.radius, stream_key({kPreflightTag, sampler.seed, std::uint64_t(i), 1}));
    } else {
      const Vector dir = sample_ball(d, 1.0, stream_key({kPreflightTag, sampler.seed, std::uint64_t(i), 2}));
      const double n = dir.norm();
      y = n > 0.0 ? Vector(x + dir * (sampler.near_pair_distance / n)) : x;
    }
    ++out.points_checked;

    const double nx = x.norm();
    double g = model.drift(x).norm() + model.diffusion(x).norm();
    if (spec) {
      const Matrix hess = spec->hess_U(x);
      const double hess_op = hess.size() == 0 ? 0.0
                                              : Eigen::SelfAdjointEigenSolver<Matrix>(hess, Eigen::EigenvaluesOnly)
                                                    .eigenvalues()
                                                    .cwiseAbs()
                                                    .maxCoeff();
      g += std::abs(spec->U_bar(x)) + hess_op + spec->grad_U(x).norm() + std::abs(spec->U(x));
    }
    const double g_rhs = c * (1.0 + std::pow(nx, p));
    out.min_growth_margin = std::min(out.min_growth_margin, g_rhs - g);
    if (g > g_rhs) ++out.growth_violations;

    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    const double lip = (model.drift(x) - model.drift(y)).norm() + (model.diffusion(x) - model.diffusion(y)).norm();
    const double lip_rhs = c * (1.0 + std::pow(nx, p) + std::pow(y.norm(), p)) * dist;
    out.min_lipschitz_margin = std::min(out.min_lipschitz_margin, lip_rhs - lip);
    if (lip > lip_rhs * (1.0 + 1e-12)) ++out.lipschitz_violations;
  }

  out.log_N0 = log_n0(growth, T, model.m);
  out.N0 = n0_from_log(out.log_N0);
  return out;
}

// ---------------------------------------------------------------------------

std::int64_t RegularityReport::failures() const {
  return std::count_if(samples.begin(), samples.end(), [](const RegularitySample& s) { return !s.passed(); });
}

RegularityReport regularity_check(const SchemeRun& run, const SdeModel& model, const BrownianGrid& path,
                                  const AnalysisConstants& consts, const GrowthPreflight& preflight,
                                  std::int64_t samples_per_path, std::uint64_t sub_seed) {
  const GridSpec& grid = run.grid;
  if (path.T() != grid.T || path.N_fine() % grid.N != 0) {
    throw std::invalid_argument("regularity_check: path does not match the run's grid");
  }
  if (consts.N != grid.N || consts.T != grid.T) {
    throw std::invalid_argument("regularity_check: constants do not match the run's grid");
  }
  RegularityReport report;
  report.constants_admissible = preflight.constants_admissible();
  report.step_admissible = preflight.step_admissible(grid.N);
  report.bound = regularity_bound(consts);
  if (!report.constants_admissible) return report;

  NormalGenerator gen(stream_key({kRegularityTag, path.seed(), path.path_index(), sub_seed}));
  const double h = grid.step();
  for (std::int64_t i = 0; i < samples_per_path; ++i) {
    const double t = grid.T * gen.uniform_open_closed();
    const std::int64_t k = floor_index(grid, t);
    const double s = std::clamp(t - grid_point(grid, k), 0.0, h);
    const Vector bridge = path.coarse_bridge_value(grid.N, k, s, sub_seed + static_cast<std::uint64_t>(i));
    const Vector y = interpolate(SchemeKind::StoppedBIT, model, run, k, s, bridge);
    report.samples.push_back({k, s, (y - run.states.col(k)).norm(), report.bound});
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

struct FunctionalValue {
  double value = 0.0;
  bool saturated = false;
};

FunctionalValue saturating_exp(double arg) {
  static const double kLogCap = std::log(kSaturationCap);
  if (!(arg <= kLogCap)) return {kSaturationCap, true};
  return {std::exp(arg), false};
}

void check_mc(const MonteCarloSpec& mc) {
  GridSpec{mc.T, mc.N}.validate();
  if (mc.M < 1) throw std::invalid_argument("Monte Carlo: M must be positive");
}

struct ProfileBatch {
  std::vector<double> sums;
  std::vector<char> saturated;
};

}  // namespace

std::vector<Estimate> exp_moment_profile(SchemeKind kind, const SdeModel& model, const LyapunovSpec& spec,
                                         const MonteCarloSpec& mc, const Vector& x0) {
  check_mc(mc);
  const GridSpec grid{mc.T, mc.N};
  const double h = grid.step();
  const auto n_points = static_cast<std::size_t>(mc.N + 1);

  auto batches = run_batches<ProfileBatch>(mc.M, mc.threads, [&](std::int64_t begin, std::int64_t end,
                                                                 std::int64_t) {
    ProfileBatch out{std::vector<double>(n_points, 0.0), std::vector<char>(n_points, 0)};
    for (std::int64_t i = begin; i < end; ++i) {
      const BrownianGrid path = BrownianGrid::generate(mc.T, mc.N, model.m, mc.seed, std::uint64_t(i));
      const SchemeRun run = run_path(kind, model, grid, x0, path);
      double integral = 0.0;
      for (std::int64_t k = 0; k <= mc.N; ++k) {
        const std::int64_t j = std::min(k, run.tau_index);
        const double tj = grid_point(grid, j);
        const FunctionalValue f =
            saturating_exp(std::exp(-spec.rho * tj) * spec.U(run.states.col(j)) + integral);
        out.sums[std::size_t(k)] += f.value;
        out.saturated[std::size_t(k)] |= static_cast<char>(f.saturated);
        if (k < run.tau_index && k < mc.N) {
          integral += std::exp(-spec.rho * grid_point(grid, k)) * spec.U_bar(run.states.col(k)) * h;
        }
      }
    }
    return out;
  });

  std::vector<Estimate> profile(n_points);
  std::vector<double> per_batch(batches.size());
  for (std::size_t k = 0; k < n_points; ++k) {
    double total = 0.0;
    bool saturated = false;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const BatchRange r = batch_range(mc.M, std::int64_t(batches.size()), std::int64_t(b));
      total += batches[b].sums[k];
      per_batch[b] = batches[b].sums[k] / static_cast<double>(r.end - r.begin);
      saturated = saturated || batches[b].saturated[k] != 0;
    }
    profile[k].value = total / static_cast<double>(mc.M);
    profile[k].std_error = batch_stats(per_batch).std_error;
    profile[k].saturated = saturated;
  }
  return profile;
}

Estimate exp_moment_estimate(SchemeKind kind, const SdeModel& model, const LyapunovSpec& spec,
                             const MonteCarloSpec& mc, const Vector& x0, double t) {
  check_mc(mc);
  const GridSpec grid{mc.T, mc.N};
  if (!(t >= 0.0) || !(t <= mc.T)) throw std::out_of_range("exp_moment_estimate: t outside [0, T]");
  const double h = grid.step();
  const std::int64_t k_floor = floor_index(grid, t);
  const double s = t - grid_point(grid, k_floor);
  const bool on_grid = t == 0.0 || s == h;
  const std::int64_t k_grid = t == 0.0 ? 0 : k_floor + 1;

  struct Batch {
    double sum = 0.0;
    bool saturated = false;
  };
  auto batches = run_batches<Batch>(mc.M, mc.threads, [&](std::int64_t begin, std::int64_t end, std::int64_t) {
    Batch out;
    for (std::int64_t i = begin; i < end; ++i) {
      const BrownianGrid path = BrownianGrid::generate(mc.T, mc.N, model.m, mc.seed, std::uint64_t(i));
      const SchemeRun run = run_path(kind, model, grid, x0, path);
      const std::int64_t last = on_grid ? k_grid : k_floor;  // grid points strictly before t (or at t)
      const std::int64_t stop = std::min(last, run.tau_index);
      double integral = 0.0;
      for (std::int64_t j = 0; j < stop; ++j) {
        integral += std::exp(-spec.rho * grid_point(grid, j)) * spec.U_bar(run.states.col(j)) * h;
      }
      double arg;
      if (on_grid || run.tau_index <= k_floor) {
        const std::int64_t j = std::min(on_grid ? k_grid : k_floor, run.tau_index);
        arg = std::exp(-spec.rho * grid_point(grid, j)) * spec.U(run.states.col(j)) + integral;
      } else {
        const Vector bridge = path.bridge_value(k_floor, s, kTerminalBridgeTag);
        const Vector y = interpolate(kind, model, run, k_floor, s, bridge);
        integral += std::exp(-spec.rho * grid_point(grid, k_floor)) * spec.U_bar(run.states.col(k_floor)) * s;
        arg = std::exp(-spec.rho * t) * spec.U(y) + integral;
      }
      const FunctionalValue f = saturating_exp(arg);
      out.sum += f.value;
      out.saturated = out.saturated || f.saturated;
    }
    return out;
  });

  Estimate est;
  double total = 0.0;
  std::vector<double> per_batch(batches.size());
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const BatchRange r = batch_range(mc.M, std::int64_t(batches.size()), std::int64_t(b));
    total += batches[b].sum;
    per_batch[b] = batches[b].sum / static_cast<double>(r.end - r.begin);
    est.saturated = est.saturated || batches[b].saturated;
  }
  est.value = total / static_cast<double>(mc.M);
  est.std_error = batch_stats(per_batch).std_error;
  return est;
}

double stopping_tail_bound(double C1, double c, double rho, double T, std::int64_t N) {
  const double lg = std::log(T / static_cast<double>(N));
  return C1 * std::exp(1.0 - lg * lg / (24.0 * std::pow(c, 5) * std::exp(rho * T)));
}

StoppingProbability stopping_probability(const SdeModel& model, const MonteCarloSpec& mc, const Vector& x0,
                                         const std::optional<LyapunovSpec>& spec) {
  check_mc(mc);
  const GridSpec grid{mc.T, mc.N};
  auto counts = run_batches<double>(mc.M, mc.threads, [&](std::int64_t begin, std::int64_t end, std::int64_t) {
    double stopped = 0.0;
    for (std::int64_t i = begin; i < end; ++i) {
      const BrownianGrid path = BrownianGrid::generate(mc.T, mc.N, model.m, mc.seed, std::uint64_t(i));
      const SchemeRun run = run_path(SchemeKind::StoppedBIT, model, grid, x0, path);
      if (run.tau_index < mc.N) stopped += 1.0;
    }
    return stopped;
  });

  StoppingProbability out;
  double total = 0.0;
  std::vector<double> per_batch(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const BatchRange r = batch_range(mc.M, std::int64_t(counts.size()), std::int64_t(b));
    total += counts[b];
    per_batch[b] = counts[b] / static_cast<double>(r.end - r.begin);
  }
  out.probability.value = total / static_cast<double>(mc.M);
  out.probability.std_error = batch_stats(per_batch).std_error;

  if (!spec) {
    out.C1 = std::numeric_limits<double>::quiet_NaN();
    out.bound = out.C1;
    return out;
  }
  const auto profile = exp_moment_profile(SchemeKind::StoppedBIT, model, *spec, mc, x0);
  double sup = 0.0;
  for (const auto& e : profile) sup = std::max(sup, e.value);
  out.C1 = sup * sup;
  out.bound = stopping_tail_bound(out.C1, spec->c, spec->rho, mc.T, mc.N);
  return out;
}

}  // namespace biteuler
