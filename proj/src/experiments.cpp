#include "biteuler/experiments.hpp"

#include "biteuler/brownian.hpp"
#include "biteuler/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace biteuler {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t common_multiple(const std::vector<std::int64_t>& Ns) {
  std::int64_t out = 1;
  for (auto n : Ns) out = std::lcm(out, n);
  return out;
}

void check_Ns(const std::vector<std::int64_t>& Ns, const char* who) {
  if (Ns.empty()) throw std::invalid_argument(std::string(who) + ": Ns must not be empty");
  for (auto n : Ns) {
    if (n < 1) throw std::invalid_argument(std::string(who) + ": every N must be positive");
  }
}

}  // namespace

void ConvergenceConfig::validate() const {
  check_Ns(Ns, "ConvergenceConfig");
  if (!(T > 0.0)) throw std::invalid_argument("ConvergenceConfig: T must be positive");
  if (!(r >= 1.0)) throw std::invalid_argument("ConvergenceConfig: r must be >= 1");
  if (M < 2) throw std::invalid_argument("ConvergenceConfig: M must be at least 2");
  if (x0.size() != model.d) throw std::invalid_argument("ConvergenceConfig: x0 has the wrong dimension");
  if (reference == ReferenceKind::Exact) {
    if (!model.has_exact_solution()) {
      throw std::invalid_argument("ConvergenceConfig: exact reference requested for a model without closed form");
    }
  } else {
    if (N_ref < 1) throw std::invalid_argument("ConvergenceConfig: N_ref must be positive");
    for (auto n : Ns) {
      if (N_ref % n != 0) throw std::invalid_argument("ConvergenceConfig: N_ref must be a multiple of every N");
    }
  }
}

ErrorTable strong_error(const ConvergenceConfig& config) {
  config.validate();
  const auto& model = config.model;
  const std::size_t nN = config.Ns.size();
  const std::int64_t N_fine =
      config.reference == ReferenceKind::FineGrid ? config.N_ref : common_multiple(config.Ns);
  const double r = config.r;

  struct Batch {
    std::vector<std::vector<double>> sums;  // [n][k] sum of |X - Y|^r
    std::vector<std::int64_t> valid;
  };

  auto batches = run_batches<Batch>(config.M, config.threads, [&](std::int64_t begin, std::int64_t end,
                                                                  std::int64_t) {
    Batch out;
    out.sums.resize(nN);
    out.valid.assign(nN, 0);
    for (std::size_t n = 0; n < nN; ++n) out.sums[n].assign(std::size_t(config.Ns[n] + 1), 0.0);

    for (std::int64_t i = begin; i < end; ++i) {
      const BrownianGrid path = BrownianGrid::generate(config.T, N_fine, model.m, config.seed, std::uint64_t(i));

      Matrix reference;  // d x (N_fine + 1)
      bool ref_overflow = false;
      if (config.reference == ReferenceKind::FineGrid) {
        SchemeRun ref = run_path(config.reference_scheme, model, GridSpec{config.T, N_fine}, config.x0, path);
        ref_overflow = ref.overflow;
        reference = std::move(ref.states);
      } else {
        const Matrix W = path.cumulative();
        const GridSpec fine{config.T, N_fine};
        reference.resize(model.d, N_fine + 1);
        for (std::int64_t j = 0; j <= N_fine; ++j) {
          reference.col(j) = model.exact_solution(config.x0, grid_point(fine, j), W.col(j));
        }
        ref_overflow = !reference.allFinite();
      }

      for (std::size_t n = 0; n < nN; ++n) {
        const std::int64_t N = config.Ns[n];
        const SchemeRun run = run_path(config.scheme, model, GridSpec{config.T, N}, config.x0, path);
        if (ref_overflow || run.overflow) continue;
        const std::int64_t ratio = N_fine / N;
        auto& sums = out.sums[n];
        for (std::int64_t k = 0; k <= N; ++k) {
          const double e = (reference.col(k * ratio) - run.states.col(k)).norm();
          sums[std::size_t(k)] += r == 2.0 ? e * e : std::pow(e, r);
        }
        ++out.valid[n];
      }
    }
    return out;
  });

  ErrorTable table;
  table.scheme = std::string(to_string(config.scheme));
  table.model = config.model_id.empty() ? model.name : config.model_id;
  table.r = r;

  auto lr_norm = [r](double mean) { return r == 2.0 ? std::sqrt(mean) : std::pow(mean, 1.0 / r); };

  for (std::size_t n = 0; n < nN; ++n) {
    const std::int64_t N = config.Ns[n];
    ErrorRow row;
    row.N = N;
    row.M = config.M;
    row.seed = config.seed;

    std::int64_t valid = 0;
    std::vector<double> totals(std::size_t(N + 1), 0.0);
    std::vector<double> batch_sups;
    for (const auto& b : batches) {
      valid += b.valid[n];
      double sup = 0.0;
      for (std::size_t k = 0; k < totals.size(); ++k) {
        totals[k] += b.sums[n][k];
        if (b.valid[n] > 0) sup = std::max(sup, lr_norm(b.sums[n][k] / static_cast<double>(b.valid[n])));
      }
      if (b.valid[n] > 0) batch_sups.push_back(sup);
    }

    row.overflow_fraction = static_cast<double>(config.M - valid) / static_cast<double>(config.M);
    row.per_gridpoint_errors.resize(totals.size());
    if (valid == 0) {
      std::fill(row.per_gridpoint_errors.begin(), row.per_gridpoint_errors.end(), kNaN);
      row.sup_error = kNaN;
      row.std_error = kNaN;
    } else {
      for (std::size_t k = 0; k < totals.size(); ++k) {
        row.per_gridpoint_errors[k] = lr_norm(totals[k] / static_cast<double>(valid));
        row.sup_error = std::max(row.sup_error, row.per_gridpoint_errors[k]);
      }
      row.std_error = batch_stats(batch_sups).std_error;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

RateFit fit_rate(const ErrorTable& table, double T) {
  RateFit fit;
  for (const auto& row : table.rows) {
    if (!(row.sup_error > 0.0) || !std::isfinite(row.sup_error) || row.N < 1) {
      ++fit.excluded_rows;
      continue;
    }
    fit.points.emplace_back(std::log(T / static_cast<double>(row.N)), std::log(row.sup_error));
  }
  if (fit.points.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 rows with positive error");

  const auto n = static_cast<double>(fit.points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : fit.points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: all rows share one step size");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [x, y] : fit.points) {
    const double dev = y - (fit.intercept + fit.slope * x);
    fit.residual += dev * dev;
  }
  return fit;
}

// ---------------------------------------------------------------------------

DivergenceReport divergence_comparison(const SdeModel& model, const std::vector<std::int64_t>& Ns,
                                       std::int64_t M, const Vector& x0, std::uint64_t seed, double T,
                                       unsigned threads) {
  check_Ns(Ns, "divergence_comparison");
  if (x0.size() != model.d) throw std::invalid_argument("divergence_comparison: x0 has the wrong dimension");
  const std::int64_t N_fine = common_multiple(Ns);
  const std::size_t nN = Ns.size();

  struct Counts {
    std::vector<double> em_exploded, bit_exploded, em_m2, bit_m2;
  };

  auto exploded = [](const SchemeRun& run) {
    if (run.overflow) return true;
    for (Eigen::Index k = 0; k < run.states.cols(); ++k) {
      const double n = run.states.col(k).norm();
      if (!(n <= kExplosionMagnitude)) return true;
    }
    return false;
  };
  auto capped_square = [](const SchemeRun& run) {
    const double n2 = run.states.col(run.states.cols() - 1).squaredNorm();
    return n2 <= kSaturationCap ? n2 : kSaturationCap;
  };

  auto batches = run_batches<Counts>(M, threads, [&](std::int64_t begin, std::int64_t end, std::int64_t) {
    Counts c{std::vector<double>(nN, 0.0), std::vector<double>(nN, 0.0), std::vector<double>(nN, 0.0),
             std::vector<double>(nN, 0.0)};
    for (std::int64_t i = begin; i < end; ++i) {
      const BrownianGrid path = BrownianGrid::generate(T, N_fine, model.m, seed, std::uint64_t(i));
      for (std::size_t n = 0; n < nN; ++n) {
        const GridSpec grid{T, Ns[n]};
        const SchemeRun em = run_path(SchemeKind::EulerMaruyama, model, grid, x0, path);
        const SchemeRun bit = run_path(SchemeKind::StoppedBIT, model, grid, x0, path);
        c.em_exploded[n] += exploded(em) ? 1.0 : 0.0;
        c.bit_exploded[n] += exploded(bit) ? 1.0 : 0.0;
        c.em_m2[n] += capped_square(em);
        c.bit_m2[n] += capped_square(bit);
      }
    }
    return c;
  });

  DivergenceReport report;
  report.model = model.name;
  report.x0 = x0;
  report.M = M;
  report.seed = seed;
  const auto dM = static_cast<double>(M);
  for (std::size_t n = 0; n < nN; ++n) {
    DivergenceRow row;
    row.N = Ns[n];
    for (const auto& b : batches) {
      row.em_fraction += b.em_exploded[n];
      row.bit_fraction += b.bit_exploded[n];
      row.em_second_moment += b.em_m2[n] / dM;
      row.bit_second_moment += b.bit_m2[n] / dM;
    }
    row.em_fraction /= dM;
    row.bit_fraction /= dM;
    row.em_second_moment = std::min(row.em_second_moment, kSaturationCap);
    row.bit_second_moment = std::min(row.bit_second_moment, kSaturationCap);
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------

bool MomentReport::all_within_bound() const {
  return std::all_of(rows.begin(), rows.end(), [](const MomentRow& r) { return r.within_bound; });
}

MomentReport moment_sweep(const SdeModel& model, const GrowthConstants& growth,
                          const std::vector<std::int64_t>& Ns, std::int64_t M, std::uint64_t seed,
                          const Vector& x0, double T, unsigned threads) {
  check_Ns(Ns, "moment_sweep");
  if (!model.lyapunov) throw std::invalid_argument("moment_sweep: model has no Lyapunov data");
  if (x0.size() != model.d) throw std::invalid_argument("moment_sweep: x0 has the wrong dimension");
  const LyapunovSpec& spec = *model.lyapunov;

  MomentReport report;
  report.model = model.name;
  report.M = M;
  report.seed = seed;
  report.growth = growth;
  report.log_N0 = log_n0(growth, T, model.m);
  report.N0 = n0_from_log(report.log_N0);

  const double U0 = spec.U(x0);
  double max_rel = 0.0;
  for (const auto N : Ns) {
    const GridSpec grid{T, N};
    auto sums = run_batches<double>(M, threads, [&](std::int64_t begin, std::int64_t end, std::int64_t) {
      double s = 0.0;
      for (std::int64_t i = begin; i < end; ++i) {
        const BrownianGrid path = BrownianGrid::generate(T, N, model.m, seed, std::uint64_t(i));
        const SchemeRun run = run_path(SchemeKind::StoppedBIT, model, grid, x0, path);
        s += spec.U(run.states.col(N));
      }
      return s;
    });

    MomentRow row;
    row.N = N;
    double total = 0.0;
    std::vector<double> per_batch(sums.size());
    for (std::size_t b = 0; b < sums.size(); ++b) {
      const BatchRange r = batch_range(M, std::int64_t(sums.size()), std::int64_t(b));
      total += sums[b];
      per_batch[b] = sums[b] / static_cast<double>(r.end - r.begin);
    }
    row.mean_U.value = total / static_cast<double>(M);
    row.mean_U.std_error = batch_stats(per_batch).std_error;
    row.exp_moment = exp_moment_estimate(SchemeKind::StoppedBIT, model, spec, MonteCarloSpec{T, N, M, seed, threads},
                                         x0, T);

    const AnalysisConstants consts{growth.c, growth.p, T, model.m, spec.rho, N};
    row.epsilon = epsilon_n(consts);
    row.exp_bound = std::exp(U0) * std::exp(row.epsilon * T);
    row.moment_bound = moment_bound(consts, T, U0);
    row.bound_applicable = report.N0.has_value() && N >= *report.N0;
    row.within_bound = !row.bound_applicable || row.mean_U.value <= row.moment_bound + 3.0 * row.mean_U.std_error;
    if (row.mean_U.value > 0.0) max_rel = std::max(max_rel, row.mean_U.std_error / row.mean_U.value);
    report.rows.push_back(row);
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& row : report.rows) {
    lo = std::min(lo, row.mean_U.value);
    hi = std::max(hi, row.mean_U.value);
  }
  report.flatness_ratio = lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  report.flatness_tolerance = 1.0 + 5.0 * max_rel;
  return report;
}

}  // namespace biteuler
