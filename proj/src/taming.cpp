#include "biteuler/taming.hpp"

#include "biteuler/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace biteuler {

void TamingParams::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("TamingParams: h must be positive");
  if (m < 1) throw std::invalid_argument("TamingParams: m must be positive");
}

Vector tame(const TamingParams& params, const Vector& x) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = tame_component(params.h, x[i]);
  return out;
}

Vector tame_jacobian_diag(const TamingParams& params, const Vector& x) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = tame_derivative(params.h, x[i]);
  return out;
}

Vector tame_laplacian(const TamingParams& params, const Vector& x) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = tame_second_derivative(params.h, x[i]);
  return out;
}

double stopping_threshold(std::int64_t N, double T) {
  if (N < 1) throw std::invalid_argument("stopping_threshold: N must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("stopping_threshold: T must be positive");
  return std::exp(std::sqrt(std::abs(std::log(static_cast<double>(N) / T))));
}

IncrementTaming IncrementTaming::quartic_exponential(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("IncrementTaming: h must be positive");
  return IncrementTaming(Kind::QuarticExponential, h);
}

Vector IncrementTaming::apply(const Vector& x) const {
  if (kind_ == Kind::Identity) return x;
  return tame(TamingParams{h_, static_cast<int>(x.size())}, x);
}

Vector IncrementTaming::jacobian_diag(const Vector& x) const {
  if (kind_ == Kind::Identity) return Vector::Ones(x.size());
  return tame_jacobian_diag(TamingParams{h_, static_cast<int>(x.size())}, x);
}

Vector IncrementTaming::laplacian(const Vector& x) const {
  if (kind_ == Kind::Identity) return Vector::Zero(x.size());
  return tame_laplacian(TamingParams{h_, static_cast<int>(x.size())}, x);
}

namespace {

struct MomentSums {
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
  }
};

// L2 norm sqrt(E[Z]) of a nonnegative sample Z and its delta-method stderr.
std::pair<double, double> l2_from_second_moment(const MomentSums& s, double n) {
  const double mean = s.sum / n;
  const double var = std::max(0.0, (s.sum_sq / n - mean * mean) * n / (n - 1.0));
  const double se_mean = std::sqrt(var / n);
  const double norm = std::sqrt(mean);
  const double se_norm = norm > 0.0 ? se_mean / (2.0 * norm) : 0.0;
  return {norm, se_norm};
}

}  // namespace

TamingBoundsReport verify_taming_bounds(const TamingParams& params, std::int64_t sample_count,
                                        std::uint64_t seed) {
  params.validate();
  if (sample_count < 1000) throw std::invalid_argument("verify_taming_bounds: need at least 1000 samples");

  TamingBoundsReport report;
  report.params = params;
  report.sample_count = sample_count;
  report.seed = seed;
  report.evaluated_at_t = params.h;

  const double h = params.h;
  const double sqrt_m = std::sqrt(static_cast<double>(params.m));
  report.sup_norm_bound = std::pow(h, 0.25) * sqrt_m;
  report.jacobian_bound = 52.0 * h * sqrt_m;
  report.laplacian_bound = 32.0 * std::sqrt(h * params.m);

  NormalGenerator gen(stream_key({seed, 0x7a6d696e67ULL}));
  const double scale = std::sqrt(h);
  MomentSums jac;
  MomentSums lap;
  Vector w(params.m);
  for (std::int64_t n = 0; n < sample_count; ++n) {
    for (int i = 0; i < params.m; ++i) w[i] = scale * gen.normal();

    const double sup = tame(params, w).norm();
    report.sup_norm_max = std::max(report.sup_norm_max, sup);
    if (sup > report.sup_norm_bound) ++report.sup_norm_violations;

    // Operator norm of the diagonal matrix DPi(W) - I.
    const double op = (tame_jacobian_diag(params, w).array() - 1.0).abs().maxCoeff();
    jac.add(op * op);
    lap.add(tame_laplacian(params, w).squaredNorm());
  }

  const auto n = static_cast<double>(sample_count);
  std::tie(report.jacobian_l2, report.jacobian_l2_stderr) = l2_from_second_moment(jac, n);
  std::tie(report.laplacian_l2, report.laplacian_l2_stderr) = l2_from_second_moment(lap, n);

  report.sup_norm_holds = report.sup_norm_violations == 0;
  report.jacobian_holds = report.jacobian_bound - report.jacobian_l2 >= 3.0 * report.jacobian_l2_stderr;
  report.laplacian_holds =
      report.laplacian_bound - report.laplacian_l2 >= 3.0 * report.laplacian_l2_stderr;
  return report;
}

}  // namespace biteuler
