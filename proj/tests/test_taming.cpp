#include <catch_amalgamated.hpp>

#include "biteuler/random.hpp"
#include "biteuler/taming.hpp"

#include <cmath>
#include <numbers>

using namespace biteuler;
using Catch::Approx;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

// High-precision reference values (30-digit evaluation of the closed forms).
constexpr double kInvE = 0.36787944117144233;
constexpr double kJacAtOne = -1.103638323514327;
constexpr double kLapAtOne = -1.4715177646857693;

}  // namespace

TEST_CASE("tame at the origin and at x = 1") {
  for (double h : {1e-4, 0.1, 1.0, 7.0}) {
    const TamingParams p{h, 3};
    CHECK(tame(p, Vector::Zero(3)).isZero(0.0));
    CHECK(tame_jacobian_diag(p, Vector::Zero(3)) == Vector::Ones(3));
    CHECK(tame_laplacian(p, Vector::Zero(3)).isZero(0.0));
  }
  const TamingParams p{1.0, 1};
  CHECK(tame(p, scalar(1.0))[0] == Approx(kInvE).epsilon(1e-15));
  CHECK(tame_jacobian_diag(p, scalar(1.0))[0] == Approx(kJacAtOne).epsilon(1e-15));
  CHECK(tame_laplacian(p, scalar(1.0))[0] == Approx(kLapAtOne).epsilon(1e-15));
}

TEST_CASE("tame is odd and bounded by h^{1/4}") {
  for (double h : {1e-6, 1e-3, 0.01, 0.25, 1.0, 10.0}) {
    const double bound = std::pow(h, 0.25);
    double max_seen = 0.0;
    // Dense grid around the maximiser x = (h/4)^{1/4} and far out.
    for (int i = -20000; i <= 20000; ++i) {
      const double x = bound * i / 2000.0;
      const double v = tame_component(h, x);
      CHECK(tame_component(h, -x) == -v);
      max_seen = std::max(max_seen, std::abs(v));
    }
    CHECK(max_seen <= bound);
    // sup of u exp(-u^4) is (1/4)^{1/4} e^{-1/4}.
    CHECK(max_seen == Approx(bound * std::pow(0.25, 0.25) * std::exp(-0.25)).epsilon(1e-6));
  }
}

TEST_CASE("huge arguments return the exact limit 0") {
  for (double x : {1e3, -1e3, 1e80, -1e150, 1e300}) {
    CHECK(tame_component(1e-3, x) == 0.0);
    CHECK(tame_derivative(1e-3, x) == 0.0);
    CHECK(tame_second_derivative(1e-3, x) == 0.0);
  }
}

TEST_CASE("derivatives match finite differences of tame at random points") {
  NormalGenerator gen(stream_key({11, 22}));
  for (int n = 0; n < 10000; ++n) {
    const double h = std::pow(10.0, -4.0 * gen.uniform_closed_open());
    const double x = std::pow(h, 0.25) * (6.0 * gen.uniform_closed_open() - 3.0);
    const double scale = std::pow(h, 0.25);

    const double dj = 1e-4 * scale;
    const double fd_j = (tame_component(h, x + dj) - tame_component(h, x - dj)) / (2.0 * dj);
    const double jac = tame_derivative(h, x);
    INFO("h=" << h << " x=" << x);
    CHECK(std::abs(jac - fd_j) / std::max(std::abs(jac), 1.0) < 1e-6);

    const double dl = 1e-3 * scale;
    const double fd_l =
        (tame_component(h, x + dl) - 2.0 * tame_component(h, x) + tame_component(h, x - dl)) / (dl * dl);
    const double lap = tame_second_derivative(h, x);
    CHECK(std::abs(lap - fd_l) / std::max(std::abs(lap), 1.0 / scale) < 1e-5);
  }
}

TEST_CASE("stopping_threshold values") {
  CHECK(stopping_threshold(1, 1.0) == 1.0);
  CHECK(stopping_threshold(4, 4.0) == 1.0);
  CHECK(stopping_threshold(1, 1.0 / std::numbers::e) == Approx(std::numbers::e).epsilon(1e-15));
  CHECK(stopping_threshold(1024, 1.0) == Approx(13.912237489357499).epsilon(1e-14));
  // |log| makes N < T symmetric to N > T.
  CHECK(stopping_threshold(1, 8.0) == Approx(stopping_threshold(8, 1.0)).epsilon(1e-15));
  double prev = 0.0;
  for (std::int64_t N = 1; N <= (1 << 20); N *= 2) {
    CHECK(stopping_threshold(N, 1.0) >= prev);
    prev = stopping_threshold(N, 1.0);
  }
  CHECK_THROWS_AS(stopping_threshold(0, 1.0), std::invalid_argument);
}

TEST_CASE("IncrementTaming members") {
  const Vector x = (Vector(3) << 0.3, -0.1, 2.0).finished();
  const auto id = IncrementTaming::identity();
  CHECK(id.apply(x) == x);
  CHECK(id.jacobian_diag(x) == Vector::Ones(3));
  CHECK(id.laplacian(x).isZero(0.0));
  const auto q = IncrementTaming::quartic_exponential(0.5);
  CHECK(q.apply(x) == tame(TamingParams{0.5, 3}, x));
  CHECK(q.jacobian_diag(x) == tame_jacobian_diag(TamingParams{0.5, 3}, x));
  CHECK(q.laplacian(x) == tame_laplacian(TamingParams{0.5, 3}, x));
  CHECK_THROWS_AS(IncrementTaming::quartic_exponential(0.0), std::invalid_argument);
}

TEST_CASE("verify_taming_bounds estimates agree with quadrature") {
  // sqrt(E[(Pi'(W) - 1)^2]) and sqrt(E[Pi''(W)^2]) for W ~ N(0, h), by quadrature.
  struct Row {
    double h, jac, lap;
  };
  const Row rows[] = {{1.0, 1.11094636007979, 2.32399397342762},
                      {0.1, 0.813041148234784, 3.89267838040577},
                      {0.01, 0.299201834002461, 4.18879065843243}};
  for (const auto& row : rows) {
    const auto rep = verify_taming_bounds(TamingParams{row.h, 1}, 200000, 5);
    INFO("h=" << row.h);
    CHECK(std::abs(rep.jacobian_l2 - row.jac) < 4.0 * rep.jacobian_l2_stderr);
    CHECK(std::abs(rep.laplacian_l2 - row.lap) < 4.0 * rep.laplacian_l2_stderr);
    CHECK(rep.sup_norm_holds);
    CHECK(rep.sup_norm_violations == 0);
    CHECK(rep.sup_norm_max <= std::pow(row.h, 0.25));
    CHECK(rep.evaluated_at_t == row.h);
  }
}

TEST_CASE("verify_taming_bounds pass/fail flags follow the margins") {
  const auto big = verify_taming_bounds(TamingParams{1.0, 3}, 20000, 1);
  CHECK(big.all_hold());
  CHECK(big.jacobian_bound == Approx(52.0 * std::sqrt(3.0)));
  CHECK(big.laplacian_bound == Approx(32.0 * std::sqrt(3.0)));
  // At h = 0.01, m = 3 the true Laplacian norm sqrt(3) * 4.19 exceeds 32 sqrt(3h).
  const auto small = verify_taming_bounds(TamingParams{0.01, 3}, 20000, 1);
  CHECK(small.sup_norm_holds);
  CHECK(small.jacobian_holds);
  CHECK_FALSE(small.laplacian_holds);
  CHECK_FALSE(small.all_hold());
}

TEST_CASE("verify_taming_bounds input validation") {
  CHECK_THROWS_AS(verify_taming_bounds(TamingParams{0.1, 1}, 999, 0), std::invalid_argument);
  CHECK_THROWS_AS(verify_taming_bounds(TamingParams{-0.1, 1}, 1000, 0), std::invalid_argument);
  CHECK_THROWS_AS(verify_taming_bounds(TamingParams{0.1, 0}, 1000, 0), std::invalid_argument);
}
