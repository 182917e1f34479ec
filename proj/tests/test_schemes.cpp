#include <catch_amalgamated.hpp>

#include "biteuler/models.hpp"
#include "biteuler/random.hpp"
#include "biteuler/schemes.hpp"

#include <cmath>
#include <limits>

using namespace biteuler;
using Catch::Approx;

namespace {

Vector vec1(double x) { return Vector::Constant(1, x); }

SdeModel scalar_model(std::function<double(double)> mu, std::function<double(double)> sigma) {
  SdeModel m;
  m.name = "scalar";
  m.drift = [mu](const Vector& x) { return vec1(mu(x[0])); };
  m.diffusion = [sigma](const Vector& x) { return Matrix::Constant(1, 1, sigma(x[0])); };
  return m;
}

SdeModel zero_model(int d, int m) {
  SdeModel model;
  model.name = "zero";
  model.d = d;
  model.m = m;
  model.drift = [d](const Vector&) { return Vector::Zero(d); };
  model.diffusion = [d, m](const Vector&) { return Matrix::Zero(d, m); };
  return model;
}

}  // namespace

TEST_CASE("scheme names parse and print") {
  CHECK(parse_scheme("bit") == SchemeKind::StoppedBIT);
  CHECK(parse_scheme("stopped-bit") == SchemeKind::StoppedBIT);
  CHECK(parse_scheme("em") == SchemeKind::EulerMaruyama);
  CHECK(parse_scheme("euler-maruyama") == SchemeKind::EulerMaruyama);
  CHECK(parse_scheme("tamed") == SchemeKind::DriftTamed);
  CHECK(parse_scheme("drift-tamed") == SchemeKind::DriftTamed);
  CHECK_THROWS_AS(parse_scheme("milstein"), std::invalid_argument);
  for (auto k : {SchemeKind::StoppedBIT, SchemeKind::EulerMaruyama, SchemeKind::DriftTamed}) {
    CHECK(parse_scheme(to_string(k)) == k);
  }
}

TEST_CASE("step_bit on the cubic example") {
  const auto model = scalar_model([](double x) { return -x * x * x; }, [](double) { return 1.0; });
  const GridSpec grid{1.0, 4};
  // 0.5 - 0.125 * 0.25 + 0.2 exp(-0.2^4 / 0.25), evaluated to 30 digits.
  CHECK(step_bit(model, grid, vec1(0.5), vec1(0.2))[0] == Approx(0.66747408727582981).epsilon(1e-15));
}

TEST_CASE("step_bit freezes outside the threshold") {
  const auto model = scalar_model([](double x) { return -x * x * x; }, [](double) { return 1.0; });
  const GridSpec grid{1.0, 1024};
  const double thr = stopping_threshold(1024, 1.0);
  CHECK(step_bit(model, grid, vec1(thr * 1.0001), vec1(0.3))[0] == thr * 1.0001);
  CHECK(step_bit(model, grid, vec1(-thr - 1.0), vec1(-0.3))[0] == -thr - 1.0);
  // At exactly the threshold the indicator is still on.
  CHECK(step_bit(model, grid, vec1(thr), vec1(0.0))[0] != thr);
}

TEST_CASE("zero coefficients leave the state unchanged") {
  const auto model = zero_model(2, 3);
  const GridSpec grid{1.0, 8};
  const Vector y = (Vector(2) << 0.3, -0.7).finished();
  const Vector dW = (Vector(3) << 0.1, 0.2, -0.5).finished();
  CHECK(step_bit(model, grid, y, dW) == y);
  CHECK(step_em(model, grid, y, dW).y == y);
  CHECK(step_drift_tamed(model, grid, y, dW).y == y);
}

TEST_CASE("step_em and step_drift_tamed examples") {
  const double a = 0.7;
  const auto linear = scalar_model([a](double x) { return a * x; }, [](double) { return 0.0; });
  const GridSpec grid{2.0, 5};
  CHECK(step_em(linear, grid, vec1(1.5), vec1(0.3)).y[0] == Approx(1.5 * (1.0 + a * 0.4)).epsilon(1e-15));

  const auto constant = scalar_model([](double) { return 8.0; }, [](double) { return 0.0; });
  const auto out = step_drift_tamed(constant, GridSpec{1.0, 4}, vec1(0.0), vec1(0.0));
  CHECK(out.y[0] == Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_FALSE(out.overflow);

  // Drift-tamed increment is at most 1 (up to rounding) for arbitrarily large drift.
  const auto huge = scalar_model([](double x) { return 1e200 * (1.0 + x * x); }, [](double) { return 0.0; });
  const auto h = step_drift_tamed(huge, GridSpec{1.0, 4}, vec1(1.0), vec1(0.0));
  CHECK(h.y[0] - 1.0 <= 1.0);
  CHECK(h.y[0] - 1.0 > 0.99);

  // Zero drift reduces to Euler-Maruyama.
  const auto noise = scalar_model([](double) { return 0.0; }, [](double x) { return 0.5 + x; });
  CHECK(step_drift_tamed(noise, grid, vec1(0.2), vec1(-0.3)).y == step_em(noise, grid, vec1(0.2), vec1(-0.3)).y);
}

TEST_CASE("cubic drift makes Euler-Maruyama grow superlinearly and overflow") {
  const auto model = scalar_model([](double x) { return -x * x * x; }, [](double) { return 1.0; });
  const GridSpec grid{1.0, 2};
  Vector y = vec1(10.0);
  double prev = 10.0;
  int steps = 0;
  while (steps < 20) {
    const auto next = step_em(model, grid, y, vec1(0.0));
    ++steps;
    if (next.overflow) break;
    CHECK(std::abs(next.y[0]) > prev * prev);
    prev = std::abs(next.y[0]);
    y = next.y;
  }
  CHECK(steps < 20);
}

TEST_CASE("identity taming with no threshold reproduces Euler-Maruyama bit for bit") {
  const auto model = model_gbm(0.05, 0.2);
  const GridSpec grid{1.0, 16};
  NormalGenerator gen(3);
  for (int i = 0; i < 1000; ++i) {
    const Vector y = vec1(3.0 * gen.normal());
    const Vector dW = vec1(0.25 * gen.normal());
    const Vector a = tamed_update(model, y, grid.step(), dW, IncrementTaming::identity(),
                                  std::numeric_limits<double>::infinity());
    CHECK(a == step_em(model, grid, y, dW).y);
  }
  // And the quartic taming with the stopping threshold reproduces step_bit.
  const auto gl = model_ginzburg_landau(1.0, 1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vector y = vec1(5.0 * gen.normal());
    const Vector dW = vec1(0.25 * gen.normal());
    const Vector a = tamed_update(gl, y, grid.step(), dW, IncrementTaming::quartic_exponential(grid.step()),
                                  stopping_threshold(grid.N, grid.T));
    CHECK(a == step_bit(gl, grid, y, dW));
  }
}

TEST_CASE("Euler-Maruyama path on GBM matches a straight-line loop exactly") {
  const double a = 0.05;
  const double b = 0.2;
  const auto model = model_gbm(a, b);
  const auto path = generate_path(1.0, 256, 1, 42, 0);
  const GridSpec grid{1.0, 64};
  const auto run = run_path(SchemeKind::EulerMaruyama, model, grid, vec1(1.0), path);

  // Independent oracle: sum fine increments in the same pairwise order, then step.
  const Matrix& inc = path.increments();
  const double h = 1.0 / 64;
  double y = 1.0;
  REQUIRE(run.states(0, 0) == 1.0);
  for (int k = 0; k < 64; ++k) {
    const double dW = (inc(0, 4 * k) + inc(0, 4 * k + 1)) + (inc(0, 4 * k + 2) + inc(0, 4 * k + 3));
    y = y + (a * y * h + b * y * dW);
    CHECK(run.states(0, k + 1) == y);
  }
  CHECK(run.tau_index == 64);
  CHECK_FALSE(run.frozen);
  CHECK_FALSE(run.overflow);
}

TEST_CASE("run_path with N = 1 and zero coefficients") {
  const auto model = zero_model(1, 1);
  Matrix inc(1, 1);
  inc << 0.4;
  for (auto kind : {SchemeKind::StoppedBIT, SchemeKind::EulerMaruyama, SchemeKind::DriftTamed}) {
    const auto run = run_path(kind, model, GridSpec{1.0, 1}, vec1(0.5), inc);
    CHECK(run.states(0, 0) == 0.5);
    CHECK(run.states(0, 1) == 0.5);
    CHECK(run.tau_index == 1);
  }
  // Threshold is 1 at N = T: |x0| = 2 is outside.
  const auto run = run_path(SchemeKind::StoppedBIT, model, GridSpec{1.0, 1}, vec1(2.0), inc);
  CHECK(run.tau_index == 0);
  CHECK(run.frozen);
}

TEST_CASE("stopped scheme freezes from tau onward") {
  const auto model = scalar_model([](double) { return 0.0; }, [](double) { return 0.0; });
  const GridSpec grid{1.0, 64};
  const double thr = stopping_threshold(64, 1.0);
  const auto run = run_path(SchemeKind::StoppedBIT, model, grid, vec1(thr + 0.5), Matrix::Zero(1, 64));
  CHECK(run.tau_index == 0);
  for (int k = 0; k <= 64; ++k) CHECK(run.states(0, k) == thr + 0.5);

  // Strong positive drift crosses the threshold mid-path.
  const auto push = scalar_model([](double) { return 40.0; }, [](double) { return 0.0; });
  const auto run2 = run_path(SchemeKind::StoppedBIT, push, grid, vec1(0.0), Matrix::Zero(1, 64));
  REQUIRE(run2.frozen);
  REQUIRE(run2.tau_index < 64);
  CHECK(run2.states(0, run2.tau_index) > thr);
  CHECK(run2.states(0, run2.tau_index - 1) <= thr);
  for (std::int64_t k = run2.tau_index; k <= 64; ++k) CHECK(run2.states(0, k) == run2.states(0, run2.tau_index));
}

TEST_CASE("freeze invariant holds on random Ginzburg-Landau paths from far out") {
  const auto model = model_ginzburg_landau(1.0, 1.0, 1.0);
  const GridSpec grid{1.0, 32};
  int frozen = 0;
  for (std::uint64_t p = 0; p < 200; ++p) {
    const auto path = generate_path(1.0, 32, 1, 8, p);
    const auto run = run_path(SchemeKind::StoppedBIT, model, grid, vec1(4.5 + 0.01 * p), path);
    frozen += run.frozen;
    for (std::int64_t k = run.tau_index; k <= 32; ++k) CHECK(run.states(0, k) == run.states(0, run.tau_index));
    CHECK(run.states.allFinite());
  }
  CHECK(frozen > 0);
}

TEST_CASE("per-step noise of the stopped scheme is bounded by |sigma|_F h^{1/4} sqrt(m)") {
  SdeModel model = zero_model(2, 3);
  model.diffusion = [](const Vector& x) {
    Matrix s(2, 3);
    s << 1.0 + x[0], 0.5, -0.2, x[1], 2.0, 0.3;
    return s;
  };
  NormalGenerator gen(17);
  for (std::int64_t N : {4, 64, 1024}) {
    const GridSpec grid{1.0, N};
    const double h = grid.step();
    for (int i = 0; i < 2000; ++i) {
      const Vector y = (Vector(2) << gen.normal(), gen.normal()).finished();
      const Vector dW = (Vector(3) << 5 * gen.normal(), 5 * gen.normal(), 5 * gen.normal()).finished();
      const Vector step = step_bit(model, grid, y, dW) - y;
      CHECK(step.norm() <= model.diffusion(y).norm() * std::pow(h, 0.25) * std::sqrt(3.0) * (1 + 1e-12));
    }
  }
}

TEST_CASE("interpolate agrees with the grid at both ends of each step") {
  const auto model = model_ginzburg_landau(1.0, 1.0, 1.0);
  const GridSpec grid{1.0, 16};
  const auto path = generate_path(1.0, 64, 1, 2, 5);
  const Matrix coarse = path.coarsen(16);
  for (auto kind : {SchemeKind::StoppedBIT, SchemeKind::EulerMaruyama, SchemeKind::DriftTamed}) {
    const auto run = run_path(kind, model, grid, vec1(1.0), path);
    for (std::int64_t k = 0; k < 16; ++k) {
      CHECK(interpolate(kind, model, run, k, 0.0, Vector::Zero(1)) == run.state(k));
      CHECK(interpolate(kind, model, run, k, grid.step(), coarse.col(k)) == run.state(k + 1));
    }
    const Vector mid = interpolate(kind, model, run, 3, 0.5 * grid.step(),
                                   path.coarse_bridge_value(16, 3, 0.5 * grid.step(), 0));
    CHECK(mid.allFinite());
    CHECK_THROWS_AS(interpolate(kind, model, run, 16, 0.0, Vector::Zero(1)), std::out_of_range);
    CHECK_THROWS_AS(interpolate(kind, model, run, 0, 1.1 * grid.step(), Vector::Zero(1)), std::out_of_range);
  }
}

TEST_CASE("with sigma = 0 all schemes converge to the ODE at order 1") {
  // Lipschitz drift x' = -x - x/(1+x^2); reference by RK4 on 2^16 steps.
  const auto model = scalar_model([](double x) { return -x - x / (1.0 + x * x); }, [](double) { return 0.0; });
  auto rk4 = [](double x, double T, int n) {
    auto f = [](double y) { return -y - y / (1.0 + y * y); };
    const double h = T / n;
    for (int i = 0; i < n; ++i) {
      const double k1 = f(x);
      const double k2 = f(x + 0.5 * h * k1);
      const double k3 = f(x + 0.5 * h * k2);
      const double k4 = f(x + h * k3);
      x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return x;
  };
  const double exact = rk4(1.0, 1.0, 1 << 16);
  for (auto kind : {SchemeKind::StoppedBIT, SchemeKind::EulerMaruyama, SchemeKind::DriftTamed}) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::int64_t N = 64; N <= 4096; N *= 2) {
      const auto run = run_path(kind, model, GridSpec{1.0, N}, vec1(1.0), Matrix::Zero(1, N));
      const double err = std::abs(run.states(0, N) - exact);
      const double lx = std::log(1.0 / N);
      const double ly = std::log(err);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    INFO(to_string(kind));
    CHECK(std::abs(slope - 1.0) < 0.1);
  }
}

TEST_CASE("coupled runs depend continuously on the Brownian path") {
  const auto model = model_ginzburg_landau(1.0, 1.0, 1.0);
  const GridSpec grid{1.0, 64};
  const auto path = generate_path(1.0, 256, 1, 1, 0);
  const auto base = run_path(SchemeKind::StoppedBIT, model, grid, vec1(1.0), path);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    Matrix inc = path.increments();
    inc.array() *= (1.0 + eps);
    const auto pert = run_path(SchemeKind::StoppedBIT, model, grid, vec1(1.0), BrownianGrid(1.0, inc, 1, 0));
    const double diff = (pert.states - base.states).cwiseAbs().maxCoeff();
    CHECK(diff < prev);
    CHECK(diff < 100 * eps);
    prev = diff;
  }
}

TEST_CASE("run_path argument validation") {
  const auto model = model_gbm(0.0, 1.0);
  const auto path = generate_path(1.0, 12, 1, 0, 0);
  CHECK_THROWS_AS(run_path(SchemeKind::StoppedBIT, model, GridSpec{1.0, 8}, vec1(1.0), path), std::invalid_argument);
  CHECK_THROWS_AS(run_path(SchemeKind::StoppedBIT, model, GridSpec{2.0, 4}, vec1(1.0), path), std::invalid_argument);
  CHECK_THROWS_AS(run_path(SchemeKind::StoppedBIT, model, GridSpec{1.0, 4}, Vector::Zero(2), path),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_path(SchemeKind::StoppedBIT, model, GridSpec{1.0, 4}, vec1(1.0), Matrix::Zero(1, 3)),
                  std::invalid_argument);
  const auto bad = scalar_model([](double) { return std::nan(""); }, [](double) { return 1.0; });
  CHECK_THROWS_AS(step_bit(bad, GridSpec{1.0, 4}, vec1(0.1), vec1(0.1)), std::domain_error);
}

TEST_CASE("Euler-Maruyama overflow is flagged and padded") {
  const auto model = scalar_model([](double x) { return -x * x * x; }, [](double) { return 1.0; });
  const auto run = run_path(SchemeKind::EulerMaruyama, model, GridSpec{1.0, 16}, vec1(50.0), Matrix::Zero(1, 16));
  REQUIRE(run.overflow);
  CHECK(run.overflow_index > 0);
  CHECK(run.tau_index == 0);
  CHECK_FALSE(std::isfinite(run.states(0, run.overflow_index)));
  for (std::int64_t k = run.overflow_index; k <= 16; ++k) {
    CHECK_FALSE(std::isfinite(run.states(0, k)));
  }
}
