#include <catch_amalgamated.hpp>

#include "biteuler/types.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace biteuler;
using Catch::Approx;

TEST_CASE("grid_point endpoints and interior") {
  const GridSpec g{1.0, 4};
  CHECK(grid_point(g, 0) == 0.0);
  CHECK(grid_point(g, 4) == 1.0);
  CHECK(grid_point(GridSpec{2.0, 8}, 3) == 0.75);
  CHECK(grid_point(GridSpec{0.3, 7}, 7) == 0.3);
  CHECK_THROWS_AS(grid_point(g, -1), std::out_of_range);
  CHECK_THROWS_AS(grid_point(g, 5), std::out_of_range);
}

TEST_CASE("floor_index uses the left-open convention") {
  const GridSpec g{1.0, 4};
  CHECK(floor_index(g, 0.0) == 0);
  CHECK(floor_index(g, 0.3) == 1);
  CHECK(floor_index(g, 0.5) == 1);
  CHECK(floor_index(g, 0.25) == 0);
  CHECK(floor_index(g, 1.0) == 3);
  CHECK_THROWS_AS(floor_index(g, -1e-12), std::out_of_range);
  CHECK_THROWS_AS(floor_index(g, 1.0 + 1e-9), std::out_of_range);
}

TEST_CASE("floor_index recovers k just after each grid point") {
  for (std::int64_t N : {1, 3, 7, 10, 64, 1000}) {
    for (double T : {0.1, 1.0, 3.7}) {
      const GridSpec g{T, N};
      const double h = g.step();
      for (std::int64_t k = 0; k < N; ++k) {
        for (double frac : {1e-9, 0.25, 0.5, 0.999}) {
          INFO("N=" << N << " T=" << T << " k=" << k << " frac=" << frac);
          CHECK(floor_index(g, grid_point(g, k) + frac * h) == k);
        }
      }
    }
  }
}

TEST_CASE("GridSpec validation") {
  CHECK_NOTHROW(GridSpec{1.0, 1}.validate());
  CHECK_THROWS_AS((GridSpec{0.0, 4}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{1.0, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{std::nan(""), 4}.validate()), std::invalid_argument);
}

TEST_CASE("LyapunovSpec validation enforces the Hoelder relation") {
  LyapunovSpec spec;
  spec.U = [](const Vector& x) { return x.squaredNorm(); };
  spec.grad_U = [](const Vector& x) -> Vector { return 2.0 * x; };
  spec.hess_U = [](const Vector& x) -> Matrix { return 2.0 * Matrix::Identity(x.size(), x.size()); };
  spec.U_bar = [](const Vector&) { return 0.0; };
  spec.p = 4.0;
  spec.q0 = 4.0;
  spec.q1 = std::numeric_limits<double>::infinity();
  spec.r = 2.0;
  CHECK_NOTHROW(spec.validate());

  spec.q1 = 8.0;  // 1/4 + 1/4 + 1/8 != 1/2
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec.p = 8.0;
  spec.q0 = 8.0;
  spec.q1 = 4.0;  // 1/8 + 1/8 + 1/4 = 1/2
  CHECK_NOTHROW(spec.validate());

  spec.rho = -1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.rho = 0.0;
  spec.r = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec.r = 2.0;
  CHECK_NOTHROW(spec.validate());
  spec.U_bar = nullptr;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("SchemeRun exposes tau as a grid time") {
  SchemeRun run;
  run.grid = GridSpec{2.0, 8};
  run.tau_index = 3;
  CHECK(run.tau() == 0.75);
}
