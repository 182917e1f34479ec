#include "biteuler/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace biteuler {

void LyapunovSpec::validate() const {
  if (!U || !grad_U || !hess_U || !U_bar) {
    throw std::invalid_argument("LyapunovSpec: U, grad_U, hess_U and U_bar must all be set");
  }
  if (!(rho >= 0.0)) throw std::invalid_argument("LyapunovSpec: rho must be nonnegative");
  if (!(p >= 2.0)) throw std::invalid_argument("LyapunovSpec: p must be >= 2");
  if (!(r >= 2.0)) throw std::invalid_argument("LyapunovSpec: r must be >= 2");
  if (!(q0 > 0.0) || !(q1 > 0.0)) {
    throw std::invalid_argument("LyapunovSpec: q0 and q1 must lie in (0, inf]");
  }
  // 1/inf == 0 so the relation also covers infinite exponents.
  const double lhs = 1.0 / p + 1.0 / q0 + 1.0 / q1;
  if (std::abs(lhs - 1.0 / r) > 1e-12) {
    throw std::invalid_argument("LyapunovSpec: 1/p + 1/q0 + 1/q1 must equal 1/r");
  }
}

void GridSpec::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("GridSpec: T must be positive");
  if (N < 1) throw std::invalid_argument("GridSpec: N must be positive");
}

double grid_point(const GridSpec& grid, std::int64_t k) {
  if (k < 0 || k > grid.N) {
    throw std::out_of_range("grid_point: index " + std::to_string(k) + " outside 0.." +
                            std::to_string(grid.N));
  }
  if (k == grid.N) return grid.T;
  return static_cast<double>(k) * grid.T / static_cast<double>(grid.N);
}

std::int64_t floor_index(const GridSpec& grid, double t) {
  if (!(t >= 0.0) || !(t <= grid.T)) {
    throw std::out_of_range("floor_index: time outside [0, T]");
  }
  if (t == 0.0) return 0;
  auto k = static_cast<std::int64_t>(std::floor(t * static_cast<double>(grid.N) / grid.T));
  if (k > grid.N) k = grid.N;
  // Largest k with t_k < t; the product above can land one index off either way.
  while (k > 0 && grid_point(grid, k) >= t) --k;
  while (k + 1 <= grid.N && grid_point(grid, k + 1) < t) ++k;
  return k;
}

}  // namespace biteuler
