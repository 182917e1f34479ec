#pragma once

#include "biteuler/types.hpp"

#include <cstdint>
#include <iosfwd>

namespace biteuler {

/// One Brownian path on the finest uniform grid of [0, T], stored as increments.
///
/// The increments are a pure function of (seed, path_index): each path draws
/// from its own generator keyed by both, so paths can be produced in any order
/// or on any worker. Coarser grids are obtained by exact summation, which lets a
/// reference solution and its approximations share one Brownian path.
class BrownianGrid {
 public:
  /// Draws N_fine increments ~ Normal(0, (T/N_fine) I_m).
  static BrownianGrid generate(double T, std::int64_t N_fine, int m, std::uint64_t seed,
                               std::uint64_t path_index);

  /// Wraps existing increments (m x N_fine); used by deserialisation and tests.
  BrownianGrid(double T, Matrix increments, std::uint64_t seed, std::uint64_t path_index);

  [[nodiscard]] double T() const { return T_; }
  [[nodiscard]] std::int64_t N_fine() const { return increments_.cols(); }
  [[nodiscard]] int m() const { return static_cast<int>(increments_.rows()); }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t path_index() const { return path_index_; }
  [[nodiscard]] double fine_step() const { return T_ / static_cast<double>(N_fine()); }
  [[nodiscard]] const Matrix& increments() const { return increments_; }

  /// Increments of the N_coarse-step grid (m x N_coarse). Each one is the
  /// pairwise (midpoint-split) sum of its block of fine increments, so
  /// coarsening in stages along power-of-two ratios is bit-identical to
  /// coarsening directly. Throws std::invalid_argument unless N_coarse | N_fine.
  [[nodiscard]] Matrix coarsen(std::int64_t N_coarse) const;

  /// W at the fine grid points (m x (N_fine+1)), accumulated left to right.
  [[nodiscard]] Matrix cumulative() const;

  /// W_{t_k + s} - W_{t_k} inside fine step k, drawn from the Brownian bridge
  /// pinned at 0 and at the stored increment. Deterministic in sub_seed.
  /// Throws std::out_of_range unless 0 <= k < N_fine and 0 <= s <= T/N_fine.
  [[nodiscard]] Vector bridge_value(std::int64_t k, double s, std::uint64_t sub_seed) const;

  /// Same as bridge_value but for step k of the N_coarse grid: full fine
  /// increments up to the fine step containing t_k + s, plus a bridge draw there.
  [[nodiscard]] Vector coarse_bridge_value(std::int64_t N_coarse, std::int64_t k, double s,
                                           std::uint64_t sub_seed) const;

 private:
  double T_;
  Matrix increments_;
  std::uint64_t seed_;
  std::uint64_t path_index_;
};

/// Free-function form of BrownianGrid::generate.
BrownianGrid generate_path(double T, std::int64_t N_fine, int m, std::uint64_t seed,
                           std::uint64_t path_index);

/// Binary replay dump: little-endian. Header is T (f64), N_fine (u64), m (u64),
/// seed (u64), path_index (u64); then N_fine*m f64 increments row-major
/// (increment k occupies m consecutive values).
void write_increments(std::ostream& out, const BrownianGrid& path);
BrownianGrid read_increments(std::istream& in);

}  // namespace biteuler
