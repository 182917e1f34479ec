#include "biteuler/brownian.hpp"

#include "biteuler/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace biteuler {

namespace {

// Domain tags keep increment and bridge streams disjoint.
constexpr std::uint64_t kIncrementTag = 0x696e6372ULL;
constexpr std::uint64_t kBridgeTag = 0x62726467ULL;

// Pairwise sum of columns [begin, end) of `m`, splitting at the midpoint.
Vector pairwise_column_sum(const Matrix& m, Eigen::Index begin, Eigen::Index end) {
  const Eigen::Index n = end - begin;
  if (n == 1) return m.col(begin);
  if (n == 2) return m.col(begin) + m.col(begin + 1);
  const Eigen::Index mid = begin + n / 2;
  return pairwise_column_sum(m, begin, mid) + pairwise_column_sum(m, mid, end);
}

template <class T>
void write_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

template <class T>
T read_le(std::istream& in) {
  static_assert(sizeof(T) == 8);
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw std::runtime_error("read_increments: truncated stream");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace

BrownianGrid::BrownianGrid(double T, Matrix increments, std::uint64_t seed, std::uint64_t path_index)
    : T_(T), increments_(std::move(increments)), seed_(seed), path_index_(path_index) {
  if (!(T_ > 0.0)) throw std::invalid_argument("BrownianGrid: T must be positive");
  if (increments_.cols() < 1 || increments_.rows() < 1) {
    throw std::invalid_argument("BrownianGrid: need at least one increment of positive dimension");
  }
}

BrownianGrid BrownianGrid::generate(double T, std::int64_t N_fine, int m, std::uint64_t seed,
                                    std::uint64_t path_index) {
  if (N_fine < 1) throw std::invalid_argument("generate_path: N_fine must be positive");
  if (m < 1) throw std::invalid_argument("generate_path: m must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("generate_path: T must be positive");

  NormalGenerator gen(stream_key({kIncrementTag, seed, path_index}));
  const double scale = std::sqrt(T / static_cast<double>(N_fine));
  Matrix inc(m, N_fine);
  // Column-major storage: increment k is m consecutive draws.
  double* data = inc.data();
  for (Eigen::Index i = 0; i < inc.size(); ++i) data[i] = scale * gen.normal();
  return BrownianGrid(T, std::move(inc), seed, path_index);
}

BrownianGrid generate_path(double T, std::int64_t N_fine, int m, std::uint64_t seed,
                           std::uint64_t path_index) {
  return BrownianGrid::generate(T, N_fine, m, seed, path_index);
}

Matrix BrownianGrid::coarsen(std::int64_t N_coarse) const {
  if (N_coarse < 1 || N_fine() % N_coarse != 0) {
    throw std::invalid_argument("coarsen: N_coarse must divide N_fine");
  }
  if (N_coarse == N_fine()) return increments_;
  const Eigen::Index ratio = N_fine() / N_coarse;
  Matrix out(m(), N_coarse);
  for (Eigen::Index k = 0; k < N_coarse; ++k) {
    out.col(k) = pairwise_column_sum(increments_, k * ratio, (k + 1) * ratio);
  }
  return out;
}

Matrix BrownianGrid::cumulative() const {
  Matrix w(m(), N_fine() + 1);
  w.col(0).setZero();
  for (Eigen::Index k = 0; k < N_fine(); ++k) w.col(k + 1) = w.col(k) + increments_.col(k);
  return w;
}

Vector BrownianGrid::bridge_value(std::int64_t k, double s, std::uint64_t sub_seed) const {
  if (k < 0 || k >= N_fine()) throw std::out_of_range("bridge_value: step index out of range");
  const double h = fine_step();
  if (!(s >= 0.0) || !(s <= h)) throw std::out_of_range("bridge_value: offset outside [0, T/N_fine]");

  const Vector& inc = increments_.col(k);
  if (s == 0.0) return Vector::Zero(m());
  if (s == h) return inc;

  NormalGenerator gen(stream_key({kBridgeTag, seed_, path_index_, static_cast<std::uint64_t>(k), sub_seed}));
  const double sd = std::sqrt(s * (h - s) / h);
  Vector out(m());
  for (int i = 0; i < m(); ++i) out[i] = (s / h) * inc[i] + sd * gen.normal();
  return out;
}

Vector BrownianGrid::coarse_bridge_value(std::int64_t N_coarse, std::int64_t k, double s,
                                         std::uint64_t sub_seed) const {
  if (N_coarse < 1 || N_fine() % N_coarse != 0) {
    throw std::invalid_argument("coarse_bridge_value: N_coarse must divide N_fine");
  }
  if (k < 0 || k >= N_coarse) throw std::out_of_range("coarse_bridge_value: step index out of range");
  const double H = T_ / static_cast<double>(N_coarse);
  if (!(s >= 0.0) || !(s <= H)) throw std::out_of_range("coarse_bridge_value: offset outside [0, T/N]");

  const std::int64_t ratio = N_fine() / N_coarse;
  if (s == H) return pairwise_column_sum(increments_, k * ratio, (k + 1) * ratio);

  const double h = fine_step();
  auto whole = static_cast<std::int64_t>(std::floor(s / h));
  if (whole >= ratio) whole = ratio - 1;
  const double rest = std::clamp(s - static_cast<double>(whole) * h, 0.0, h);

  Vector out = Vector::Zero(m());
  for (std::int64_t j = 0; j < whole; ++j) out += increments_.col(k * ratio + j);
  out += bridge_value(k * ratio + whole, rest, sub_seed);
  return out;
}

void write_increments(std::ostream& out, const BrownianGrid& path) {
  write_le<double>(out, path.T());
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(path.N_fine()));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(path.m()));
  write_le<std::uint64_t>(out, path.seed());
  write_le<std::uint64_t>(out, path.path_index());
  const Matrix& inc = path.increments();
  for (Eigen::Index k = 0; k < inc.cols(); ++k) {
    for (Eigen::Index i = 0; i < inc.rows(); ++i) write_le<double>(out, inc(i, k));
  }
  if (!out) throw std::runtime_error("write_increments: stream error");
}

BrownianGrid read_increments(std::istream& in) {
  const auto T = read_le<double>(in);
  const auto n_fine = read_le<std::uint64_t>(in);
  const auto m = read_le<std::uint64_t>(in);
  const auto seed = read_le<std::uint64_t>(in);
  const auto path_index = read_le<std::uint64_t>(in);
  if (n_fine == 0 || m == 0 || n_fine > (1ULL << 40) || m > (1ULL << 20)) {
    throw std::runtime_error("read_increments: corrupt header");
  }
  Matrix inc(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_fine));
  for (Eigen::Index k = 0; k < inc.cols(); ++k) {
    for (Eigen::Index i = 0; i < inc.rows(); ++i) inc(i, k) = read_le<double>(in);
  }
  return BrownianGrid(T, std::move(inc), seed, path_index);
}

}  // namespace biteuler
