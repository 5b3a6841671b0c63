#pragma once
/// @file rng.hpp
/// @brief Deterministic, platform-stable pseudo-random generation.
///
/// All randomized behaviour in the library (instance generation, sample-point
/// draws for expression equality) flows through this class. mt19937_64 output
/// is converted to doubles and bounded integers by hand so that a seed
/// reproduces identical streams on every platform — std::uniform_*_distribution
/// is implementation-defined and would break byte-stable golden files.

#include <quiverdm/cmat.hpp>

#include <cstdint>
#include <limits>
#include <random>

namespace quiverdm {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Raw 64-bit draw.
  [[nodiscard]] std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1) with 53 bits of precision.
  [[nodiscard]] double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  [[nodiscard]] double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [lo, hi] inclusive, via rejection sampling.
  [[nodiscard]] std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto range = static_cast<std::uint64_t>(hi - lo + 1);
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return lo + static_cast<std::int64_t>(x % range);
  }

  /// Complex scalar with real and imaginary parts uniform in [-1, 1).
  [[nodiscard]] Complex complex_box() {
    const double re = uniform(-1.0, 1.0);
    return {re, uniform(-1.0, 1.0)};
  }

  /// Matrix with independent complex_box entries (row-major fill order).
  [[nodiscard]] CMat matrix(Eigen::Index rows, Eigen::Index cols) {
    CMat a(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = complex_box();
    return a;
  }

  /// @brief Random square matrix with singular values clamped into
  ///        [smin, smax]; condition number therefore at most smax/smin.
  [[nodiscard]] CMat well_conditioned(Eigen::Index m, double smin,
                                      double smax) {
    if (m == 0) return CMat(0, 0);
    const CMat a = matrix(m, m);
    Eigen::JacobiSVD<CMat> svd(a,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd s = svd.singularValues();
    for (Eigen::Index k = 0; k < m; ++k)
      s(k) = std::min(smax, std::max(smin, s(k)));
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace quiverdm
