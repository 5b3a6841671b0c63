#pragma once
/// @file cmat.hpp
/// @brief Dense complex matrix aliases, the error taxonomy, and small numeric
///        helpers shared by every other header of the library.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace quiverdm {

/// Complex scalar used throughout (double precision).
using Complex = std::complex<double>;

/// Dense dynamic-size complex matrix. Row/column vectors are 1×k / k×1 CMats.
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// The constant 2πi, the scale of every exponential in the calculus.
inline const Complex kTwoPiI{0.0, 2.0 * kPi};

/// @brief Semantic failure: mathematically invalid input (singular matrix,
///        spectrum outside the admissible region, category mismatch, ...).
///        The CLI maps this to exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// @brief Malformed input: unreadable file, bad document structure,
///        inconsistent shapes, unusable command-line arguments.
///        The CLI maps this to exit code 2.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frobenius norm (0 for empty matrices).
[[nodiscard]] inline double frob(const CMat& a) { return a.norm(); }

/// Largest entry magnitude (0 for empty matrices).
[[nodiscard]] inline double max_abs(const CMat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// @brief Scale-free residual ‖a−b‖_F / (1 + ‖a‖_F + ‖b‖_F).
/// All validation and verification checks in the library compare against a
/// tolerance through this quantity.
[[nodiscard]] inline double rel_residual(const CMat& a, const CMat& b) {
  return (a - b).norm() / (1.0 + a.norm() + b.norm());
}

/// True iff ‖a−b‖_F ≤ tol·(1 + ‖a‖_F + ‖b‖_F). Shape mismatch is false.
[[nodiscard]] inline bool approx_equal(const CMat& a, const CMat& b,
                                       double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  return rel_residual(a, b) <= tol;
}

/// Identity matrix shorthand.
[[nodiscard]] inline CMat cid(Eigen::Index m) { return CMat::Identity(m, m); }

/// Zero matrix shorthand.
[[nodiscard]] inline CMat czero(Eigen::Index r, Eigen::Index c) {
  return CMat::Zero(r, c);
}

/// Formats a complex scalar as "a+bi" for diagnostics.
[[nodiscard]] inline std::string complex_to_string(Complex z) {
  std::string s = std::to_string(z.real());
  s += (z.imag() < 0 ? "-" : "+");
  s += std::to_string(std::abs(z.imag()));
  s += "i";
  return s;
}

}  // namespace quiverdm
