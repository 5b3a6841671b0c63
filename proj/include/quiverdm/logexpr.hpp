#pragma once

#include <quiverdm/cmat.hpp>
#include <quiverdm/matrix_functions.hpp>
#include <quiverdm/rng.hpp>

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace quiverdm {

/// @brief Kind of a single-variable factor inside a term product.
///
/// `Power` stands for z^A (matrix exponent, branch of log with argument in
/// (0, 2π)); `Phi` stands for φ_A(log z) where φ_A(w) = Σ_{k≥0} A^k
/// w^{k+1}/(k+1)!, the primitive of z^A normalised by φ_A(log 1⁻) ≈ 0.
enum class FactorKind { Power, Phi };

/// @brief One slot of a term product: `left · z^expo` or `left · φ_expo(log z)`.
struct Factor {
  FactorKind kind = FactorKind::Power;
  CMat left;  ///< m×m multiplier sitting directly left of the z-dependent part
  CMat expo;  ///< m×m exponent matrix
};

/// @brief One summand `coeff · Π_{k=1..n} (left_k · F_k(z_k)) · tail`.
///
/// The inner square dimension m is shared by every factor of the term but may
/// differ between terms of the same expression.
struct TermProduct {
  CMat coeff;                   ///< rows×m leading coefficient
  std::vector<Factor> factors;  ///< exactly n slots; slot k depends on z_k
  CMat tail;                    ///< m×cols trailing coefficient
};

/// @brief Finite sum of ordered matrix products in the branch logarithms of n
/// complex variables. An empty term list is the zero expression.
struct LogExpr {
  int n = 0;                ///< number of variables z_1 … z_n
  Eigen::Index rows = 0;    ///< value row count
  Eigen::Index cols = 0;    ///< value column count
  std::vector<TermProduct> terms;
};

namespace detail {

constexpr double kEvalCutTol = 1e-12;

inline void check_expr(const LogExpr& e, const char* who) {
  for (const TermProduct& t : e.terms) {
    if (static_cast<int>(t.factors.size()) != e.n)
      throw DomainError(std::string(who) + ": term has " +
                        std::to_string(t.factors.size()) + " factors, expected " +
                        std::to_string(e.n));
    const Eigen::Index m = t.coeff.cols();
    if (t.coeff.rows() != e.rows || t.tail.rows() != m || t.tail.cols() != e.cols)
      throw DomainError(std::string(who) + ": term coefficient shapes disagree");
    for (const Factor& f : t.factors)
      if (f.left.rows() != m || f.left.cols() != m || f.expo.rows() != m ||
          f.expo.cols() != m)
        throw DomainError(std::string(who) + ": factor is not " +
                          std::to_string(m) + "x" + std::to_string(m));
  }
}

inline void check_slot(const LogExpr& e, int slot, const char* who) {
  if (slot < 1 || slot > e.n)
    throw DomainError(std::string(who) + ": slot " + std::to_string(slot) +
                      " out of range 1.." + std::to_string(e.n));
}

/// Branch logarithm of an evaluation point, argument in (0, 2π), plus an
/// integer number of extra turns. Rejects points within kEvalCutTol of the
/// branch cut [0, ∞).
[[nodiscard]] inline Complex branch_log_point(Complex z, long shift) {
  const double dist = z.real() >= 0.0 ? std::abs(z.imag()) : std::abs(z);
  if (!(dist > kEvalCutTol))
    throw DomainError("evaluate: point " + complex_to_string(z) +
                      " lies on the branch cut [0,inf)");
  double theta = std::arg(z);
  if (theta <= 0.0) theta += 2.0 * kPi;
  return {std::log(std::abs(z)), theta + 2.0 * kPi * static_cast<double>(shift)};
}

[[nodiscard]] inline bool mat_close(const CMat& a, const CMat& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  return max_abs(a - b) <= tol * (1.0 + std::max(max_abs(a), max_abs(b)));
}

}  // namespace detail

/// @brief Factor `z^expo` with identity left multiplier.
[[nodiscard]] inline Factor power_factor(CMat expo) {
  const Eigen::Index m = expo.rows();
  return Factor{FactorKind::Power, cid(m), std::move(expo)};
}

/// @brief Factor `φ_expo(log z)` with identity left multiplier.
[[nodiscard]] inline Factor phi_factor(CMat expo) {
  const Eigen::Index m = expo.rows();
  return Factor{FactorKind::Phi, cid(m), std::move(expo)};
}

/// @brief Expression with no terms (identically zero).
[[nodiscard]] inline LogExpr zero_expr(int n, Eigen::Index rows,
                                       Eigen::Index cols) {
  return LogExpr{n, rows, cols, {}};
}

/// @brief Single-term expression `coeff · Π_k F_k(z_k) · tail`.
[[nodiscard]] inline LogExpr term_expr(CMat coeff, std::vector<Factor> factors,
                                       CMat tail) {
  LogExpr e;
  e.n = static_cast<int>(factors.size());
  e.rows = coeff.rows();
  e.cols = tail.cols();
  e.terms.push_back(
      TermProduct{std::move(coeff), std::move(factors), std::move(tail)});
  detail::check_expr(e, "term_expr");
  return e;
}

/// @brief Evaluate at a point with each z_k off the cut [0, ∞); `shifts`
/// (empty, or one entry per variable) adds 2πi·shifts[k] to the k-th branch
/// logarithm, selecting the sheet reached after that many counterclockwise
/// turns.
/// @throws DomainError if the point sizes disagree or a coordinate lies on
/// the cut.
[[nodiscard]] inline CMat evaluate(const LogExpr& e,
                                   const std::vector<Complex>& z,
                                   const std::vector<long>& shifts = {}) {
  detail::check_expr(e, "evaluate");
  if (static_cast<int>(z.size()) != e.n)
    throw DomainError("evaluate: expected " + std::to_string(e.n) +
                      " coordinates, got " + std::to_string(z.size()));
  if (!shifts.empty() && shifts.size() != z.size())
    throw DomainError("evaluate: shifts size mismatch");
  std::vector<Complex> w(z.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    w[k] = detail::branch_log_point(z[k], shifts.empty() ? 0 : shifts[k]);

  CMat value = czero(e.rows, e.cols);
  for (const TermProduct& t : e.terms) {
    CMat acc = t.coeff;
    for (std::size_t k = 0; k < t.factors.size(); ++k) {
      const Factor& f = t.factors[k];
      const CMat fv = f.kind == FactorKind::Power
                          ? expm(f.expo * w[k])
                          : phi_at_log(f.expo, w[k]);
      acc = acc * f.left * fv;
    }
    value += acc * t.tail;
  }
  return value;
}

/// @brief Partial derivative ∂/∂z_slot, using ∂(z^A) = A·z^{A−Id} and
/// ∂(φ_A(log z)) = z^{A−Id}. The result's slot factor is always a power.
[[nodiscard]] inline LogExpr derive(const LogExpr& e, int slot) {
  detail::check_expr(e, "derive");
  detail::check_slot(e, slot, "derive");
  LogExpr out = e;
  for (TermProduct& t : out.terms) {
    Factor& f = t.factors[static_cast<std::size_t>(slot - 1)];
    const Eigen::Index m = f.expo.rows();
    if (f.kind == FactorKind::Power) f.left = (f.left * f.expo).eval();
    f.kind = FactorKind::Power;
    f.expo -= cid(m);
  }
  return out;
}

/// @brief Antiderivative in z_slot. The slot factor of every term must be a
/// power `L·z^A`; writing M = A + Id and splitting the spectrum of M into a
/// near-zero group (spectral projector Π₀) and its complement (partial
/// inverse S with S·M + Π₀ = Id), the primitive is `L·S·z^M + L·Π₀·φ_M(log z)`.
/// Terms whose M is invertible yield the single power term `L·M⁻¹·z^M`;
/// terms with M entirely near-zero yield the single factor `L·φ_M(log z)`.
/// @throws DomainError if a slot factor is a φ factor.
[[nodiscard]] inline LogExpr antiderive(const LogExpr& e, int slot) {
  detail::check_expr(e, "antiderive");
  detail::check_slot(e, slot, "antiderive");
  LogExpr out = zero_expr(e.n, e.rows, e.cols);
  const auto idx = static_cast<std::size_t>(slot - 1);
  for (const TermProduct& t : e.terms) {
    const Factor& f = t.factors[idx];
    if (f.kind != FactorKind::Power)
      throw DomainError("antiderive: slot " + std::to_string(slot) +
                        " holds a phi factor; no closed primitive in this model");
    const Eigen::Index m = f.expo.rows();
    const CMat big_m = f.expo + cid(m);
    if (m == 0) {
      out.terms.push_back(t);
      out.terms.back().factors[idx] = Factor{FactorKind::Power, f.left, big_m};
      continue;
    }

    Eigen::ComplexSchur<CMat> schur(big_m);
    if (schur.info() != Eigen::Success)
      throw DomainError("antiderive: Schur decomposition failed");
    CMat tmat = schur.matrixT();
    CMat umat = schur.matrixU();
    const double zero_tol = std::max(1e-8, 0.01 * std::max(1.0, frob(big_m)));
    std::vector<int> key(static_cast<std::size_t>(m));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const bool near_zero = std::abs(tmat(i, i)) <= zero_tol;
      key[static_cast<std::size_t>(i)] = near_zero ? 0 : 1;
      if (near_zero) ++k;
    }
    detail::schur_sort_by_key(tmat, &umat, key);

    if (k == 0) {
      const CMat m_inv = big_m.partialPivLu().solve(cid(m));
      TermProduct nt = t;
      nt.factors[idx] = Factor{FactorKind::Power, (f.left * m_inv).eval(), big_m};
      out.terms.push_back(std::move(nt));
      continue;
    }
    if (k == m) {
      TermProduct nt = t;
      nt.factors[idx] = Factor{FactorKind::Phi, f.left, big_m};
      out.terms.push_back(std::move(nt));
      continue;
    }

    const CMat t00 = tmat.topLeftCorner(k, k);
    const CMat t01 = tmat.topRightCorner(k, m - k);
    const CMat t11 = tmat.bottomRightCorner(m - k, m - k);
    const CMat y = detail::sylvester_tri_upper(t00, t11, t01);
    const CMat t11_inv =
        t11.triangularView<Eigen::Upper>().solve(cid(m - k)).eval();

    CMat proj = czero(m, m);  // Π₀ onto the near-zero invariant subspace
    proj.topLeftCorner(k, k) = cid(k);
    proj.topRightCorner(k, m - k) = y;
    proj = (umat * proj * umat.adjoint()).eval();

    CMat part_inv = czero(m, m);  // S with S·M + Π₀ = Id
    part_inv.topRightCorner(k, m - k) = -y * t11_inv;
    part_inv.bottomRightCorner(m - k, m - k) = t11_inv;
    part_inv = (umat * part_inv * umat.adjoint()).eval();

    TermProduct pow_term = t;
    pow_term.factors[idx] =
        Factor{FactorKind::Power, (f.left * part_inv).eval(), big_m};
    TermProduct phi_term = t;
    phi_term.factors[idx] =
        Factor{FactorKind::Phi, (f.left * proj).eval(), big_m};
    out.terms.push_back(std::move(pow_term));
    out.terms.push_back(std::move(phi_term));
  }
  return out;
}

/// @brief Multiply by the scalar monomial z_slot^k. Power exponents shift by
/// k·Id; a φ factor in the slot admits no monomial shift.
/// @throws DomainError if k ≠ 0 and some term holds a φ factor in the slot.
[[nodiscard]] inline LogExpr mul_monomial(const LogExpr& e, int slot, long k) {
  detail::check_expr(e, "mul_monomial");
  detail::check_slot(e, slot, "mul_monomial");
  if (k == 0) return e;
  LogExpr out = e;
  for (TermProduct& t : out.terms) {
    Factor& f = t.factors[static_cast<std::size_t>(slot - 1)];
    if (f.kind != FactorKind::Power)
      throw DomainError("mul_monomial: slot " + std::to_string(slot) +
                        " holds a phi factor");
    f.expo += static_cast<double>(k) * cid(f.expo.rows());
  }
  return out;
}

/// @brief Analytic continuation once counterclockwise around z_slot = 0:
/// z^A picks up e^{2πiA} on the right of the left multiplier, and
/// φ_A(log z + 2πi) = φ_A(log z) + ψ(A)·z^A with ψ(A) = φ_A(2πi).
[[nodiscard]] inline LogExpr monodromy(const LogExpr& e, int slot) {
  detail::check_expr(e, "monodromy");
  detail::check_slot(e, slot, "monodromy");
  LogExpr out = zero_expr(e.n, e.rows, e.cols);
  const auto idx = static_cast<std::size_t>(slot - 1);
  for (const TermProduct& t : e.terms) {
    const Factor& f = t.factors[idx];
    if (f.kind == FactorKind::Power) {
      TermProduct nt = t;
      nt.factors[idx].left = (f.left * expm_2pii(f.expo)).eval();
      out.terms.push_back(std::move(nt));
    } else {
      out.terms.push_back(t);  // the φ part survives unchanged ...
      TermProduct nt = t;      // ... plus a power correction term
      nt.factors[idx] = Factor{FactorKind::Power, (f.left * psi(f.expo)).eval(),
                               f.expo};
      out.terms.push_back(std::move(nt));
    }
  }
  return out;
}

/// @brief Sum of two expressions over the same variables and value shape.
[[nodiscard]] inline LogExpr operator+(const LogExpr& a, const LogExpr& b) {
  if (a.n != b.n || a.rows != b.rows || a.cols != b.cols)
    throw DomainError("LogExpr sum: shape mismatch");
  LogExpr out = a;
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  return out;
}

/// @brief Scale every term by a complex factor.
[[nodiscard]] inline LogExpr scale(const LogExpr& e, Complex s) {
  LogExpr out = e;
  for (TermProduct& t : out.terms) t.coeff *= s;
  return out;
}

[[nodiscard]] inline LogExpr operator-(const LogExpr& a, const LogExpr& b) {
  return a + scale(b, Complex(-1.0, 0.0));
}

/// @brief Compose with a constant matrix on the right: values become e(z)·m.
[[nodiscard]] inline LogExpr right_mul(const LogExpr& e, const CMat& m) {
  if (m.rows() != e.cols)
    throw DomainError("right_mul: inner dimensions disagree");
  LogExpr out = e;
  out.cols = m.cols();
  for (TermProduct& t : out.terms) t.tail = (t.tail * m).eval();
  return out;
}

/// @brief Compose with a constant matrix on the left: values become m·e(z).
[[nodiscard]] inline LogExpr left_mul(const CMat& m, const LogExpr& e) {
  if (m.cols() != e.rows)
    throw DomainError("left_mul: inner dimensions disagree");
  LogExpr out = e;
  out.rows = m.rows();
  for (TermProduct& t : out.terms) t.coeff = (m * t.coeff).eval();
  return out;
}

namespace detail {

/// Index of the single summable component (0 = coeff, 1..n = slot lefts,
/// n+1 = tail) where two structurally identical terms differ, n+2 when they
/// agree everywhere, or -1 when they cannot be merged.
[[nodiscard]] inline int merge_component(const TermProduct& a,
                                         const TermProduct& b, double tol) {
  if (a.factors.size() != b.factors.size()) return -1;
  if (a.coeff.rows() != b.coeff.rows() || a.coeff.cols() != b.coeff.cols() ||
      a.tail.cols() != b.tail.cols())
    return -1;
  for (std::size_t k = 0; k < a.factors.size(); ++k) {
    if (a.factors[k].kind != b.factors[k].kind) return -1;
    if (!mat_close(a.factors[k].expo, b.factors[k].expo, tol)) return -1;
  }
  const int n = static_cast<int>(a.factors.size());
  int differing = -1;
  int count = 0;
  if (!mat_close(a.coeff, b.coeff, tol)) { differing = 0; ++count; }
  for (int k = 0; k < n; ++k)
    if (!mat_close(a.factors[static_cast<std::size_t>(k)].left,
                   b.factors[static_cast<std::size_t>(k)].left, tol)) {
      differing = k + 1;
      ++count;
    }
  if (!mat_close(a.tail, b.tail, tol)) { differing = n + 1; ++count; }
  if (count > 1) return -1;
  return count == 0 ? n + 2 : differing;
}

[[nodiscard]] inline bool term_is_zero(const TermProduct& t, double tol) {
  const auto tiny = [tol](const CMat& m) {
    return m.size() == 0 || max_abs(m) <= tol;
  };
  if (t.coeff.size() != 0 && tiny(t.coeff)) return true;
  if (t.tail.size() != 0 && tiny(t.tail)) return true;
  for (const Factor& f : t.factors)
    if (f.left.size() != 0 && tiny(f.left)) return true;
  return false;
}

}  // namespace detail

/// @brief Canonical cleanup: repeatedly sum pairs of terms that share all
/// factor kinds and exponents and differ in at most one of
/// {coeff, slot lefts, tail}; then drop terms with a vanishing coefficient.
[[nodiscard]] inline LogExpr merge_terms(const LogExpr& e, double tol = 1e-12) {
  detail::check_expr(e, "merge_terms");
  LogExpr out = e;
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < out.terms.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < out.terms.size() && !merged; ++j) {
        const int comp = detail::merge_component(out.terms[i], out.terms[j], tol);
        if (comp < 0) continue;
        TermProduct& a = out.terms[i];
        const TermProduct& b = out.terms[j];
        const int n = static_cast<int>(a.factors.size());
        if (comp == 0 || comp == n + 2) a.coeff += b.coeff;
        else if (comp == n + 1) a.tail += b.tail;
        else a.factors[static_cast<std::size_t>(comp - 1)].left +=
            b.factors[static_cast<std::size_t>(comp - 1)].left;
        out.terms.erase(out.terms.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }
  std::vector<TermProduct> kept;
  for (TermProduct& t : out.terms)
    if (!detail::term_is_zero(t, tol)) kept.push_back(std::move(t));
  out.terms = std::move(kept);
  return out;
}

/// @brief Largest relative deviation between two expressions over random
/// sample points z_k = r·e^{iθ}, r ∈ [0.2, 5], θ ∈ [0.1, 2π − 0.1].
/// @throws DomainError if the expressions have different variable counts or
/// value shapes.
[[nodiscard]] inline double expr_residual(const LogExpr& a, const LogExpr& b,
                                          int samples = 8,
                                          std::uint64_t seed = 0) {
  if (a.n != b.n || a.rows != b.rows || a.cols != b.cols)
    throw DomainError("expr_residual: expressions have different shapes");
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<Complex> z(static_cast<std::size_t>(a.n));
    for (Complex& zk : z)
      zk = std::polar(rng.uniform(0.2, 5.0),
                      rng.uniform(0.1, 2.0 * kPi - 0.1));
    const CMat va = evaluate(a, z);
    const CMat vb = evaluate(b, z);
    const double denom = 1.0 + std::max(frob(va), frob(vb));
    worst = std::max(worst, frob(va - vb) / denom);
  }
  return worst;
}

/// @brief Numeric equality of two expressions on random off-cut sample points.
[[nodiscard]] inline bool expr_equal(const LogExpr& a, const LogExpr& b,
                                     int samples = 8, std::uint64_t seed = 0,
                                     double tol = 1e-8) {
  return expr_residual(a, b, samples, seed) <= tol;
}

/// @brief Structural equality: merge both sides, then match terms one-to-one
/// with every component (kinds, exponents, coefficients) equal within tol.
[[nodiscard]] inline bool expr_equal_structural(const LogExpr& a,
                                                const LogExpr& b,
                                                double tol = 1e-11) {
  if (a.n != b.n || a.rows != b.rows || a.cols != b.cols) return false;
  const LogExpr ma = merge_terms(a, tol);
  const LogExpr mb = merge_terms(b, tol);
  if (ma.terms.size() != mb.terms.size()) return false;
  std::vector<bool> used(mb.terms.size(), false);
  for (const TermProduct& ta : ma.terms) {
    bool found = false;
    for (std::size_t j = 0; j < mb.terms.size() && !found; ++j) {
      if (used[j]) continue;
      const TermProduct& tb = mb.terms[j];
      if (ta.factors.size() != tb.factors.size()) continue;
      bool same = detail::mat_close(ta.coeff, tb.coeff, tol) &&
                  detail::mat_close(ta.tail, tb.tail, tol);
      for (std::size_t k = 0; same && k < ta.factors.size(); ++k)
        same = ta.factors[k].kind == tb.factors[k].kind &&
               detail::mat_close(ta.factors[k].expo, tb.factors[k].expo, tol) &&
               detail::mat_close(ta.factors[k].left, tb.factors[k].left, tol);
      if (same) {
        used[j] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace quiverdm
