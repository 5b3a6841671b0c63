#pragma once
/// @file matrix_functions.hpp
/// @brief The scalar-to-matrix kernels of the calculus: the Σ1-branch matrix
///        logarithm ("strip log"), the conversion kernel ψ, the exponential
///        e^{2πiA}, and the log-bearing antiderivative φ_A.
///
/// The strip log realizes the unique g with e^{2πig} = f whose spectrum lies
/// in the half-open strip Σ1 = {0 ≤ ℜλ ≤ 1, ℜλ=0 ⇒ ℑλ≥0, ℜλ=1 ⇒ ℑλ<0}.
/// The algorithm is Schur–Parlett: complex Schur form, eigenvalue clustering,
/// a per-cluster branch-consistent logarithm, and the block Parlett recurrence
/// for the off-diagonal blocks. Entire functions (exp, ψ, φ) are evaluated by
/// scaling–squaring on (augmented) exponentials, which is unconditionally
/// stable; termwise series summation is never used.

#include <quiverdm/cmat.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace quiverdm {

/// Eigenvalues closer than this to the positive real axis are treated as on
/// it when choosing the branch.
inline constexpr double kAxisTol = 1e-12;

/// Default invertibility threshold: smallest singular value > tol·‖A‖₂.
inline constexpr double kInvertTol = 1e-10;

/// @brief Membership test for the half-open strip Σ1, boundary rules relaxed
///        by tol: reject if ℜλ < −tol or ℜλ > 1+tol; if ℜλ ≤ tol require
///        ℑλ ≥ −tol (left edge closes from above); if ℜλ ≥ 1−tol require
///        ℑλ < tol (right edge is open from above).
[[nodiscard]] inline bool in_sigma1(Complex lambda, double tol) {
  const double re = lambda.real();
  const double im = lambda.imag();
  if (re < -tol || re > 1.0 + tol) return false;
  if (re <= tol && im < -tol) return false;
  if (re >= 1.0 - tol && !(im < tol)) return false;
  return true;
}

/// @brief Eigenvalues with algebraic multiplicity, from the complex Schur
///        form (backward stable). Order follows the Schur diagonal.
[[nodiscard]] inline std::vector<Complex> spectrum(const CMat& a) {
  if (a.rows() != a.cols()) throw DomainError("spectrum: non-square input");
  if (a.rows() == 0) return {};
  Eigen::ComplexSchur<CMat> schur(a, /*computeU=*/false);
  if (schur.info() != Eigen::Success)
    throw DomainError("spectrum: Schur iteration failed to converge");
  std::vector<Complex> ev(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    ev[static_cast<std::size_t>(i)] = schur.matrixT()(i, i);
  return ev;
}

/// Matrix exponential e^A (scaling–squaring Padé).
[[nodiscard]] inline CMat expm(const CMat& a) {
  if (a.rows() != a.cols()) throw DomainError("expm: non-square input");
  if (a.rows() == 0) return a;
  return a.exp();
}

/// e^{2πiA}; for nilpotent A this is exact up to rounding (finite series).
[[nodiscard]] inline CMat expm_2pii(const CMat& a) {
  if (a.rows() != a.cols()) throw DomainError("expm_2pii: non-square input");
  return expm(kTwoPiI * a);
}

/// @brief ψ(A) = Σ_{k≥1} (2πi)^k/k!·A^{k−1}, the entire primary function of
///        ψ(λ) = (e^{2πiλ}−1)/λ with ψ(0) = 2πi. Evaluated through the
///        augmented exponential exp([[2πiA, I],[0,0]]), whose top-right block
///        is ψ(A)/(2πi); no termwise series, no 0/0 at λ = 0.
[[nodiscard]] inline CMat psi(const CMat& a) {
  if (a.rows() != a.cols()) throw DomainError("psi: non-square input");
  const Eigen::Index m = a.rows();
  if (m == 0) return a;
  CMat aug = czero(2 * m, 2 * m);
  aug.topLeftCorner(m, m) = kTwoPiI * a;
  aug.topRightCorner(m, m) = cid(m);
  return kTwoPiI * expm(aug).topRightCorner(m, m);
}

/// @brief ψ(A)⁻¹. ψ(λ) vanishes exactly at the nonzero integers, so the
///        inverse exists iff no eigenvalue of A is a nonzero integer
///        (checked within tol before inverting).
[[nodiscard]] inline CMat psi_inv(const CMat& a, double tol = kInvertTol) {
  if (a.rows() != a.cols()) throw DomainError("psi_inv: non-square input");
  if (a.rows() == 0) return a;
  for (Complex lambda : spectrum(a)) {
    double k = std::round(lambda.real());
    if (k == 0.0) k = lambda.real() >= 0.0 ? 1.0 : -1.0;
    if (std::abs(lambda - Complex(k, 0.0)) <= tol)
      throw DomainError(
          "psi_inv: eigenvalue " + complex_to_string(lambda) +
          " is within tol of the nonzero integer " + std::to_string(k) +
          ", where psi is singular");
  }
  const CMat p = psi(a);
  return p.partialPivLu().solve(cid(a.rows()));
}

/// @brief φ_A evaluated at a prescribed logarithm value w = ln z:
///        φ_A = Σ_{k≥0} A^k/(k+1)!·w^{k+1} = w·f(Aw) with f(x)=(e^x−1)/x,
///        again via an augmented exponential. Satisfies ∂_z φ_A = z^{A−Id}
///        and M φ_A − φ_A = ψ(A)·z^A.
[[nodiscard]] inline CMat phi_at_log(const CMat& a, Complex w) {
  if (a.rows() != a.cols()) throw DomainError("phi_at_log: non-square input");
  const Eigen::Index m = a.rows();
  if (m == 0) return a;
  CMat aug = czero(2 * m, 2 * m);
  aug.topLeftCorner(m, m) = w * a;
  aug.topRightCorner(m, m) = cid(m);
  return w * expm(aug).topRightCorner(m, m);
}

namespace detail {

/// @brief Branch angle θ(μ) ∈ [0, 2π] of the strip logarithm: θ ∈ (0, 2π) off
///        the positive real axis; on the axis (within kAxisTol) θ = 0 when
///        |μ| ≤ 1 and θ = 2π when |μ| > 1 — the unique choice landing
///        (ln|μ| + iθ)/(2πi) in Σ1.
[[nodiscard]] inline double branch_theta(Complex mu) {
  // On the axis the unit modulus decides the side; the comparison carries the
  // same tolerance as the axis test so that μ = 1 ± ε lands deterministically
  // on the θ = 0 side (its strip logarithm is ≈ 0, not ≈ 1).
  if (mu.real() > 0.0 && std::abs(mu.imag()) <= kAxisTol)
    return std::abs(mu) <= 1.0 + kAxisTol ? 0.0 : 2.0 * kPi;
  double th = std::arg(mu);  // (−π, π]
  if (th <= 0.0) th += 2.0 * kPi;
  return th;
}

/// Scalar strip logarithm λ(μ) = (ln|μ| + i·θ(μ)) / (2πi).
[[nodiscard]] inline Complex branch_log_over_2pii(Complex mu) {
  return Complex(std::log(std::abs(mu)), branch_theta(mu)) / kTwoPiI;
}

/// @brief Clustering rule for Schur eigenvalues: merge when
///        |μi−μj| ≤ max(1e-8·max|μ|, min(0.1, 0.5·min|μ|)). The relative
///        1e-8 floor groups genuinely coincident eigenvalues; the blocking
///        term absorbs the ~ε^{1/k} scatter of defective eigenvalues while
///        keeping the origin outside every cluster hull.
[[nodiscard]] inline bool cluster_merge(Complex a, Complex b) {
  const double ma = std::abs(a), mb = std::abs(b);
  const double gap = std::max(1e-8 * std::max(ma, mb),
                              std::min(0.1, 0.5 * std::min(ma, mb)));
  return std::abs(a - b) <= gap;
}

/// @brief Union-find transitive closure of cluster_merge; returns one label
///        per position, labels numbered by first appearance.
[[nodiscard]] inline std::vector<int> cluster_labels(
    const std::vector<Complex>& mu) {
  const int m = static_cast<int>(mu.size());
  std::vector<int> parent(static_cast<std::size_t>(m));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (cluster_merge(mu[static_cast<std::size_t>(i)],
                        mu[static_cast<std::size_t>(j)]))
        parent[static_cast<std::size_t>(find(j))] = find(i);
  std::vector<int> label(static_cast<std::size_t>(m), -1);
  std::vector<int> root_rank(static_cast<std::size_t>(m), -1);
  int next = 0;
  for (int i = 0; i < m; ++i) {
    const int r = find(i);
    if (root_rank[static_cast<std::size_t>(r)] < 0)
      root_rank[static_cast<std::size_t>(r)] = next++;
    label[static_cast<std::size_t>(i)] = root_rank[static_cast<std::size_t>(r)];
  }
  return label;
}

/// @brief Unitary similarity swapping the Schur diagonal entries at positions
///        p, p+1; updates T (and U if non-null) in place. The rotation's
///        first column is the unit eigenvector (t12, t22−t11) of the 2×2
///        block for its second eigenvalue.
inline void swap_schur_adjacent(CMat& t, CMat* u, Eigen::Index p) {
  const Complex a = t(p, p), b = t(p, p + 1), c = t(p + 1, p + 1);
  const Complex v0 = b, v1 = c - a;
  const double nv = std::sqrt(std::norm(v0) + std::norm(v1));
  if (nv == 0.0) return;  // equal eigenvalues, zero coupling: order is moot
  Eigen::Matrix2cd g;
  g << v0 / nv, -std::conj(v1) / nv,  //
      v1 / nv, std::conj(v0) / nv;
  t.middleRows(p, 2) = (g.adjoint() * t.middleRows(p, 2)).eval();
  t.middleCols(p, 2) = (t.middleCols(p, 2) * g).eval();
  t(p + 1, p) = Complex(0.0, 0.0);
  if (u) u->middleCols(p, 2) = (u->middleCols(p, 2) * g).eval();
}

/// Stable bubble sort of Schur diagonal positions by integer key (ascending),
/// using adjacent swaps; keys move with their positions.
inline void schur_sort_by_key(CMat& t, CMat* u, std::vector<int>& key) {
  const Eigen::Index m = t.rows();
  bool moved = true;
  while (moved) {
    moved = false;
    for (Eigen::Index p = 0; p + 1 < m; ++p) {
      if (key[static_cast<std::size_t>(p)] >
          key[static_cast<std::size_t>(p + 1)]) {
        swap_schur_adjacent(t, u, p);
        std::swap(key[static_cast<std::size_t>(p)],
                  key[static_cast<std::size_t>(p + 1)]);
        moved = true;
      }
    }
  }
}

/// @brief Solves the triangular Sylvester equation A·X − X·B = C with A
///        (p×p) and B (q×q) upper triangular, elementwise from the bottom
///        row up. Solvable iff the diagonals of A and B are disjoint.
[[nodiscard]] inline CMat sylvester_tri_upper(const CMat& a, const CMat& b,
                                              const CMat& c) {
  const Eigen::Index p = a.rows(), q = b.rows();
  CMat x = czero(p, q);
  for (Eigen::Index r = p - 1; r >= 0; --r) {
    for (Eigen::Index s = 0; s < q; ++s) {
      Complex acc = c(r, s);
      for (Eigen::Index k = r + 1; k < p; ++k) acc -= a(r, k) * x(k, s);
      for (Eigen::Index k = 0; k < s; ++k) acc += x(r, k) * b(k, s);
      x(r, s) = acc / (a(r, r) - b(s, s));
    }
  }
  return x;
}

}  // namespace detail

/// @brief The strip logarithm: the unique g with e^{2πig} = f and every
///        eigenvalue of g in Σ1. g is a primary matrix function of f, hence
///        commutes with everything commuting with f.
///
/// Errors: non-square or singular input (smallest singular value ≤ tol·‖f‖₂);
/// Schur failure; an eigenvalue cluster whose branch angles span more than π
/// — such a cluster straddles the positive-real-axis cut, where no single
/// analytic branch exists, so the input is rejected rather than silently
/// assigned an arbitrary branch. A cluster that is one defective eigenvalue
/// (its shifted block is nilpotent up to roundoff) is exempt from the span
/// rule: its estimates scatter in a ring that may cross the cut even though
/// the true spectrum is the single, well-branched centroid.
[[nodiscard]] inline CMat strip_log(const CMat& f, double tol = kInvertTol) {
  if (f.rows() != f.cols()) throw DomainError("strip_log: non-square input");
  const Eigen::Index m = f.rows();
  if (m == 0) return f;
  {
    Eigen::JacobiSVD<CMat> svd(f);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(m - 1);
    if (smax == 0.0 || !(smin > tol * smax))
      throw DomainError("strip_log: singular input (sigma_min/sigma_max = " +
                        std::to_string(smax == 0.0 ? 0.0 : smin / smax) + ")");
  }
  if (m == 1) {
    CMat g(1, 1);
    g(0, 0) = detail::branch_log_over_2pii(f(0, 0));
    return g;
  }

  Eigen::ComplexSchur<CMat> schur(f, /*computeU=*/true);
  if (schur.info() != Eigen::Success)
    throw DomainError("strip_log: spectral engine failed to converge");
  CMat t = schur.matrixT();
  CMat u = schur.matrixU();

  std::vector<Complex> mu(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i)
    mu[static_cast<std::size_t>(i)] = t(i, i);
  std::vector<int> key = detail::cluster_labels(mu);
  detail::schur_sort_by_key(t, &u, key);

  std::vector<Eigen::Index> starts;  // cluster block offsets + sentinel m
  for (Eigen::Index i = 0; i < m; ++i)
    if (i == 0 || key[static_cast<std::size_t>(i)] !=
                      key[static_cast<std::size_t>(i - 1)])
      starts.push_back(i);
  starts.push_back(m);
  const std::size_t nb = starts.size() - 1;

  // Per-cluster branch logarithm.
  CMat g = czero(m, m);
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const Eigen::Index b0 = starts[bi], len = starts[bi + 1] - b0;
    if (len == 1) {
      g(b0, b0) = detail::branch_log_over_2pii(t(b0, b0));
      continue;
    }
    const CMat tb = t.block(b0, b0, len, len);
    // A defective eigenvalue scatters its estimates in a ring of radius
    // ~ε^{1/len}, so branch decisions must treat the cluster as a whole: if
    // the centroid-shifted block is nilpotent up to roundoff, the cluster is
    // a single (possibly on-axis) point μ̄ and μ̄ alone picks the branch.
    // This is what admits unipotent blocks sitting exactly on the cut.
    // Otherwise the estimates are honest and their angular span decides.
    const Complex centroid = tb.trace() / static_cast<double>(len);
    const CMat shifted = tb - centroid * cid(len);
    CMat nil_power = shifted;
    for (Eigen::Index i = 1; i < len; ++i) nil_power = (nil_power * shifted).eval();
    const double nil_scale = std::max(1.0, frob(shifted));
    double th_bar = 0.0;
    if (frob(nil_power) <=
        1e-8 * std::pow(nil_scale, static_cast<double>(len))) {
      th_bar = detail::branch_theta(centroid);
    } else {
      double th_min = 0.0, th_max = 0.0;
      for (Eigen::Index i = 0; i < len; ++i) {
        const double th = detail::branch_theta(tb(i, i));
        if (i == 0) {
          th_min = th_max = th;
        } else {
          th_min = std::min(th_min, th);
          th_max = std::max(th_max, th);
        }
      }
      if (th_max - th_min > kPi)
        throw DomainError(
            "strip_log: eigenvalue cluster straddles the positive-real-axis "
            "cut; no consistent branch exists");
      th_bar = 0.5 * (th_min + th_max);
    }
    // Rotate the cluster onto the positive real axis, take the principal
    // logarithm there, and rotate back: iθ̄ + Log(e^{−iθ̄}·T_b), all over 2πi.
    const CMat rotated = std::polar(1.0, -th_bar) * tb;
    const CMat plog = rotated.log();
    g.block(b0, b0, len, len) =
        (Complex(0.0, th_bar) * cid(len) + plog) / kTwoPiI;
  }

  // Block Parlett recurrence for the off-diagonal blocks of g = log(t)/2πi.
  for (std::size_t d = 1; d < nb; ++d) {
    for (std::size_t bi = 0; bi + d < nb; ++bi) {
      const std::size_t bj = bi + d;
      const Eigen::Index i0 = starts[bi], il = starts[bi + 1] - i0;
      const Eigen::Index j0 = starts[bj], jl = starts[bj + 1] - j0;
      CMat c = g.block(i0, i0, il, il) * t.block(i0, j0, il, jl) -
               t.block(i0, j0, il, jl) * g.block(j0, j0, jl, jl);
      for (std::size_t bk = bi + 1; bk < bj; ++bk) {
        const Eigen::Index k0 = starts[bk], kl = starts[bk + 1] - k0;
        c += g.block(i0, k0, il, kl) * t.block(k0, j0, kl, jl) -
             t.block(i0, k0, il, kl) * g.block(k0, j0, kl, jl);
      }
      g.block(i0, j0, il, jl) = detail::sylvester_tri_upper(
          t.block(i0, i0, il, il), t.block(j0, j0, jl, jl), c);
    }
  }

  return u * g * u.adjoint();
}

}  // namespace quiverdm
