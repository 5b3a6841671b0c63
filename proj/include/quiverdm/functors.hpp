#pragma once

#include <quiverdm/matrix_functions.hpp>
#include <quiverdm/quiver.hpp>

#include <string>
#include <utility>

namespace quiverdm {

namespace detail {

inline void require_category(const QuiverRep& r, Category category,
                             const char* who, double tol) {
  const ValidationReport report = validate(r, category, tol);
  if (report.passed) return;
  const auto bad = report.violations();
  std::string msg = std::string(who) + ": input fails " +
                    category_name(category) + " validation (" +
                    std::to_string(bad.size()) + " violation(s)";
  if (!bad.empty())
    msg += "; first: " + bad.front().tag + " at " + bad.front().where +
           (bad.front().note.empty() ? "" : ", " + bad.front().note);
  throw DomainError(msg + ")");
}

}  // namespace detail

/// @brief Exponential-side functor: keeps every outward map u and replaces
/// each inward map c by ψ(c∘u)∘c = c∘ψ(u∘c), turning strip-spectrum data
/// into invertibility data (Id + new∘u = e^{2πi·c∘u} on each edge).
///
/// The ψ factor is applied on the smaller side of the edge: for
/// dims[I] ≤ dims[I∪i] the new inward map is ψ(c∘u)∘c, otherwise c∘ψ(u∘c).
/// Both expressions agree where defined.
/// @throws DomainError if the input fails Sigma1 validation.
[[nodiscard]] inline QuiverRep functor_Q(const QuiverRep& r, double tol = 1e-9) {
  detail::require_category(r, Category::Sigma1, "functor_Q", tol);
  QuiverRep out;
  out.n = r.n;
  out.dims = r.dims;
  out.u = r.u;
  out.y.resize(r.vertex_count());
  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    out.y[v].resize(static_cast<std::size_t>(r.n));
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      const VertexId w = subset_with(v, i);
      const auto k = static_cast<std::size_t>(i - 1);
      const CMat& up = r.u[v][k];
      const CMat& c = r.y[v][k];
      out.y[v][k] = r.dims[v] <= r.dims[w] ? CMat(psi(c * up) * c)
                                           : CMat(c * psi(up * c));
    }
  }
  return out;
}

/// @brief Logarithm-side functor: keeps every outward map u and replaces each
/// inward map w by x = ψ(s)⁻¹∘w where s = strip_log(w∘u + Id), so that
/// x∘u = s has strip spectrum on every edge.
/// @throws DomainError if the input fails C validation or a strip logarithm
/// is undefined (eigenvalue cluster straddling the cut).
[[nodiscard]] inline QuiverRep functor_G(const QuiverRep& r, double tol = 1e-9) {
  detail::require_category(r, Category::C, "functor_G", tol);
  QuiverRep out;
  out.n = r.n;
  out.dims = r.dims;
  out.u = r.u;
  out.y.resize(r.vertex_count());
  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    out.y[v].resize(static_cast<std::size_t>(r.n));
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      const auto k = static_cast<std::size_t>(i - 1);
      const CMat& up = r.u[v][k];
      const CMat& w = r.y[v][k];
      const CMat s = strip_log(w * up + cid(r.dims[v]));
      out.y[v][k] = psi_inv(s) * w;
    }
  }
  return out;
}

/// @brief Closed-form prediction for the solution-data representation of a
/// strip-spectrum input: on every edge the outward map becomes yᵀ and the
/// inward map becomes uᵀ∘ψ(yᵀ∘uᵀ); equivalently, the exponential-side
/// functor applied to the transpose dual.
/// @throws DomainError if the input fails Sigma1 validation.
[[nodiscard]] inline QuiverRep predict_A(const QuiverRep& r, double tol = 1e-9) {
  return functor_Q(dualize(r), tol);
}

/// @brief Deviation report for the two functor round trips: category C
/// objects against Q(G(·)), strip-spectrum objects against G(Q(·)).
/// Each edge map contributes one entry with the max-entrywise relative
/// deviation ‖a − b‖_max / (1 + ‖a‖_max + ‖b‖_max).
[[nodiscard]] inline ValidationReport roundtrip_check(const QuiverRep& r,
                                                      Category category,
                                                      double tol = 1e-8) {
  if (category == Category::Qui)
    throw DomainError("roundtrip_check: category must be c or sigma1");
  ValidationReport report;
  report.tol = tol;
  const QuiverRep back = category == Category::C
                             ? functor_Q(functor_G(r))
                             : functor_G(functor_Q(r));
  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      const auto k = static_cast<std::size_t>(i - 1);
      const std::string where =
          subset_to_string(v, r.n) + ", i=" + std::to_string(i);
      const auto entry = [&](const char* tag, const CMat& a, const CMat& b) {
        const double denom = 1.0 + max_abs(a) + max_abs(b);
        const double dev = a.size() == 0 ? 0.0 : max_abs(a - b) / denom;
        report.add({tag, where, dev, dev <= tol, ""});
      };
      entry("roundtrip-u", r.u[v][k], back.u[v][k]);
      entry("roundtrip-y", r.y[v][k], back.y[v][k]);
    }
  }
  return report;
}

}  // namespace quiverdm
