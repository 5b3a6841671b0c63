#pragma once

#include <quiverdm/cmat.hpp>
#include <quiverdm/matrix_functions.hpp>
#include <quiverdm/rng.hpp>

#include <unsupported/Eigen/KroneckerProduct>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace quiverdm {

/// @brief Vertex of the n-dimensional hypercube: a subset of {1, …, n}
/// encoded as a bitmask with element i stored in bit i−1.
using VertexId = unsigned;

/// @brief Largest supported hypercube dimension (vertex count 2^n).
constexpr int kMaxCubeDim = 20;

[[nodiscard]] constexpr bool subset_contains(VertexId v, int i) {
  return (v >> (i - 1)) & 1u;
}
[[nodiscard]] constexpr VertexId subset_with(VertexId v, int i) {
  return v | (1u << (i - 1));
}
[[nodiscard]] constexpr VertexId subset_without(VertexId v, int i) {
  return v & ~(1u << (i - 1));
}

/// @brief Elements of a subset in increasing order.
[[nodiscard]] inline std::vector<int> subset_elements(VertexId v, int n) {
  std::vector<int> out;
  for (int i = 1; i <= n; ++i)
    if (subset_contains(v, i)) out.push_back(i);
  return out;
}

/// @brief Human-readable form, e.g. "{}" or "{1,3}".
[[nodiscard]] inline std::string subset_to_string(VertexId v, int n) {
  std::string s = "{";
  bool first = true;
  for (int i = 1; i <= n; ++i)
    if (subset_contains(v, i)) {
      if (!first) s += ',';
      s += std::to_string(i);
      first = false;
    }
  return s + "}";
}

/// @brief Representation of the n-hypercube quiver with one pair of opposite
/// maps per edge, in the column-vector convention.
///
/// For each vertex I (bitmask) and direction i ∉ I the outward map
/// u[I][i−1] has shape dims[I∪i] × dims[I] and the inward map y[I][i−1] has
/// shape dims[I] × dims[I∪i]. Entries with i ∈ I are unused and left empty.
struct QuiverRep {
  int n = 0;
  std::vector<Eigen::Index> dims;   ///< 2^n vertex dimensions, indexed by mask
  std::vector<std::vector<CMat>> u; ///< u[I][i−1]: I → I∪i
  std::vector<std::vector<CMat>> y; ///< y[I][i−1]: I∪i → I

  [[nodiscard]] std::size_t vertex_count() const { return dims.size(); }
};

/// @brief Vertex-wise linear map between two representations of the same
/// hypercube; maps[I] sends source fibre I to target fibre I.
struct QuiverMorphism {
  int n = 0;
  std::vector<CMat> maps;  ///< 2^n blocks, maps[I]: target dims[I] × source dims[I]
};

/// @brief Outcome of one individual check inside a validation run.
struct CheckEntry {
  std::string tag;       ///< what was checked, e.g. "uu", "sigma1", "pde"
  std::string where;     ///< location, e.g. "I={1}, i=2"
  double residual = 0.0; ///< scale-relative deviation (or margin, see note)
  bool passed = true;
  std::string note;      ///< extra diagnostics, e.g. an offending eigenvalue
};

/// @brief Aggregated result of a validation or verification run.
struct ValidationReport {
  bool passed = true;
  double tol = 0.0;
  std::uint64_t seed = 0;  ///< sampling seed, when randomness was involved
  int samples = 0;         ///< sample count, when randomness was involved
  std::vector<CheckEntry> checks;

  void add(CheckEntry e) {
    passed = passed && e.passed;
    checks.push_back(std::move(e));
  }
  void absorb(const ValidationReport& other) {
    for (const CheckEntry& e : other.checks) add(e);
  }
  [[nodiscard]] std::vector<CheckEntry> violations() const {
    std::vector<CheckEntry> out;
    for (const CheckEntry& e : checks)
      if (!e.passed) out.push_back(e);
    return out;
  }
};

/// @brief The three membership levels a representation can be validated
/// against: bare commutation relations (Qui), invertibility of Id + y∘u on
/// every edge (C), or strip spectrum of y∘u on every edge (Sigma1).
enum class Category { Qui, C, Sigma1 };

[[nodiscard]] inline std::string category_name(Category c) {
  switch (c) {
    case Category::Qui: return "qui";
    case Category::C: return "c";
    default: return "sigma1";
  }
}

namespace detail {

[[nodiscard]] inline bool relation_entry(ValidationReport& report,
                                         std::string tag, std::string where,
                                         const CMat& lhs, const CMat& rhs) {
  const double res = frob(lhs - rhs);
  const double bound = report.tol * (1.0 + frob(lhs) + frob(rhs));
  CheckEntry e{std::move(tag), std::move(where),
               res / (1.0 + frob(lhs) + frob(rhs)), res <= bound, ""};
  const bool ok = e.passed;
  report.add(std::move(e));
  return ok;
}

[[nodiscard]] inline bool rep_shapes_ok(const QuiverRep& r,
                                        ValidationReport& report) {
  if (r.n < 0 || r.n > kMaxCubeDim ||
      r.dims.size() != (std::size_t{1} << (r.n < 0 ? 0 : r.n)) ||
      r.u.size() != r.dims.size() || r.y.size() != r.dims.size()) {
    report.add({"structure", "",0.0, false,
                "container sizes do not match 2^n vertices"});
    return false;
  }
  bool ok = true;
  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    if (r.dims[v] < 0) {
      report.add({"structure", subset_to_string(v, r.n), 0.0, false,
                  "negative dimension"});
      ok = false;
      continue;
    }
    if (r.u[v].size() != static_cast<std::size_t>(r.n) ||
        r.y[v].size() != static_cast<std::size_t>(r.n)) {
      report.add({"structure", subset_to_string(v, r.n), 0.0, false,
                  "edge container does not hold n slots"});
      ok = false;
      continue;
    }
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      const VertexId w = subset_with(v, i);
      const CMat& up = r.u[v][static_cast<std::size_t>(i - 1)];
      const CMat& dn = r.y[v][static_cast<std::size_t>(i - 1)];
      const std::string where =
          subset_to_string(v, r.n) + ", i=" + std::to_string(i);
      if (up.rows() != r.dims[w] || up.cols() != r.dims[v]) {
        report.add({"shape", where, 0.0, false, "outward map has wrong shape"});
        ok = false;
      }
      if (dn.rows() != r.dims[v] || dn.cols() != r.dims[w]) {
        report.add({"shape", where, 0.0, false, "inward map has wrong shape"});
        ok = false;
      }
    }
  }
  return ok;
}

}  // namespace detail

/// @brief Check the commutation relations of a hypercube representation and,
/// depending on the category, the per-edge invertibility or strip-spectrum
/// condition. Never throws; all findings are entries in the report.
///
/// Relation residuals use the scale-relative rule
/// ‖lhs − rhs‖_F ≤ tol·(1 + ‖lhs‖_F + ‖rhs‖_F).
[[nodiscard]] inline ValidationReport validate(const QuiverRep& r,
                                               Category category,
                                               double tol = 1e-9) {
  ValidationReport report;
  report.tol = tol;
  if (!detail::rep_shapes_ok(r, report)) return report;

  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      const VertexId vi = subset_with(v, i);
      // pairwise relations on the square spanned by directions i and j
      for (int j = 1; j <= r.n; ++j) {
        if (j == i || subset_contains(v, j)) continue;
        const VertexId vj = subset_with(v, j);
        const std::string where = subset_to_string(v, r.n) +
                                  ", i=" + std::to_string(i) +
                                  ", j=" + std::to_string(j);
        const CMat& u_vi = r.u[v][static_cast<std::size_t>(i - 1)];
        const CMat& u_vj = r.u[v][static_cast<std::size_t>(j - 1)];
        const CMat& y_vi = r.y[v][static_cast<std::size_t>(i - 1)];
        const CMat& y_vj = r.y[v][static_cast<std::size_t>(j - 1)];
        const CMat& u_vi_j = r.u[vi][static_cast<std::size_t>(j - 1)];
        const CMat& u_vj_i = r.u[vj][static_cast<std::size_t>(i - 1)];
        const CMat& y_vi_j = r.y[vi][static_cast<std::size_t>(j - 1)];
        if (i < j) {
          (void)detail::relation_entry(report, "uu", where, u_vi_j * u_vi,
                                       u_vj_i * u_vj);
          (void)detail::relation_entry(report, "yy", where, y_vi * y_vi_j,
                                       y_vj * r.y[vj][static_cast<std::size_t>(i - 1)]);
        }
        // ordered mixed relation: going up in j after coming down from i
        (void)detail::relation_entry(report, "yu", where, y_vi_j * u_vj_i,
                                     u_vi * y_vj);
      }
      if (category == Category::Qui) continue;
      const CMat loop = r.y[v][static_cast<std::size_t>(i - 1)] *
                        r.u[v][static_cast<std::size_t>(i - 1)];
      const std::string where =
          subset_to_string(v, r.n) + ", i=" + std::to_string(i);
      if (category == Category::C) {
        const CMat shifted = loop + cid(loop.rows());
        if (shifted.size() == 0) {
          report.add({"c-invert", where, 1.0, true, "empty fibre"});
        } else {
          Eigen::JacobiSVD<CMat> svd(shifted);
          const double smax = svd.singularValues()(0);
          const double smin =
              svd.singularValues()(svd.singularValues().size() - 1);
          const double margin = smax > 0.0 ? smin / smax : 0.0;
          report.add({"c-invert", where, margin, margin > tol,
                      "margin is sigma_min/sigma_max of Id + loop"});
        }
      } else {
        // Defective zero eigenvalues (nilpotent loops) scatter like ε^{1/k}
        // in any eigensolver; their mean is trace-stable, so membership for
        // the near-zero cluster is decided on the cluster mean.
        const auto evs = spectrum(loop);
        const double zero_ball = std::max(tol, 1e-4 * std::max(1.0, frob(loop)));
        Complex zero_sum = 0.0;
        int zero_count = 0;
        for (const Complex lambda : evs)
          if (std::abs(lambda) <= zero_ball) {
            zero_sum += lambda;
            ++zero_count;
          }
        bool edge_ok = true;
        for (const Complex lambda : evs) {
          const Complex probe = std::abs(lambda) <= zero_ball
                                    ? zero_sum / static_cast<double>(zero_count)
                                    : lambda;
          if (in_sigma1(probe, tol)) continue;
          edge_ok = false;
          report.add({"sigma1", where, 0.0, false,
                      "eigenvalue " + complex_to_string(lambda) +
                          " outside the half-open strip"});
        }
        if (edge_ok) report.add({"sigma1", where, 0.0, true, ""});
      }
    }
  }
  return report;
}

/// @brief Composite map along one edge, target vertex first: for adjacent
/// vertices, edge_map(r, K, L) is the representation map L → K.
/// @throws DomainError if K and L do not differ by exactly one element.
[[nodiscard]] inline const CMat& edge_map(const QuiverRep& r, VertexId target,
                                          VertexId source) {
  const VertexId diff = target ^ source;
  if (diff != 0 && (diff & (diff - 1)) == 0) {
    int i = 1;
    while (!subset_contains(diff, i)) ++i;
    if ((target & diff) != 0)
      return r.u[source][static_cast<std::size_t>(i - 1)];
    return r.y[target][static_cast<std::size_t>(i - 1)];
  }
  throw DomainError("edge_map: vertices " + std::to_string(target) + " and " +
                    std::to_string(source) + " are not adjacent");
}

/// @brief Loop composite at vertex K through adjacent vertex L:
/// edge_map(K, L) ∘ edge_map(L, K), a square matrix on the fibre of K.
[[nodiscard]] inline CMat loop_map(const QuiverRep& r, VertexId k, VertexId l) {
  return edge_map(r, k, l) * edge_map(r, l, k);
}

/// @brief Transpose duality: swaps the roles of the outward and inward maps,
/// u ↦ yᵀ and y ↦ uᵀ, fixing vertex dimensions. An exact involution.
[[nodiscard]] inline QuiverRep dualize(const QuiverRep& r) {
  QuiverRep out;
  out.n = r.n;
  out.dims = r.dims;
  out.u.resize(r.vertex_count());
  out.y.resize(r.vertex_count());
  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    out.u[v].resize(static_cast<std::size_t>(r.n));
    out.y[v].resize(static_cast<std::size_t>(r.n));
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      const auto k = static_cast<std::size_t>(i - 1);
      out.u[v][k] = r.y[v][k].transpose();
      out.y[v][k] = r.u[v][k].transpose();
    }
  }
  return out;
}

/// @brief Dual of a morphism: transposed blocks, with source and target
/// exchanged (a morphism R → S dualizes to one dualize(S) → dualize(R)).
[[nodiscard]] inline QuiverMorphism dualize_morphism(const QuiverMorphism& h) {
  QuiverMorphism out;
  out.n = h.n;
  out.maps.reserve(h.maps.size());
  for (const CMat& m : h.maps) out.maps.push_back(m.transpose());
  return out;
}

/// @brief Check that a vertex-wise map intertwines two representations:
/// on every edge, target.u ∘ h = h ∘ source.u and h ∘ source.y = target.y ∘ h.
[[nodiscard]] inline ValidationReport validate_morphism(
    const QuiverRep& source, const QuiverRep& target, const QuiverMorphism& h,
    double tol = 1e-9) {
  ValidationReport report;
  report.tol = tol;
  if (source.n != target.n || h.n != source.n ||
      h.maps.size() != source.vertex_count() ||
      source.vertex_count() != target.vertex_count()) {
    report.add({"structure", "", 0.0, false,
                "morphism and representations disagree on the cube dimension"});
    return report;
  }
  for (VertexId v = 0; v < source.vertex_count(); ++v) {
    if (h.maps[v].rows() != target.dims[v] ||
        h.maps[v].cols() != source.dims[v]) {
      report.add({"shape", subset_to_string(v, source.n), 0.0, false,
                  "morphism block has wrong shape"});
      return report;
    }
  }
  for (VertexId v = 0; v < source.vertex_count(); ++v) {
    for (int i = 1; i <= source.n; ++i) {
      if (subset_contains(v, i)) continue;
      const VertexId w = subset_with(v, i);
      const auto k = static_cast<std::size_t>(i - 1);
      const std::string where =
          subset_to_string(v, source.n) + ", i=" + std::to_string(i);
      (void)detail::relation_entry(report, "intertwine-u", where,
                                   target.u[v][k] * h.maps[v],
                                   h.maps[w] * source.u[v][k]);
      (void)detail::relation_entry(report, "intertwine-y", where,
                                   h.maps[v] * source.y[v][k],
                                   target.y[v][k] * h.maps[w]);
    }
  }
  return report;
}

/// @brief Vertex-wise direct sum: dimensions add, maps become block diagonal.
/// @throws DomainError if the cube dimensions differ.
[[nodiscard]] inline QuiverRep direct_sum(const QuiverRep& a,
                                          const QuiverRep& b) {
  if (a.n != b.n) throw DomainError("direct_sum: cube dimensions differ");
  QuiverRep out;
  out.n = a.n;
  out.dims.resize(a.vertex_count());
  out.u.resize(a.vertex_count());
  out.y.resize(a.vertex_count());
  const auto block = [](const CMat& x, const CMat& y) {
    CMat m = czero(x.rows() + y.rows(), x.cols() + y.cols());
    m.topLeftCorner(x.rows(), x.cols()) = x;
    m.bottomRightCorner(y.rows(), y.cols()) = y;
    return m;
  };
  for (VertexId v = 0; v < a.vertex_count(); ++v) {
    out.dims[v] = a.dims[v] + b.dims[v];
    out.u[v].resize(static_cast<std::size_t>(a.n));
    out.y[v].resize(static_cast<std::size_t>(a.n));
    for (int i = 1; i <= a.n; ++i) {
      if (subset_contains(v, i)) continue;
      const auto k = static_cast<std::size_t>(i - 1);
      out.u[v][k] = block(a.u[v][k], b.u[v][k]);
      out.y[v][k] = block(a.y[v][k], b.y[v][k]);
    }
  }
  return out;
}

/// @brief Conjugate by a random vertex-wise base change with singular values
/// in [0.1, 10]. Returns the transformed representation together with the
/// invertible morphism original → transformed realising the isomorphism.
[[nodiscard]] inline std::pair<QuiverRep, QuiverMorphism> conjugate(
    const QuiverRep& r, std::uint64_t seed) {
  Rng rng(seed);
  QuiverMorphism h;
  h.n = r.n;
  std::vector<CMat> inv(r.vertex_count());
  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    const CMat m = rng.well_conditioned(r.dims[v], 0.1, 10.0);
    h.maps.push_back(m);
    inv[v] = m.size() == 0 ? m : CMat(m.partialPivLu().solve(cid(m.rows())));
  }
  QuiverRep out;
  out.n = r.n;
  out.dims = r.dims;
  out.u.resize(r.vertex_count());
  out.y.resize(r.vertex_count());
  for (VertexId v = 0; v < r.vertex_count(); ++v) {
    out.u[v].resize(static_cast<std::size_t>(r.n));
    out.y[v].resize(static_cast<std::size_t>(r.n));
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      const VertexId w = subset_with(v, i);
      const auto k = static_cast<std::size_t>(i - 1);
      out.u[v][k] = h.maps[w] * r.u[v][k] * inv[v];
      out.y[v][k] = h.maps[v] * r.y[v][k] * inv[w];
    }
  }
  return {std::move(out), std::move(h)};
}

/// @brief Options controlling random generation.
struct GenOptions {
  bool nilpotent = false;    ///< force every edge loop y∘u to be nilpotent
  bool base_change = true;   ///< conjugate the tensor model by a random change
};

/// @brief Generate a random representation as a tensor product of n
/// one-dimensional factors (factor k contributing dims_per_factor[k−1]),
/// followed by an optional random base change.
///
/// In category Sigma1 the loop spectrum on every edge is drawn from the
/// interior of the strip (or set to zero when opts.nilpotent); in category C
/// loops are redrawn until Id + loop is safely invertible; in category Qui
/// the maps are unconstrained.
/// @throws DomainError for invalid sizes or when rejection sampling fails.
[[nodiscard]] inline QuiverRep generate(int n,
                                        const std::vector<Eigen::Index>& dims_per_factor,
                                        Category category, std::uint64_t seed,
                                        const GenOptions& opts = {}) {
  if (n < 0 || n > kMaxCubeDim)
    throw DomainError("generate: cube dimension " + std::to_string(n) +
                      " out of range 0.." + std::to_string(kMaxCubeDim));
  if (dims_per_factor.size() != static_cast<std::size_t>(n))
    throw DomainError("generate: expected " + std::to_string(n) +
                      " factor dimensions, got " +
                      std::to_string(dims_per_factor.size()));
  for (const Eigen::Index d : dims_per_factor)
    if (d < 1) throw DomainError("generate: factor dimensions must be >= 1");

  Rng rng(seed);
  // one-dimensional factors: a pair (u_k, y_k) of d_k × d_k maps
  std::vector<CMat> fac_u(static_cast<std::size_t>(n));
  std::vector<CMat> fac_y(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Eigen::Index d = dims_per_factor[static_cast<std::size_t>(k)];
    if (category == Category::Sigma1) {
      // prescribe the loop spectrum via y·u = u⁻¹·s·u with s triangular
      const CMat u = rng.well_conditioned(d, 0.5, 2.0);
      CMat s = czero(d, d);
      for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = r + 1; c < d; ++c)
          s(r, c) = 0.3 * rng.complex_box();
        if (!opts.nilpotent) {
          Complex lambda;
          do {
            lambda = Complex(rng.uniform(0.05, 0.95), rng.uniform(-0.5, 0.5));
          } while (std::abs(lambda) < 0.05);
          s(r, r) = lambda;
        }
      }
      fac_u[static_cast<std::size_t>(k)] = u;
      fac_y[static_cast<std::size_t>(k)] = u.partialPivLu().solve(s);
    } else if (category == Category::C) {
      bool accepted = false;
      for (int att = 0; att < 1000 && !accepted; ++att) {
        const CMat u = rng.matrix(d, d);
        const CMat y = rng.matrix(d, d);
        accepted = true;
        for (const Complex lambda : spectrum(y * u))
          accepted = accepted && std::abs(lambda + 1.0) >= 0.05;
        if (accepted) {
          fac_u[static_cast<std::size_t>(k)] = u;
          fac_y[static_cast<std::size_t>(k)] = y;
        }
      }
      if (!accepted)
        throw DomainError("generate: rejection sampling for category C failed");
    } else {
      fac_u[static_cast<std::size_t>(k)] = rng.matrix(d, d);
      fac_y[static_cast<std::size_t>(k)] = rng.matrix(d, d);
    }
  }

  // assemble the tensor model: every vertex carries the full tensor space,
  // direction i acts by (Id ⊗ … ⊗ u_i ⊗ … ⊗ Id) with factor 1 leftmost
  QuiverRep rep;
  rep.n = n;
  Eigen::Index total = 1;
  for (const Eigen::Index d : dims_per_factor) total *= d;
  rep.dims.assign(std::size_t{1} << n, total);
  rep.u.resize(rep.vertex_count());
  rep.y.resize(rep.vertex_count());
  const auto slot_kron = [&](const CMat& act, int slot) {
    CMat m = cid(1);
    for (int k = 0; k < n; ++k) {
      const CMat& next =
          k + 1 == slot ? act
                        : CMat(cid(dims_per_factor[static_cast<std::size_t>(k)]));
      m = Eigen::kroneckerProduct(m, next).eval();
    }
    return m;
  };
  for (VertexId v = 0; v < rep.vertex_count(); ++v) {
    rep.u[v].resize(static_cast<std::size_t>(n));
    rep.y[v].resize(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
      if (subset_contains(v, i)) continue;
      const auto k = static_cast<std::size_t>(i - 1);
      rep.u[v][k] = slot_kron(fac_u[k], i);
      rep.y[v][k] = slot_kron(fac_y[k], i);
    }
  }

  if (opts.base_change) rep = conjugate(rep, rng.next_u64()).first;
  return rep;
}

}  // namespace quiverdm
