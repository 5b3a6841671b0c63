#include <quiverdm/solutions.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

using quiverdm::Category;
using quiverdm::CMat;
using quiverdm::Complex;
using quiverdm::DomainError;
using quiverdm::ExtendDirection;
using quiverdm::FactorKind;
using quiverdm::kPi;
using quiverdm::LogExpr;
using quiverdm::QuiverRep;
using quiverdm::SolutionFamily;
using quiverdm::ValidationReport;

namespace {

CMat m1(Complex v) {
  CMat m(1, 1);
  m(0, 0) = v;
  return m;
}

/// Branch logarithm with the argument taken in (0, 2π), matching the cut
/// along the non-negative real axis used by expression evaluation.
Complex blog(Complex z) {
  double th = std::arg(z);
  if (th <= 0.0) th += 2.0 * kPi;
  return {std::log(std::abs(z)), th};
}

/// Scalar rep with outward map 0.3 and inward map 1; the loop through the
/// upper vertex is 0.3, so the base solutions are z^{0.3} and z^{-0.7}.
QuiverRep scalar_rep() {
  QuiverRep r;
  r.n = 1;
  r.dims = {1, 1};
  r.u = {{m1(0.3)}, {CMat()}};
  r.y = {{m1(1.0)}, {CMat()}};
  return r;
}

QuiverRep zero_rep() {
  QuiverRep r;
  r.n = 1;
  r.dims = {1, 1};
  r.u = {{m1(0.0)}, {CMat()}};
  r.y = {{m1(0.0)}, {CMat()}};
  return r;
}

/// Loop y∘u is the nilpotent single Jordan block, exercising the phi branch
/// of the antiderivative in reconstruction steps.
QuiverRep nilpotent_rep() {
  CMat nil = quiverdm::czero(2, 2);
  nil(0, 1) = 1.0;
  QuiverRep r;
  r.n = 1;
  r.dims = {2, 2};
  r.u = {{quiverdm::cid(2)}, {CMat()}};
  r.y = {{nil}, {CMat()}};
  return r;
}

bool has_tag(const ValidationReport& rep, const std::string& tag) {
  for (const auto& e : rep.checks)
    if (e.tag == tag) return true;
  return false;
}

}  // namespace

TEST_CASE("canonical solutions reproduce the scalar power chain") {
  const QuiverRep r = scalar_rep();

  const LogExpr eta0 = quiverdm::build_eta(r, 0, m1(1.0));
  REQUIRE(eta0.terms.size() == 1);
  REQUIRE(eta0.terms[0].factors.size() == 1);
  CHECK(eta0.terms[0].factors[0].kind == FactorKind::Power);
  CHECK(std::abs(eta0.terms[0].factors[0].expo(0, 0) - Complex(0.3)) < 1e-15);

  const LogExpr eta1 = quiverdm::build_eta(r, 1, m1(1.0));
  CHECK(std::abs(eta1.terms[0].factors[0].expo(0, 0) - Complex(-0.7)) < 1e-15);

  for (const Complex z : {Complex(0.7, 0.2), Complex(-1.0, 0.0),
                          Complex(0.1, -2.3)}) {
    const Complex lz = blog(z);
    CHECK(std::abs(quiverdm::evaluate(eta0, {z})(0, 0) -
                   std::exp(0.3 * lz)) < 1e-12);
    CHECK(std::abs(quiverdm::evaluate(eta1, {z})(0, 0) -
                   std::exp(-0.7 * lz)) < 1e-12);
  }

  // coefficient rows scale the solution linearly
  const LogExpr scaled = quiverdm::build_eta(r, 0, m1(Complex(0.0, 2.5)));
  const Complex z(1.3, 0.4);
  CHECK(std::abs(quiverdm::evaluate(scaled, {z})(0, 0) -
                 Complex(0.0, 2.5) * std::exp(0.3 * blog(z))) < 1e-12);
}

TEST_CASE("zero maps give constant solutions and a trivial certificate") {
  const QuiverRep r = zero_rep();
  const LogExpr eta = quiverdm::build_eta(r, 0, m1(2.0));
  CHECK(std::abs(quiverdm::evaluate(eta, {Complex(0.3, 1.1)})(0, 0) - 2.0) <
        1e-14);
  CHECK(std::abs(quiverdm::evaluate(eta, {Complex(-4.0, 0.2)})(0, 0) - 2.0) <
        1e-14);

  CHECK(quiverdm::verify_pde(r, 0, m1(2.0)).passed);
  CHECK(quiverdm::verify_main_theorem(r, 1, 5).passed);
}

TEST_CASE("build_eta rejects malformed requests") {
  const QuiverRep r = scalar_rep();
  CHECK_THROWS_AS(quiverdm::build_eta(r, 0, CMat(quiverdm::czero(1, 2))),
                  DomainError);
  CHECK_THROWS_AS(quiverdm::build_eta(r, 4, m1(1.0)), DomainError);

  QuiverRep bad = scalar_rep();
  bad.u[0][0] = m1(-0.5);  // loop -0.5 leaves the strip
  CHECK_THROWS_MATCHES(
      quiverdm::build_eta(bad, 0, m1(1.0)), DomainError,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("sigma1")));
}

TEST_CASE("edge extension reproduces the scalar transport identities") {
  const QuiverRep r = scalar_rep();
  const SolutionFamily base = quiverdm::make_family(r, 0, m1(1.0));

  // adding the element divides by z and composes with the inward map
  const SolutionFamily into = quiverdm::extend_edge(
      base, 0, ExtendDirection::Into, 1);
  REQUIRE(into.expr_per_vertex.count(1) == 1);
  const LogExpr expected_up = quiverdm::build_eta(r, 1, m1(1.0));
  CHECK(quiverdm::expr_equal(into.expr_per_vertex.at(1), expected_up, 8, 3,
                             1e-11));

  // removing it composes with the outward map and takes the antiderivative:
  // the 1/0.3 normalisation of the primitive cancels the outward factor 0.3
  const SolutionFamily top = quiverdm::make_family(r, 1, m1(1.0));
  const SolutionFamily outof = quiverdm::extend_edge(
      top, 1, ExtendDirection::Outof, 1);
  REQUIRE(outof.expr_per_vertex.count(0) == 1);
  CHECK(quiverdm::expr_equal(outof.expr_per_vertex.at(0),
                             base.expr_per_vertex.at(0), 8, 4, 1e-11));

  // full round trip returns the original expression
  const SolutionFamily round = quiverdm::extend_edge(
      into, 1, ExtendDirection::Outof, 1);
  CHECK(quiverdm::expr_equal(round.expr_per_vertex.at(0),
                             base.expr_per_vertex.at(0), 8, 5, 1e-9));

  CHECK_THROWS_AS(quiverdm::extend_edge(base, 1, ExtendDirection::Outof, 1),
                  DomainError);  // vertex {1} not populated yet
  CHECK_THROWS_AS(quiverdm::extend_edge(base, 0, ExtendDirection::Outof, 1),
                  DomainError);  // 1 is not contained in the empty vertex
  CHECK_THROWS_AS(quiverdm::extend_edge(top, 1, ExtendDirection::Into, 1),
                  DomainError);  // 1 is already contained in {1}
}

TEST_CASE("extension is independent of the path") {
  const QuiverRep r = quiverdm::generate(2, {2, 2}, Category::Sigma1, 31);
  quiverdm::Rng rng(77);
  const CMat alpha = rng.matrix(1, r.dims[0]);
  const SolutionFamily base = quiverdm::make_family(r, 0, alpha);

  const SolutionFamily path_a = quiverdm::extend_edge(
      quiverdm::extend_edge(base, 0, ExtendDirection::Into, 1), 1,
      ExtendDirection::Into, 2);
  const SolutionFamily path_b = quiverdm::extend_edge(
      quiverdm::extend_edge(base, 0, ExtendDirection::Into, 2), 2,
      ExtendDirection::Into, 1);
  CHECK(quiverdm::expr_equal(path_a.expr_per_vertex.at(3),
                             path_b.expr_per_vertex.at(3), 8, 6, 1e-9));

  // the canonical path helper agrees with the manual ascending walk
  const SolutionFamily canonical = quiverdm::extend_to(base, 3);
  CHECK(quiverdm::expr_equal(canonical.expr_per_vertex.at(3),
                             path_a.expr_per_vertex.at(3), 8, 7, 1e-9));

  // mixed walk: strip one element, add another, in either order
  const CMat alpha1 = rng.matrix(1, r.dims[1]);
  const SolutionFamily at1 = quiverdm::make_family(r, 1, alpha1);
  const SolutionFamily down_up = quiverdm::extend_edge(
      quiverdm::extend_edge(at1, 1, ExtendDirection::Outof, 1), 0,
      ExtendDirection::Into, 2);
  const SolutionFamily up_down = quiverdm::extend_edge(
      quiverdm::extend_edge(at1, 1, ExtendDirection::Into, 2), 3,
      ExtendDirection::Outof, 1);
  CHECK(quiverdm::expr_equal(down_up.expr_per_vertex.at(2),
                             up_down.expr_per_vertex.at(2), 8, 8, 1e-9));

  // double antiderivative round trip from the full vertex
  SolutionFamily at_top{r, 3, CMat(), {}};
  at_top.expr_per_vertex[3] = canonical.expr_per_vertex.at(3);
  const SolutionFamily back = quiverdm::extend_to(at_top, 0);
  CHECK(quiverdm::expr_equal(back.expr_per_vertex.at(0),
                             base.expr_per_vertex.at(0), 8, 9, 1e-9));
}

TEST_CASE("holonomic system certificates pass on generated data") {
  const QuiverRep scalar = scalar_rep();
  CHECK(quiverdm::verify_pde(scalar, 0, m1(1.0)).passed);
  CHECK(quiverdm::verify_pde(scalar, 1, m1(1.0)).passed);

  const QuiverRep r2 = quiverdm::generate(2, {2, 2}, Category::Sigma1, 11);
  quiverdm::Rng rng(5);
  for (quiverdm::VertexId v = 0; v < r2.vertex_count(); ++v) {
    const ValidationReport rep =
        quiverdm::verify_pde(r2, v, CMat(rng.matrix(1, r2.dims[v])), 8, v);
    INFO("vertex " << quiverdm::subset_to_string(v, r2.n));
    CHECK(rep.passed);
    CHECK(has_tag(rep, "pde-euler"));
    CHECK(has_tag(rep, "pde"));
  }

  const QuiverRep nil = nilpotent_rep();
  const CMat alpha = rng.matrix(1, 2);
  CHECK(quiverdm::verify_pde(nil, 0, alpha).passed);
  CHECK(quiverdm::verify_pde(nil, 1, alpha).passed);
}

TEST_CASE("canonical map identities hold across edges") {
  const QuiverRep scalar = scalar_rep();
  const ValidationReport rep = quiverdm::verify_can(scalar, 0, 1, m1(1.0));
  CHECK(rep.passed);
  REQUIRE(rep.checks.size() == 2);
  CHECK(rep.checks[0].tag == "can-a");
  CHECK(rep.checks[1].tag == "can-b");
  CHECK(rep.checks[1].note.empty());  // loop 0.3 is far from resonance

  const QuiverRep r2 = quiverdm::generate(2, {2, 2}, Category::Sigma1, 13);
  quiverdm::Rng rng(6);
  for (quiverdm::VertexId v = 0; v < r2.vertex_count(); ++v)
    for (int i = 1; i <= r2.n; ++i) {
      if (quiverdm::subset_contains(v, i)) continue;
      const ValidationReport edge = quiverdm::verify_can(
          r2, v, i, CMat(rng.matrix(1, r2.dims[v])), 1e-9, 8, rng.next_u64());
      INFO("edge " << quiverdm::subset_to_string(v, r2.n) << ", i=" << i);
      CHECK(edge.passed);
    }

  // nilpotent loops are resonant: the reconstruction identity is certified
  // in derivative form and says so
  const QuiverRep nil = nilpotent_rep();
  const ValidationReport res = quiverdm::verify_can(nil, 0, 1,
                                                    CMat(rng.matrix(1, 2)));
  CHECK(res.passed);
  REQUIRE(res.checks.size() == 2);
  CHECK(res.checks[1].note.find("derivative form") != std::string::npos);

  CHECK_THROWS_AS(quiverdm::verify_can(scalar, 1, 1, m1(1.0)), DomainError);
}

TEST_CASE("variation identities match the monodromy defect") {
  const QuiverRep scalar = scalar_rep();

  // closed form: psi(0.3)·0.3 = e^{0.6·pi·i} − 1
  const CMat theta = quiverdm::variation_theta(scalar, 0, 1);
  const Complex expected = std::exp(Complex(0.0, 0.6 * kPi)) - 1.0;
  CHECK(std::abs(theta(0, 0) - expected) < 1e-13);

  CHECK(quiverdm::verify_var(scalar, 0, 1, m1(1.0)).passed);
  CHECK(quiverdm::verify_var(scalar, 0, 1, m1(Complex(0.2, -1.5))).passed);

  // nilpotent loop: theta is psi of the Jordan block
  const QuiverRep nil = nilpotent_rep();
  const CMat theta_nil = quiverdm::variation_theta(nil, 0, 1);
  const Complex tau(0.0, 2.0 * kPi);
  CHECK(std::abs(theta_nil(0, 0) - tau) < 1e-12);
  CHECK(std::abs(theta_nil(1, 1) - tau) < 1e-12);
  CHECK(std::abs(theta_nil(0, 1) - Complex(-2.0 * kPi * kPi)) < 1e-11);
  CHECK(std::abs(theta_nil(1, 0)) < 1e-13);

  quiverdm::Rng rng(9);
  CHECK(quiverdm::verify_var(nil, 0, 1, CMat(rng.matrix(1, 2))).passed);

  // the reconstruction step down from the top vertex passes through the
  // phi branch of the antiderivative when the loop is nilpotent
  const SolutionFamily top = quiverdm::make_family(nil, 1,
                                                   CMat(rng.matrix(1, 2)));
  const SolutionFamily down = quiverdm::extend_edge(
      top, 1, ExtendDirection::Outof, 1);
  bool saw_phi = false;
  for (const auto& t : down.expr_per_vertex.at(0).terms)
    for (const auto& f : t.factors) saw_phi = saw_phi || f.kind == FactorKind::Phi;
  CHECK(saw_phi);

  const QuiverRep r2 = quiverdm::generate(2, {2, 2}, Category::Sigma1, 17);
  for (quiverdm::VertexId v = 0; v < r2.vertex_count(); ++v)
    for (int i = 1; i <= r2.n; ++i) {
      if (quiverdm::subset_contains(v, i)) continue;
      const quiverdm::VertexId w = quiverdm::subset_with(v, i);
      const ValidationReport edge = quiverdm::verify_var(
          r2, v, i, CMat(rng.matrix(1, r2.dims[w])), 1e-9, 8, rng.next_u64());
      INFO("edge " << quiverdm::subset_to_string(v, r2.n) << ", i=" << i);
      CHECK(edge.passed);
    }

  CHECK_THROWS_AS(quiverdm::verify_var(scalar, 1, 1, m1(1.0)), DomainError);
}

TEST_CASE("variation invertibility certificates") {
  // A = [[-1]] is the resonant point: the defect is the constant 2·pi·i
  const ValidationReport at_res = quiverdm::verify_var_invertible(m1(-1.0));
  CHECK(at_res.passed);
  for (const auto& e : at_res.checks) {
    CHECK(e.tag == "var-invertible");
    CHECK(std::abs(e.residual - 2.0 * kPi) < 1e-9);
  }

  // A = [[-1/2]]: defect is −4·z^{1/2}
  CHECK(quiverdm::verify_var_invertible(m1(-0.5)).passed);
  {
    const CMat a = m1(-0.5);
    const LogExpr e = quiverdm::term_expr(
        quiverdm::cid(1), {quiverdm::power_factor(a)}, quiverdm::cid(1));
    const LogExpr v = quiverdm::monodromy(quiverdm::antiderive(e, 1), 1) -
                      quiverdm::antiderive(e, 1);
    const Complex z(0.3, 0.8);
    CHECK(std::abs(quiverdm::evaluate(v, {z})(0, 0) +
                   4.0 * std::exp(0.5 * blog(z))) < 1e-12);
  }

  // Jordan block at −1: upper triangular defect with 2·pi·i on the diagonal
  CMat jordan = quiverdm::czero(2, 2);
  jordan(0, 0) = -1.0;
  jordan(1, 1) = -1.0;
  jordan(0, 1) = 1.0;
  const ValidationReport jrep = quiverdm::verify_var_invertible(jordan, 8, 2);
  CHECK(jrep.passed);

  CHECK_THROWS_AS(quiverdm::verify_var_invertible(m1(0.0)), DomainError);
  CHECK_THROWS_AS(quiverdm::verify_var_invertible(m1(0.5)), DomainError);
  CHECK_THROWS_AS(quiverdm::verify_var_invertible(CMat(quiverdm::czero(1, 2))),
                  DomainError);

  // failure reporting: an absurd margin requirement must fail loudly
  const ValidationReport forced =
      quiverdm::verify_var_invertible(m1(-0.5), 8, 0, 10.0);
  CHECK_FALSE(forced.passed);
  CHECK_FALSE(forced.violations().empty());
  CHECK(forced.violations().front().tag == "var-invertible");
}

TEST_CASE("main theorem certification on small representations") {
  // scalar chain: assembled object is (1, e^{0.6·pi·i} − 1) on the dual side
  const ValidationReport scalar_rep_cert =
      quiverdm::verify_main_theorem(scalar_rep(), 2, 7);
  CHECK(scalar_rep_cert.passed);
  for (const char* tag : {"can-a", "can-b", "var-up", "var-dn",
                          "main-predict", "main-qdual", "assembled-c"})
    CHECK(has_tag(scalar_rep_cert, tag));

  const QuiverRep r1 = quiverdm::generate(1, {2}, Category::Sigma1, 23);
  CHECK(quiverdm::verify_main_theorem(r1, 1, 23).passed);

  const QuiverRep r2 = quiverdm::generate(2, {2, 1}, Category::Sigma1, 29);
  CHECK(quiverdm::verify_main_theorem(r2, 1, 29).passed);

  // nilpotent loops go through the phi branch and the derivative-form
  // reconstruction check
  quiverdm::GenOptions opts;
  opts.nilpotent = true;
  const QuiverRep nil = quiverdm::generate(1, {2}, Category::Sigma1, 37, opts);
  const ValidationReport nil_cert = quiverdm::verify_main_theorem(nil, 1, 37);
  CHECK(nil_cert.passed);
  bool derivative_form = false;
  for (const auto& e : nil_cert.checks)
    derivative_form =
        derivative_form || e.note.find("derivative form") != std::string::npos;
  CHECK(derivative_form);

  QuiverRep bad = scalar_rep();
  bad.u[0][0] = m1(-0.5);
  CHECK_THROWS_AS(quiverdm::verify_main_theorem(bad, 1, 0), DomainError);
}
