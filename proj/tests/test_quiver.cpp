// Tests for hypercube quiver representations: structure validation,
// commutation relations, duality, morphisms, direct sums, random generation.

#include <quiverdm/quiver.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace quiverdm;

namespace {

bool has_tag(const ValidationReport& r, const std::string& tag) {
  for (const CheckEntry& e : r.violations())
    if (e.tag == tag) return true;
  return false;
}

QuiverRep one_cube(CMat u, CMat y) {
  QuiverRep r;
  r.n = 1;
  r.dims = {u.cols(), u.rows()};
  r.u = {{std::move(u)}, {CMat{}}};
  r.y = {{std::move(y)}, {CMat{}}};
  return r;
}

}  // namespace

TEST_CASE("subset bitmask helpers") {
  const VertexId v = 0b101;  // {1, 3}
  CHECK(subset_contains(v, 1));
  CHECK_FALSE(subset_contains(v, 2));
  CHECK(subset_contains(v, 3));
  CHECK(subset_with(v, 2) == 0b111u);
  CHECK(subset_without(v, 3) == 0b001u);
  CHECK(subset_elements(v, 3) == std::vector<int>{1, 3});
  CHECK(subset_to_string(v, 3) == "{1,3}");
  CHECK(subset_to_string(0, 3) == "{}");
}

TEST_CASE("generated representations validate in their own category") {
  const QuiverRep s1 = generate(2, {2, 3}, Category::Sigma1, 42);
  CHECK(validate(s1, Category::Qui).passed);
  CHECK(validate(s1, Category::Sigma1).passed);
  // strip interior spectra keep Id + loop invertible as well
  CHECK(validate(s1, Category::C).passed);

  const QuiverRep c = generate(2, {2, 2}, Category::C, 43);
  CHECK(validate(c, Category::Qui).passed);
  CHECK(validate(c, Category::C).passed);

  const QuiverRep q = generate(3, {2, 1, 2}, Category::Qui, 44);
  CHECK(validate(q, Category::Qui).passed);

  // the empty cube has one vertex and nothing to check
  CHECK(validate(generate(0, {}, Category::Sigma1, 45), Category::Sigma1)
            .passed);
}

TEST_CASE("validate reports broken commutation relations") {
  QuiverRep r = generate(2, {2, 2}, Category::Qui, 46);
  r.u[0][0](0, 0) += 1e-3;
  const ValidationReport report = validate(r, Category::Qui);
  CHECK_FALSE(report.passed);
  CHECK_FALSE(report.violations().empty());
  CHECK((has_tag(report, "uu") || has_tag(report, "yu")));
  // every violation names a location on the square it came from
  for (const CheckEntry& e : report.violations()) CHECK(!e.where.empty());
  // a tolerance large enough to swallow the perturbation passes again
  CHECK(validate(r, Category::Qui, 1e-1).passed);
}

TEST_CASE("validate reports malformed shapes and structure") {
  QuiverRep r = generate(1, {2}, Category::Qui, 47);
  r.u[0][0] = czero(3, 3);
  const ValidationReport report = validate(r, Category::Qui);
  CHECK_FALSE(report.passed);
  CHECK(has_tag(report, "shape"));

  QuiverRep bad;
  bad.n = 2;
  bad.dims = {1, 1};  // should be 4 entries
  const ValidationReport rep2 = validate(bad, Category::Qui);
  CHECK_FALSE(rep2.passed);
  CHECK(has_tag(rep2, "structure"));
}

TEST_CASE("category checks distinguish loop spectra") {
  // loop eigenvalue −0.5: fine for C, outside the strip
  const QuiverRep r1 = one_cube(cid(1), -0.5 * cid(1));
  CHECK(validate(r1, Category::C).passed);
  const ValidationReport s = validate(r1, Category::Sigma1);
  CHECK_FALSE(s.passed);
  REQUIRE(s.violations().size() == 1);
  CHECK(s.violations()[0].tag == "sigma1");
  CHECK(s.violations()[0].note.find("-0.5") != std::string::npos);

  // loop eigenvalue −1: Id + loop singular, C fails
  const QuiverRep r2 = one_cube(cid(1), -cid(1));
  CHECK_FALSE(validate(r2, Category::C).passed);
  CHECK(has_tag(validate(r2, Category::C), "c-invert"));
  CHECK(validate(r2, Category::Qui).passed);

  // loop eigenvalue 0.5 − 3i: interior of the strip
  const QuiverRep r3 = one_cube(cid(1), Complex(0.5, -3.0) * cid(1));
  CHECK(validate(r3, Category::Sigma1).passed);
}

TEST_CASE("edge_map is target-first and loop_map composes through") {
  const QuiverRep r = generate(2, {2, 2}, Category::Sigma1, 48);
  CHECK(edge_map(r, 0b01, 0b00) == r.u[0][0]);
  CHECK(edge_map(r, 0b00, 0b01) == r.y[0][0]);
  CHECK(edge_map(r, 0b11, 0b01) == r.u[0b01][1]);
  CHECK(approx_equal(loop_map(r, 0b00, 0b01), r.y[0][0] * r.u[0][0], 0.0));
  CHECK(approx_equal(loop_map(r, 0b01, 0b00), r.u[0][0] * r.y[0][0], 0.0));
  CHECK_THROWS_AS(edge_map(r, 0b00, 0b11), DomainError);
  CHECK_THROWS_AS(edge_map(r, 0b01, 0b01), DomainError);
}

TEST_CASE("dualize is an exact involution and preserves strip membership") {
  const QuiverRep r = generate(2, {2, 2}, Category::Sigma1, 49);
  const QuiverRep d = dualize(r);
  for (VertexId v = 0; v < r.vertex_count(); ++v)
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      CHECK(d.u[v][i - 1] == CMat(r.y[v][i - 1].transpose()));
      CHECK(dualize(d).u[v][i - 1] == r.u[v][i - 1]);
    }
  // dual loop is the transpose of the original loop: same spectrum
  CHECK(validate(d, Category::Sigma1).passed);
  CHECK(validate(d, Category::Qui).passed);
}

TEST_CASE("conjugate produces an isomorphism witnessed by its morphism") {
  const QuiverRep r = generate(2, {2, 2}, Category::Sigma1, 50);
  const auto [s, h] = conjugate(r, 51);
  CHECK(validate(s, Category::Qui).passed);
  CHECK(validate(s, Category::Sigma1).passed);  // spectra are conjugation-invariant
  CHECK(validate_morphism(r, s, h).passed);

  // identity morphism intertwines a representation with itself
  QuiverMorphism id;
  id.n = r.n;
  for (VertexId v = 0; v < r.vertex_count(); ++v) id.maps.push_back(cid(r.dims[v]));
  CHECK(validate_morphism(r, r, id).passed);

  // a perturbed block breaks the intertwining relations
  QuiverMorphism broken = h;
  broken.maps[1](0, 0) += 0.1;
  const ValidationReport rep = validate_morphism(r, s, broken);
  CHECK_FALSE(rep.passed);
  CHECK((has_tag(rep, "intertwine-u") || has_tag(rep, "intertwine-y")));
}

TEST_CASE("dualize_morphism intertwines the dualized representations") {
  const QuiverRep r = generate(2, {2, 2}, Category::Sigma1, 52);
  const auto [s, h] = conjugate(r, 53);
  const QuiverMorphism hd = dualize_morphism(h);
  CHECK(validate_morphism(dualize(s), dualize(r), hd).passed);
}

TEST_CASE("direct_sum is block diagonal and category preserving") {
  const QuiverRep a = generate(2, {2, 1}, Category::Sigma1, 54);
  const QuiverRep b = generate(2, {1, 2}, Category::Sigma1, 55);
  const QuiverRep s = direct_sum(a, b);
  CHECK(s.dims[0] == a.dims[0] + b.dims[0]);
  CHECK(validate(s, Category::Qui).passed);
  CHECK(validate(s, Category::Sigma1).passed);
  CHECK(approx_equal(s.u[0][0].topLeftCorner(a.dims[1], a.dims[0]), a.u[0][0],
                     0.0));
  CHECK(max_abs(s.u[0][0].topRightCorner(a.dims[1], b.dims[0])) == 0.0);

  const QuiverRep c = generate(1, {2}, Category::Sigma1, 56);
  CHECK_THROWS_AS(direct_sum(a, c), DomainError);
}

TEST_CASE("generate is deterministic in the seed") {
  const QuiverRep r1 = generate(2, {2, 2}, Category::Sigma1, 57);
  const QuiverRep r2 = generate(2, {2, 2}, Category::Sigma1, 57);
  const QuiverRep r3 = generate(2, {2, 2}, Category::Sigma1, 58);
  CHECK(r1.u[0][0] == r2.u[0][0]);
  CHECK(r1.y[0b10][0] == r2.y[0b10][0]);
  CHECK(r1.u[0][0] != r3.u[0][0]);
}

TEST_CASE("generate options control nilpotency and base change") {
  GenOptions nil;
  nil.nilpotent = true;
  const QuiverRep r = generate(2, {2, 2}, Category::Sigma1, 59, nil);
  CHECK(validate(r, Category::Sigma1).passed);
  for (VertexId v = 0; v < r.vertex_count(); ++v)
    for (int i = 1; i <= r.n; ++i) {
      if (subset_contains(v, i)) continue;
      for (const Complex lambda : spectrum(loop_map(r, v, subset_with(v, i))))
        CHECK(std::abs(lambda) < 1e-7);
    }

  GenOptions plain;
  plain.base_change = false;
  const QuiverRep t = generate(1, {3}, Category::Sigma1, 60, plain);
  // without base change the model is the bare tensor construction, whose
  // outward map is drawn well conditioned with singular values in [0.5, 2]
  Eigen::JacobiSVD<CMat> svd(t.u[0][0]);
  CHECK(svd.singularValues()(0) <= 2.0 + 1e-9);
  CHECK(svd.singularValues()(2) >= 0.5 - 1e-9);
}

TEST_CASE("generate rejects invalid requests") {
  CHECK_THROWS_AS(generate(2, {2}, Category::Qui, 0), DomainError);
  CHECK_THROWS_AS(generate(1, {0}, Category::Qui, 0), DomainError);
  CHECK_THROWS_AS(generate(-1, {}, Category::Qui, 0), DomainError);
  CHECK_THROWS_AS(generate(21, std::vector<Eigen::Index>(21, 1), Category::Qui, 0),
                  DomainError);
}
