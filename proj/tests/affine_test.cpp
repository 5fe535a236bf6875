// Copyright 2026 The memopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <set>

#include "doctest.h"
#include "memopt/affine.hpp"
#include "support/map_gen.hpp"

using namespace memopt::affine;
using memopt::Exec;
namespace mt = memopt::testing;

namespace {

IntBox box(std::vector<Index> extents) { return IntBox::from_extents(extents); }

QuasiAffineMap shift(Index lo, Index hi, Index b) {
  return QuasiAffineMap(IntBox({lo}, {hi}), {QuasiAffineExpr::var(1, 0, 1, b)});
}

QuasiAffineMap transpose2(IntBox dom) {
  return QuasiAffineMap(std::move(dom), {QuasiAffineExpr::var(2, 1), QuasiAffineExpr::var(2, 0)});
}

// [4*i0 + i1] on [0,3) x [0,4)
QuasiAffineMap flatten_3x4() {
  return QuasiAffineMap::affine(box({3, 4}), {{4, 1}}, {0});
}

// [idx floordiv 4, idx mod 4] on [0,12)
QuasiAffineMap unflatten_12() {
  const LinearExpr idx = LinearExpr::var(1, 0);
  return QuasiAffineMap(box({12}), {QuasiAffineExpr::div(idx, 4, DivKind::FloorDiv),
                                    QuasiAffineExpr::div(idx, 4, DivKind::Mod)});
}

std::set<Point> enumerate_image_by_hand(const QuasiAffineMap& f) {
  std::set<Point> out;
  f.domain().for_each([&](std::span<const Index> p) { out.insert(f.evaluate(p)); });
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("affine");

TEST_CASE("floor division rounds toward negative infinity") {
  CHECK(floor_div(7, 2) == 3);
  CHECK(floor_div(-7, 2) == -4);
  CHECK(floor_div(-8, 2) == -4);
  CHECK(floor_mod(-7, 2) == 1);
  CHECK(floor_mod(-1, 4) == 3);
  mt::Rng rng(11);
  for (int t = 0; t < 20000; ++t) {
    const Index x = mt::uniform(rng, -1000, 1000);
    const Index d = mt::uniform(rng, 1, 37);
    const Index q = floor_div(x, d);
    const Index r = floor_mod(x, d);
    REQUIRE(x == d * q + r);
    REQUIRE(r >= 0);
    REQUIRE(r < d);
  }
}

TEST_CASE("boxes") {
  SUBCASE("cardinality and lexicographic order") {
    const IntBox b({-1, 2}, {1, 5});
    CHECK(b.cardinality() == 6);
    std::vector<Point> seen;
    b.for_each([&](std::span<const Index> p) { seen.emplace_back(p.begin(), p.end()); });
    REQUIRE(seen.size() == 6);
    CHECK(seen.front() == Point{-1, 2});
    CHECK(seen[1] == Point{-1, 3});
    CHECK(seen.back() == Point{0, 4});
    for (std::uint64_t i = 0; i < seen.size(); ++i) {
      CHECK(b.point_at(i) == seen[i]);
      CHECK(b.linear_index(seen[i]) == i);
    }
  }
  SUBCASE("zero-dimensional box has exactly one point") {
    IntBox b;
    int visits = 0;
    b.for_each([&](std::span<const Index> p) {
      CHECK(p.empty());
      ++visits;
    });
    CHECK(visits == 1);
    CHECK(b.cardinality() == 1);
  }
  SUBCASE("inverted bounds are rejected") {
    CHECK_THROWS_AS(IntBox({3}, {2}), AffineError);
  }
  SUBCASE("boxes above 2^40 points are rejected") {
    try {
      IntBox big({0, 0, 0}, {1 << 14, 1 << 14, 1 << 14});
      FAIL("expected DomainTooLarge");
    } catch (const AffineError& e) {
      CHECK(e.kind() == ErrorKind::DomainTooLarge);
    }
  }
}

TEST_CASE("evaluate") {
  CHECK(shift(0, 10, 5).evaluate(Point{3}) == Point{8});
  CHECK(transpose2(box({3, 8})).evaluate(Point{2, 7}) == Point{7, 2});
  CHECK(flatten_3x4().evaluate(Point{2, 3}) == Point{11});

  SUBCASE("flatten visits 0..11 in row-major order") {
    // oracle: lexicographic enumeration assigns consecutive integers
    const auto f = flatten_3x4();
    Index expected = 0;
    f.domain().for_each([&](std::span<const Index> p) { CHECK(f.evaluate(p) == Point{expected++}); });
    CHECK(expected == 12);
  }
  SUBCASE("points outside the domain are rejected") {
    try {
      flatten_3x4().evaluate(Point{3, 0});
      FAIL("expected PointOutsideDomain");
    } catch (const AffineError& e) {
      CHECK(e.kind() == ErrorKind::PointOutsideDomain);
    }
  }
  SUBCASE("mod is non-negative on negative inputs") {
    const QuasiAffineMap f(IntBox({-6}, {0}), {QuasiAffineExpr::div(LinearExpr::var(1, 0), 4, DivKind::Mod),
                                               QuasiAffineExpr::div(LinearExpr::var(1, 0), 4, DivKind::FloorDiv)});
    CHECK(f.evaluate(Point{-5}) == Point{3, -2});
    CHECK(f.evaluate(Point{-4}) == Point{0, -1});
  }
}

TEST_CASE("normalize folds div terms that stay in one bucket") {
  // (4*i0 + i1) floordiv 4 == i0 when 0 <= i1 < 4
  const QuasiAffineMap f(box({3, 4}), {QuasiAffineExpr::div(LinearExpr{{4, 1}, 0}, 4, DivKind::FloorDiv)});
  CHECK(f.is_pure_affine());
  CHECK(f.outputs()[0] == QuasiAffineExpr::var(2, 0));

  // (4*i0 + i1) mod 4 == i1
  const QuasiAffineMap g(box({3, 4}), {QuasiAffineExpr::div(LinearExpr{{4, 1}, 0}, 4, DivKind::Mod)});
  CHECK(g.outputs()[0] == QuasiAffineExpr::var(2, 1));

  SUBCASE("idempotent") {
    mt::Rng rng(5);
    for (int t = 0; t < 500; ++t) {
      const auto m = mt::random_general(rng);
      for (const auto& e : m.outputs()) CHECK(normalize(e, m.domain()) == e);
    }
  }
}

TEST_CASE("classify") {
  CHECK(classify(transpose2(box({3, 4}))) == MapClass::PermShift);
  CHECK(classify(shift(0, 10, 5)) == MapClass::PermShift);
  const QuasiAffineMap strided(box({3, 4}), {QuasiAffineExpr::var(2, 0, 2, 1), QuasiAffineExpr::var(2, 1)});
  CHECK(classify(strided) == MapClass::StridedEmbed);
  CHECK(classify(QuasiAffineMap::affine(box({2, 2}), {{1, 1}}, {0})) == MapClass::General);
  CHECK(classify(flatten_3x4()) == MapClass::MixedRadix);
  CHECK(classify(unflatten_12()) == MapClass::MixedRadix);
  CHECK(flatten_3x4().is_pure_affine());
  CHECK_FALSE(unflatten_12().is_pure_affine());

  SUBCASE("idempotent and consistent with the cached class") {
    mt::Rng rng(3);
    for (int t = 0; t < 400; ++t) {
      const auto m = mt::random_map(rng, static_cast<mt::Family>(t % 4));
      CHECK(classify(m) == m.structural_class());
      CHECK(classify(m) == classify(m));
    }
  }
}

TEST_CASE("image") {
  SUBCASE("identity") {
    const auto img = image(QuasiAffineMap::identity(box({4})));
    CHECK(img.points() == std::vector<Point>{{0}, {1}, {2}, {3}});
  }
  SUBCASE("stride lattice") {
    const auto img = image(QuasiAffineMap::affine(box({3}), {{3}}, {0}));
    CHECK(img.is_symbolic());
    CHECK(img.points() == std::vector<Point>{{0}, {3}, {6}});
    CHECK(img.contains(Point{3}));
    CHECK_FALSE(img.contains(Point{4}));
  }
  SUBCASE("flatten covers 0..11") {
    const auto img = image(flatten_3x4());
    std::vector<Point> expected;
    for (Index v = 0; v < 12; ++v) expected.push_back({v});
    CHECK(img.points() == expected);
    CHECK(img.equals_box(box({12})));
  }
  SUBCASE("general maps are enumerated") {
    const auto f = QuasiAffineMap::affine(box({2, 2}), {{1, 1}}, {0});
    const auto img = image(f);
    CHECK_FALSE(img.is_symbolic());
    CHECK(img.points() == std::vector<Point>{{0}, {1}, {2}});
  }
  SUBCASE("enumeration budget") {
    const auto f = QuasiAffineMap::affine(box({64, 64}), {{1, 1}}, {0});
    Limits tight;
    tight.enumeration = 100;
    CHECK_THROWS_AS(image(f, tight), AffineError);
  }
  SUBCASE("agrees with brute force on random maps") {
    mt::Rng rng(17);
    for (int t = 0; t < 400; ++t) {
      const auto m = mt::random_map(rng, static_cast<mt::Family>(t % 4));
      const auto expected = enumerate_image_by_hand(m);
      const auto img = image(m);
      const auto pts = img.points();
      CHECK(std::set<Point>(pts.begin(), pts.end()) == expected);
      CHECK(img.cardinality() == expected.size());
    }
  }
}

TEST_CASE("compose") {
  SUBCASE("transpose after transpose is the identity") {
    const auto t = transpose2(box({3, 3}));
    const auto id = compose(t, t);
    CHECK(id.is_identity());
    CHECK(id.domain() == box({3, 3}));
  }
  SUBCASE("linear substitution") {
    // f(i) = [2i] after g(j) = [j + 1]  ->  [2j + 2]
    const auto g = shift(0, 5, 1);
    const auto f = QuasiAffineMap::affine(IntBox({1}, {6}), {{2}}, {0});
    const auto h = compose(f, g);
    CHECK(h.outputs()[0] == QuasiAffineExpr::var(1, 0, 2, 2));
    CHECK(h.domain() == g.domain());
  }
  SUBCASE("unflatten after flatten is the identity") {
    const auto h = compose(unflatten_12(), flatten_3x4());
    CHECK(h.is_identity());
    // oracle: check every one of the 12 points
    int checked = 0;
    h.domain().for_each([&](std::span<const Index> p) {
      CHECK(h.evaluate(p) == Point(p.begin(), p.end()));
      ++checked;
    });
    CHECK(checked == 12);
  }
  SUBCASE("nested mod with divisible moduli stays symbolic") {
    // (y mod 8) mod 4 == y mod 4
    const LinearExpr y = LinearExpr::var(1, 0);
    const QuasiAffineMap inner(box({32}), {QuasiAffineExpr::div(y, 8, DivKind::Mod)});
    const QuasiAffineMap outer(box({8}), {QuasiAffineExpr::div(y, 4, DivKind::Mod)});
    const auto h = compose(outer, inner);
    CHECK_FALSE(h.is_tabulated());
    CHECK(count_composition_mismatches(h, outer, inner, Exec::Serial) == 0);
  }
  SUBCASE("nested floordiv stays symbolic") {
    const LinearExpr y = LinearExpr::var(1, 0);
    const QuasiAffineMap inner(box({40}), {QuasiAffineExpr::div(y, 2, DivKind::FloorDiv)});
    QuasiAffineExpr outer_e = QuasiAffineExpr::div(LinearExpr{{1}, 1}, 5, DivKind::FloorDiv);
    const QuasiAffineMap outer(box({20}), {outer_e});
    const auto h = compose(outer, inner);
    CHECK_FALSE(h.is_tabulated());
    CHECK(count_composition_mismatches(h, outer, inner, Exec::Serial) == 0);
  }
  SUBCASE("depth beyond one falls back to a point table") {
    const LinearExpr y = LinearExpr::var(1, 0);
    const QuasiAffineMap inner(box({30}), {QuasiAffineExpr::div(y, 2, DivKind::FloorDiv)});
    const QuasiAffineMap outer(box({15}), {QuasiAffineExpr::div(y, 3, DivKind::Mod)});
    const auto h = compose(outer, inner);
    CHECK(h.is_tabulated());
    CHECK(classify(h) == MapClass::General);
    CHECK(count_composition_mismatches(h, outer, inner, Exec::Serial) == 0);
  }
  SUBCASE("arity mismatch") {
    try {
      compose(flatten_3x4(), flatten_3x4());
      FAIL("expected ArityMismatch");
    } catch (const AffineError& e) {
      CHECK(e.kind() == ErrorKind::ArityMismatch);
    }
  }
  SUBCASE("image escaping the outer domain") {
    try {
      compose(shift(0, 5, 0), shift(0, 5, 1));
      FAIL("expected ImageEscapesDomain");
    } catch (const AffineError& e) {
      CHECK(e.kind() == ErrorKind::ImageEscapesDomain);
    }
  }
}

TEST_CASE("reverse") {
  SUBCASE("shift") {
    const auto r = reverse(shift(0, 10, 5));
    REQUIRE(r.kind() == InverseResult::Kind::Symbolic);
    CHECK(r.map().domain() == IntBox({5}, {15}));
    CHECK(r.map().outputs()[0] == QuasiAffineExpr::var(1, 0, 1, -5));
    CHECK(r.map().evaluate(Point{12}) == Point{7});
  }
  SUBCASE("stride two, inverse restricted to the image lattice") {
    const auto f = QuasiAffineMap::affine(box({5}), {{2}}, {0});
    const auto r = reverse(f);
    REQUIRE(r.kind() == InverseResult::Kind::Symbolic);
    // oracle: enumerate the domain; image must be {0,2,4,6,8} and the inverse halves
    CHECK(r.image().points() == std::vector<Point>{{0}, {2}, {4}, {6}, {8}});
    for (Index i = 0; i < 5; ++i) CHECK(r.map().evaluate(Point{2 * i}) == Point{i});
    CHECK(count_round_trip_failures(f, r.map(), Exec::Serial) == 0);
  }
  SUBCASE("collision") {
    const auto f = QuasiAffineMap::affine(box({2, 2}), {{1, 1}}, {0});
    const auto r = reverse(f);
    CHECK(r.kind() == InverseResult::Kind::NotInvertible);
    REQUIRE(r.witness().has_value());
    const auto& [p, q] = *r.witness();
    CHECK(p != q);
    CHECK(f.evaluate(p) == f.evaluate(q));
  }
  SUBCASE("mixed radix both ways") {
    const auto rf = reverse(flatten_3x4());
    REQUIRE(rf.kind() == InverseResult::Kind::Symbolic);
    CHECK(count_round_trip_failures(flatten_3x4(), rf.map(), Exec::Serial) == 0);
    const auto ru = reverse(unflatten_12());
    REQUIRE(ru.kind() == InverseResult::Kind::Symbolic);
    CHECK(ru.map().is_pure_affine());
    CHECK(count_round_trip_failures(unflatten_12(), ru.map(), Exec::Serial) == 0);
  }
  SUBCASE("injective general map is tabulated") {
    // shear [i0, i0 + i1] uses i0 twice
    const auto f = QuasiAffineMap::affine(box({3, 3}), {{1, 0}, {1, 1}}, {0, 0});
    CHECK(classify(f) == MapClass::General);
    const auto r = reverse(f);
    REQUIRE(r.kind() == InverseResult::Kind::Tabulated);
    CHECK(count_round_trip_failures(f, r.map(), Exec::Serial) == 0);
  }
  SUBCASE("tabulation limit") {
    const auto f = QuasiAffineMap::affine(box({40, 40}), {{1, 0}, {1, 1}}, {0, 0});
    Limits tight;
    tight.enumeration = 1000;
    const auto r = reverse(f, tight);
    CHECK(r.kind() == InverseResult::Kind::NotInvertible);
    CHECK_FALSE(r.witness().has_value());
  }
  SUBCASE("structured classes always invert symbolically") {
    mt::Rng rng(99);
    for (int t = 0; t < 600; ++t) {
      const auto f = mt::random_map(rng, static_cast<mt::Family>(t % 3));
      CAPTURE(t);
      REQUIRE(f.structural_class() != MapClass::General);
      const auto r = reverse(f);
      REQUIRE(r.kind() == InverseResult::Kind::Symbolic);
      CHECK(count_round_trip_failures(f, r.map(), Exec::Serial) == 0);
      CHECK(r.image().cardinality() == f.domain().cardinality());
    }
  }
}

TEST_CASE("composition properties on random maps") {
  mt::Rng rng(2024);
  for (int t = 0; t < 300; ++t) {
    const auto f = mt::random_map(rng, static_cast<mt::Family>(t % 4));
    const auto g_dom = image(f).bounding_box();
    const auto g = mt::random_map_on(rng, g_dom, static_cast<std::size_t>(mt::uniform(rng, 1, 3)));
    const auto gf = compose(g, f);
    CHECK(count_composition_mismatches(gf, g, f, Exec::Serial) == 0);

    const auto h_dom = image(g).bounding_box();
    const auto h = mt::random_map_on(rng, h_dom, 2);
    const auto left = compose(compose(h, g), f);
    const auto right = compose(h, gf);
    f.domain().for_each([&](std::span<const Index> p) { CHECK(left.evaluate(p) == right.evaluate(p)); });
  }
}

TEST_CASE("serial and parallel kernels agree") {
  const auto f = QuasiAffineMap::affine(box({64, 32}), {{32, 1}}, {0});
  const auto r = reverse(f);
  REQUIRE(r.invertible());
  CHECK(count_round_trip_failures(f, r.map(), Exec::Serial) == 0);
  CHECK(count_round_trip_failures(f, r.map(), Exec::Parallel) == 0);
  CHECK(evaluate_all(f, Exec::Serial) == evaluate_all(f, Exec::Parallel));

  // a wrong inverse: (0, y) only round-trips the 32 points of row 0
  const auto fake_inverse = QuasiAffineMap::affine(box({2048}), {{0}, {1}}, {0, 0});
  CHECK(count_round_trip_failures(f, fake_inverse, Exec::Serial) == 2048 - 32);
  CHECK(count_round_trip_failures(f, fake_inverse, Exec::Parallel) == 2048 - 32);
}

TEST_SUITE_END();

TEST_CASE("reshape whose digit boundary meets a variable boundary stays symbolic") {
  // [4,6] -> [2,2,6]: L = 6*i0 + i1, outputs L fd 12, (L fd 6) mod 2, L mod 6.
  // Normalization folds L mod 6 to i1 and L fd 6 to i0, leaving a partially
  // folded middle digit that the decomposition must re-expand.
  const IntBox dom = box({4, 6});
  const LinearExpr l{{6, 1}, 0};
  QuasiAffineExpr middle = QuasiAffineExpr::div(l, 6, DivKind::FloorDiv);
  middle += QuasiAffineExpr::div(l, 12, DivKind::FloorDiv, -2);
  const QuasiAffineMap f(dom, {QuasiAffineExpr::div(l, 12, DivKind::FloorDiv), middle,
                               QuasiAffineExpr::div(l, 6, DivKind::Mod)});
  CHECK(f.structural_class() == MapClass::MixedRadix);
  const InverseResult inv = reverse(f);
  REQUIRE(inv.kind() == InverseResult::Kind::Symbolic);
  CHECK(inv.image().equals_box(box({2, 2, 6})));
  CHECK(count_round_trip_failures(f, inv.map(), Exec::Serial) == 0);
}
