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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "memopt/bankmap.hpp"
#include "memopt/dme.hpp"
#include "memopt/generators.hpp"
#include "memopt/text.hpp"

using namespace memopt;
using text::ParseError;

namespace {

const char* kMinimal = R"(# a minimal transpose
tensor %x : 4x[2, 3] @dram input
tensor %y : 4x[3, 2] @dram output

nest t kind=transpose (i0 in 0..2, i1 in 0..3) {
  %v = load %x[i0, i1]
  store %y[i1, i0] = %v
}
)";

ParseError parse_error(const std::string& src) {
  try {
    text::parse(src);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error for:\n" << src);
  throw 0;
}

std::string expr_text(const affine::QuasiAffineExpr& e) { return text::print_expr(e, {"i0", "i1"}); }

}  // namespace

TEST_SUITE_BEGIN("text");

TEST_CASE("minimal transpose source") {
  const auto p = text::parse(kMinimal);
  CHECK(p.tensors.size() == 2);
  REQUIRE(p.nests.size() == 1);
  CHECK(p.nests[0].kind == ir::OpKind::Transpose);
  CHECK(p.nests[0].box == affine::IntBox({0, 0}, {2, 3}));
  CHECK(p.tensors[0].origin == ir::Origin::ModelInput);
  CHECK(p.tensors[1].location == ir::Location::OffChip);
  // canonical text drops the comment only
  const std::string canonical = text::print(p);
  CHECK(canonical == std::string(kMinimal).substr(std::string(kMinimal).find('\n') + 1));
  CHECK(text::parse(canonical) == p);
}

TEST_CASE("unbalanced braces are reported at the offending line") {
  SUBCASE("nest never closed") {
    const auto e = parse_error("tensor %x : 4x[2] @dram input output\nnest a kind=copy (i0 in 0..2) {\n"
                               "  %v = load %x[i0]\n");
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("not closed") != std::string::npos);
  }
  SUBCASE("next nest starts before the closing brace") {
    const auto e = parse_error("nest a kind=copy (i0 in 0..2) {\n  %v = identity %v\nnest b kind=copy () {\n}\n");
    CHECK(e.line() == 3);
    CHECK(e.message() == "missing '}' before this line");
  }
  SUBCASE("stray closing brace") {
    const auto e = parse_error("tensor %x : 4x[2] @dram input output\n}\n");
    CHECK(e.line() == 2);
    CHECK(e.column() == 1);
  }
}

TEST_CASE("syntax errors carry line and column") {
  auto e = parse_error("tensor %x : 4x[2, 3] @ram input\n");
  CHECK(e.line() == 1);
  CHECK(e.column() == 23);
  CHECK(std::string(e.what()).rfind("line 1:23: ", 0) == 0);

  e = parse_error(std::string(kMinimal) + "nest u kind=copy (i0 in 0..2) {\n  %v = load %x[i0 * i0]\n}\n");
  CHECK(e.line() == 10);
  CHECK(e.message() == "product of two non-constant expressions");

  e = parse_error("nest u kind=copy (i0 in 0..2) {\n  %v = load %x[((i0) mod 2) mod 2]\n}\n");
  CHECK(e.message() == "floordiv/mod may not nest");

  e = parse_error("nest u kind=copy (i0 in 0..2) {\n  %v = frobnicate %a\n}\n");
  CHECK(e.line() == 2);

  e = parse_error("nest u kind=blur (i0 in 0..2) {\n}\n");
  CHECK(e.message() == "unknown operator kind 'blur'");

  CHECK_THROWS_AS(text::parse("tensor %x : 4x[2] @dram input output extra\n"), ParseError);
  CHECK_THROWS_AS(text::parse("tensor %x : 4x[2] @sbuf bank(axis=0, banks=4, diagonal)\n"), ParseError);
}

TEST_CASE("semantic problems are left to validate") {
  const auto p = text::parse("nest u kind=copy (i0 in 0..2) {\n  %v = load %nothing[i0, i0, 7]\n}\n");
  CHECK_FALSE(ir::validate(p).empty());
}

TEST_CASE("expression syntax") {
  const auto p = text::parse(R"(
tensor %x : 4x[64] @sbuf input
tensor %y : 4x[4, 4] @sbuf bank(axis=1, banks=2, blocked) output
nest n kind=other (a in 1..5, b in -2..2) {
  %v = load %x[3*((4*a + b + 2) floordiv 5) + (a - 1) mod 3 - -2]
  memcopy %y <- %x[2*a - b, (a + b) floordiv 2]
  store %y[a - 1, b + 2] = %v
}
)");
  REQUIRE(p.nests.size() == 1);
  const auto& nest = p.nests[0];
  CHECK(nest.box == affine::IntBox({1, -2}, {5, 2}));
  const auto& load = std::get<ir::Load>(nest.body[0]);
  // evaluate at a = 3, b = 0: 3*(14 floordiv 5) + 2 mod 3 + 2 = 6 + 2 + 2
  const std::vector<affine::Index> pt{3, 0};
  CHECK(load.access.evaluate(pt) == affine::Point{10});
  const auto* y = p.find_tensor("y");
  CHECK(y->mapping == ir::BankMapping{1, 2, ir::Policy::Blocked});
  CHECK(y->origin == ir::Origin::ModelOutput);
  CHECK(text::parse(text::print(p)) == p);
}

TEST_CASE("printing expressions") {
  using affine::DivKind;
  using affine::LinearExpr;
  using affine::QuasiAffineExpr;
  QuasiAffineExpr e = QuasiAffineExpr::var(2, 0, 3, -1);
  e += QuasiAffineExpr::var(2, 1, -1);
  CHECK(expr_text(e) == "3*i0 - i1 - 1");
  CHECK(expr_text(QuasiAffineExpr::constant(2, -4)) == "-4");
  LinearExpr inner = LinearExpr::var(2, 0, 4);
  inner += LinearExpr::var(2, 1);
  CHECK(expr_text(QuasiAffineExpr::div(inner, 3, DivKind::Mod)) == "(4*i0 + i1) mod 3");
  CHECK(expr_text(QuasiAffineExpr::div(inner, 3, DivKind::FloorDiv, -2)) == "-2*((4*i0 + i1) floordiv 3)");
}

TEST_CASE("tabulated accesses cannot be printed") {
  ir::Program p;
  affine::PointTable table;
  table.in_rank = table.out_rank = 1;
  table.rows = 1;
  table.keys = {0};
  table.values = {0};
  const affine::IntBox box({0}, {1});
  p.tensors.push_back({"x", 4, {1}, ir::Location::OffChip, std::nullopt, ir::Origin::InputOutput});
  p.nests.push_back({"n", ir::OpKind::Copy, box,
                     {ir::Load{"v", "x", affine::QuasiAffineMap::tabulated(box, table)}}});
  CHECK_THROWS_AS(text::print(p), std::logic_error);
}

TEST_CASE("property: generated programs round-trip and print stably") {
  const auto reg = bankmap::AnchorRegistry::defaults();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CAPTURE(seed);
    ir::Program p = seed % 2 ? gen::wavenet_analog(seed % 17, seed % 3 == 0 ? 1 : 0, seed)
                             : gen::resnet_analog(1 + seed % 4, seed % 4, seed);
    if (seed % 3 == 1) p = dme::run_dme(p).program;
    if (seed % 5 == 2) p = bankmap::run_global(p, reg).program;
    const std::string once = text::print(p);
    const ir::Program back = text::parse(once);
    CHECK(back == p);
    CHECK(text::print(back) == once);
  }
}

TEST_CASE("the generated 124-copy chain reparses with all its copy nests") {
  const auto p = gen::wavenet_analog(124, 1, 0);
  const auto back = text::parse(text::print(p));
  CHECK(back == p);
  std::size_t copies = 0;
  for (const auto& n : back.nests) copies += ir::is_copy_kind(n.kind) ? 1 : 0;
  CHECK(copies == 124);
}

TEST_SUITE_END();
