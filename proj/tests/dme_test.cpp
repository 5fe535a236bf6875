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

#include <algorithm>

#include "doctest.h"
#include "memopt/dme.hpp"
#include "memopt/generators.hpp"
#include "memopt/interp.hpp"
#include "memopt/traffic.hpp"
#include "support/programs.hpp"

using namespace memopt;
using dme::SkipReason;
using testing::program;

namespace {

const ir::Load& first_load(const ir::Program& p, const std::string& nest) {
  const auto n = p.find_nest(nest);
  REQUIRE(n.has_value());
  for (const auto& st : p.nests[*n].body) {
    if (const auto* l = std::get_if<ir::Load>(&st)) return *l;
  }
  FAIL("nest has no load");
  throw 0;
}

std::string access_text(const ir::Load& l) {
  std::vector<std::string> vars;
  for (std::size_t k = 0; k < l.access.in_rank(); ++k) vars.push_back("i" + std::to_string(k));
  std::string out;
  for (const auto& e : l.access.outputs()) out += (out.empty() ? "" : ", ") + text::print_expr(e, vars);
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("dme");

TEST_CASE("transpose copy is removed and its consumer reads the source transposed") {
  const auto p = program(R"(
tensor %t0 : 4x[2, 3] @dram input
tensor %t1 : 4x[3, 2] @sbuf
tensor %y : 4x[3, 2] @dram output
nest tr kind=transpose (i0 in 0..2, i1 in 0..3) {
  %v = load %t0[i0, i1]
  store %t1[i1, i0] = %v
}
nest use kind=elementwise (i0 in 0..3, i1 in 0..2) {
  %v = load %t1[i0, i1]
  %w = neg %v
  store %y[i0, i1] = %w
}
)");
  const auto r = dme::try_eliminate_pair(p, ir::find_copy_pairs(p).at(0));
  CHECK(r.record.eliminated());
  CHECK(r.record.tensor == "t1");
  CHECK(r.record.source == "t0");
  CHECK(r.record.bytes == 24);
  CHECK(r.record.rewritten_loads == 1);
  CHECK(r.program.find_tensor("t1") == nullptr);
  CHECK_FALSE(r.program.find_nest("tr").has_value());
  const auto& l = first_load(r.program, "use");
  CHECK(l.tensor == "t0");
  CHECK(access_text(l) == "i1, i0");
  CHECK(ir::validate(r.program).empty());
  CHECK(interp::equivalent(p, r.program, 3, 0).equal);
}

TEST_CASE("strided slice that covers its target is removed") {
  const auto p = program(R"(
tensor %t0 : 4x[8] @dram input
tensor %t1 : 4x[4] @sbuf
tensor %y : 4x[4] @dram output
nest s kind=strided_slice (i0 in 0..4) {
  %v = load %t0[2*i0]
  store %t1[i0] = %v
}
nest use kind=elementwise (i0 in 0..4) {
  %v = load %t1[i0]
  %w = neg %v
  store %y[i0] = %w
}
)");
  const auto r = dme::run_dme(p);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].eliminated());
  const auto& l = first_load(r.program, "use");
  CHECK(l.tensor == "t0");
  CHECK(access_text(l) == "2*i0");
  const interp::TensorStore in{{"t0", testing::ramp({8})}};
  CHECK(interp::run(r.program, in) == interp::run(p, in));
  CHECK(interp::run(p, in).at("y") == interp::Buffer::of({4}, {0, -2, -4, -6}));
}

TEST_CASE("skip reasons") {
  SUBCASE("colliding store") {
    const auto p = program(R"(
tensor %x : 4x[4] @dram input
tensor %t : 4x[4] @sbuf
tensor %y : 4x[4] @dram output
nest c kind=copy (i0 in 0..2, i1 in 0..3) {
  %v = load %x[i0 + i1]
  store %t[i0 + i1] = %v
}
nest use kind=elementwise (i0 in 0..4) {
  %v = load %t[i0]
  %w = neg %v
  store %y[i0] = %w
}
)");
    const auto r = dme::run_dme(p);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].skipped == SkipReason::NotInvertible);
    CHECK(r.program == p);
  }
  SUBCASE("partial cover") {
    const auto p = program(R"(
tensor %x : 4x[4] @dram input
tensor %t : 4x[8] @sbuf
tensor %y : 4x[4] @dram output
nest c kind=copy (i0 in 0..4) {
  %v = load %x[i0]
  store %t[2*i0] = %v
}
nest use kind=elementwise (i0 in 0..4) {
  %v = load %t[2*i0]
  %w = neg %v
  store %y[i0] = %w
}
)");
    const auto r = dme::run_dme(p);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].skipped == SkipReason::NotTotalCover);
  }
  SUBCASE("store to a model output") {
    const auto p = program(R"(
tensor %x : 4x[2, 3] @dram input
tensor %y : 4x[3, 2] @dram output
nest t kind=transpose (i0 in 0..2, i1 in 0..3) {
  %v = load %x[i0, i1]
  store %y[i1, i0] = %v
}
)");
    const auto r = dme::run_dme(p);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].skipped == SkipReason::EscapingOutput);
    CHECK(r.program == p);
  }
  SUBCASE("store whose inverse is only a table") {
    const auto p = program(R"(
tensor %x : 4x[6] @dram input
tensor %t : 4x[6] @sbuf
tensor %y : 4x[6] @dram output
nest b kind=copy (i0 in 0..6) {
  %v = load %x[i0]
  store %t[2*((i0) mod 3) + (i0) floordiv 3] = %v
}
nest c kind=elementwise (i0 in 0..6) {
  %v = load %t[i0]
  %w = neg %v
  store %y[i0] = %w
}
)");
    const auto r = dme::run_dme(p);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].skipped == SkipReason::CompositionUnrepresentable);
    CHECK_FALSE(r.records[0].detail.empty());
  }
}

TEST_CASE("three chained transposes collapse into one composed access") {
  // p1 = (1,2,0), p2 = (2,0,1), p3 = (0,2,1) applied in turn to axis order
  const auto p = program(R"(
tensor %x : 4x[2, 3, 4] @dram input
tensor %a : 4x[3, 4, 2] @sbuf
tensor %b : 4x[2, 3, 4] @sbuf
tensor %c : 4x[2, 4, 3] @sbuf
tensor %y : 4x[2, 4, 3] @dram output
nest t1 kind=transpose (i0 in 0..2, i1 in 0..3, i2 in 0..4) {
  %v = load %x[i0, i1, i2]
  store %a[i1, i2, i0] = %v
}
nest t2 kind=transpose (i0 in 0..3, i1 in 0..4, i2 in 0..2) {
  %v = load %a[i0, i1, i2]
  store %b[i2, i0, i1] = %v
}
nest t3 kind=transpose (i0 in 0..2, i1 in 0..3, i2 in 0..4) {
  %v = load %b[i0, i1, i2]
  store %c[i0, i2, i1] = %v
}
nest use kind=elementwise (i0 in 0..2, i1 in 0..4, i2 in 0..3) {
  %v = load %c[i0, i1, i2]
  %w = neg %v
  store %y[i0, i1, i2] = %w
}
)");
  const auto r = dme::run_dme(p);
  CHECK(r.eliminated_count() == 3);
  CHECK(r.program.nests.size() == 1);
  // c[i0, i1, i2] = b[i0, i2, i1] = a[i2, i1, i0] = x[i0, i2, i1]
  const auto& l = first_load(r.program, "use");
  CHECK(l.tensor == "x");
  CHECK(access_text(l) == "i0, i2, i1");
  CHECK(interp::equivalent(p, r.program, 4, 9).equal);
}

TEST_CASE("program without copy pairs is unchanged") {
  const auto p = gen::wavenet_analog(0, 0, 4);
  const auto r = dme::run_dme(p);
  CHECK(r.program == p);
  CHECK(r.records.empty());
  CHECK(r.iterations == 0);
}

TEST_CASE("generated chains: 123 of 124, and nothing when every copy collides") {
  const auto r = dme::run_dme(gen::wavenet_analog(124, 1, 0));
  CHECK(r.eliminated_count() == 123);
  CHECK(r.records.size() == 124);
  const auto all = dme::run_dme(gen::wavenet_analog(5, 5, 11));
  CHECK(all.eliminated_count() == 0);
  CHECK(all.records.size() == 5);
}

TEST_CASE("property: elimination invariants over generated programs") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t pairs = seed % 13;
    const std::size_t colliding = pairs == 0 ? 0 : seed % (pairs + 1) % 3;
    const ir::Program p = seed % 4 == 3 ? gen::resnet_analog(1 + seed % 3, seed % 4, seed)
                                        : gen::wavenet_analog(pairs, colliding, seed);
    CAPTURE(seed);
    const dme::DmeResult r = dme::run_dme(p);
    CHECK(ir::validate(r.program).empty());
    CHECK(interp::equivalent(p, r.program, 3, seed).equal);
    if (seed % 4 != 3) CHECK(r.eliminated_count() == pairs - colliding);
    // termination and idempotence
    CHECK(r.iterations <= p.tensors.size());
    const dme::DmeResult again = dme::run_dme(r.program);
    CHECK(again.program == r.program);
    CHECK(again.eliminated_count() == 0);
    // footprint identity and traffic conservation
    const auto before = traffic::account(p), after = traffic::account(r.program);
    CHECK(before.intermediate_tensor_bytes - after.intermediate_tensor_bytes == r.eliminated_bytes());
    CHECK(after.off_chip_bytes <= before.off_chip_bytes);
    // outputs survive
    for (const auto& t : p.tensors) {
      if (t.is_output()) CHECK(r.program.find_tensor(t.name) != nullptr);
    }
    for (const auto& rec : r.records) CHECK(rec.eliminated() != rec.skipped.has_value());
  }
}

TEST_SUITE_END();
