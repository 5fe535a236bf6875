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

#include "doctest.h"
#include "memopt/generators.hpp"
#include "memopt/ir.hpp"
#include "support/programs.hpp"

using namespace memopt;
using ir::Rule;
using testing::broken_rules;
using testing::program;

namespace {

const char* kTranspose = R"(
tensor %x : 4x[2, 3] @dram input
tensor %y : 4x[3, 2] @dram output
nest t kind=transpose (i0 in 0..2, i1 in 0..3) {
  %v = load %x[i0, i1]
  store %y[i1, i0] = %v
}
)";

}  // namespace

TEST_SUITE_BEGIN("ir");

TEST_CASE("a well-formed transpose validates") {
  CHECK(ir::validate(program(kTranspose)).empty());
}

TEST_CASE("reading an undeclared tensor is one UndefinedTensor violation") {
  const auto p = program(R"(
tensor %y : 4x[4] @dram output
nest n kind=copy (i0 in 0..4) {
  %v = load %ghost[i0]
  store %y[i0] = %v
}
)");
  CHECK(broken_rules(p) == std::vector<Rule>{Rule::UndefinedTensor});
}

TEST_CASE("out-of-bounds access names a witness point") {
  const auto p = program(R"(
tensor %x : 4x[4] @dram input
tensor %y : 4x[4] @dram output
nest n kind=copy (i0 in 0..4) {
  %v = load %x[i0 + 1]
  store %y[i0] = %v
}
)");
  const auto v = ir::validate(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == Rule::OutOfBoundsAccess);
  CHECK(v[0].nest == "n");
  REQUIRE(v[0].statement.has_value());
  CHECK(*v[0].statement == 0);
  // the only offending point is i0 = 3, which reads x[4]
  CHECK(v[0].message.find("(3)") != std::string::npos);
  CHECK(v[0].message.find("(4)") != std::string::npos);
}

TEST_CASE("structural rules are each reported") {
  SUBCASE("store to a model input") {
    const auto p = program(R"(
tensor %x : 4x[2] @dram input
nest n kind=copy (i0 in 0..2) {
  %v = load %x[i0]
  store %x[i0] = %v
}
)");
    CHECK(broken_rules(p) == std::vector<Rule>{Rule::StoreToInput});
  }
  SUBCASE("two producers") {
    const auto p = program(R"(
tensor %x : 4x[2] @dram input
tensor %y : 4x[2] @dram output
nest a kind=copy (i0 in 0..2) {
  %v = load %x[i0]
  store %y[i0] = %v
}
nest b kind=copy (i0 in 0..2) {
  %v = load %x[i0]
  store %y[i0] = %v
}
)");
    CHECK(broken_rules(p) == std::vector<Rule>{Rule::MultipleProducers});
  }
  SUBCASE("read before the producer runs") {
    const auto p = program(R"(
tensor %x : 4x[2] @dram input
tensor %t : 4x[2] @sbuf
tensor %y : 4x[2] @dram output
nest a kind=copy (i0 in 0..2) {
  %v = load %t[i0]
  store %y[i0] = %v
}
nest b kind=copy (i0 in 0..2) {
  %v = load %x[i0]
  store %t[i0] = %v
}
)");
    CHECK(broken_rules(p) == std::vector<Rule>{Rule::ReadBeforeWrite});
  }
  SUBCASE("value used before definition and redefined") {
    const auto p = program(R"(
tensor %x : 4x[2] @dram input
tensor %y : 4x[2] @dram output
nest a kind=elementwise (i0 in 0..2) {
  %w = neg %v
  %v = load %x[i0]
  %v = neg %v
  store %y[i0] = %v
}
)");
    CHECK(broken_rules(p) == std::vector<Rule>{Rule::UndefinedValue, Rule::RedefinedValue});
  }
  SUBCASE("rank mismatch") {
    const auto p = program(R"(
tensor %x : 4x[2, 2] @dram input
tensor %y : 4x[2] @dram output
nest a kind=copy (i0 in 0..2) {
  %v = load %x[i0]
  store %y[i0] = %v
}
)");
    CHECK(broken_rules(p) == std::vector<Rule>{Rule::RankMismatch});
  }
  SUBCASE("memcopy box must match the destination") {
    const auto p = program(R"(
tensor %x : 4x[4] @sbuf input
tensor %y : 4x[4] @sbuf output
nest m kind=copy (i0 in 0..2) {
  memcopy %y <- %x
}
)");
    CHECK(broken_rules(p) == std::vector<Rule>{Rule::MemcopyShape});
  }
  SUBCASE("bad declarations") {
    ir::Program p;
    p.tensors.push_back({"a", 0, {2}, ir::Location::OnChip, std::nullopt, ir::Origin::ModelInput});
    p.tensors.push_back({"b", 4, {0}, ir::Location::OnChip, std::nullopt, ir::Origin::ModelInput});
    p.tensors.push_back({"b", 4, {2}, ir::Location::OffChip, ir::BankMapping{0, 4, ir::Policy::Cyclic},
                         ir::Origin::ModelInput});
    CHECK(broken_rules(p) ==
          std::vector<Rule>{Rule::InvalidElemSize, Rule::InvalidShape, Rule::DuplicateTensor, Rule::InvalidMapping});
  }
}

TEST_CASE("dependence edges") {
  SUBCASE("two-nest chain") {
    const auto p = program(R"(
tensor %x : 4x[2] @dram input
tensor %t1 : 4x[2] @sbuf
tensor %y : 4x[2] @dram output
nest A kind=copy (i0 in 0..2) {
  %v = load %x[i0]
  store %t1[i0] = %v
}
nest B kind=copy (i0 in 0..2) {
  %v = load %t1[i0]
  store %y[i0] = %v
}
)");
    CHECK(ir::dependence_edges(p) == std::vector<ir::DependenceEdge>{{0, 1, "t1"}});
  }
  SUBCASE("diamond") {
    const auto p = program(R"(
tensor %x : 4x[2] @dram input
tensor %a : 4x[2] @sbuf
tensor %b : 4x[2] @sbuf
tensor %c : 4x[2] @sbuf
tensor %y : 4x[2] @dram output
nest A kind=elementwise (i0 in 0..2) {
  %v = load %x[i0]
  store %a[i0] = %v
}
nest B kind=elementwise (i0 in 0..2) {
  %v = load %a[i0]
  %w = neg %v
  store %b[i0] = %w
}
nest C kind=elementwise (i0 in 0..2) {
  %v = load %a[i0]
  %w = neg %v
  store %c[i0] = %w
}
nest D kind=elementwise (i0 in 0..2) {
  %v = load %b[i0]
  %w = load %c[i0]
  %s = add %v %w
  store %y[i0] = %s
}
)");
    CHECK(ir::dependence_edges(p) ==
          std::vector<ir::DependenceEdge>{{0, 1, "a"}, {0, 2, "a"}, {1, 3, "b"}, {2, 3, "c"}});
  }
  SUBCASE("single nest") { CHECK(ir::dependence_edges(program(kTranspose)).empty()); }
}

TEST_CASE("copy pairs") {
  CHECK(ir::find_copy_pairs(program(kTranspose)) == std::vector<ir::CopyPair>{{0, 0, 1}});
  const auto computed = program(R"(
tensor %x : 4x[2] @dram input
tensor %y : 4x[2] @dram output
nest e kind=elementwise (i0 in 0..2) {
  %v = load %x[i0]
  %w = neg %v
  store %y[i0] = %w
}
)");
  CHECK(ir::find_copy_pairs(computed).empty());
}

TEST_CASE("the 124-copy generated chain has 124 pairs") {
  const auto p = gen::wavenet_analog(124, 1, 0);
  CHECK(ir::validate(p).empty());
  CHECK(ir::find_copy_pairs(p).size() == 124);
}

TEST_CASE("property: edges do not depend on value names") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ir::Program p = gen::wavenet_analog(12, 2, seed);
    const auto edges = ir::dependence_edges(p);
    for (auto& nest : p.nests) {
      for (auto& st : nest.body) {
        auto rename = [](std::string& id) { id = "renamed_" + id; };
        std::visit(
            [&](auto& s) {
              using S = std::decay_t<decltype(s)>;
              if constexpr (std::is_same_v<S, ir::Load>) rename(s.result);
              if constexpr (std::is_same_v<S, ir::Store>) rename(s.value);
              if constexpr (std::is_same_v<S, ir::Compute>) {
                rename(s.result);
                for (auto& o : s.operands) rename(o);
              }
            },
            st);
      }
    }
    CHECK(ir::validate(p).empty());
    CHECK(ir::dependence_edges(p) == edges);
  }
}

TEST_CASE("property: no pairs when every stored value is computed") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = gen::wavenet_analog(0, 0, seed);
    CHECK(ir::find_copy_pairs(p).empty());
  }
}

TEST_CASE("fresh names skip taken ones") {
  auto p = program(kTranspose);
  CHECK(p.fresh_tensor_name("z") == "z");
  CHECK(p.fresh_tensor_name("x") == "x.1");
  p.tensors.push_back({"x.1", 4, {1}, ir::Location::OnChip, std::nullopt, ir::Origin::Intermediate});
  CHECK(p.fresh_tensor_name("x") == "x.2");
  CHECK(p.fresh_nest_name("t") == "t.1");
}

TEST_SUITE_END();
