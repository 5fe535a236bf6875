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

// Line-oriented textual form of the IR.
//
//   # comment
//   tensor %x : 4x[2, 3] @dram input
//   tensor %y : 4x[3, 2] @sbuf bank(axis=0, banks=4, cyclic)
//   tensor %z : 4x[3, 2] @dram output
//
//   nest t kind=transpose (i0 in 0..2, i1 in 0..3) {
//     %v = load %x[i0, i1]
//     store %y[i1, i0] = %v
//   }
//   nest n kind=elementwise (i0 in 0..3, i1 in 0..2) {
//     %a = load %y[i0, i1]
//     %b = neg %a
//     store %z[i0, i1] = %b
//   }
//
// Loop ranges are half-open. Index expressions are sums of `k*i`, integer
// constants, and `(expr) floordiv k` / `(expr) mod k` whose operand has no
// floordiv/mod of its own; a weighted division is written `k*((e) mod d)`.
// A memcopy is `memcopy %dst <- %src` for an identity element map, or
// `memcopy %dst <- %src[exprs]` otherwise. The full grammar is in
// docs/grammar.md.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "memopt/ir.hpp"

namespace memopt::text {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_, column_;
  std::string message_;
};

/// Parses a program. Only syntax is checked here; run ir::validate for the
/// semantic rules.
ir::Program parse(std::string_view text);

/// Canonical text; parse(print(p)) == p for every program whose accesses
/// are symbolic. Throws std::logic_error on a tabulated access.
std::string print(const ir::Program& program);

/// Canonical text of one expression over variables named by `vars`.
std::string print_expr(const affine::QuasiAffineExpr& expr, const std::vector<std::string>& vars);

}  // namespace memopt::text
