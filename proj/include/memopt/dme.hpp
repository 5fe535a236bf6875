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

// Data-movement elimination.
//
// A copy pair inside one nest,
//
//   %v = load %tl[fl(i)]
//   store %ts[fs(i)] = %v
//
// makes ts a relabelling of part of tl. When fs is a bijection from the nest
// box onto all of ts, every element ts[x] equals tl[fl(fs'(x))] with fs' the
// inverse of fs. Each downstream load ts[fl'(j)] is then rewritten to
// tl[gls(fl'(j))] with gls = fl o fs', and ts disappears together with the
// statements that only served to define it.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memopt/affine.hpp"
#include "memopt/ir.hpp"

namespace memopt::dme {

enum class SkipReason {
  NotInvertible,               // fs collides, or is too large to decide
  NotTotalCover,               // fs misses part of ts
  EscapingOutput,              // ts is returned to the caller
  CompositionUnrepresentable,  // an inverse or rewritten access needs a table
};

const char* to_string(SkipReason reason) noexcept;

struct EliminationRecord {
  std::string tensor;  // the store target ts
  std::string source;  // the load source tl
  std::string nest;    // the nest holding the pair
  std::uint64_t bytes = 0;
  std::size_t rewritten_loads = 0;
  std::optional<SkipReason> skipped;  // nullopt: eliminated
  std::string detail;                 // human-readable cause when skipped

  bool eliminated() const noexcept { return !skipped.has_value(); }
  bool operator==(const EliminationRecord&) const = default;
};

struct Options {
  affine::Limits limits;
};

struct PairResult {
  ir::Program program;  // unchanged when the pair was skipped
  EliminationRecord record;
};

/// Attempts one elimination. Never throws on a well-formed program; every
/// failure is reported through the record and leaves the program untouched.
PairResult try_eliminate_pair(const ir::Program& program, const ir::CopyPair& pair, const Options& options = {});

struct DmeResult {
  ir::Program program;
  /// One record per store target ever considered, in first-seen order, with
  /// the final outcome for that tensor.
  std::vector<EliminationRecord> records;
  /// Scans over a non-empty pair list; each one but the last eliminated
  /// exactly one tensor.
  std::size_t iterations = 0;

  std::size_t eliminated_count() const;
  std::uint64_t eliminated_bytes() const;
};

/// Repeats single eliminations in program order, restarting the scan after
/// every success, until a full scan eliminates nothing.
DmeResult run_dme(const ir::Program& program, const Options& options = {});

}  // namespace memopt::dme
