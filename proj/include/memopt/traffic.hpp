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

// Byte accounting of memory movement.
//
// Every statement executes once per point of its nest's box, so it moves
// box cardinality x element size bytes, whether or not addresses repeat.
// Off-chip bytes are loads and stores touching off-chip tensors. On-chip copy
// bytes are data copies that never leave the chip: a store in a copy-kind
// nest whose value comes straight from an on-chip load into an on-chip
// tensor, and memcopies between on-chip tensors. Each copy is counted once,
// at its destination.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memopt/ir.hpp"

namespace memopt::traffic {

struct Options {
  /// Count every on-chip load and store (and both sides of an on-chip
  /// memcopy) instead of copies only.
  bool count_all_onchip = false;
  /// Bank-to-bank memcopies go through main memory: their bytes count as
  /// off-chip rather than on-chip copies.
  bool interbank_via_dram = false;
};

struct NestTraffic {
  std::string nest;
  std::uint64_t off_chip_bytes = 0;
  std::uint64_t on_chip_copy_bytes = 0;
  bool operator==(const NestTraffic&) const = default;
};

struct TrafficReport {
  std::uint64_t off_chip_bytes = 0;
  std::uint64_t on_chip_copy_bytes = 0;
  std::uint64_t intermediate_tensor_bytes = 0;
  std::uint64_t copy_pairs_total = 0;
  std::uint64_t copy_pairs_eliminated = 0;  // filled in by pipelines
  std::uint64_t memcopies_inserted = 0;     // memcopy statements present
  std::vector<NestTraffic> per_nest;
  bool operator==(const TrafficReport&) const = default;
};

TrafficReport account(const ir::Program& program, const Options& options = {});

struct FieldDelta {
  std::string field;
  std::uint64_t before = 0;
  std::uint64_t after = 0;
  std::int64_t delta = 0;             // after - before
  std::optional<double> percent;      // 100 * delta / before; nullopt if before == 0
  bool operator==(const FieldDelta&) const = default;
};

/// Absolute and relative change of every scalar counter, in declaration
/// order of TrafficReport.
std::vector<FieldDelta> compare(const TrafficReport& before, const TrafficReport& after);

}  // namespace memopt::traffic
