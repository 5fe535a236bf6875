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

// Synthetic benchmark programs.
//
// Both generators are pure functions of their arguments: the same parameters
// and seed give the same Program, and hence byte-identical printed text.

#pragma once

#include <cstddef>
#include <cstdint>

#include "memopt/ir.hpp"

namespace memopt::gen {

/// A chain of data-movement nests (transpose, strided slice, split, reshape,
/// repeat) interleaved with elementwise compute nests, reading one off-chip
/// input and ending in one off-chip output. Exactly `non_invertible` of the
/// `copy_pairs` copy nests store through a colliding map; every other copy
/// is built so that data-movement elimination can remove it. Throws
/// std::invalid_argument when non_invertible > copy_pairs.
ir::Program wavenet_analog(std::size_t copy_pairs, std::size_t non_invertible, std::uint64_t seed);

/// `blocks` conv2d nests over cubic tensors. Between consecutive convs the
/// result passes through `transposes_between` random axis permutations and a
/// residual add with the block input; the last conv is followed by the same
/// transposes and then written off-chip. With no transposes the last conv
/// writes the off-chip output directly. Throws std::invalid_argument when
/// blocks == 0.
ir::Program resnet_analog(std::size_t blocks, std::size_t transposes_between, std::uint64_t seed);

}  // namespace memopt::gen
