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

#pragma once

#include <optional>
#include <vector>

#include "memopt/affine.hpp"

namespace memopt::affine::detail {

// One output coordinate that is a digit of a channel value:
//   y = offset + (value floordiv low) mod (high / low)   (high == 0: no mod)
struct Digit {
  std::size_t output = 0;
  Index low = 1;
  Index high = 0;
  Index offset = 0;
};

// A linear form of the domain variables that the outputs carry either
// verbatim (one output) or as a complete set of mixed-radix digits.
struct Channel {
  LinearExpr value;          // over domain variables
  LinearExpr recovery;       // over output coordinates; equals value on the image
  std::vector<std::size_t> vars;  // live variables, ascending |coefficient|
  std::vector<Digit> digits;      // empty for a verbatim output
  std::size_t verbatim_output = 0;
};

struct Decomposition {
  std::vector<Channel> channels;
  std::vector<std::size_t> constant_outputs;
  bool has_digits = false;
  bool all_single_var = true;
  bool all_unit = true;
};

// Succeeds iff the symbolic map is an injective composition of
// permutation/stride/shift and mixed-radix flatten/unflatten patterns.
std::optional<Decomposition> decompose(const QuasiAffineMap& map);

MapClass classify_symbolic(const QuasiAffineMap& map);

}  // namespace memopt::affine::detail
