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

// Reference interpreter: the correctness oracle for every pass.
//
// Payloads are 64-bit integers with wrap-around arithmetic, so two programs
// that move the same values around compare bit-exactly. Every buffer tracks
// which cells were written; reading an unwritten intermediate cell is an
// error rather than a silent zero.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "memopt/ir.hpp"
#include "memopt/parallel.hpp"

namespace memopt::interp {

using Value = std::int64_t;

struct Buffer {
  std::vector<ir::Index> shape;
  std::vector<Value> data;
  std::vector<std::uint8_t> written;

  static Buffer zeros(std::vector<ir::Index> shape);
  /// Fully written buffer holding `values` in row-major order.
  static Buffer of(std::vector<ir::Index> shape, std::vector<Value> values);

  bool operator==(const Buffer&) const = default;
};

using TensorStore = std::map<std::string, Buffer>;

enum class ErrorKind { PoisonRead, UnknownOpcode, MissingInput, ShapeMismatch, InvalidProgram };

const char* to_string(ErrorKind kind) noexcept;

class InterpError : public std::runtime_error {
 public:
  InterpError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Executes the program and returns its output tensors (ModelOutput and
/// InputOutput). `inputs` must hold exactly the input tensors with their
/// declared shapes. Nests run in order, each box in lexicographic order.
TensorStore run(const ir::Program& program, const TensorStore& inputs);

/// Deterministic pseudo-random contents for every input tensor, drawn
/// uniformly from [-1000, 1000].
TensorStore random_inputs(const ir::Program& program, std::uint64_t seed);

struct Counterexample {
  std::size_t trial = 0;
  std::uint64_t seed = 0;  // seed passed to random_inputs for this trial
  std::string tensor;
  std::vector<ir::Index> index;
  std::optional<Value> lhs;  // nullopt: cell not written
  std::optional<Value> rhs;
  std::string note;  // set when one side failed to run or outputs differ in shape
};

struct Equivalence {
  bool equal = true;
  std::optional<Counterexample> counterexample;  // the lowest failing trial
};

/// Seed used for trial `t` of a comparison started with `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) noexcept;

/// Runs both programs on `trials` random input sets and compares outputs.
/// Trials are independent; with Exec::Parallel they run concurrently and the
/// reported counterexample is still the one from the lowest failing trial.
/// Run errors in `p1` propagate; an error in `p2` alone is a counterexample.
Equivalence equivalent(const ir::Program& p1, const ir::Program& p2, std::size_t trials, std::uint64_t seed,
                       Exec exec = Exec::Parallel);

}  // namespace memopt::interp
