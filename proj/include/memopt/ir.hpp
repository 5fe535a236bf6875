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

// The loop-nest IR.
//
// A Program is a list of tensor declarations plus operator nests in execution
// order. Every nest is a perfect loop nest over an integer box whose body is a
// straight-line list of element-wise statements:
//
//   %v = load %t[f(i)]        store %t[f(i)] = %v
//   %v = add %a %b            memcopy %dst <- %src[g(i)]
//
// Value ids are local to a nest and assigned exactly once. Each tensor has at
// most one producing nest, so "the instructions defining a tensor" is always
// a well-defined set.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "memopt/affine.hpp"

namespace memopt::ir {

using affine::Index;
using affine::IntBox;
using affine::QuasiAffineMap;

enum class Policy { Cyclic, Blocked };

/// One tensor axis spread over `banks` banks. Cyclic puts index x in bank
/// x mod B; Blocked puts it in bank x * B / extent.
struct BankMapping {
  std::size_t axis = 0;
  Index banks = 1;
  Policy policy = Policy::Cyclic;

  Index bank_of(Index index, Index extent) const noexcept;
  bool operator==(const BankMapping&) const = default;
  auto operator<=>(const BankMapping&) const = default;
};

const char* to_string(Policy policy) noexcept;
std::optional<Policy> parse_policy(std::string_view text) noexcept;
std::string to_string(const BankMapping& mapping);

enum class Location { OffChip, OnChip };

/// InputOutput marks a passthrough tensor that is both supplied by the caller
/// and returned; it is never stored to.
enum class Origin { Intermediate, ModelInput, ModelOutput, InputOutput };

const char* to_string(Location location) noexcept;
const char* to_string(Origin origin) noexcept;

struct TensorDecl {
  std::string name;
  Index elem_size = 4;
  std::vector<Index> shape;
  Location location = Location::OnChip;
  std::optional<BankMapping> mapping;
  Origin origin = Origin::Intermediate;

  bool is_input() const noexcept { return origin == Origin::ModelInput || origin == Origin::InputOutput; }
  bool is_output() const noexcept { return origin == Origin::ModelOutput || origin == Origin::InputOutput; }
  bool on_chip() const noexcept { return location == Location::OnChip; }
  std::size_t rank() const noexcept { return shape.size(); }
  IntBox box() const { return IntBox::from_extents(shape); }
  std::uint64_t elements() const;
  std::uint64_t bytes() const { return elements() * static_cast<std::uint64_t>(elem_size); }

  bool operator==(const TensorDecl&) const = default;
};

enum class Opcode { Add, Mul, Max, Neg, Identity };

const char* to_string(Opcode op) noexcept;
std::optional<Opcode> parse_opcode(std::string_view text) noexcept;
std::size_t arity(Opcode op) noexcept;

struct Load {
  std::string result;
  std::string tensor;
  QuasiAffineMap access;
  bool operator==(const Load&) const = default;
};

struct Store {
  std::string tensor;
  QuasiAffineMap access;
  std::string value;
  bool operator==(const Store&) const = default;
};

struct Compute {
  std::string result;
  Opcode op = Opcode::Identity;
  std::vector<std::string> operands;
  bool operator==(const Compute&) const = default;
};

/// dst[i] = src[map(i)] for every point i of the nest box. The destination is
/// indexed by the loop point itself, so the box must equal dst's shape.
struct Memcopy {
  std::string dst;
  std::string src;
  QuasiAffineMap map;
  bool operator==(const Memcopy&) const = default;
};

using Statement = std::variant<Load, Store, Compute, Memcopy>;

enum class OpKind {
  Conv2d,
  Matmul,
  Pooling,
  Elementwise,
  Repeat,
  Tile,
  Split,
  Transpose,
  StridedSlice,
  Reshape,
  Copy,
  Other,
};

const char* to_string(OpKind kind) noexcept;
std::optional<OpKind> parse_op_kind(std::string_view text) noexcept;
/// Kinds whose nests only move data (repeat, tile, split, transpose,
/// strided_slice, reshape, copy).
bool is_copy_kind(OpKind kind) noexcept;

struct OperatorNest {
  std::string name;
  OpKind kind = OpKind::Other;
  IntBox box;
  std::vector<Statement> body;

  /// Distinct tensors read by the body (loads and memcopy sources), in order
  /// of first appearance.
  std::vector<std::string> read_tensors() const;
  /// Distinct tensors written by the body, in order of first appearance.
  std::vector<std::string> written_tensors() const;
  bool reads(std::string_view tensor) const;
  bool writes(std::string_view tensor) const;

  bool operator==(const OperatorNest&) const = default;
};

struct Program {
  std::vector<TensorDecl> tensors;
  std::vector<OperatorNest> nests;

  const TensorDecl* find_tensor(std::string_view name) const noexcept;
  TensorDecl* find_tensor(std::string_view name) noexcept;
  std::optional<std::size_t> find_nest(std::string_view name) const noexcept;
  /// Index of the nest that stores `tensor`, if any. With the single-producer
  /// rule this is unique on valid programs; the first one is returned.
  std::optional<std::size_t> producer(std::string_view tensor) const noexcept;
  /// Sum of byte sizes of Intermediate tensors.
  std::uint64_t intermediate_bytes() const;
  /// Returns `base` if unused, else the first `base.N` not taken by a tensor.
  std::string fresh_tensor_name(std::string_view base) const;
  std::string fresh_nest_name(std::string_view base) const;

  bool operator==(const Program&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

enum class Rule {
  DuplicateTensor,
  DuplicateNest,
  InvalidShape,
  InvalidElemSize,
  InvalidMapping,
  EmptyBody,
  UndefinedTensor,
  UndefinedValue,
  RedefinedValue,
  ArityMismatch,
  DomainMismatch,
  RankMismatch,
  OutOfBoundsAccess,
  StoreToInput,
  MultipleProducers,
  ReadBeforeWrite,
  MemcopyShape,
};

const char* to_string(Rule rule) noexcept;

struct Violation {
  Rule rule;
  std::string nest;                      // empty for declaration-level rules
  std::optional<std::size_t> statement;  // index into the nest body
  std::string message;
};

std::string to_string(const Violation& violation);

/// Checks every structural invariant. An empty result means the program is
/// well formed. Out-of-bounds accesses are found by interval bounds first and
/// confirmed with a witness point by enumeration.
std::vector<Violation> validate(const Program& program);

// ---------------------------------------------------------------------------
// Analyses

struct DependenceEdge {
  std::size_t producer;
  std::size_t consumer;
  std::string tensor;
  bool operator==(const DependenceEdge&) const = default;
};

/// Producer nest -> consumer nest edges, one per (consumer, tensor read),
/// ordered by consumer and then by first read within the consumer.
std::vector<DependenceEdge> dependence_edges(const Program& program);

struct CopyPair {
  std::size_t nest;
  std::size_t load;   // statement index of the load
  std::size_t store;  // statement index of the store
  bool operator==(const CopyPair&) const = default;
};

/// Every store whose value is directly the result of a load in the same nest,
/// in program order.
std::vector<CopyPair> find_copy_pairs(const Program& program);

}  // namespace memopt::ir
