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

// Memory-bank mapping for on-chip tensors.
//
// Anchored operators (conv2d, matmul, pooling by default) dictate which axis
// of each operand is spread over the banks. The global pass seeds those
// requirements and pushes them through unanchored nests along the axis that
// the loop nest carries unchanged from input to output, forward and
// backward, until nothing changes. Tensors that end up with two different
// requirements get a memcopy into a second, differently banked tensor.
//
// The local baseline skips propagation: every nest picks its operands'
// mappings on its own and a memcopy appears on every edge where producer and
// consumer disagree.
//
// Only on-chip tensors take part; off-chip tensors are never banked.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "memopt/ir.hpp"

namespace memopt::bankmap {

using ir::BankMapping;
using ir::OpKind;
using ir::Policy;

/// Axis and policy demanded for one operand role. The bank count is a
/// property of the target, not of the operator, and is supplied separately.
struct Template {
  std::size_t axis = 0;
  Policy policy = Policy::Cyclic;
  bool operator==(const Template&) const = default;
};

/// Operand roles are "load<k>" and "store<k>": the k-th distinct tensor read
/// (or written) by the nest, counted in order of first appearance.
class AnchorRegistry {
 public:
  /// conv2d: load0 axis 2, load1 axis 0, store0 axis 2; matmul: load0 axis 1,
  /// load1 axis 0, store0 axis 1; pooling: load0 axis 2, store0 axis 2; all
  /// Cyclic.
  static AnchorRegistry defaults();
  /// Parses the line-based config format:
  ///
  ///   # comment
  ///   conv2d.load0 = 2 cyclic
  ///
  /// Throws std::invalid_argument naming the line on malformed input.
  static AnchorRegistry parse(std::string_view text);
  static AnchorRegistry load_file(const std::string& path);

  void set(OpKind kind, const std::string& role, Template t);
  bool anchored(OpKind kind) const noexcept;
  std::optional<Template> lookup(OpKind kind, std::string_view role) const;
  std::string to_text() const;

  bool operator==(const AnchorRegistry&) const = default;

 private:
  std::map<OpKind, std::map<std::string, Template, std::less<>>> templates_;
};

std::string load_role(std::size_t k);
std::string store_role(std::size_t k);

/// Mapping every anchored operand of `nest` must have, keyed by tensor name.
/// A tensor used in two roles with different templates keeps the first.
std::vector<std::pair<std::string, BankMapping>> anchor_requirements(const ir::OperatorNest& nest,
                                                                     const AnchorRegistry& registry, ir::Index banks);

// ---------------------------------------------------------------------------
// Lattice

class Lattice {
 public:
  enum class Kind { Unknown, Exactly, Conflict };

  /// Unknown.
  Lattice() = default;

  static Lattice unknown() { return {}; }
  static Lattice exactly(BankMapping m) { return Lattice(Kind::Exactly, m); }
  static Lattice conflict() { return Lattice(Kind::Conflict, {}); }

  Kind kind() const noexcept { return kind_; }
  bool is_unknown() const noexcept { return kind_ == Kind::Unknown; }
  bool is_exactly() const noexcept { return kind_ == Kind::Exactly; }
  bool is_conflict() const noexcept { return kind_ == Kind::Conflict; }
  /// Only meaningful for Exactly.
  const BankMapping& mapping() const noexcept { return mapping_; }

  /// Least upper bound: Unknown is the identity, equal mappings stay, and
  /// anything else is Conflict.
  friend Lattice join(const Lattice& a, const Lattice& b);

  bool operator==(const Lattice& o) const noexcept {
    return kind_ == o.kind_ && (kind_ != Kind::Exactly || mapping_ == o.mapping_);
  }

 private:
  Lattice(Kind k, BankMapping m) : kind_(k), mapping_(m) {}
  Kind kind_ = Kind::Unknown;
  BankMapping mapping_{};
};

std::string to_string(const Lattice& value);

/// One source of a requirement on a tensor, used to explain conflicts.
struct Requirement {
  BankMapping mapping;
  std::string origin;  // "anchor conv1.load0" or "forward through t1 (nest)"
  bool operator==(const Requirement&) const = default;
};

/// Why a tensor is in Conflict. Requirements are sorted and reduced to one
/// per distinct mapping, so the diagnostic does not depend on visit order.
struct ConflictInfo {
  std::string tensor;
  std::vector<Requirement> requirements;
  std::vector<std::string> inherited_from;  // Conflict tensors flowing in
  bool operator==(const ConflictInfo&) const = default;
};

struct MappingState {
  std::map<std::string, Lattice> values;  // one entry per on-chip tensor
  std::map<std::string, BankMapping> anchors;  // seeded tensors
  std::size_t updates = 0;  // lattice changes performed by propagate

  const Lattice& at(const std::string& tensor) const;
  /// Same lattice values, ignoring bookkeeping.
  bool same_values(const MappingState& other) const { return values == other.values; }
};

class BankmapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  ir::Index banks = 4;
  Policy default_policy = Policy::Cyclic;

  BankMapping default_mapping() const { return {0, banks, default_policy}; }
};

/// Seeds each on-chip operand of every anchored nest with its template.
/// Throws BankmapError on a template axis that the operand does not have.
MappingState seed_anchors(const ir::Program& program, const AnchorRegistry& registry, const Options& options = {});

enum class Direction { Forward, Backward };

struct Transfer {
  std::optional<BankMapping> mapping;  // nullopt: blocked
  std::string blocked_reason;
};

/// Traces the banked axis of `from` to a loop dimension and on to the axis of
/// `to` driven by the same dimension. Forward goes from a loaded tensor to a
/// stored one; backward the other way. Blocked unless every access of both
/// tensors drives/reads the axis through one loop variable with coefficient
/// +-1 that appears in no other coordinate.
Transfer transfer(const BankMapping& mapping, const ir::OperatorNest& nest, const std::string& from,
                  const std::string& to, Direction direction);

/// A directed propagation step through one unanchored nest.
struct Arc {
  std::size_t nest;
  std::string from;
  std::string to;
  Direction direction;
  bool operator==(const Arc&) const = default;
};

/// True for a nest made only of memcopy statements. Such a nest converts
/// between layouts, so it neither carries a mapping from one tensor to the
/// other nor constrains the layout of what it reads.
bool is_rebanking(const ir::OperatorNest& nest);

/// All arcs of the program in a fixed order: for each unanchored nest that is
/// not a rebanking nest, every (read, written) on-chip pair forward, then
/// every (written, read) backward.
std::vector<Arc> propagation_arcs(const ir::Program& program, const AnchorRegistry& registry);

struct PropagateOptions {
  /// Initial worklist order as a permutation of propagation_arcs(); empty
  /// means natural order. The fixpoint does not depend on it.
  std::vector<std::size_t> arc_order;
};

/// Worklist iteration to the least fixpoint. Conflict is sticky and flows on
/// through any nest where the axis correspondence exists at all, which keeps
/// the transfer monotone and so the result independent of the visit order.
MappingState propagate(const ir::Program& program, const AnchorRegistry& registry, MappingState seeded,
                       const PropagateOptions& popts = {});

/// Explains every Conflict tensor of a fixpoint state.
std::vector<ConflictInfo> diagnose(const ir::Program& program, const AnchorRegistry& registry,
                                   const MappingState& state, const Options& options = {});

struct Insertion {
  std::string tensor;       // the tensor as produced
  std::string copy;         // the differently banked copy
  BankMapping mapping;      // mapping of the copy
  std::vector<std::string> consumers;
  std::string nest;         // the inserted memcopy nest
  std::uint64_t bytes = 0;  // bytes moved by the memcopy
  bool operator==(const Insertion&) const = default;
};

struct InsertionReport {
  std::vector<Insertion> insertions;
  std::vector<ConflictInfo> conflicts;  // empty for the local baseline
  std::uint64_t memcopy_bytes() const;
};

struct MapResult {
  ir::Program program;
  InsertionReport report;
};

/// Turns a fixpoint state into final mappings and memcopies. Tensors that
/// are not in Conflict keep their lattice mapping (or the default) and need
/// no copy. A Conflict tensor is stored with its producer's template if the
/// producer is anchored, else with the requirement shared by most anchored
/// consumers, else with the forward image of its producer's first decided
/// input. Each consumer then states the layout it reads in: an anchored one
/// its template, an unanchored one the backward image of its output's
/// layout. Consumers that disagree with the stored layout read a copy,
/// shared among consumers with the same requirement and inserted before the
/// first of them.
MapResult materialize(const ir::Program& program, const AnchorRegistry& registry, const MappingState& state,
                      const Options& options = {});

/// seed_anchors + propagate + materialize.
MapResult run_global(const ir::Program& program, const AnchorRegistry& registry, const Options& options = {});

/// Per-nest assignment without propagation: every nest takes its template
/// for each on-chip operand, or the default, and a copy is added on every
/// dependence edge whose two ends disagree.
MapResult run_local_baseline(const ir::Program& program, const AnchorRegistry& registry, const Options& options = {});

}  // namespace memopt::bankmap
