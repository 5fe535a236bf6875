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

#include "memopt/ir.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace memopt::ir {

Index BankMapping::bank_of(Index index, Index extent) const noexcept {
  if (policy == Policy::Cyclic) return affine::floor_mod(index, banks);
  return extent > 0 ? index * banks / extent : 0;
}

const char* to_string(Policy policy) noexcept {
  return policy == Policy::Cyclic ? "cyclic" : "blocked";
}

std::optional<Policy> parse_policy(std::string_view text) noexcept {
  if (text == "cyclic") return Policy::Cyclic;
  if (text == "blocked") return Policy::Blocked;
  return std::nullopt;
}

std::string to_string(const BankMapping& mapping) {
  std::ostringstream os;
  os << "axis=" << mapping.axis << " banks=" << mapping.banks << ' ' << to_string(mapping.policy);
  return os.str();
}

const char* to_string(Location location) noexcept {
  return location == Location::OffChip ? "dram" : "sbuf";
}

const char* to_string(Origin origin) noexcept {
  switch (origin) {
    case Origin::Intermediate: return "intermediate";
    case Origin::ModelInput: return "input";
    case Origin::ModelOutput: return "output";
    case Origin::InputOutput: return "input output";
  }
  return "?";
}

std::uint64_t TensorDecl::elements() const {
  std::uint64_t n = 1;
  for (Index e : shape) n *= static_cast<std::uint64_t>(std::max<Index>(e, 0));
  return n;
}

namespace {

constexpr std::array<std::pair<Opcode, std::string_view>, 5> kOpcodes{{
    {Opcode::Add, "add"},
    {Opcode::Mul, "mul"},
    {Opcode::Max, "max"},
    {Opcode::Neg, "neg"},
    {Opcode::Identity, "identity"},
}};

constexpr std::array<std::pair<OpKind, std::string_view>, 12> kKinds{{
    {OpKind::Conv2d, "conv2d"},
    {OpKind::Matmul, "matmul"},
    {OpKind::Pooling, "pooling"},
    {OpKind::Elementwise, "elementwise"},
    {OpKind::Repeat, "repeat"},
    {OpKind::Tile, "tile"},
    {OpKind::Split, "split"},
    {OpKind::Transpose, "transpose"},
    {OpKind::StridedSlice, "strided_slice"},
    {OpKind::Reshape, "reshape"},
    {OpKind::Copy, "copy"},
    {OpKind::Other, "other"},
}};

}  // namespace

const char* to_string(Opcode op) noexcept {
  for (const auto& [o, s] : kOpcodes) {
    if (o == op) return s.data();
  }
  return "?";
}

std::optional<Opcode> parse_opcode(std::string_view text) noexcept {
  for (const auto& [o, s] : kOpcodes) {
    if (s == text) return o;
  }
  return std::nullopt;
}

std::size_t arity(Opcode op) noexcept {
  switch (op) {
    case Opcode::Add:
    case Opcode::Mul:
    case Opcode::Max: return 2;
    case Opcode::Neg:
    case Opcode::Identity: return 1;
  }
  return 0;
}

const char* to_string(OpKind kind) noexcept {
  for (const auto& [k, s] : kKinds) {
    if (k == kind) return s.data();
  }
  return "?";
}

std::optional<OpKind> parse_op_kind(std::string_view text) noexcept {
  for (const auto& [k, s] : kKinds) {
    if (s == text) return k;
  }
  return std::nullopt;
}

bool is_copy_kind(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::Repeat:
    case OpKind::Tile:
    case OpKind::Split:
    case OpKind::Transpose:
    case OpKind::StridedSlice:
    case OpKind::Reshape:
    case OpKind::Copy: return true;
    default: return false;
  }
}

namespace {

void add_unique(std::vector<std::string>& out, const std::string& name) {
  if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
}

}  // namespace

std::vector<std::string> OperatorNest::read_tensors() const {
  std::vector<std::string> out;
  for (const auto& st : body) {
    if (const auto* l = std::get_if<Load>(&st)) add_unique(out, l->tensor);
    if (const auto* m = std::get_if<Memcopy>(&st)) add_unique(out, m->src);
  }
  return out;
}

std::vector<std::string> OperatorNest::written_tensors() const {
  std::vector<std::string> out;
  for (const auto& st : body) {
    if (const auto* s = std::get_if<Store>(&st)) add_unique(out, s->tensor);
    if (const auto* m = std::get_if<Memcopy>(&st)) add_unique(out, m->dst);
  }
  return out;
}

bool OperatorNest::reads(std::string_view tensor) const {
  return std::any_of(body.begin(), body.end(), [&](const Statement& st) {
    if (const auto* l = std::get_if<Load>(&st)) return l->tensor == tensor;
    if (const auto* m = std::get_if<Memcopy>(&st)) return m->src == tensor;
    return false;
  });
}

bool OperatorNest::writes(std::string_view tensor) const {
  return std::any_of(body.begin(), body.end(), [&](const Statement& st) {
    if (const auto* s = std::get_if<Store>(&st)) return s->tensor == tensor;
    if (const auto* m = std::get_if<Memcopy>(&st)) return m->dst == tensor;
    return false;
  });
}

const TensorDecl* Program::find_tensor(std::string_view name) const noexcept {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

TensorDecl* Program::find_tensor(std::string_view name) noexcept {
  for (auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::optional<std::size_t> Program::find_nest(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < nests.size(); ++i) {
    if (nests[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Program::producer(std::string_view tensor) const noexcept {
  for (std::size_t i = 0; i < nests.size(); ++i) {
    if (nests[i].writes(tensor)) return i;
  }
  return std::nullopt;
}

std::uint64_t Program::intermediate_bytes() const {
  std::uint64_t total = 0;
  for (const auto& t : tensors) {
    if (t.origin == Origin::Intermediate) total += t.bytes();
  }
  return total;
}

std::string Program::fresh_tensor_name(std::string_view base) const {
  std::string name(base);
  for (int k = 1; find_tensor(name) != nullptr; ++k) name = std::string(base) + "." + std::to_string(k);
  return name;
}

std::string Program::fresh_nest_name(std::string_view base) const {
  std::string name(base);
  for (int k = 1; find_nest(name).has_value(); ++k) name = std::string(base) + "." + std::to_string(k);
  return name;
}

// ---------------------------------------------------------------------------
// Validation

const char* to_string(Rule rule) noexcept {
  switch (rule) {
    case Rule::DuplicateTensor: return "DuplicateTensor";
    case Rule::DuplicateNest: return "DuplicateNest";
    case Rule::InvalidShape: return "InvalidShape";
    case Rule::InvalidElemSize: return "InvalidElemSize";
    case Rule::InvalidMapping: return "InvalidMapping";
    case Rule::EmptyBody: return "EmptyBody";
    case Rule::UndefinedTensor: return "UndefinedTensor";
    case Rule::UndefinedValue: return "UndefinedValue";
    case Rule::RedefinedValue: return "RedefinedValue";
    case Rule::ArityMismatch: return "ArityMismatch";
    case Rule::DomainMismatch: return "DomainMismatch";
    case Rule::RankMismatch: return "RankMismatch";
    case Rule::OutOfBoundsAccess: return "OutOfBoundsAccess";
    case Rule::StoreToInput: return "StoreToInput";
    case Rule::MultipleProducers: return "MultipleProducers";
    case Rule::ReadBeforeWrite: return "ReadBeforeWrite";
    case Rule::MemcopyShape: return "MemcopyShape";
  }
  return "?";
}

std::string to_string(const Violation& v) {
  std::ostringstream os;
  os << to_string(v.rule);
  if (!v.nest.empty()) {
    os << " in nest " << v.nest;
    if (v.statement) os << " statement " << *v.statement;
  }
  os << ": " << v.message;
  return os.str();
}

namespace {

std::string format_point(std::span<const Index> p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

// Returns a domain point whose image falls outside `shape`, or nullopt if the
// access is in bounds everywhere. The second member is false when the domain
// is too large to search for a witness.
std::optional<std::pair<affine::Point, bool>> out_of_bounds(const QuasiAffineMap& map,
                                                            const std::vector<Index>& shape) {
  if (!map.is_tabulated()) {
    bool proven = true;
    for (std::size_t k = 0; k < map.out_rank() && proven; ++k) {
      const affine::Interval iv = affine::bounds(map.outputs()[k], map.domain());
      proven = iv.lo >= 0 && iv.hi < shape[k];
    }
    if (proven || map.domain().empty()) return std::nullopt;
  }
  if (map.domain().cardinality() > affine::Limits{}.enumeration) {
    return std::make_pair(affine::Point{}, false);
  }
  std::optional<affine::Point> witness;
  affine::Point y(map.out_rank());
  map.domain().for_each([&](std::span<const Index> p) {
    if (witness || !map.evaluate_into(p, y)) return;
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (y[k] < 0 || y[k] >= shape[k]) {
        witness.emplace(p.begin(), p.end());
        return;
      }
    }
  });
  if (!witness) return std::nullopt;
  return std::make_pair(*witness, true);
}

class Validator {
 public:
  explicit Validator(const Program& p) : program_(p) {}

  std::vector<Violation> run() {
    check_declarations();
    std::set<std::string> nest_names;
    for (std::size_t n = 0; n < program_.nests.size(); ++n) {
      const OperatorNest& nest = program_.nests[n];
      if (!nest_names.insert(nest.name).second) add(Rule::DuplicateNest, nest.name, {}, "nest name reused");
      check_nest(n);
    }
    return std::move(out_);
  }

 private:
  void add(Rule rule, std::string nest, std::optional<std::size_t> stmt, std::string msg) {
    out_.push_back({rule, std::move(nest), stmt, std::move(msg)});
  }

  void check_declarations() {
    std::set<std::string> names;
    for (const auto& t : program_.tensors) {
      if (!names.insert(t.name).second) add(Rule::DuplicateTensor, {}, {}, "tensor %" + t.name + " declared twice");
      if (t.elem_size <= 0) add(Rule::InvalidElemSize, {}, {}, "tensor %" + t.name + " has element size <= 0");
      bool shape_ok = std::all_of(t.shape.begin(), t.shape.end(), [](Index e) { return e >= 1; });
      if (shape_ok) {
        try {
          (void)t.box();
        } catch (const affine::AffineError&) {
          shape_ok = false;
        }
      }
      if (!shape_ok) add(Rule::InvalidShape, {}, {}, "tensor %" + t.name + " has an extent < 1 or is too large");
      if (t.mapping) {
        if (!t.on_chip()) {
          add(Rule::InvalidMapping, {}, {}, "off-chip tensor %" + t.name + " carries a bank mapping");
        } else if (t.mapping->axis >= t.rank() || t.mapping->banks < 1) {
          add(Rule::InvalidMapping, {}, {}, "tensor %" + t.name + " mapping " + to_string(*t.mapping) + " is invalid");
        }
      }
      producers_[t.name];
    }
    for (std::size_t n = 0; n < program_.nests.size(); ++n) {
      for (const auto& name : program_.nests[n].written_tensors()) producers_[name].push_back(n);
    }
    for (const auto& [name, list] : producers_) {
      if (list.size() > 1) {
        add(Rule::MultipleProducers, program_.nests[list[1]].name, {},
            "tensor %" + name + " already produced by nest " + program_.nests[list[0]].name);
      }
    }
  }

  // Validates one access of `tensor` and returns the declaration if usable.
  const TensorDecl* check_access(std::size_t n, std::size_t s, const std::string& tensor, const QuasiAffineMap& map,
                                 bool is_read) {
    const OperatorNest& nest = program_.nests[n];
    const TensorDecl* decl = program_.find_tensor(tensor);
    if (decl == nullptr) {
      add(Rule::UndefinedTensor, nest.name, s, "tensor %" + tensor + " is not declared");
      return nullptr;
    }
    if (!(map.domain() == nest.box)) {
      add(Rule::DomainMismatch, nest.name, s, "access to %" + tensor + " is not defined on the nest box");
      return nullptr;
    }
    if (map.out_rank() != decl->rank()) {
      add(Rule::RankMismatch, nest.name, s,
          "access to %" + tensor + " has " + std::to_string(map.out_rank()) + " indices, tensor rank is " +
              std::to_string(decl->rank()));
      return nullptr;
    }
    if (auto oob = out_of_bounds(map, decl->shape)) {
      std::string msg = "access to %" + tensor + " leaves its shape";
      if (oob->second) {
        msg += " at loop point " + format_point(oob->first) + " -> " + format_point(map.evaluate(oob->first));
      } else {
        msg += " (domain too large to find a witness)";
      }
      add(Rule::OutOfBoundsAccess, nest.name, s, msg);
    }
    if (is_read && !decl->is_input()) {
      const auto& prods = producers_[tensor];
      if (prods.empty()) {
        add(Rule::ReadBeforeWrite, nest.name, s, "tensor %" + tensor + " is read but never produced");
      } else if (prods.front() >= n) {
        add(Rule::ReadBeforeWrite, nest.name, s,
            "tensor %" + tensor + " is read before its producer " + program_.nests[prods.front()].name);
      }
    }
    if (!is_read && decl->is_input()) {
      add(Rule::StoreToInput, nest.name, s, "model input %" + tensor + " is stored to");
    }
    return decl;
  }

  void check_nest(std::size_t n) {
    const OperatorNest& nest = program_.nests[n];
    if (nest.body.empty()) add(Rule::EmptyBody, nest.name, {}, "nest body is empty");
    std::set<std::string> defined;
    auto define = [&](std::size_t s, const std::string& id) {
      if (!defined.insert(id).second) add(Rule::RedefinedValue, nest.name, s, "value %" + id + " assigned twice");
    };
    auto use = [&](std::size_t s, const std::string& id) {
      if (!defined.contains(id)) add(Rule::UndefinedValue, nest.name, s, "value %" + id + " used before definition");
    };
    for (std::size_t s = 0; s < nest.body.size(); ++s) {
      const Statement& st = nest.body[s];
      if (const auto* l = std::get_if<Load>(&st)) {
        check_access(n, s, l->tensor, l->access, true);
        define(s, l->result);
      } else if (const auto* w = std::get_if<Store>(&st)) {
        use(s, w->value);
        check_access(n, s, w->tensor, w->access, false);
      } else if (const auto* c = std::get_if<Compute>(&st)) {
        if (c->operands.size() != arity(c->op)) {
          add(Rule::ArityMismatch, nest.name, s,
              std::string(to_string(c->op)) + " takes " + std::to_string(arity(c->op)) + " operands");
        }
        for (const auto& id : c->operands) use(s, id);
        define(s, c->result);
      } else if (const auto* m = std::get_if<Memcopy>(&st)) {
        check_access(n, s, m->src, m->map, true);
        const TensorDecl* dst = program_.find_tensor(m->dst);
        if (dst == nullptr) {
          add(Rule::UndefinedTensor, nest.name, s, "tensor %" + m->dst + " is not declared");
        } else {
          if (dst->is_input()) add(Rule::StoreToInput, nest.name, s, "model input %" + m->dst + " is stored to");
          if (!(dst->shape == nest.box.upper()) ||
              std::any_of(nest.box.lower().begin(), nest.box.lower().end(), [](Index v) { return v != 0; })) {
            add(Rule::MemcopyShape, nest.name, s, "memcopy box must equal the shape of %" + m->dst);
          }
        }
      }
    }
  }

  const Program& program_;
  std::map<std::string, std::vector<std::size_t>> producers_;
  std::vector<Violation> out_;
};

}  // namespace

std::vector<Violation> validate(const Program& program) { return Validator(program).run(); }

// ---------------------------------------------------------------------------
// Analyses

std::vector<DependenceEdge> dependence_edges(const Program& program) {
  std::map<std::string, std::size_t> producer;
  for (std::size_t n = 0; n < program.nests.size(); ++n) {
    for (const auto& t : program.nests[n].written_tensors()) producer.try_emplace(t, n);
  }
  std::vector<DependenceEdge> edges;
  for (std::size_t c = 0; c < program.nests.size(); ++c) {
    for (const auto& t : program.nests[c].read_tensors()) {
      auto it = producer.find(t);
      if (it != producer.end() && it->second != c) edges.push_back({it->second, c, t});
    }
  }
  return edges;
}

std::vector<CopyPair> find_copy_pairs(const Program& program) {
  std::vector<CopyPair> pairs;
  for (std::size_t n = 0; n < program.nests.size(); ++n) {
    const auto& body = program.nests[n].body;
    std::map<std::string, std::size_t> loads;
    for (std::size_t s = 0; s < body.size(); ++s) {
      if (const auto* l = std::get_if<Load>(&body[s])) {
        loads.emplace(l->result, s);
      } else if (const auto* w = std::get_if<Store>(&body[s])) {
        auto it = loads.find(w->value);
        if (it != loads.end()) pairs.push_back({n, it->second, s});
      }
    }
  }
  return pairs;
}

}  // namespace memopt::ir
