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

#include "memopt/interp.hpp"

#include <algorithm>
#include <exception>
#include <random>
#include <variant>

#include "parallel_impl.hpp"

namespace memopt::interp {

using ir::Index;

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::PoisonRead: return "PoisonRead";
    case ErrorKind::UnknownOpcode: return "UnknownOpcode";
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidProgram: return "InvalidProgram";
  }
  return "?";
}

namespace {

std::size_t element_count(const std::vector<Index>& shape) {
  std::size_t n = 1;
  for (Index e : shape) n *= static_cast<std::size_t>(e);
  return n;
}

std::size_t offset_of(const std::vector<Index>& shape, std::span<const Index> idx) {
  std::size_t off = 0;
  for (std::size_t d = 0; d < shape.size(); ++d) off = off * static_cast<std::size_t>(shape[d]) + static_cast<std::size_t>(idx[d]);
  return off;
}

std::vector<Index> index_of(const std::vector<Index>& shape, std::size_t off) {
  std::vector<Index> idx(shape.size());
  for (std::size_t d = shape.size(); d > 0; --d) {
    const auto e = static_cast<std::size_t>(shape[d - 1]);
    idx[d - 1] = static_cast<Index>(off % e);
    off /= e;
  }
  return idx;
}

// Wrap-around arithmetic: defined for every input, identical on every run.
Value wrap_add(Value a, Value b) {
  return static_cast<Value>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
Value wrap_mul(Value a, Value b) {
  return static_cast<Value>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}
Value wrap_neg(Value a) { return static_cast<Value>(0 - static_cast<std::uint64_t>(a)); }

Value evaluate(ir::Opcode op, const std::vector<Value>& args) {
  switch (op) {
    case ir::Opcode::Add: return wrap_add(args[0], args[1]);
    case ir::Opcode::Mul: return wrap_mul(args[0], args[1]);
    case ir::Opcode::Max: return std::max(args[0], args[1]);
    case ir::Opcode::Neg: return wrap_neg(args[0]);
    case ir::Opcode::Identity: return args[0];
  }
  throw InterpError(ErrorKind::UnknownOpcode, "opcode " + std::to_string(static_cast<int>(op)));
}

std::string describe(const std::string& tensor, std::span<const Index> idx) {
  std::string s = "%" + tensor + "[";
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? ", " : "") + std::to_string(idx[i]);
  return s + "]";
}

// A nest body resolved to buffer pointers and value slots once, so the inner
// loop does no name lookups.
struct Slot {
  enum Kind { Load, Store, Compute, Memcopy } kind;
  const ir::QuasiAffineMap* map = nullptr;
  Buffer* buffer = nullptr;      // load/store target, memcopy destination
  Buffer* source = nullptr;      // memcopy source
  const std::string* tensor = nullptr;
  const std::string* source_name = nullptr;
  std::size_t result = 0;
  std::vector<std::size_t> operands;
  ir::Opcode op = ir::Opcode::Identity;
};

class Machine {
 public:
  Machine(const ir::Program& program, const TensorStore& inputs) : program_(program) {
    for (const auto& t : program.tensors) {
      if (t.is_input()) {
        auto it = inputs.find(t.name);
        if (it == inputs.end()) throw InterpError(ErrorKind::MissingInput, "no buffer for input %" + t.name);
        if (it->second.shape != t.shape || it->second.data.size() != element_count(t.shape) ||
            it->second.written.size() != it->second.data.size()) {
          throw InterpError(ErrorKind::ShapeMismatch, "input %" + t.name + " does not match its declared shape");
        }
        buffers_.emplace(t.name, it->second);
      } else {
        buffers_.emplace(t.name, Buffer::zeros(t.shape));
      }
    }
    for (const auto& [name, buf] : inputs) {
      const ir::TensorDecl* decl = program.find_tensor(name);
      if (decl == nullptr || !decl->is_input()) {
        throw InterpError(ErrorKind::MissingInput, "buffer %" + name + " is not an input of the program");
      }
    }
  }

  void execute() {
    for (const auto& nest : program_.nests) execute(nest);
  }

  TensorStore outputs() {
    TensorStore out;
    for (const auto& t : program_.tensors) {
      if (t.is_output()) out.emplace(t.name, std::move(buffers_.at(t.name)));
    }
    return out;
  }

 private:
  Buffer& buffer(const std::string& name) {
    auto it = buffers_.find(name);
    if (it == buffers_.end()) throw InterpError(ErrorKind::InvalidProgram, "undeclared tensor %" + name);
    return it->second;
  }

  std::vector<Slot> resolve(const ir::OperatorNest& nest) {
    std::map<std::string, std::size_t> ids;
    auto id = [&](const std::string& name) {
      auto it = ids.find(name);
      if (it == ids.end()) throw InterpError(ErrorKind::InvalidProgram, "value %" + name + " undefined in " + nest.name);
      return it->second;
    };
    std::vector<Slot> slots;
    for (const auto& st : nest.body) {
      Slot s{};
      if (const auto* l = std::get_if<ir::Load>(&st)) {
        s.kind = Slot::Load;
        s.map = &l->access;
        s.buffer = &buffer(l->tensor);
        s.tensor = &l->tensor;
        s.result = ids.size();
        ids[l->result] = s.result;
      } else if (const auto* w = std::get_if<ir::Store>(&st)) {
        s.kind = Slot::Store;
        s.map = &w->access;
        s.buffer = &buffer(w->tensor);
        s.tensor = &w->tensor;
        s.operands = {id(w->value)};
      } else if (const auto* c = std::get_if<ir::Compute>(&st)) {
        s.kind = Slot::Compute;
        s.op = c->op;
        for (const auto& o : c->operands) s.operands.push_back(id(o));
        if (s.operands.size() != ir::arity(c->op)) {
          throw InterpError(ErrorKind::InvalidProgram, "wrong operand count for " + std::string(ir::to_string(c->op)));
        }
        s.result = ids.size();
        ids[c->result] = s.result;
      } else if (const auto* m = std::get_if<ir::Memcopy>(&st)) {
        s.kind = Slot::Memcopy;
        s.map = &m->map;
        s.buffer = &buffer(m->dst);
        s.source = &buffer(m->src);
        s.tensor = &m->dst;
        s.source_name = &m->src;
      }
      slots.push_back(std::move(s));
    }
    values_.assign(ids.size(), 0);
    return slots;
  }

  void execute(const ir::OperatorNest& nest) {
    std::vector<Slot> slots = resolve(nest);
    std::vector<Index> idx;
    std::vector<Value> args;
    nest.box.for_each([&](std::span<const Index> p) {
      for (const Slot& s : slots) {
        switch (s.kind) {
          case Slot::Load: {
            idx.resize(s.map->out_rank());
            if (!s.map->evaluate_into(p, idx)) throw InterpError(ErrorKind::InvalidProgram, "access undefined");
            const std::size_t off = checked_offset(*s.buffer, *s.tensor, idx);
            if (!s.buffer->written[off]) throw InterpError(ErrorKind::PoisonRead, describe(*s.tensor, idx) + " in " + nest.name);
            values_[s.result] = s.buffer->data[off];
            break;
          }
          case Slot::Store: {
            idx.resize(s.map->out_rank());
            if (!s.map->evaluate_into(p, idx)) throw InterpError(ErrorKind::InvalidProgram, "access undefined");
            const std::size_t off = checked_offset(*s.buffer, *s.tensor, idx);
            s.buffer->data[off] = values_[s.operands[0]];
            s.buffer->written[off] = 1;
            break;
          }
          case Slot::Compute: {
            args.clear();
            for (std::size_t o : s.operands) args.push_back(values_[o]);
            values_[s.result] = evaluate(s.op, args);
            break;
          }
          case Slot::Memcopy: {
            idx.resize(s.map->out_rank());
            if (!s.map->evaluate_into(p, idx)) throw InterpError(ErrorKind::InvalidProgram, "access undefined");
            const std::size_t src = checked_offset(*s.source, *s.source_name, idx);
            if (!s.source->written[src]) throw InterpError(ErrorKind::PoisonRead, describe(*s.source_name, idx) + " in " + nest.name);
            const std::size_t dst = checked_offset(*s.buffer, *s.tensor, p);
            s.buffer->data[dst] = s.source->data[src];
            s.buffer->written[dst] = 1;
            break;
          }
        }
      }
    });
  }

  static std::size_t checked_offset(const Buffer& b, const std::string& name, std::span<const Index> idx) {
    if (idx.size() != b.shape.size()) throw InterpError(ErrorKind::InvalidProgram, "rank mismatch on %" + name);
    for (std::size_t d = 0; d < idx.size(); ++d) {
      if (idx[d] < 0 || idx[d] >= b.shape[d]) {
        throw InterpError(ErrorKind::InvalidProgram, "out-of-bounds access " + describe(name, idx));
      }
    }
    return offset_of(b.shape, idx);
  }

  const ir::Program& program_;
  std::map<std::string, Buffer> buffers_;
  std::vector<Value> values_;
};

}  // namespace

Buffer Buffer::zeros(std::vector<Index> shape) {
  const std::size_t n = element_count(shape);
  return Buffer{std::move(shape), std::vector<Value>(n, 0), std::vector<std::uint8_t>(n, 0)};
}

Buffer Buffer::of(std::vector<Index> shape, std::vector<Value> values) {
  const std::size_t n = values.size();
  return Buffer{std::move(shape), std::move(values), std::vector<std::uint8_t>(n, 1)};
}

TensorStore run(const ir::Program& program, const TensorStore& inputs) {
  Machine m(program, inputs);
  m.execute();
  return m.outputs();
}

TensorStore random_inputs(const ir::Program& program, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Value> dist(-1000, 1000);
  TensorStore store;
  for (const auto& t : program.tensors) {
    if (!t.is_input()) continue;
    std::vector<Value> values(element_count(t.shape));
    for (auto& v : values) v = dist(rng);
    store.emplace(t.name, Buffer::of(t.shape, std::move(values)));
  }
  return store;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) noexcept {
  // splitmix64 step keeps per-trial seeds well separated
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::optional<Counterexample> compare_outputs(const TensorStore& a, const TensorStore& b) {
  for (const auto& [name, lhs] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second.shape != lhs.shape) {
      Counterexample cx;
      cx.tensor = name;
      cx.note = "output missing or shaped differently in the second program";
      return cx;
    }
    const Buffer& rhs = it->second;
    for (std::size_t i = 0; i < lhs.data.size(); ++i) {
      const bool lw = lhs.written[i] != 0, rw = rhs.written[i] != 0;
      if (lw == rw && (!lw || lhs.data[i] == rhs.data[i])) continue;
      Counterexample cx;
      cx.tensor = name;
      cx.index = index_of(lhs.shape, i);
      if (lw) cx.lhs = lhs.data[i];
      if (rw) cx.rhs = rhs.data[i];
      return cx;
    }
  }
  for (const auto& [name, rhs] : b) {
    if (!a.contains(name)) {
      Counterexample cx;
      cx.tensor = name;
      cx.note = "output only present in the second program";
      return cx;
    }
  }
  return std::nullopt;
}

}  // namespace

Equivalence equivalent(const ir::Program& p1, const ir::Program& p2, std::size_t trials, std::uint64_t seed,
                       Exec exec) {
  std::vector<std::optional<Counterexample>> found(trials);
  std::vector<std::exception_ptr> errors(trials);
  detail::for_each_index(
      trials, exec, [] { return 0; },
      [&](std::int64_t t, int&) {
        const auto trial = static_cast<std::size_t>(t);
        try {
          const std::uint64_t s = trial_seed(seed, trial);
          const TensorStore inputs = random_inputs(p1, s);
          const TensorStore lhs = run(p1, inputs);
          std::optional<Counterexample> cx;
          try {
            cx = compare_outputs(lhs, run(p2, inputs));
          } catch (const InterpError& e) {
            cx = Counterexample{};
            cx->note = std::string("second program failed: ") + e.what();
          }
          if (cx) {
            cx->trial = trial;
            cx->seed = s;
            found[trial] = std::move(cx);
          }
        } catch (...) {
          errors[trial] = std::current_exception();
        }
      });
  for (std::size_t t = 0; t < trials; ++t) {
    if (errors[t]) std::rethrow_exception(errors[t]);
    if (found[t]) return {false, std::move(found[t])};
  }
  return {true, std::nullopt};
}

}  // namespace memopt::interp
