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

#include "memopt/bankmap.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <optional>
#include <set>
#include <tuple>
#include <variant>

namespace memopt::bankmap {

using affine::QuasiAffineMap;

Lattice join(const Lattice& a, const Lattice& b) {
  if (a.is_unknown()) return b;
  if (b.is_unknown()) return a;
  if (a.is_exactly() && b.is_exactly() && a.mapping() == b.mapping()) return a;
  return Lattice::conflict();
}

std::string to_string(const Lattice& value) {
  switch (value.kind()) {
    case Lattice::Kind::Unknown: return "unknown";
    case Lattice::Kind::Exactly: return ir::to_string(value.mapping());
    case Lattice::Kind::Conflict: return "conflict";
  }
  return "?";
}

const Lattice& MappingState::at(const std::string& tensor) const {
  static const Lattice kUnknown = Lattice::unknown();
  auto it = values.find(tensor);
  return it == values.end() ? kUnknown : it->second;
}

std::uint64_t InsertionReport::memcopy_bytes() const {
  std::uint64_t total = 0;
  for (const auto& i : insertions) total += i.bytes;
  return total;
}

namespace {

bool on_chip(const ir::Program& program, const std::string& tensor) {
  const ir::TensorDecl* t = program.find_tensor(tensor);
  return t != nullptr && t->on_chip();
}

}  // namespace

MappingState seed_anchors(const ir::Program& program, const AnchorRegistry& registry, const Options& options) {
  MappingState state;
  for (const auto& t : program.tensors) {
    if (t.on_chip()) state.values.emplace(t.name, Lattice::unknown());
  }
  for (const auto& nest : program.nests) {
    if (!registry.anchored(nest.kind)) continue;
    auto seed = [&](const std::string& tensor, const std::string& role) {
      const auto tmpl = registry.lookup(nest.kind, role);
      const ir::TensorDecl* decl = program.find_tensor(tensor);
      if (!tmpl || decl == nullptr || !decl->on_chip()) return;
      if (tmpl->axis >= decl->rank()) {
        throw BankmapError("RankMismatch: nest " + nest.name + " operand " + role + " (%" + tensor + ", rank " +
                           std::to_string(decl->rank()) + ") has no axis " + std::to_string(tmpl->axis));
      }
      const BankMapping m{tmpl->axis, options.banks, tmpl->policy};
      state.values[tensor] = join(state.values[tensor], Lattice::exactly(m));
      state.anchors.try_emplace(tensor, m);
    };
    const auto reads = nest.read_tensors();
    for (std::size_t k = 0; k < reads.size(); ++k) seed(reads[k], load_role(k));
    const auto writes = nest.written_tensors();
    for (std::size_t k = 0; k < writes.size(); ++k) seed(writes[k], store_role(k));
  }
  return state;
}

// ---------------------------------------------------------------------------
// Transfer

namespace {

// Every access of `tensor` in the nest, as a map from the loop box to tensor
// indices. A memcopy destination is indexed by the loop point itself.
std::vector<QuasiAffineMap> accesses_of(const ir::OperatorNest& nest, const std::string& tensor) {
  std::vector<QuasiAffineMap> out;
  for (const auto& st : nest.body) {
    if (const auto* l = std::get_if<ir::Load>(&st); l && l->tensor == tensor) out.push_back(l->access);
    if (const auto* w = std::get_if<ir::Store>(&st); w && w->tensor == tensor) out.push_back(w->access);
    if (const auto* m = std::get_if<ir::Memcopy>(&st)) {
      if (m->src == tensor) out.push_back(m->map);
      if (m->dst == tensor) out.push_back(QuasiAffineMap::identity(nest.box));
    }
  }
  return out;
}

bool uses_var(const affine::QuasiAffineExpr& e, std::size_t j) {
  if (e.linear.coeffs[j] != 0) return true;
  return std::any_of(e.terms.begin(), e.terms.end(), [&](const affine::DivTerm& t) { return t.inner.coeffs[j] != 0; });
}

// Loop variable that alone drives coordinate `axis` with coefficient +-1.
std::optional<std::size_t> driving_var(const QuasiAffineMap& m, std::size_t axis, std::string& why) {
  if (m.is_tabulated()) {
    why = "tabulated access";
    return std::nullopt;
  }
  if (axis >= m.out_rank()) {
    why = "axis out of range";
    return std::nullopt;
  }
  const auto& e = m.outputs()[axis];
  const auto j = e.is_linear() ? e.linear.single_var() : std::nullopt;
  if (!j) {
    why = "axis " + std::to_string(axis) + " is not driven by a single loop variable";
    return std::nullopt;
  }
  if (std::abs(e.linear.coeffs[*j]) != 1) {
    why = "axis " + std::to_string(axis) + " has stride " + std::to_string(e.linear.coeffs[*j]);
    return std::nullopt;
  }
  for (std::size_t k = 0; k < m.out_rank(); ++k) {
    if (k != axis && uses_var(m.outputs()[k], *j)) {
      why = "loop variable i" + std::to_string(*j) + " also feeds axis " + std::to_string(k);
      return std::nullopt;
    }
  }
  return j;
}

// The unique coordinate of `m` that loop variable j drives alone.
std::optional<std::size_t> driven_axis(const QuasiAffineMap& m, std::size_t j, std::string& why) {
  if (m.is_tabulated()) {
    why = "tabulated access";
    return std::nullopt;
  }
  std::optional<std::size_t> found;
  for (std::size_t k = 0; k < m.out_rank(); ++k) {
    if (!uses_var(m.outputs()[k], j)) continue;
    if (found) {
      why = "loop variable i" + std::to_string(j) + " feeds several axes";
      return std::nullopt;
    }
    found = k;
  }
  if (!found) {
    why = "loop variable i" + std::to_string(j) + " is dropped";
    return std::nullopt;
  }
  std::string unused;
  if (!driving_var(m, *found, unused)) {
    why = "axis " + std::to_string(*found) + " mixes loop variables or has a stride";
    return std::nullopt;
  }
  return found;
}

}  // namespace

Transfer transfer(const BankMapping& mapping, const ir::OperatorNest& nest, const std::string& from,
                  const std::string& to, Direction /*direction*/) {
  Transfer out;
  const auto src = accesses_of(nest, from);
  const auto dst = accesses_of(nest, to);
  if (src.empty() || dst.empty()) {
    out.blocked_reason = "tensor not accessed by nest " + nest.name;
    return out;
  }
  std::optional<std::size_t> var;
  for (const auto& m : src) {
    const auto j = driving_var(m, mapping.axis, out.blocked_reason);
    if (!j) return out;
    if (var && *var != *j) {
      out.blocked_reason = "accesses of %" + from + " disagree on the loop variable";
      return out;
    }
    var = j;
  }
  std::optional<std::size_t> axis;
  for (const auto& m : dst) {
    const auto a = driven_axis(m, *var, out.blocked_reason);
    if (!a) return out;
    if (axis && *axis != *a) {
      out.blocked_reason = "accesses of %" + to + " disagree on the axis";
      return out;
    }
    axis = a;
  }
  out.mapping = BankMapping{*axis, mapping.banks, mapping.policy};
  out.blocked_reason.clear();
  return out;
}

bool is_rebanking(const ir::OperatorNest& nest) {
  return !nest.body.empty() && std::all_of(nest.body.begin(), nest.body.end(), [](const ir::Statement& st) {
    return std::holds_alternative<ir::Memcopy>(st);
  });
}

std::vector<Arc> propagation_arcs(const ir::Program& program, const AnchorRegistry& registry) {
  std::vector<Arc> arcs;
  for (std::size_t n = 0; n < program.nests.size(); ++n) {
    const ir::OperatorNest& nest = program.nests[n];
    if (registry.anchored(nest.kind) || is_rebanking(nest)) continue;
    std::vector<std::string> reads, writes;
    for (const auto& t : nest.read_tensors()) {
      if (on_chip(program, t)) reads.push_back(t);
    }
    for (const auto& t : nest.written_tensors()) {
      if (on_chip(program, t)) writes.push_back(t);
    }
    for (const auto& r : reads) {
      for (const auto& w : writes) arcs.push_back({n, r, w, Direction::Forward});
    }
    for (const auto& w : writes) {
      for (const auto& r : reads) arcs.push_back({n, w, r, Direction::Backward});
    }
  }
  return arcs;
}

namespace {

// Image of a lattice value along one arc. Conflict maps to Conflict whenever
// some axis of the source has a correspondence, which keeps the transfer
// monotone: it is then above the image of every Exactly value.
Lattice transfer_value(const Lattice& v, const ir::Program& program, const Arc& arc) {
  const ir::OperatorNest& nest = program.nests[arc.nest];
  if (v.is_unknown()) return v;
  if (v.is_exactly()) {
    const Transfer t = transfer(v.mapping(), nest, arc.from, arc.to, arc.direction);
    return t.mapping ? Lattice::exactly(*t.mapping) : Lattice::unknown();
  }
  const ir::TensorDecl* decl = program.find_tensor(arc.from);
  for (std::size_t axis = 0; decl != nullptr && axis < decl->rank(); ++axis) {
    if (transfer({axis, 1, Policy::Cyclic}, nest, arc.from, arc.to, arc.direction).mapping) {
      return Lattice::conflict();
    }
  }
  return Lattice::unknown();
}

}  // namespace

MappingState propagate(const ir::Program& program, const AnchorRegistry& registry, MappingState state,
                       const PropagateOptions& popts) {
  const std::vector<Arc> arcs = propagation_arcs(program, registry);
  std::vector<std::size_t> order = popts.arc_order;
  if (order.empty()) {
    order.resize(arcs.size());
    for (std::size_t i = 0; i < arcs.size(); ++i) order[i] = i;
  }
  if (order.size() != arcs.size()) throw BankmapError("arc order is not a permutation of the program's arcs");

  std::map<std::string, std::vector<std::size_t>> outgoing;
  for (std::size_t i = 0; i < arcs.size(); ++i) outgoing[arcs[i].from].push_back(i);

  std::deque<std::size_t> work(order.begin(), order.end());
  std::vector<bool> queued(arcs.size(), true);
  while (!work.empty()) {
    const std::size_t a = work.front();
    work.pop_front();
    queued[a] = false;
    const Arc& arc = arcs[a];
    const Lattice incoming = transfer_value(state.at(arc.from), program, arc);
    Lattice& target = state.values[arc.to];
    const Lattice next = join(target, incoming);
    if (next == target) continue;
    target = next;
    ++state.updates;
    for (std::size_t b : outgoing[arc.to]) {
      if (!queued[b]) {
        queued[b] = true;
        work.push_back(b);
      }
    }
  }
  return state;
}

std::vector<ConflictInfo> diagnose(const ir::Program& program, const AnchorRegistry& registry,
                                   const MappingState& state, const Options& options) {
  std::map<std::string, std::vector<Requirement>> reqs;
  std::map<std::string, std::set<std::string>> inherited;
  for (const auto& nest : program.nests) {
    if (!registry.anchored(nest.kind)) continue;
    const auto reads = nest.read_tensors();
    for (std::size_t k = 0; k < reads.size(); ++k) {
      if (auto t = registry.lookup(nest.kind, load_role(k))) {
        reqs[reads[k]].push_back({{t->axis, options.banks, t->policy}, "anchor " + nest.name + "." + load_role(k)});
      }
    }
    const auto writes = nest.written_tensors();
    for (std::size_t k = 0; k < writes.size(); ++k) {
      if (auto t = registry.lookup(nest.kind, store_role(k))) {
        reqs[writes[k]].push_back({{t->axis, options.banks, t->policy}, "anchor " + nest.name + "." + store_role(k)});
      }
    }
  }
  for (const auto& arc : propagation_arcs(program, registry)) {
    const Lattice& from = state.at(arc.from);
    const Lattice v = transfer_value(from, program, arc);
    if (v.is_exactly()) {
      reqs[arc.to].push_back({v.mapping(), std::string(arc.direction == Direction::Forward ? "forward" : "backward") +
                                               " from %" + arc.from + " through " + program.nests[arc.nest].name});
    } else if (v.is_conflict()) {
      inherited[arc.to].insert(arc.from);
    }
  }
  std::vector<ConflictInfo> out;
  for (const auto& [name, value] : state.values) {
    if (!value.is_conflict()) continue;
    ConflictInfo info{name, reqs[name], {}};
    std::sort(info.requirements.begin(), info.requirements.end(), [](const Requirement& a, const Requirement& b) {
      return std::tie(a.mapping, a.origin) < std::tie(b.mapping, b.origin);
    });
    info.requirements.erase(std::unique(info.requirements.begin(), info.requirements.end(),
                                        [](const Requirement& a, const Requirement& b) { return a.mapping == b.mapping; }),
                            info.requirements.end());
    info.inherited_from.assign(inherited[name].begin(), inherited[name].end());
    out.push_back(std::move(info));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Materialization

namespace {

struct CopyRequest {
  std::string tensor;
  BankMapping mapping;
  std::vector<std::size_t> consumers;  // nest indices, ascending
};

// Applies final mappings and inserts one memcopy nest per request.
ir::Program insert_copies(const ir::Program& program, const std::map<std::string, BankMapping>& produced,
                          const std::vector<CopyRequest>& requests, std::vector<Insertion>& insertions) {
  ir::Program out;
  std::map<std::size_t, std::vector<std::size_t>> before;  // consumer -> requests inserted ahead of it
  for (std::size_t r = 0; r < requests.size(); ++r) before[requests[r].consumers.front()].push_back(r);

  ir::Program names = program;  // tracks names taken so far
  std::vector<std::string> copy_names(requests.size());
  std::vector<std::string> nest_names(requests.size());
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const CopyRequest& req = requests[r];
    std::string base = req.tensor + ".bank" + std::to_string(req.mapping.axis);
    if (req.mapping.policy == Policy::Blocked) base += "b";
    copy_names[r] = names.fresh_tensor_name(base);
    names.tensors.push_back({copy_names[r], 1, {1}, ir::Location::OnChip, std::nullopt, ir::Origin::Intermediate});
    nest_names[r] = names.fresh_nest_name("memcopy." + copy_names[r]);
    names.nests.push_back({nest_names[r], ir::OpKind::Copy, {}, {}});
  }

  for (const auto& t : program.tensors) {
    ir::TensorDecl decl = t;
    decl.mapping.reset();
    if (t.on_chip()) {
      if (auto it = produced.find(t.name); it != produced.end()) decl.mapping = it->second;
    }
    out.tensors.push_back(decl);
    for (std::size_t r = 0; r < requests.size(); ++r) {
      if (requests[r].tensor != t.name) continue;
      ir::TensorDecl copy = t;
      copy.name = copy_names[r];
      copy.origin = ir::Origin::Intermediate;
      copy.mapping = requests[r].mapping;
      out.tensors.push_back(std::move(copy));
    }
  }

  for (std::size_t n = 0; n < program.nests.size(); ++n) {
    if (auto it = before.find(n); it != before.end()) {
      for (std::size_t r : it->second) {
        const ir::TensorDecl* src = program.find_tensor(requests[r].tensor);
        const affine::IntBox box = src->box();
        out.nests.push_back({nest_names[r], ir::OpKind::Copy, box,
                             {ir::Memcopy{copy_names[r], requests[r].tensor, QuasiAffineMap::identity(box)}}});
        Insertion ins{requests[r].tensor, copy_names[r], requests[r].mapping, {}, nest_names[r], src->bytes()};
        for (std::size_t c : requests[r].consumers) ins.consumers.push_back(program.nests[c].name);
        insertions.push_back(std::move(ins));
      }
    }
    ir::OperatorNest nest = program.nests[n];
    for (std::size_t r = 0; r < requests.size(); ++r) {
      const auto& cs = requests[r].consumers;
      if (!std::binary_search(cs.begin(), cs.end(), n)) continue;
      for (auto& st : nest.body) {
        if (auto* l = std::get_if<ir::Load>(&st); l && l->tensor == requests[r].tensor) l->tensor = copy_names[r];
        if (auto* m = std::get_if<ir::Memcopy>(&st); m && m->src == requests[r].tensor) m->src = copy_names[r];
      }
    }
    out.nests.push_back(std::move(nest));
  }
  return out;
}

void add_request(std::vector<CopyRequest>& requests, const std::string& tensor, const BankMapping& m,
                 std::size_t consumer) {
  for (auto& r : requests) {
    if (r.tensor == tensor && r.mapping == m) {
      if (r.consumers.back() != consumer) r.consumers.push_back(consumer);
      return;
    }
  }
  requests.push_back({tensor, m, {consumer}});
}

}  // namespace

MapResult materialize(const ir::Program& program, const AnchorRegistry& registry, const MappingState& state,
                      const Options& options) {
  // Anchored requirements of each consumer, by tensor.
  std::map<std::string, std::vector<std::pair<std::size_t, BankMapping>>> demands;
  std::map<std::string, BankMapping> producer_template;
  for (std::size_t n = 0; n < program.nests.size(); ++n) {
    const ir::OperatorNest& nest = program.nests[n];
    for (const auto& [tensor, m] : anchor_requirements(nest, registry, options.banks)) {
      if (!on_chip(program, tensor)) continue;
      if (nest.writes(tensor)) {
        producer_template.try_emplace(tensor, m);
      } else {
        demands[tensor].emplace_back(n, m);
      }
    }
  }

  // Settled tensors keep their lattice value. Conflict tensors are decided in
  // producer order so that a forward transfer always sees a decided input.
  std::map<std::string, BankMapping> produced;
  std::vector<std::pair<std::size_t, std::string>> conflicted;
  for (const auto& t : program.tensors) {
    if (!t.on_chip()) continue;
    const Lattice& v = state.at(t.name);
    if (v.is_conflict()) {
      const auto p = program.producer(t.name);
      conflicted.emplace_back(p ? *p + 1 : 0, t.name);
    } else {
      produced[t.name] = v.is_exactly() ? v.mapping() : options.default_mapping();
    }
  }
  std::stable_sort(conflicted.begin(), conflicted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [order, name] : conflicted) {
    BankMapping chosen = options.default_mapping();
    if (auto it = producer_template.find(name); it != producer_template.end()) {
      chosen = it->second;
    } else if (auto d = demands.find(name); d != demands.end()) {
      // the requirement shared by most anchored consumers; ties go to the
      // one seen first in program order
      std::vector<std::pair<BankMapping, std::size_t>> counts;
      for (const auto& [n, m] : d->second) {
        auto c = std::find_if(counts.begin(), counts.end(), [&](const auto& e) { return e.first == m; });
        if (c == counts.end()) {
          counts.emplace_back(m, 1);
        } else {
          ++c->second;
        }
      }
      chosen = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
                 return a.second < b.second;
               })->first;
    } else if (order > 0 && !registry.anchored(program.nests[order - 1].kind)) {
      const ir::OperatorNest& nest = program.nests[order - 1];
      for (const auto& r : nest.read_tensors()) {
        auto in = produced.find(r);
        if (in == produced.end()) continue;
        if (auto t = transfer(in->second, nest, r, name, Direction::Forward).mapping) {
          chosen = *t;
          break;
        }
      }
    }
    produced[name] = chosen;
  }

  // A consumer of a conflict tensor needs a copy when the layout it reads in
  // differs from the chosen one. Anchored consumers read in their template;
  // the others read in the layout their own output implies.
  std::vector<CopyRequest> requests;
  for (std::size_t n = 0; n < program.nests.size(); ++n) {
    const ir::OperatorNest& nest = program.nests[n];
    const bool anchored = registry.anchored(nest.kind);
    const auto reqs = anchor_requirements(nest, registry, options.banks);
    for (const auto& tensor : nest.read_tensors()) {
      if (!on_chip(program, tensor) || nest.writes(tensor) || !state.at(tensor).is_conflict()) continue;
      if (is_rebanking(nest)) continue;  // reads in whatever layout the source has
      std::optional<BankMapping> want;
      if (anchored) {
        for (const auto& [name, m] : reqs) {
          if (name == tensor) {
            want = m;
            break;
          }
        }
      } else {
        for (const auto& w : nest.written_tensors()) {
          auto out = produced.find(w);
          if (out == produced.end()) continue;
          if ((want = transfer(out->second, nest, w, tensor, Direction::Backward).mapping)) break;
        }
      }
      if (want && *want != produced.at(tensor)) add_request(requests, tensor, *want, n);
    }
  }

  MapResult result;
  result.program = insert_copies(program, produced, requests, result.report.insertions);
  result.report.conflicts = diagnose(program, registry, state, options);
  return result;
}

MapResult run_global(const ir::Program& program, const AnchorRegistry& registry, const Options& options) {
  MappingState state = propagate(program, registry, seed_anchors(program, registry, options));
  return materialize(program, registry, state, options);
}

MapResult run_local_baseline(const ir::Program& program, const AnchorRegistry& registry, const Options& options) {
  // Each nest's own view of every on-chip operand.
  auto assigned = [&](std::size_t n, const std::string& tensor) {
    for (const auto& [name, m] : anchor_requirements(program.nests[n], registry, options.banks)) {
      if (name == tensor) return m;
    }
    return options.default_mapping();
  };
  std::map<std::string, BankMapping> produced;
  for (const auto& t : program.tensors) {
    if (!t.on_chip()) continue;
    const auto p = program.producer(t.name);
    produced[t.name] = p ? assigned(*p, t.name) : options.default_mapping();
  }
  std::vector<CopyRequest> requests;
  for (const auto& edge : ir::dependence_edges(program)) {
    if (!on_chip(program, edge.tensor)) continue;
    const BankMapping want = assigned(edge.consumer, edge.tensor);
    if (want != produced.at(edge.tensor)) add_request(requests, edge.tensor, want, edge.consumer);
  }
  MapResult result;
  result.program = insert_copies(program, produced, requests, result.report.insertions);
  return result;
}

}  // namespace memopt::bankmap
