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

#include "memopt/dme.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <variant>

namespace memopt::dme {

using affine::QuasiAffineMap;

const char* to_string(SkipReason reason) noexcept {
  switch (reason) {
    case SkipReason::NotInvertible: return "NotInvertible";
    case SkipReason::NotTotalCover: return "NotTotalCover";
    case SkipReason::EscapingOutput: return "EscapingOutput";
    case SkipReason::CompositionUnrepresentable: return "CompositionUnrepresentable";
  }
  return "?";
}

namespace {

struct Rewrite {
  std::size_t nest;
  std::size_t statement;
  QuasiAffineMap access;
};

struct Plan {
  std::vector<Rewrite> rewrites;
};

using Outcome = std::variant<Plan, std::pair<SkipReason, std::string>>;

std::pair<SkipReason, std::string> skip(SkipReason r, std::string detail) { return {r, std::move(detail)}; }

// Decides whether the pair can go and, if so, computes every rewritten
// access without touching the program.
Outcome plan(const ir::Program& program, const ir::CopyPair& pair, const Options& options) {
  const ir::OperatorNest& nest = program.nests[pair.nest];
  const auto& load = std::get<ir::Load>(nest.body[pair.load]);
  const auto& store = std::get<ir::Store>(nest.body[pair.store]);
  const ir::TensorDecl* ts = program.find_tensor(store.tensor);

  if (ts->is_output()) return skip(SkipReason::EscapingOutput, "%" + ts->name + " is a model output");
  if (load.tensor == store.tensor) {
    return skip(SkipReason::CompositionUnrepresentable, "load and store target the same tensor");
  }
  const auto writers = std::count_if(nest.body.begin(), nest.body.end(), [&](const ir::Statement& st) {
    const auto* w = std::get_if<ir::Store>(&st);
    return w != nullptr && w->tensor == store.tensor;
  });
  if (writers > 1) return skip(SkipReason::NotTotalCover, "%" + ts->name + " is written by several stores");

  const affine::InverseResult inverse = affine::reverse(store.access, options.limits);
  if (!inverse.invertible()) return skip(SkipReason::NotInvertible, inverse.reason());
  if (!inverse.image().equals_box(ts->box())) {
    return skip(SkipReason::NotTotalCover, "the store covers " + std::to_string(inverse.image().cardinality()) + " of " +
                                               std::to_string(ts->elements()) + " elements of %" + ts->name);
  }
  if (inverse.kind() == affine::InverseResult::Kind::Tabulated) {
    return skip(SkipReason::CompositionUnrepresentable, "the store map has only a tabulated inverse");
  }

  Plan p;
  try {
    // g_ls maps an index of ts to the index of tl holding the same value.
    const QuasiAffineMap g_ls = affine::compose(load.access, inverse.map(), options.limits);
    if (g_ls.is_tabulated()) {
      return skip(SkipReason::CompositionUnrepresentable, "load map composed with the inverse needs a table");
    }
    for (std::size_t n = 0; n < program.nests.size(); ++n) {
      if (n == pair.nest) continue;
      const auto& body = program.nests[n].body;
      for (std::size_t s = 0; s < body.size(); ++s) {
        const QuasiAffineMap* access = nullptr;
        if (const auto* l = std::get_if<ir::Load>(&body[s]); l && l->tensor == ts->name) access = &l->access;
        if (const auto* m = std::get_if<ir::Memcopy>(&body[s]); m && m->src == ts->name) access = &m->map;
        if (access == nullptr) continue;
        QuasiAffineMap g = affine::compose(g_ls, *access, options.limits);
        if (g.is_tabulated()) {
          return skip(SkipReason::CompositionUnrepresentable,
                      "rewritten access in nest " + program.nests[n].name + " needs a table");
        }
        p.rewrites.push_back({n, s, std::move(g)});
      }
    }
  } catch (const affine::AffineError& e) {
    return skip(SkipReason::CompositionUnrepresentable, e.what());
  }
  return p;
}

// Drops loads and computes whose results feed nothing.
void remove_dead_values(ir::OperatorNest& nest) {
  std::set<std::string> live;
  std::vector<ir::Statement> kept;
  for (auto it = nest.body.rbegin(); it != nest.body.rend(); ++it) {
    if (const auto* w = std::get_if<ir::Store>(&*it)) {
      live.insert(w->value);
    } else if (const auto* c = std::get_if<ir::Compute>(&*it)) {
      if (!live.contains(c->result)) continue;
      live.insert(c->operands.begin(), c->operands.end());
    } else if (const auto* l = std::get_if<ir::Load>(&*it)) {
      if (!live.contains(l->result)) continue;
    }
    kept.push_back(std::move(*it));
  }
  std::reverse(kept.begin(), kept.end());
  nest.body = std::move(kept);
}

void apply(ir::Program& program, const ir::CopyPair& pair, Plan plan) {
  const std::string source = std::get<ir::Load>(program.nests[pair.nest].body[pair.load]).tensor;
  const std::string target = std::get<ir::Store>(program.nests[pair.nest].body[pair.store]).tensor;
  for (auto& r : plan.rewrites) {
    ir::Statement& st = program.nests[r.nest].body[r.statement];
    if (auto* l = std::get_if<ir::Load>(&st)) {
      l->tensor = source;
      l->access = std::move(r.access);
    } else if (auto* m = std::get_if<ir::Memcopy>(&st)) {
      m->src = source;
      m->map = std::move(r.access);
    }
  }
  ir::OperatorNest& nest = program.nests[pair.nest];
  nest.body.erase(nest.body.begin() + static_cast<std::ptrdiff_t>(pair.store));
  remove_dead_values(nest);
  if (nest.written_tensors().empty()) {
    program.nests.erase(program.nests.begin() + static_cast<std::ptrdiff_t>(pair.nest));
  }
  std::erase_if(program.tensors, [&](const ir::TensorDecl& t) { return t.name == target; });
}

EliminationRecord base_record(const ir::Program& program, const ir::CopyPair& pair) {
  const ir::OperatorNest& nest = program.nests[pair.nest];
  const auto& load = std::get<ir::Load>(nest.body[pair.load]);
  const auto& store = std::get<ir::Store>(nest.body[pair.store]);
  EliminationRecord rec;
  rec.tensor = store.tensor;
  rec.source = load.tensor;
  rec.nest = nest.name;
  if (const ir::TensorDecl* ts = program.find_tensor(store.tensor)) rec.bytes = ts->bytes();
  return rec;
}

}  // namespace

PairResult try_eliminate_pair(const ir::Program& program, const ir::CopyPair& pair, const Options& options) {
  PairResult out{program, base_record(program, pair)};
  Outcome o = plan(program, pair, options);
  if (auto* s = std::get_if<std::pair<SkipReason, std::string>>(&o)) {
    out.record.skipped = s->first;
    out.record.detail = std::move(s->second);
    return out;
  }
  Plan& p = std::get<Plan>(o);
  out.record.rewritten_loads = p.rewrites.size();
  apply(out.program, pair, std::move(p));
  return out;
}

std::size_t DmeResult::eliminated_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const EliminationRecord& r) { return r.eliminated(); }));
}

std::uint64_t DmeResult::eliminated_bytes() const {
  std::uint64_t total = 0;
  for (const auto& r : records) {
    if (r.eliminated()) total += r.bytes;
  }
  return total;
}

DmeResult run_dme(const ir::Program& program, const Options& options) {
  DmeResult result{program, {}, 0};
  std::map<std::string, std::size_t> index;
  auto record = [&](EliminationRecord rec) {
    auto [it, inserted] = index.try_emplace(rec.tensor, result.records.size());
    if (inserted) {
      result.records.push_back(std::move(rec));
    } else {
      result.records[it->second] = std::move(rec);
    }
  };
  while (true) {
    const std::vector<ir::CopyPair> pairs = ir::find_copy_pairs(result.program);
    if (pairs.empty()) break;
    ++result.iterations;
    bool progress = false;
    for (const auto& pair : pairs) {
      EliminationRecord rec = base_record(result.program, pair);
      Outcome o = plan(result.program, pair, options);
      if (auto* s = std::get_if<std::pair<SkipReason, std::string>>(&o)) {
        rec.skipped = s->first;
        rec.detail = std::move(s->second);
        record(std::move(rec));
        continue;
      }
      Plan& p = std::get<Plan>(o);
      rec.rewritten_loads = p.rewrites.size();
      apply(result.program, pair, std::move(p));
      record(std::move(rec));
      progress = true;
      break;
    }
    if (!progress) break;
  }
  return result;
}

}  // namespace memopt::dme
