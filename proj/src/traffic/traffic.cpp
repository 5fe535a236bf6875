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

#include "memopt/traffic.hpp"

#include <map>
#include <variant>

namespace memopt::traffic {

TrafficReport account(const ir::Program& program, const Options& options) {
  TrafficReport r;
  r.intermediate_tensor_bytes = program.intermediate_bytes();
  r.copy_pairs_total = ir::find_copy_pairs(program).size();

  auto bytes = [&](const std::string& tensor, std::uint64_t points) -> std::uint64_t {
    const ir::TensorDecl* t = program.find_tensor(tensor);
    return t == nullptr ? 0 : points * static_cast<std::uint64_t>(t->elem_size);
  };
  auto on_chip = [&](const std::string& tensor) {
    const ir::TensorDecl* t = program.find_tensor(tensor);
    return t != nullptr && t->on_chip();
  };

  for (const auto& nest : program.nests) {
    NestTraffic n{nest.name};
    const std::uint64_t points = nest.box.cardinality();
    std::map<std::string, std::string> loaded_from;  // value id -> tensor
    for (const auto& st : nest.body) {
      if (const auto* l = std::get_if<ir::Load>(&st)) {
        loaded_from[l->result] = l->tensor;
        if (!on_chip(l->tensor)) {
          n.off_chip_bytes += bytes(l->tensor, points);
        } else if (options.count_all_onchip) {
          n.on_chip_copy_bytes += bytes(l->tensor, points);
        }
      } else if (const auto* w = std::get_if<ir::Store>(&st)) {
        if (!on_chip(w->tensor)) {
          n.off_chip_bytes += bytes(w->tensor, points);
        } else if (options.count_all_onchip) {
          n.on_chip_copy_bytes += bytes(w->tensor, points);
        } else if (ir::is_copy_kind(nest.kind)) {
          auto src = loaded_from.find(w->value);
          if (src != loaded_from.end() && on_chip(src->second)) n.on_chip_copy_bytes += bytes(w->tensor, points);
        }
      } else if (const auto* m = std::get_if<ir::Memcopy>(&st)) {
        ++r.memcopies_inserted;
        const bool src_on = on_chip(m->src), dst_on = on_chip(m->dst);
        if (!src_on) n.off_chip_bytes += bytes(m->src, points);
        if (!dst_on) n.off_chip_bytes += bytes(m->dst, points);
        if (src_on && dst_on) {
          if (options.interbank_via_dram) {
            n.off_chip_bytes += bytes(m->dst, points);
          } else {
            n.on_chip_copy_bytes += bytes(m->dst, points) * (options.count_all_onchip ? 2 : 1);
          }
        }
      }
    }
    r.off_chip_bytes += n.off_chip_bytes;
    r.on_chip_copy_bytes += n.on_chip_copy_bytes;
    r.per_nest.push_back(std::move(n));
  }
  return r;
}

std::vector<FieldDelta> compare(const TrafficReport& before, const TrafficReport& after) {
  std::vector<FieldDelta> out;
  auto add = [&](const char* name, std::uint64_t b, std::uint64_t a) {
    FieldDelta d{name, b, a, static_cast<std::int64_t>(a) - static_cast<std::int64_t>(b), std::nullopt};
    if (b != 0) d.percent = 100.0 * static_cast<double>(d.delta) / static_cast<double>(b);
    out.push_back(std::move(d));
  };
  add("off_chip_bytes", before.off_chip_bytes, after.off_chip_bytes);
  add("on_chip_copy_bytes", before.on_chip_copy_bytes, after.on_chip_copy_bytes);
  add("intermediate_tensor_bytes", before.intermediate_tensor_bytes, after.intermediate_tensor_bytes);
  add("copy_pairs_total", before.copy_pairs_total, after.copy_pairs_total);
  add("copy_pairs_eliminated", before.copy_pairs_eliminated, after.copy_pairs_eliminated);
  add("memcopies_inserted", before.memcopies_inserted, after.memcopies_inserted);
  return out;
}

}  // namespace memopt::traffic
