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

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "memopt/bankmap.hpp"

namespace memopt::bankmap {

std::string load_role(std::size_t k) { return "load" + std::to_string(k); }
std::string store_role(std::size_t k) { return "store" + std::to_string(k); }

AnchorRegistry AnchorRegistry::defaults() {
  AnchorRegistry r;
  r.set(OpKind::Conv2d, "load0", {2, Policy::Cyclic});
  r.set(OpKind::Conv2d, "load1", {0, Policy::Cyclic});
  r.set(OpKind::Conv2d, "store0", {2, Policy::Cyclic});
  r.set(OpKind::Matmul, "load0", {1, Policy::Cyclic});
  r.set(OpKind::Matmul, "load1", {0, Policy::Cyclic});
  r.set(OpKind::Matmul, "store0", {1, Policy::Cyclic});
  r.set(OpKind::Pooling, "load0", {2, Policy::Cyclic});
  r.set(OpKind::Pooling, "store0", {2, Policy::Cyclic});
  return r;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_role(std::string_view role) {
  std::string_view digits;
  if (role.starts_with("load")) {
    digits = role.substr(4);
  } else if (role.starts_with("store")) {
    digits = role.substr(5);
  } else {
    return false;
  }
  return !digits.empty() && digits.find_first_not_of("0123456789") == std::string_view::npos;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw std::invalid_argument("anchor registry line " + std::to_string(line) + ": " + msg);
}

}  // namespace

AnchorRegistry AnchorRegistry::parse(std::string_view text) {
  AnchorRegistry r;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected '<kind>.<role> = <axis> <policy>'");
    const std::string_view key = trim(line.substr(0, eq));
    const auto dot = key.find('.');
    if (dot == std::string_view::npos) fail(line_no, "key must be <kind>.<role>");
    const auto kind = ir::parse_op_kind(key.substr(0, dot));
    if (!kind) fail(line_no, "unknown operator kind '" + std::string(key.substr(0, dot)) + "'");
    const std::string_view role = key.substr(dot + 1);
    if (!valid_role(role)) fail(line_no, "role must be load<k> or store<k>");

    std::istringstream rhs{std::string(trim(line.substr(eq + 1)))};
    std::string axis_text, policy_text, extra;
    rhs >> axis_text >> policy_text;
    if (axis_text.empty() || policy_text.empty() || (rhs >> extra)) fail(line_no, "value must be '<axis> <policy>'");
    std::size_t axis = 0;
    const auto [ptr, ec] = std::from_chars(axis_text.data(), axis_text.data() + axis_text.size(), axis);
    if (ec != std::errc{} || ptr != axis_text.data() + axis_text.size()) fail(line_no, "axis must be a non-negative integer");
    const auto policy = ir::parse_policy(policy_text);
    if (!policy) fail(line_no, "policy must be cyclic or blocked");
    r.set(*kind, std::string(role), {axis, *policy});
  }
  return r;
}

AnchorRegistry AnchorRegistry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open anchor registry " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void AnchorRegistry::set(OpKind kind, const std::string& role, Template t) { templates_[kind][role] = t; }

bool AnchorRegistry::anchored(OpKind kind) const noexcept {
  auto it = templates_.find(kind);
  return it != templates_.end() && !it->second.empty();
}

std::optional<Template> AnchorRegistry::lookup(OpKind kind, std::string_view role) const {
  auto it = templates_.find(kind);
  if (it == templates_.end()) return std::nullopt;
  auto jt = it->second.find(role);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

std::string AnchorRegistry::to_text() const {
  std::ostringstream os;
  for (const auto& [kind, roles] : templates_) {
    for (const auto& [role, t] : roles) {
      os << ir::to_string(kind) << '.' << role << " = " << t.axis << ' ' << ir::to_string(t.policy) << '\n';
    }
  }
  return os.str();
}

std::vector<std::pair<std::string, BankMapping>> anchor_requirements(const ir::OperatorNest& nest,
                                                                     const AnchorRegistry& registry, ir::Index banks) {
  std::vector<std::pair<std::string, BankMapping>> out;
  if (!registry.anchored(nest.kind)) return out;
  auto add = [&](const std::string& tensor, const std::string& role) {
    const auto t = registry.lookup(nest.kind, role);
    if (!t) return;
    for (const auto& [name, m] : out) {
      if (name == tensor) return;
    }
    out.emplace_back(tensor, BankMapping{t->axis, banks, t->policy});
  };
  const auto reads = nest.read_tensors();
  for (std::size_t k = 0; k < reads.size(); ++k) add(reads[k], load_role(k));
  const auto writes = nest.written_tensors();
  for (std::size_t k = 0; k < writes.size(); ++k) add(writes[k], store_role(k));
  return out;
}

}  // namespace memopt::bankmap
