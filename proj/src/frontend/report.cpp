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

#include "memopt/report.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>

namespace memopt::report {

Json to_json(const traffic::TrafficReport& r) {
  Json per_nest = Json::array();
  for (const auto& n : r.per_nest) {
    per_nest.push_back({{"nest", n.nest}, {"off_chip_bytes", n.off_chip_bytes}, {"on_chip_copy_bytes", n.on_chip_copy_bytes}});
  }
  return {{"off_chip_bytes", r.off_chip_bytes},
          {"on_chip_copy_bytes", r.on_chip_copy_bytes},
          {"intermediate_tensor_bytes", r.intermediate_tensor_bytes},
          {"copy_pairs_total", r.copy_pairs_total},
          {"copy_pairs_eliminated", r.copy_pairs_eliminated},
          {"memcopies_inserted", r.memcopies_inserted},
          {"per_nest", std::move(per_nest)}};
}

Json to_json(const std::vector<traffic::FieldDelta>& deltas) {
  Json out = Json::array();
  for (const auto& d : deltas) {
    out.push_back({{"field", d.field},
                   {"before", d.before},
                   {"after", d.after},
                   {"delta", d.delta},
                   {"percent", d.percent ? Json(*d.percent) : Json(nullptr)}});
  }
  return out;
}

Json to_json(const dme::EliminationRecord& r) {
  return {{"tensor", r.tensor},
          {"source", r.source},
          {"nest", r.nest},
          {"bytes", r.bytes},
          {"rewritten_loads", r.rewritten_loads},
          {"status", r.eliminated() ? "eliminated" : "skipped"},
          {"reason", r.skipped ? Json(dme::to_string(*r.skipped)) : Json(nullptr)},
          {"detail", r.detail}};
}

Json to_json(const ir::BankMapping& m) {
  return {{"axis", m.axis}, {"banks", m.banks}, {"policy", ir::to_string(m.policy)}};
}

Json to_json(const bankmap::Insertion& i) {
  return {{"tensor", i.tensor},   {"copy", i.copy}, {"mapping", to_json(i.mapping)},
          {"consumers", i.consumers}, {"nest", i.nest}, {"bytes", i.bytes}};
}

Json to_json(const bankmap::ConflictInfo& c) {
  Json reqs = Json::array();
  for (const auto& r : c.requirements) reqs.push_back({{"mapping", to_json(r.mapping)}, {"origin", r.origin}});
  return {{"tensor", c.tensor}, {"requirements", std::move(reqs)}, {"inherited_from", c.inherited_from}};
}

Json dme_pass(const dme::DmeResult& result) {
  Json records = Json::array();
  for (const auto& r : result.records) records.push_back(to_json(r));
  return {{"pass", "dme"},
          {"iterations", result.iterations},
          {"eliminated", result.eliminated_count()},
          {"eliminated_bytes", result.eliminated_bytes()},
          {"records", std::move(records)}};
}

Json bankmap_pass(const std::string& mode, const bankmap::Options& options, const bankmap::InsertionReport& report) {
  Json insertions = Json::array(), conflicts = Json::array();
  for (const auto& i : report.insertions) insertions.push_back(to_json(i));
  for (const auto& c : report.conflicts) conflicts.push_back(to_json(c));
  return {{"pass", "bankmap"},
          {"mode", mode},
          {"banks", options.banks},
          {"memcopy_bytes", report.memcopy_bytes()},
          {"insertions", std::move(insertions)},
          {"conflicts", std::move(conflicts)}};
}

Json document(const std::string& input, Json pipeline, Json passes, const traffic::Options& accounting,
              const traffic::TrafficReport& before, const traffic::TrafficReport& after) {
  return {{"schema", kSchemaVersion},
          {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
          {"input", input},
          {"pipeline", std::move(pipeline)},
          {"passes", std::move(passes)},
          {"accounting",
           {{"count_all_onchip", accounting.count_all_onchip}, {"interbank_via_dram", accounting.interbank_via_dram}}},
          {"traffic", {{"before", to_json(before)}, {"after", to_json(after)}}},
          {"compare", to_json(traffic::compare(before, after))}};
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Checker {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  // Object with exactly these keys.
  bool object(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    bool ok = true;
    for (const char* k : keys) {
      if (!j.contains(k)) {
        fail(path, std::string("missing property \"") + k + "\"");
        ok = false;
      }
    }
    for (const auto& [k, v] : j.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* want) { return k == want; })) {
        fail(path, "unexpected property \"" + k + "\"");
        ok = false;
      }
    }
    return ok;
  }

  void string(const Json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
  }
  void counter(const Json& j, const std::string& path, std::uint64_t min = 0) {
    const bool ok = j.is_number_unsigned() ? j.get<std::uint64_t>() >= min
                                           : j.is_number_integer() && j.get<std::int64_t>() >= static_cast<std::int64_t>(min);
    if (!ok) {
      fail(path, "expected an integer >= " + std::to_string(min));
    }
  }
  void integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
  }
  void one_of(const Json& j, const std::string& path, std::initializer_list<const char*> values) {
    if (!j.is_string() || std::none_of(values.begin(), values.end(), [&](const char* v) { return j == v; })) {
      fail(path, "unexpected value " + j.dump());
    }
  }
  template <typename Fn>
  void array(const Json& j, const std::string& path, Fn&& item) {
    if (!j.is_array()) {
      fail(path, "expected an array");
      return;
    }
    for (std::size_t k = 0; k < j.size(); ++k) item(j[k], path + "/" + std::to_string(k));
  }
  void strings(const Json& j, const std::string& path) {
    array(j, path, [&](const Json& s, const std::string& p) { string(s, p); });
  }

  void mapping(const Json& j, const std::string& path) {
    if (!object(j, path, {"axis", "banks", "policy"})) return;
    counter(j["axis"], path + "/axis");
    counter(j["banks"], path + "/banks", 1);
    one_of(j["policy"], path + "/policy", {"cyclic", "blocked"});
  }

  void traffic(const Json& j, const std::string& path) {
    if (!object(j, path,
                {"off_chip_bytes", "on_chip_copy_bytes", "intermediate_tensor_bytes", "copy_pairs_total",
                 "copy_pairs_eliminated", "memcopies_inserted", "per_nest"})) {
      return;
    }
    for (const char* k : {"off_chip_bytes", "on_chip_copy_bytes", "intermediate_tensor_bytes", "copy_pairs_total",
                          "copy_pairs_eliminated", "memcopies_inserted"}) {
      counter(j[k], path + "/" + k);
    }
    array(j["per_nest"], path + "/per_nest", [&](const Json& n, const std::string& p) {
      if (!object(n, p, {"nest", "off_chip_bytes", "on_chip_copy_bytes"})) return;
      string(n["nest"], p + "/nest");
      counter(n["off_chip_bytes"], p + "/off_chip_bytes");
      counter(n["on_chip_copy_bytes"], p + "/on_chip_copy_bytes");
    });
  }

  void dme_pass(const Json& j, const std::string& path) {
    if (!object(j, path, {"pass", "iterations", "eliminated", "eliminated_bytes", "records"})) return;
    counter(j["iterations"], path + "/iterations");
    counter(j["eliminated"], path + "/eliminated");
    counter(j["eliminated_bytes"], path + "/eliminated_bytes");
    array(j["records"], path + "/records", [&](const Json& r, const std::string& p) {
      if (!object(r, p, {"tensor", "source", "nest", "bytes", "rewritten_loads", "status", "reason", "detail"})) return;
      for (const char* k : {"tensor", "source", "nest", "detail"}) string(r[k], p + "/" + k);
      counter(r["bytes"], p + "/bytes");
      counter(r["rewritten_loads"], p + "/rewritten_loads");
      one_of(r["status"], p + "/status", {"eliminated", "skipped"});
      if (!r["reason"].is_null()) {
        one_of(r["reason"], p + "/reason",
               {"NotInvertible", "NotTotalCover", "EscapingOutput", "CompositionUnrepresentable"});
      }
    });
  }

  void bankmap_pass(const Json& j, const std::string& path) {
    if (!object(j, path, {"pass", "mode", "banks", "memcopy_bytes", "insertions", "conflicts"})) return;
    one_of(j["mode"], path + "/mode", {"global", "local"});
    counter(j["banks"], path + "/banks", 1);
    counter(j["memcopy_bytes"], path + "/memcopy_bytes");
    array(j["insertions"], path + "/insertions", [&](const Json& i, const std::string& p) {
      if (!object(i, p, {"tensor", "copy", "mapping", "consumers", "nest", "bytes"})) return;
      for (const char* k : {"tensor", "copy", "nest"}) string(i[k], p + "/" + k);
      mapping(i["mapping"], p + "/mapping");
      strings(i["consumers"], p + "/consumers");
      counter(i["bytes"], p + "/bytes");
    });
    array(j["conflicts"], path + "/conflicts", [&](const Json& c, const std::string& p) {
      if (!object(c, p, {"tensor", "requirements", "inherited_from"})) return;
      string(c["tensor"], p + "/tensor");
      array(c["requirements"], p + "/requirements", [&](const Json& r, const std::string& q) {
        if (!object(r, q, {"mapping", "origin"})) return;
        mapping(r["mapping"], q + "/mapping");
        string(r["origin"], q + "/origin");
      });
      strings(c["inherited_from"], p + "/inherited_from");
    });
  }
};

}  // namespace

std::vector<std::string> validate_report(const Json& doc) {
  Checker c;
  if (!c.object(doc, "", {"schema", "tool", "input", "pipeline", "passes", "accounting", "traffic", "compare"})) return c.errors;
  if (doc["schema"] != kSchemaVersion) c.fail("/schema", "expected " + std::to_string(kSchemaVersion));
  if (c.object(doc["tool"], "/tool", {"name", "version"})) {
    c.string(doc["tool"]["name"], "/tool/name");
    c.string(doc["tool"]["version"], "/tool/version");
  }
  c.string(doc["input"], "/input");
  c.array(doc["pipeline"], "/pipeline", [&](const Json& s, const std::string& p) {
    if (!c.object(s, p, {"pass", "options"})) return;
    c.one_of(s["pass"], p + "/pass", {"dme", "bankmap"});
    if (!s["options"].is_object()) c.fail(p + "/options", "expected an object");
  });
  c.array(doc["passes"], "/passes", [&](const Json& s, const std::string& p) {
    if (!s.is_object() || !s.contains("pass")) {
      c.fail(p, "expected an object with a \"pass\" property");
    } else if (s["pass"] == "dme") {
      c.dme_pass(s, p);
    } else if (s["pass"] == "bankmap") {
      c.bankmap_pass(s, p);
    } else {
      c.fail(p + "/pass", "unexpected value " + s["pass"].dump());
    }
  });
  if (c.object(doc["accounting"], "/accounting", {"count_all_onchip", "interbank_via_dram"})) {
    for (const char* k : {"count_all_onchip", "interbank_via_dram"}) {
      if (!doc["accounting"][k].is_boolean()) c.fail(std::string("/accounting/") + k, "expected a boolean");
    }
  }
  if (c.object(doc["traffic"], "/traffic", {"before", "after"})) {
    c.traffic(doc["traffic"]["before"], "/traffic/before");
    c.traffic(doc["traffic"]["after"], "/traffic/after");
  }
  c.array(doc["compare"], "/compare", [&](const Json& d, const std::string& p) {
    if (!c.object(d, p, {"field", "before", "after", "delta", "percent"})) return;
    c.one_of(d["field"], p + "/field",
             {"off_chip_bytes", "on_chip_copy_bytes", "intermediate_tensor_bytes", "copy_pairs_total",
              "copy_pairs_eliminated", "memcopies_inserted"});
    c.counter(d["before"], p + "/before");
    c.counter(d["after"], p + "/after");
    c.integer(d["delta"], p + "/delta");
    if (!d["percent"].is_null() && !d["percent"].is_number()) c.fail(p + "/percent", "expected a number or null");
  });
  return c.errors;
}

}  // namespace memopt::report
