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

// The JSON report written by the command-line tool. Its layout is fixed by
// docs/report.schema.json; validate_report checks the same rules in C++.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "memopt/bankmap.hpp"
#include "memopt/dme.hpp"
#include "memopt/traffic.hpp"

namespace memopt::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolName = "memopt";
inline constexpr const char* kToolVersion = "0.1.0";

Json to_json(const traffic::TrafficReport& report);
Json to_json(const std::vector<traffic::FieldDelta>& deltas);
Json to_json(const dme::EliminationRecord& record);
Json to_json(const ir::BankMapping& mapping);
Json to_json(const bankmap::Insertion& insertion);
Json to_json(const bankmap::ConflictInfo& conflict);

/// One entry of the "passes" array.
Json dme_pass(const dme::DmeResult& result);
Json bankmap_pass(const std::string& mode, const bankmap::Options& options, const bankmap::InsertionReport& report);

/// A complete document. `pipeline` lists the passes with their options in
/// order; `passes` holds one result entry per pipeline step; `accounting`
/// records how the traffic figures were counted.
Json document(const std::string& input, Json pipeline, Json passes, const traffic::Options& accounting,
              const traffic::TrafficReport& before, const traffic::TrafficReport& after);

/// Every rule of the published schema that `doc` breaks, as "path: message".
/// Empty means valid.
std::vector<std::string> validate_report(const Json& doc);

}  // namespace memopt::report
