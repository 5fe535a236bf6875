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

// Pass pipelines and the command-line front end.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "memopt/bankmap.hpp"
#include "memopt/report.hpp"
#include "memopt/traffic.hpp"

namespace memopt::cli {

enum class Pass { Dme, Bankmap };
enum class MapMode { Global, Local };

struct PipelineOptions {
  std::vector<Pass> passes;
  MapMode mode = MapMode::Global;
  bankmap::Options bank;
  traffic::Options traffic;
};

struct PipelineResult {
  ir::Program program;
  report::Json report;
};

/// Runs the passes in order on a valid program and builds the report.
/// Throws bankmap::BankmapError when an anchored operand lacks the template
/// axis.
PipelineResult run_pipeline(const ir::Program& program, const std::string& input_name,
                            const bankmap::AnchorRegistry& registry, const PipelineOptions& options);

/// Exit codes of main().
inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitUsage = 2;

/// The `memopt` command. Subcommands: optimize, verify, report, gen.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace memopt::cli
