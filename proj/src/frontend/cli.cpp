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

#include "memopt/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "memopt/dme.hpp"
#include "memopt/generators.hpp"
#include "memopt/interp.hpp"
#include "memopt/text.hpp"

namespace memopt::cli {

PipelineResult run_pipeline(const ir::Program& program, const std::string& input_name,
                            const bankmap::AnchorRegistry& registry, const PipelineOptions& options) {
  report::Json pipeline = report::Json::array(), passes = report::Json::array();
  ir::Program current = program;
  std::uint64_t eliminated = 0;
  for (const Pass pass : options.passes) {
    if (pass == Pass::Dme) {
      dme::DmeResult r = dme::run_dme(current);
      eliminated += r.eliminated_count();
      pipeline.push_back({{"pass", "dme"}, {"options", report::Json::object()}});
      passes.push_back(report::dme_pass(r));
      current = std::move(r.program);
    } else {
      const bool global = options.mode == MapMode::Global;
      const char* mode = global ? "global" : "local";
      bankmap::MapResult r = global ? bankmap::run_global(current, registry, options.bank)
                                    : bankmap::run_local_baseline(current, registry, options.bank);
      pipeline.push_back({{"pass", "bankmap"},
                          {"options",
                           {{"mode", mode},
                            {"banks", options.bank.banks},
                            {"default_policy", ir::to_string(options.bank.default_policy)}}}});
      passes.push_back(report::bankmap_pass(mode, options.bank, r.report));
      current = std::move(r.program);
    }
  }
  const traffic::TrafficReport before = traffic::account(program, options.traffic);
  traffic::TrafficReport after = traffic::account(current, options.traffic);
  after.copy_pairs_eliminated = eliminated;
  return {std::move(current), report::document(input_name, std::move(pipeline), std::move(passes), options.traffic,
                                               before, after)};
}

namespace {

// Failure that has already been explained to the user.
struct Diagnosed {};

std::string read_file(const std::string& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "memopt: cannot read " << path << "\n";
    throw Diagnosed{};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content, std::ostream& out, std::ostream& err) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << content)) {
    err << "memopt: cannot write " << path << "\n";
    throw Diagnosed{};
  }
}

// Parses and validates; every problem is reported with the file name.
ir::Program load_program(const std::string& path, std::ostream& err) {
  const std::string text = read_file(path, err);
  ir::Program program;
  try {
    program = text::parse(text);
  } catch (const text::ParseError& e) {
    err << path << ":" << e.line() << ":" << e.column() << ": " << e.message() << "\n";
    throw Diagnosed{};
  }
  const auto violations = ir::validate(program);
  for (const auto& v : violations) err << path << ": " << ir::to_string(v) << "\n";
  if (!violations.empty()) throw Diagnosed{};
  return program;
}

std::string dump(const report::Json& doc) { return doc.dump(2) + "\n"; }

std::string describe(const interp::Counterexample& c) {
  std::ostringstream os;
  os << "trial " << c.trial << " (input seed " << c.seed << ")";
  if (!c.tensor.empty()) {
    os << ": %" << c.tensor << "[";
    for (std::size_t k = 0; k < c.index.size(); ++k) os << (k ? ", " : "") << c.index[k];
    os << "] = ";
    os << (c.lhs ? std::to_string(*c.lhs) : "unwritten") << " vs " << (c.rhs ? std::to_string(*c.rhs) : "unwritten");
  }
  if (!c.note.empty()) os << ": " << c.note;
  return os.str();
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-movement elimination and memory-bank mapping for tensor loop nests", "memopt"};
  app.require_subcommand(1);

  // optimize
  CLI::App* optimize = app.add_subcommand("optimize", "Run passes on a program and write the result and a report");
  std::string opt_in, opt_out, opt_report, opt_registry, opt_mode = "global";
  std::vector<std::string> opt_passes;
  ir::Index opt_banks = 4;
  traffic::Options accounting;
  optimize->add_option("input", opt_in, "Program text")->required();
  optimize->add_option("--pass", opt_passes, "Pass to run, in order (repeatable)")
      ->required()
      ->check(CLI::IsMember({"dme", "bankmap"}));
  optimize->add_option("--mode", opt_mode, "Bank mapping algorithm")->check(CLI::IsMember({"global", "local"}));
  optimize->add_option("--banks", opt_banks, "Number of memory banks")->check(CLI::PositiveNumber);
  optimize->add_option("--registry", opt_registry, "Anchor registry file (default: built-in templates)");
  optimize->add_flag("--interbank-via-dram", accounting.interbank_via_dram,
                     "Count bank-to-bank memcopies as off-chip traffic");
  optimize->add_flag("--count-all-onchip", accounting.count_all_onchip,
                     "Count every on-chip load and store, not only copies");
  optimize->add_option("-o,--output", opt_out, "Optimized program (default: standard output)");
  optimize->add_option("--report", opt_report, "JSON report file");

  // verify
  CLI::App* verify = app.add_subcommand("verify", "Compare two programs on random inputs");
  std::string ver_a, ver_b;
  std::size_t ver_trials = 5;
  std::uint64_t ver_seed = 0;
  bool ver_serial = false;
  verify->add_option("a", ver_a, "First program")->required();
  verify->add_option("b", ver_b, "Second program")->required();
  verify->add_option("--trials", ver_trials, "Number of random input sets");
  verify->add_option("--seed", ver_seed, "Base seed for the inputs");
  verify->add_flag("--serial", ver_serial, "Run the trials one after another");

  // report
  CLI::App* rep = app.add_subcommand("report", "Traffic of a program as a JSON report");
  std::string rep_in, rep_out;
  traffic::Options rep_accounting;
  rep->add_option("input", rep_in, "Program text")->required();
  rep->add_flag("--interbank-via-dram", rep_accounting.interbank_via_dram,
                "Count bank-to-bank memcopies as off-chip traffic");
  rep->add_flag("--count-all-onchip", rep_accounting.count_all_onchip,
                "Count every on-chip load and store, not only copies");
  rep->add_option("-o,--output", rep_out, "Report file (default: standard output)");

  // gen
  CLI::App* gen = app.add_subcommand("gen", "Generate a benchmark program");
  gen->require_subcommand(1);
  std::size_t wn_pairs = 0, wn_colliding = 0, rn_blocks = 1, rn_transposes = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  CLI::App* wavenet = gen->add_subcommand("wavenet", "Chain of copy and compute nests");
  wavenet->add_option("copy_pairs", wn_pairs, "Number of copy nests")->required();
  wavenet->add_option("non_invertible", wn_colliding, "How many of them collide")->required();
  CLI::App* resnet = gen->add_subcommand("resnet", "Chain of conv2d blocks with transposes between them");
  resnet->add_option("blocks", rn_blocks, "Number of conv2d nests")->required()->check(CLI::PositiveNumber);
  resnet->add_option("transposes_between", rn_transposes, "Transposes after each conv2d")->required();
  for (CLI::App* g : {wavenet, resnet}) {
    g->add_option("--seed", gen_seed, "Generator seed");
    g->add_option("-o,--output", gen_out, "Output file (default: standard output)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (optimize->parsed()) {
      PipelineOptions options;
      for (const auto& p : opt_passes) options.passes.push_back(p == "dme" ? Pass::Dme : Pass::Bankmap);
      options.mode = opt_mode == "local" ? MapMode::Local : MapMode::Global;
      options.bank.banks = opt_banks;
      options.traffic = accounting;
      bankmap::AnchorRegistry registry = bankmap::AnchorRegistry::defaults();
      if (!opt_registry.empty()) {
        try {
          registry = bankmap::AnchorRegistry::parse(read_file(opt_registry, err));
        } catch (const std::invalid_argument& e) {
          err << opt_registry << ": " << e.what() << "\n";
          return kExitDiagnostics;
        }
      }
      const ir::Program program = load_program(opt_in, err);
      PipelineResult result;
      try {
        result = run_pipeline(program, opt_in, registry, options);
      } catch (const bankmap::BankmapError& e) {
        err << opt_in << ": " << e.what() << "\n";
        return kExitDiagnostics;
      }
      write_output(opt_out, text::print(result.program), out, err);
      if (!opt_report.empty()) write_output(opt_report, dump(result.report), out, err);
      return kExitOk;
    }

    if (verify->parsed()) {
      const ir::Program a = load_program(ver_a, err);
      const ir::Program b = load_program(ver_b, err);
      const interp::Equivalence eq =
          interp::equivalent(a, b, ver_trials, ver_seed, ver_serial ? Exec::Serial : Exec::Parallel);
      if (eq.equal) {
        out << "equivalent: " << ver_trials << " trials, seed " << ver_seed << "\n";
        return kExitOk;
      }
      out << "not equivalent: " << describe(*eq.counterexample) << "\n";
      return kExitDiagnostics;
    }

    if (rep->parsed()) {
      const ir::Program program = load_program(rep_in, err);
      const traffic::TrafficReport t = traffic::account(program, rep_accounting);
      write_output(rep_out,
                   dump(report::document(rep_in, report::Json::array(), report::Json::array(), rep_accounting, t, t)),
                   out, err);
      return kExitOk;
    }

    if (wavenet->parsed()) {
      if (wn_colliding > wn_pairs) {
        err << "memopt gen wavenet: non_invertible (" << wn_colliding << ") exceeds copy_pairs (" << wn_pairs << ")\n";
        return kExitUsage;
      }
      write_output(gen_out, text::print(gen::wavenet_analog(wn_pairs, wn_colliding, gen_seed)), out, err);
      return kExitOk;
    }
    if (resnet->parsed()) {
      write_output(gen_out, text::print(gen::resnet_analog(rn_blocks, rn_transposes, gen_seed)), out, err);
      return kExitOk;
    }
  } catch (const Diagnosed&) {
    return kExitDiagnostics;
  }
  return kExitUsage;
}

}  // namespace memopt::cli
