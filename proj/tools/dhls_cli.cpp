// Copyright 2026 The dhls Authors
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

// Command-line front end over the dhls C interface.
//
// Exit codes: 0 success, 1 user error (bad file, bad config, bad flags),
// 2 internal failure (invariant violation, equivalence mismatch).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dhls/dhls.h"

namespace {

constexpr int kUserError = 1;
constexpr int kInternalError = 2;

struct Str {
  char* s = nullptr;
  ~Str() { dhls_string_free(s); }
};

[[noreturn]] void fail(dhls_status st) {
  std::cerr << "error: " << dhls_status_name(st) << ": " << dhls_last_error()
            << "\n";
  std::exit(st == DHLS_ERR_INTERNAL ? kInternalError : kUserError);
}

void check(dhls_status st) {
  if (st != DHLS_OK) fail(st);
}

// Assembles the effective config: the --config file (if any) plus
// command-line overrides, handed to the library as one JSON object.
struct ConfigArgs {
  std::string path;
  int64_t max_cycles = -1;
  int64_t seed = -1;
  int64_t trip = -1;

  dhls_config* build() const {
    nlohmann::json j = nlohmann::json::object();
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) {
        std::cerr << "error: cannot open config file: " << path << "\n";
        std::exit(kUserError);
      }
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        j = nlohmann::json::parse(ss.str());
      } catch (const std::exception& e) {
        std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
        std::exit(kUserError);
      }
    }
    if (max_cycles >= 0) j["max_cycles"] = max_cycles;
    if (seed >= 0) j["seed"] = seed;
    if (trip >= 0) j["trip"] = trip;
    dhls_config* cfg = nullptr;
    check(dhls_config_from_json(j.dump().c_str(), &cfg));
    return cfg;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "JSON configuration file");
    cmd->add_option("--max-cycles", max_cycles, "simulation cycle limit");
    cmd->add_option("--seed", seed, "random seed for generated inputs");
    cmd->add_option("--trip", trip, "stream length for generated inputs");
  }
};

void write_output(const std::string& out_path, const char* text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "error: cannot write " << out_path << "\n";
    std::exit(kUserError);
  }
  out << text;
}

dhls_program* load_program(const std::string& path) {
  dhls_program* p = nullptr;
  check(dhls_program_load(path.c_str(), &p));
  return p;
}

dhls_inputs* make_inputs(const dhls_program* program, const dhls_config* cfg,
                         const std::string& inputs_path,
                         const std::string& dist, int64_t seed) {
  dhls_inputs* in = nullptr;
  if (!inputs_path.empty()) {
    std::ifstream f(inputs_path);
    if (!f) {
      std::cerr << "error: cannot open inputs file: " << inputs_path << "\n";
      std::exit(kUserError);
    }
    std::stringstream ss;
    ss << f.rdbuf();
    check(dhls_inputs_from_json(ss.str().c_str(), &in));
    return in;
  }
  int kind = dist == "best" ? 1 : dist == "worst" ? 2 : 0;
  check(dhls_inputs_generate(program, cfg, static_cast<uint64_t>(seed), kind,
                             &in));
  return in;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dhls: dynamic-scheduling analysis, transformation and "
               "simulation for mini-IR programs"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "print loop schedules and the marking report as JSON");
  std::string an_file, an_out;
  ConfigArgs an_cfg;
  analyze->add_option("file", an_file, "input .mir file")->required();
  analyze->add_option("-o,--output", an_out, "output path (default stdout)");
  an_cfg.attach(analyze);

  // graph
  auto* graph = app.add_subcommand("graph", "emit a program graph as DOT");
  std::string gr_file, gr_kind = "cfg", gr_out;
  ConfigArgs gr_cfg;
  graph->add_option("file", gr_file, "input .mir file")->required();
  graph->add_option("-k,--kind", gr_kind, "cfg, cdg or ddg")
      ->check(CLI::IsMember({"cfg", "cdg", "ddg"}));
  graph->add_option("-o,--output", gr_out, "output path (default stdout)");
  gr_cfg.attach(graph);

  // transform
  auto* transform = app.add_subcommand(
      "transform", "rewrite a marked program into a process network");
  std::string tr_file, tr_out;
  ConfigArgs tr_cfg;
  transform->add_option("file", tr_file, "input .mir file")->required();
  transform->add_option("-o,--output", tr_out,
                        "output path (default stdout)");
  tr_cfg.attach(transform);

  // simulate
  auto* simulate =
      app.add_subcommand("simulate", "run a cycle-level simulation");
  std::string si_file, si_inputs, si_dist = "random", si_oracle;
  bool si_trace = false;
  ConfigArgs si_cfg;
  simulate->add_option("file", si_file, "program or network .mir file")
      ->required();
  simulate->add_option("--inputs", si_inputs,
                       "JSON inputs {\"scalars\":{},\"arrays\":{}}");
  simulate->add_option("--dist", si_dist, "generated data distribution")
      ->check(CLI::IsMember({"random", "best", "worst"}));
  simulate->add_option("--oracle", si_oracle,
                       "sequential program to check the final state against");
  simulate->add_flag("--trace-lsq", si_trace, "append LSQ trace CSV");
  si_cfg.attach(simulate);

  // bench
  auto* bench = app.add_subcommand(
      "bench", "run the benchmark corpus and compare static vs transformed");
  std::string be_dir, be_out;
  bool be_json = false;
  ConfigArgs be_cfg;
  bench->add_option("corpus", be_dir, "directory of .mir benchmarks")
      ->required();
  bench->add_flag("--json", be_json, "emit JSON instead of a table");
  bench->add_option("-o,--output", be_out, "output path (default stdout)");
  be_cfg.attach(bench);

  CLI11_PARSE(app, argc, argv);

  if (*analyze) {
    dhls_config* cfg = an_cfg.build();
    dhls_program* p = load_program(an_file);
    dhls_analysis* a = nullptr;
    check(dhls_analyze(p, cfg, &a));
    Str js{dhls_analysis_json(a)};
    write_output(an_out, js.s);
    dhls_analysis_destroy(a);
    dhls_program_destroy(p);
    dhls_config_destroy(cfg);
    return 0;
  }

  if (*graph) {
    dhls_config* cfg = gr_cfg.build();
    dhls_program* p = load_program(gr_file);
    dhls_analysis* a = nullptr;
    check(dhls_analyze(p, cfg, &a));
    Str dot{dhls_analysis_dot(a, gr_kind.c_str())};
    if (!dot.s) fail(DHLS_ERR_INVALID_ARGUMENT);
    write_output(gr_out, dot.s);
    dhls_analysis_destroy(a);
    dhls_program_destroy(p);
    dhls_config_destroy(cfg);
    return 0;
  }

  if (*transform) {
    dhls_config* cfg = tr_cfg.build();
    dhls_program* p = load_program(tr_file);
    dhls_analysis* a = nullptr;
    check(dhls_analyze(p, cfg, &a));
    dhls_program* net = nullptr;
    check(dhls_transform(a, cfg, &net));
    Str text{dhls_program_serialize(net)};
    write_output(tr_out, text.s);
    dhls_program_destroy(net);
    dhls_analysis_destroy(a);
    dhls_program_destroy(p);
    dhls_config_destroy(cfg);
    return 0;
  }

  if (*simulate) {
    dhls_config* cfg = si_cfg.build();
    dhls_program* p = load_program(si_file);
    dhls_inputs* in = make_inputs(p, cfg, si_inputs, si_dist,
                                  si_cfg.seed >= 0 ? si_cfg.seed : 1);
    dhls_report* rep = nullptr;
    check(dhls_simulate(p, in, cfg, si_trace ? 1 : 0, &rep));
    Str js{dhls_report_json(rep)};
    std::cout << js.s;
    if (si_trace) {
      Str trace{dhls_report_lsq_trace(rep)};
      if (trace.s && *trace.s) std::cout << trace.s;
    }
    int rc = 0;
    if (!si_oracle.empty()) {
      dhls_program* oracle = load_program(si_oracle);
      int match = 0;
      char* detail = nullptr;
      check(dhls_check_equivalence(oracle, in, rep, &match, &detail));
      if (!match) {
        std::cerr << "equivalence mismatch: " << (detail ? detail : "")
                  << "\n";
        rc = kInternalError;
      }
      dhls_string_free(detail);
      dhls_program_destroy(oracle);
    }
    dhls_report_destroy(rep);
    dhls_inputs_destroy(in);
    dhls_program_destroy(p);
    dhls_config_destroy(cfg);
    return rc;
  }

  if (*bench) {
    dhls_config* cfg = be_cfg.build();
    char* table = nullptr;
    char* js = nullptr;
    int all_eq = 0;
    check(dhls_bench(be_dir.c_str(), cfg, &table, &js, &all_eq));
    write_output(be_out, be_json ? js : table);
    if (!all_eq) std::cerr << "equivalence failures in the corpus run\n";
    dhls_string_free(table);
    dhls_string_free(js);
    dhls_config_destroy(cfg);
    return all_eq ? 0 : kInternalError;
  }

  return 0;
}
