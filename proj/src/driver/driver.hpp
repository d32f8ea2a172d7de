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

#ifndef DHLS_DRIVER_DRIVER_HPP
#define DHLS_DRIVER_DRIVER_HPP

#include <string>
#include <vector>

#include "graphs/cdg.hpp"
#include "graphs/ddg.hpp"
#include "marking/marking.hpp"
#include "sim/sim.hpp"
#include "transform/transform.hpp"

namespace dhls::driver {

struct DriverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One knob file for the whole pipeline. Missing JSON fields keep their
// defaults; unknown keys and out-of-range values are rejected.
struct RunConfig {
  modsched::LatencyModel latency = modsched::LatencyModel::defaults();
  transform::TransformOptions transform;  // channel capacities, hoisting
  lsq::LsqConfig lsq;
  marking::MarkOptions marking;  // assumed trip count, path limit
  int channel_transport = 0;
  int64_t max_cycles = 10'000'000;

  // Corpus-run data shape.
  int64_t trip = 256;        // stream length fed to each benchmark
  double taken_prob = 0.5;   // conditional-update probability
  double collision = 0.25;   // key-collision rate for scatter kernels
  uint64_t seed = 1;

  sim::SimConfig sim_config() const;
};

RunConfig config_from_json_text(const std::string& text);
RunConfig load_config(const std::string& path);
std::string config_to_json_text(const RunConfig& cfg);

// Everything the analysis half of the pipeline produces for one function.
struct Analysis {
  mir::Program program;
  graphs::Cfg cfg;
  graphs::Cdg cdg;
  graphs::LoopInfo li;
  graphs::Ddg ddg;
  std::vector<modsched::LoopSchedule> schedules;  // by loop index
  marking::MarkingReport marking;

  const mir::Function& fn() const { return program.functions.front(); }
};

Analysis analyze(mir::Program program, const RunConfig& cfg = {});
Analysis analyze_file(const std::string& path, const RunConfig& cfg = {});

std::string analysis_to_json_text(const Analysis& a);
std::string sim_report_to_json_text(const sim::SimReport& rep);

// Deterministic random inputs for a corpus benchmark. `kind` selects the
// data distribution; Random uses the config's probability knobs.
enum class DataKind { Random, Best, Worst };
mir::Inputs benchmark_inputs(const mir::Function& fn, const RunConfig& cfg,
                             uint64_t seed, DataKind kind = DataKind::Random);

struct EquivalenceVerdict {
  bool match = true;
  std::string detail;  // first divergence when match == false
};

// Compares a finished simulation against the sequential oracle.
EquivalenceVerdict check_equivalence(const sim::SimReport& rep,
                                     const mir::FinalState& oracle);

struct BenchRow {
  std::string benchmark;
  std::string distribution;  // "best" | "worst"
  int64_t static_cycles = 0;
  int64_t transformed_cycles = 0;
  double speedup = 0.0;  // static / transformed
  std::string marking;   // e.g. "blocks=1 mem=0 loops=0 agu=-"
  bool equivalent = false;
  std::string detail;
};

struct CompareReport {
  std::vector<BenchRow> rows;

  bool all_equivalent() const;
  std::string to_text() const;
  std::string to_json_text() const;
};

// Runs every *.mir in `dir` (sorted by name) under the best and worst data
// distribution for that benchmark. Each row simulates the original program
// statically, the transformed network dynamically, and checks both against
// the interpreter.
CompareReport run_corpus(const std::string& dir, const RunConfig& cfg);

}  // namespace dhls::driver

#endif  // DHLS_DRIVER_DRIVER_HPP
