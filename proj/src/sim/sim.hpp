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

#ifndef DHLS_SIM_SIM_HPP
#define DHLS_SIM_SIM_HPP

#include <map>

#include "lsq/lsq.hpp"
#include "mir/interp.hpp"
#include "modsched/modsched.hpp"

namespace dhls::sim {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  int64_t max_cycles = 10'000'000;
  int channel_transport = 0;  // extra cycles before a written value is visible
  lsq::LsqConfig lsq;
  bool trace_lsq = false;
  modsched::LatencyModel lm = modsched::LatencyModel::defaults();
};

struct ProcessStats {
  std::string name;
  int64_t active_cycles = 0;
  int64_t stall_cycles = 0;
  // Achieved initiation interval per loop (header label), averaged over the
  // executed iterations of the busiest instance of that loop.
  std::map<std::string, double> loop_ii;
  std::map<std::string, int64_t> iterations;
  std::map<std::string, int64_t> stall_causes;  // channel -> stalled cycles
};

struct SimReport {
  int64_t cycles = 0;
  bool deadlock = false;
  std::string deadlock_reason;
  std::vector<ProcessStats> processes;
  std::map<std::string, int> channel_high_water;
  mir::FinalState result;  // main process return values and final arrays
  std::string lsq_trace_csv;
};

// Cycle-accurate simulation. Programs without a network section run as a
// single statically scheduled pipeline (innermost loops at their II);
// programs with one run as a process network over bounded channels with
// behavioral load-store queues.
SimReport simulate(const mir::Program& program, const mir::Inputs& inputs,
                   const SimConfig& config = {});

}  // namespace dhls::sim

#endif  // DHLS_SIM_SIM_HPP
