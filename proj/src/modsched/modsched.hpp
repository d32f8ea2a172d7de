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

#ifndef DHLS_MODSCHED_MODSCHED_HPP
#define DHLS_MODSCHED_MODSCHED_HPP

#include <map>

#include "graphs/ddg.hpp"

namespace dhls::modsched {

struct SchedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cycle latencies per operation. Calls take theirs from the lat(k)
// attribute. Control, constants, phis and channel ops are free: phis fold
// into the pipeline registers and channel handshakes complete in the cycle
// the port fires (transport delay belongs to the channel, not the op).
struct LatencyModel {
  std::map<mir::Opcode, int> table;
  static LatencyModel defaults();
  int latency(const mir::Instruction& inst) const;
};

// Dependence graph for initiation-interval analysis. `delay` is the edge's
// timing contribution (normally the source latency) and `dist` the
// iteration distance.
struct IIGraph {
  struct Edge {
    int src = 0, dst = 0;
    int dist = 0;
    int delay = 0;
  };
  int n = 0;
  std::vector<int> latency;  // per node, for schedule lengths
  std::vector<Edge> edges;
};

// Minimum initiation interval: max over dependence cycles C of
// ceil(delay(C) / distance(C)), at least 1. Throws SchedError on a cycle
// with positive delay and zero distance.
int calculate_ii(const IIGraph& g);

// IIGraph over a DDG node subset; node k of the result is nodes[k].
// Channel ops within the same block get chaining edges so their schedule
// offsets are strictly increasing in program order.
IIGraph subgraph(const graphs::Ddg& ddg, const std::vector<int>& nodes,
                 const LatencyModel& lm);

struct LoopSchedule {
  int ii = 1;
  int length = 0;           // completion time of one iteration (L)
  std::vector<int> offset;  // by instruction id; -1 for non-loop insts
};

// Modulo schedule of one loop at its recurrence-constrained II: ASAP
// offsets subject to offset[dst] >= offset[src] + delay - II * dist.
LoopSchedule schedule_loop(const graphs::Ddg& ddg, const graphs::Loop& loop,
                           const LatencyModel& lm);

// Steady-state cycle estimate of one execution of the loop nest rooted at
// `loop_index`, with every loop running `trip_count` iterations. Innermost
// loops pipeline at their II; outer loops run their body sequentially, one
// inner-loop execution per iteration per child.
int64_t estimate_cycles(const graphs::Ddg& ddg, const graphs::LoopInfo& li,
                        int loop_index, const LatencyModel& lm,
                        int64_t trip_count);

}  // namespace dhls::modsched

#endif  // DHLS_MODSCHED_MODSCHED_HPP
