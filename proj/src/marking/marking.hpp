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

#ifndef DHLS_MARKING_MARKING_HPP
#define DHLS_MARKING_MARKING_HPP

#include "graphs/cdg.hpp"
#include "modsched/modsched.hpp"

namespace dhls::marking {

struct MarkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A basic block whose variable-latency recurrence slice should become a
// dynamically scheduled processing element.
struct BlockMark {
  int loop = -1;
  int block = -1;
  std::vector<int> nodes;  // recurrence instructions inside the block
  std::string justification;
};

// A memory access that should go through a load-store queue.
struct MemoryMark {
  int inst_id = -1;
  int loop = -1;
  std::string array;
  std::string justification;
};

// A whole loop that should run as its own process.
struct LoopMark {
  int loop = -1;
  std::string justification;
};

// Legality of splitting off an address-generation unit for one loop's
// marked accesses.
struct AguVerdict {
  int loop = -1;
  bool can_decouple = true;
  std::string reason;
};

struct MarkingReport {
  std::vector<BlockMark> blocks;
  std::vector<MemoryMark> memory;
  std::vector<LoopMark> loops;
  std::vector<AguVerdict> agu;

  bool empty() const {
    return blocks.empty() && memory.empty() && loops.empty();
  }
};

struct MarkOptions {
  int64_t default_trip = 16;  // assumed iterations when collapsing a nest
  int path_limit = 4096;
};

// Acyclic header-to-latch block sequences within the loop. Throws MarkError
// when the path count exceeds the limit.
std::vector<std::vector<int>> enumerate_paths(const graphs::Cfg& cfg,
                                              const graphs::Loop& loop,
                                              int limit = 4096);

MarkingReport mark_function(const mir::Function& fn, const graphs::Cfg& cfg,
                            const graphs::Cdg& cdg,
                            const graphs::LoopInfo& li,
                            const graphs::Ddg& ddg,
                            const modsched::LatencyModel& lm,
                            const MarkOptions& opts = {});

// Can the address generation for this loop's marked accesses run ahead of
// the value computation? Illegal when an address or an access predicate
// (transitively) depends on a value loaded through the queue.
AguVerdict check_agu_decoupling(const mir::Function& fn,
                                const graphs::Cfg& cfg,
                                const graphs::Cdg& cdg,
                                const graphs::Loop& loop, int loop_index,
                                const graphs::Ddg& ddg,
                                const std::vector<MemoryMark>& memory);

}  // namespace dhls::marking

#endif  // DHLS_MARKING_MARKING_HPP
