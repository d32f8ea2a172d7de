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

#ifndef DHLS_GRAPHS_LOOPS_HPP
#define DHLS_GRAPHS_LOOPS_HPP

#include "graphs/cfg.hpp"

namespace dhls::graphs {

struct Loop {
  int header = -1;
  int latch = -1;      // unique; the verifier rejects multi-latch loops
  int preheader = -1;  // unique; the verifier inserts one when missing
  std::vector<int> blocks;         // sorted, includes header and latch
  std::vector<int> exiting;        // blocks with a successor outside the loop
  std::vector<int> exit_targets;   // sorted, deduped blocks jumped to on exit
  int parent = -1;                 // enclosing loop, -1 for top level
  std::vector<int> children;
  int depth = 1;  // 1 = outermost

  bool contains(int block) const {
    return std::binary_search(blocks.begin(), blocks.end(), block);
  }
};

struct LoopInfo {
  std::vector<Loop> loops;     // sorted outer-first, then by header index
  std::vector<int> innermost;  // per CFG block: innermost loop index or -1

  int innermost_loop_of(int block) const {
    return innermost[static_cast<size_t>(block)];
  }
};

LoopInfo build_loop_info(const Cfg& cfg);

}  // namespace dhls::graphs

#endif  // DHLS_GRAPHS_LOOPS_HPP
