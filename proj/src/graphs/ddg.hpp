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

#ifndef DHLS_GRAPHS_DDG_HPP
#define DHLS_GRAPHS_DDG_HPP

#include <optional>

#include "graphs/loops.hpp"

namespace dhls::graphs {

struct DdgEdge {
  int src = -1;  // instruction ids
  int dst = -1;
  int distance = 0;  // loop iterations of the innermost loop of src/dst
  enum class Kind { Data, Memory } kind = Kind::Data;
  bool unknown = false;  // memory edge inserted conservatively
};

// Data-dependence graph over all instructions of one function. Nodes are
// instruction ids; def-use edges carry distance 1 across loop back edges,
// memory edges come from annotations and a small affine index analysis.
struct Ddg {
  const mir::Function* fn = nullptr;
  int num_nodes = 0;  // == number of instructions
  std::vector<DdgEdge> edges;
  std::vector<std::vector<int>> out;  // per node: edge indices

  // Instruction ids of the loop body, sorted.
  std::vector<int> loop_nodes(const Loop& loop) const;
};

Ddg build_ddg(const mir::Function& fn, const Cfg& cfg, const LoopInfo& li);

// index = stride * (iteration of `loop`) + base, where the iv advances by
// `stride` each iteration. iv_phi == -1 means loop-invariant (stride 0).
struct AffineIndex {
  int iv_phi = -1;
  int64_t stride = 0;
  int64_t offset = 0;  // relative to the iv phi's value, in elements
};

std::optional<AffineIndex> affine_index(const mir::Function& fn,
                                        const Loop& loop, mir::ValueId index);

// SCCs of `edges` restricted to `nodes`; components sorted by smallest
// member, members ascending. Node ids need not be dense.
std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<int>& nodes,
    const std::vector<std::pair<int, int>>& edges);

// Convenience: SCCs of the DDG restricted to a node set.
std::vector<std::vector<int>> ddg_sccs(const Ddg& ddg,
                                       const std::vector<int>& nodes);

}  // namespace dhls::graphs

#endif  // DHLS_GRAPHS_DDG_HPP
