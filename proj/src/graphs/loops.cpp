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

#include "graphs/loops.hpp"

#include <algorithm>
#include <set>

namespace dhls::graphs {

LoopInfo build_loop_info(const Cfg& cfg) {
  std::vector<int> idom = dominators(cfg);
  LoopInfo li;

  // Natural loops from back edges (latch -> header where header dominates
  // the latch). Normalized functions have exactly one latch per header.
  for (int latch = 0; latch < cfg.num_blocks; ++latch) {
    for (int header : cfg.succ[static_cast<size_t>(latch)]) {
      if (!tree_dominates(idom, header, latch)) continue;
      for (const Loop& l : li.loops)
        if (l.header == header)
          throw GraphError("loop with multiple latches at block " +
                           std::to_string(header));
      Loop loop;
      loop.header = header;
      loop.latch = latch;
      std::set<int> body = {header, latch};
      std::vector<int> work = {latch};
      while (!work.empty()) {
        int b = work.back();
        work.pop_back();
        if (b == header) continue;
        for (int p : cfg.pred[static_cast<size_t>(b)])
          if (body.insert(p).second) work.push_back(p);
      }
      loop.blocks.assign(body.begin(), body.end());
      li.loops.push_back(std::move(loop));
    }
  }

  // Nesting: the parent is the smallest strict superset.
  for (size_t i = 0; i < li.loops.size(); ++i) {
    int best = -1;
    size_t best_size = SIZE_MAX;
    for (size_t j = 0; j < li.loops.size(); ++j) {
      if (i == j) continue;
      const auto& a = li.loops[j].blocks;
      if (a.size() <= li.loops[i].blocks.size()) continue;
      if (std::includes(a.begin(), a.end(), li.loops[i].blocks.begin(),
                        li.loops[i].blocks.end()) &&
          a.size() < best_size) {
        best = static_cast<int>(j);
        best_size = a.size();
      }
    }
    li.loops[i].parent = best;
  }
  for (auto& l : li.loops) {
    l.depth = 1;
    for (int p = l.parent; p >= 0; p = li.loops[static_cast<size_t>(p)].parent)
      ++l.depth;
  }

  // Deterministic outer-first order; remap parent links afterwards.
  std::vector<int> order(li.loops.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Loop& la = li.loops[static_cast<size_t>(a)];
    const Loop& lb = li.loops[static_cast<size_t>(b)];
    return std::tie(la.depth, la.header) < std::tie(lb.depth, lb.header);
  });
  std::vector<int> pos(li.loops.size());
  for (size_t i = 0; i < order.size(); ++i)
    pos[static_cast<size_t>(order[i])] = static_cast<int>(i);
  std::vector<Loop> sorted;
  sorted.reserve(li.loops.size());
  for (int i : order) sorted.push_back(std::move(li.loops[static_cast<size_t>(i)]));
  li.loops = std::move(sorted);
  for (auto& l : li.loops)
    if (l.parent >= 0) l.parent = pos[static_cast<size_t>(l.parent)];
  for (size_t i = 0; i < li.loops.size(); ++i)
    if (li.loops[i].parent >= 0)
      li.loops[static_cast<size_t>(li.loops[i].parent)].children.push_back(
          static_cast<int>(i));

  // Exits and preheaders.
  for (auto& l : li.loops) {
    std::set<int> targets;
    for (int b : l.blocks) {
      bool is_exiting = false;
      for (int s : cfg.succ[static_cast<size_t>(b)])
        if (!l.contains(s)) {
          is_exiting = true;
          targets.insert(s);
        }
      if (is_exiting) l.exiting.push_back(b);
    }
    l.exit_targets.assign(targets.begin(), targets.end());
    for (int p : cfg.pred[static_cast<size_t>(l.header)]) {
      if (l.contains(p)) continue;
      if (l.preheader >= 0)
        throw GraphError("loop header " + std::to_string(l.header) +
                         " has multiple entry edges");
      l.preheader = p;
    }
  }

  // Innermost loop per block (loops are outer-first, so later wins).
  li.innermost.assign(static_cast<size_t>(cfg.num_blocks), -1);
  for (size_t i = 0; i < li.loops.size(); ++i)
    for (int b : li.loops[i].blocks)
      li.innermost[static_cast<size_t>(b)] = static_cast<int>(i);
  return li;
}

}  // namespace dhls::graphs
