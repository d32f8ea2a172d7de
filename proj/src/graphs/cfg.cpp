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

#include "graphs/cfg.hpp"

#include <algorithm>

namespace dhls::graphs {

Cfg build_cfg(const mir::Function& fn) {
  Cfg cfg;
  cfg.fn = &fn;
  int n = static_cast<int>(fn.blocks.size());
  cfg.num_blocks = n + 1;
  cfg.synthetic_exit = n;
  cfg.succ.assign(static_cast<size_t>(cfg.num_blocks), {});
  cfg.pred.assign(static_cast<size_t>(cfg.num_blocks), {});
  auto add_edge = [&](int a, int b) {
    cfg.succ[static_cast<size_t>(a)].push_back(b);
    cfg.pred[static_cast<size_t>(b)].push_back(a);
  };
  for (int b = 0; b < n; ++b) {
    const mir::Instruction& t = fn.blocks[static_cast<size_t>(b)].terminator();
    if (t.op == mir::Opcode::Ret) {
      add_edge(b, cfg.synthetic_exit);
    } else {
      for (int s : t.succ_blocks) add_edge(b, s);
    }
  }
  return cfg;
}

namespace {

// Iterative dominator dataflow over an explicit edge view; `preds` are the
// predecessors in the direction being solved (reversed for post-dominance).
std::vector<int> solve_idom(int n, int root,
                            const std::vector<std::vector<int>>& preds,
                            const std::vector<std::vector<int>>& succs) {
  // Reachability from the root along `succs`.
  std::vector<char> reach(static_cast<size_t>(n), 0);
  std::vector<int> stack = {root};
  reach[static_cast<size_t>(root)] = 1;
  while (!stack.empty()) {
    int b = stack.back();
    stack.pop_back();
    for (int s : succs[static_cast<size_t>(b)])
      if (!reach[static_cast<size_t>(s)]) {
        reach[static_cast<size_t>(s)] = 1;
        stack.push_back(s);
      }
  }

  // dom[b] as bitsets; unreachable nodes are excluded from meets.
  std::vector<std::vector<char>> dom(
      static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 1));
  std::fill(dom[static_cast<size_t>(root)].begin(),
            dom[static_cast<size_t>(root)].end(), 0);
  dom[static_cast<size_t>(root)][static_cast<size_t>(root)] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = 0; b < n; ++b) {
      if (b == root || !reach[static_cast<size_t>(b)]) continue;
      std::vector<char> meet(static_cast<size_t>(n), 1);
      bool any = false;
      for (int p : preds[static_cast<size_t>(b)]) {
        if (!reach[static_cast<size_t>(p)]) continue;
        any = true;
        for (int k = 0; k < n; ++k)
          meet[static_cast<size_t>(k)] =
              meet[static_cast<size_t>(k)] & dom[static_cast<size_t>(p)]
                                                [static_cast<size_t>(k)];
      }
      if (!any) std::fill(meet.begin(), meet.end(), 0);
      meet[static_cast<size_t>(b)] = 1;
      if (meet != dom[static_cast<size_t>(b)]) {
        dom[static_cast<size_t>(b)] = std::move(meet);
        changed = true;
      }
    }
  }

  // idom[b] = the dominator of b (≠ b) dominated by all other dominators.
  std::vector<int> idom(static_cast<size_t>(n), -1);
  idom[static_cast<size_t>(root)] = root;
  for (int b = 0; b < n; ++b) {
    if (b == root || !reach[static_cast<size_t>(b)]) continue;
    for (int c = 0; c < n; ++c) {
      if (c == b || !dom[static_cast<size_t>(b)][static_cast<size_t>(c)])
        continue;
      bool strictest = true;
      for (int d = 0; d < n; ++d) {
        if (d == b || d == c) continue;
        if (dom[static_cast<size_t>(b)][static_cast<size_t>(d)] &&
            !dom[static_cast<size_t>(c)][static_cast<size_t>(d)]) {
          strictest = false;
          break;
        }
      }
      if (strictest) {
        idom[static_cast<size_t>(b)] = c;
        break;
      }
    }
  }
  return idom;
}

}  // namespace

std::vector<int> dominators(const Cfg& cfg) {
  return solve_idom(cfg.num_blocks, 0, cfg.pred, cfg.succ);
}

std::vector<int> post_dominators(const Cfg& cfg) {
  std::vector<int> ipdom =
      solve_idom(cfg.num_blocks, cfg.synthetic_exit, cfg.succ, cfg.pred);
  // Blocks with no path to the exit (infinite loops): anchor them at the
  // synthetic exit so CDG construction stays total.
  for (int b = 0; b < cfg.num_blocks; ++b)
    if (ipdom[static_cast<size_t>(b)] < 0)
      ipdom[static_cast<size_t>(b)] = cfg.synthetic_exit;
  return ipdom;
}

bool tree_dominates(const std::vector<int>& idom, int a, int b) {
  while (true) {
    if (a == b) return true;
    int up = idom[static_cast<size_t>(b)];
    if (up < 0 || up == b) return false;
    b = up;
  }
}

}  // namespace dhls::graphs
