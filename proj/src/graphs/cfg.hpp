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

#ifndef DHLS_GRAPHS_CFG_HPP
#define DHLS_GRAPHS_CFG_HPP

#include <stdexcept>
#include <vector>

#include "mir/ir.hpp"

namespace dhls::graphs {

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Control-flow graph with a synthetic exit node appended after the function
// blocks so post-dominance is well defined for multi-ret functions.
struct Cfg {
  const mir::Function* fn = nullptr;
  int num_blocks = 0;      // includes the synthetic exit
  int synthetic_exit = 0;  // == num_blocks - 1
  std::vector<std::vector<int>> succ, pred;
};

Cfg build_cfg(const mir::Function& fn);

// Immediate dominators; idom[entry] == entry, unreachable nodes get -1.
std::vector<int> dominators(const Cfg& cfg);

// Immediate post-dominators w.r.t. the synthetic exit. Nodes with no path
// to the exit get the synthetic exit as their immediate post-dominator.
std::vector<int> post_dominators(const Cfg& cfg);

// a dominates b under the idom array (reflexive).
bool tree_dominates(const std::vector<int>& idom, int a, int b);

}  // namespace dhls::graphs

#endif  // DHLS_GRAPHS_CFG_HPP
