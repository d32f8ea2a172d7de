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

#ifndef DHLS_GRAPHS_CDG_HPP
#define DHLS_GRAPHS_CDG_HPP

#include "graphs/cfg.hpp"

namespace dhls::graphs {

// One control dependence: `block` executes or not depending on which
// successor edge (`src` -> succ[src][edge]) the branch in `src` takes.
struct ControlDep {
  int src = -1;
  int edge = -1;
};

struct Cdg {
  // deps[b] = branches b is control-dependent on, deduplicated and sorted
  // by (src, edge). Indexed like the Cfg (synthetic exit included, unused).
  std::vector<std::vector<ControlDep>> deps;

  bool depends_on(int block, int src) const {
    for (const auto& d : deps[static_cast<size_t>(block)])
      if (d.src == src) return true;
    return false;
  }
};

// Ferrante-Ottenstein-Warren construction over the post-dominator tree.
Cdg build_cdg(const Cfg& cfg);

}  // namespace dhls::graphs

#endif  // DHLS_GRAPHS_CDG_HPP
