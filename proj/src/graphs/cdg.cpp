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

#include "graphs/cdg.hpp"

#include <algorithm>

namespace dhls::graphs {

Cdg build_cdg(const Cfg& cfg) {
  std::vector<int> ipdom = post_dominators(cfg);
  Cdg cdg;
  cdg.deps.assign(static_cast<size_t>(cfg.num_blocks), {});
  for (int a = 0; a < cfg.num_blocks; ++a) {
    const auto& succs = cfg.succ[static_cast<size_t>(a)];
    for (size_t k = 0; k < succs.size(); ++k) {
      int b = succs[k];
      if (b != a && tree_dominates(ipdom, b, a))
        continue;  // b strictly post-dominates a
      // Walk the post-dominator tree from b up to (excluding) ipdom(a);
      // every node on the way is control-dependent on edge a->b.
      int stop = ipdom[static_cast<size_t>(a)];
      for (int w = b; w != stop; w = ipdom[static_cast<size_t>(w)]) {
        cdg.deps[static_cast<size_t>(w)].push_back(
            {a, static_cast<int>(k)});
        if (w == ipdom[static_cast<size_t>(w)]) break;  // reached the root
      }
    }
  }
  for (auto& v : cdg.deps) {
    std::sort(v.begin(), v.end(), [](const ControlDep& x, const ControlDep& y) {
      return std::tie(x.src, x.edge) < std::tie(y.src, y.edge);
    });
    v.erase(std::unique(v.begin(), v.end(),
                        [](const ControlDep& x, const ControlDep& y) {
                          return x.src == y.src && x.edge == y.edge;
                        }),
            v.end());
  }
  return cdg;
}

}  // namespace dhls::graphs
