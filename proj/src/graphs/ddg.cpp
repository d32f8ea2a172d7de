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

#include "graphs/ddg.hpp"

#include <algorithm>
#include <map>

namespace dhls::graphs {

using mir::Instruction;
using mir::Opcode;

namespace {

struct FnIndex {
  std::vector<int> def;    // ValueId -> defining inst id (-1 for params)
  std::vector<int> block;  // inst id -> block index
  std::vector<const Instruction*> inst;  // by inst id
};

FnIndex index_function(const mir::Function& fn) {
  FnIndex ix;
  ix.def.assign(static_cast<size_t>(fn.num_values()), -1);
  int count = 0;
  fn.for_each_inst([&](const Instruction&) { ++count; });
  ix.block.assign(static_cast<size_t>(count), -1);
  ix.inst.assign(static_cast<size_t>(count), nullptr);
  for (size_t b = 0; b < fn.blocks.size(); ++b) {
    for (const auto& inst : fn.blocks[b].insts) {
      ix.block[static_cast<size_t>(inst.id)] = static_cast<int>(b);
      ix.inst[static_cast<size_t>(inst.id)] = &inst;
      if (inst.result != mir::kNoValue)
        ix.def[static_cast<size_t>(inst.result)] = inst.id;
    }
  }
  return ix;
}

bool loop_invariant(const FnIndex& ix, const Loop& loop, mir::ValueId v) {
  int d = ix.def[static_cast<size_t>(v)];
  if (d < 0) return true;  // parameter
  return !loop.contains(ix.block[static_cast<size_t>(d)]);
}

}  // namespace

std::optional<AffineIndex> affine_index(const mir::Function& fn,
                                        const Loop& loop, mir::ValueId index) {
  FnIndex ix = index_function(fn);
  int64_t offset = 0;
  mir::ValueId v = index;
  // Peel add/sub with constant right-hand sides down to a candidate iv phi.
  for (int guard = 0; guard < 64; ++guard) {
    int d = ix.def[static_cast<size_t>(v)];
    if (d < 0) return std::nullopt;
    const Instruction& inst = *ix.inst[static_cast<size_t>(d)];
    if (inst.op == Opcode::Add || inst.op == Opcode::Sub) {
      int sign = inst.op == Opcode::Sub ? -1 : 1;
      int d1 = ix.def[static_cast<size_t>(inst.operands[1])];
      if (d1 >= 0 && ix.inst[static_cast<size_t>(d1)]->op == Opcode::Const) {
        offset += sign * ix.inst[static_cast<size_t>(d1)]->imm;
        v = inst.operands[0];
        continue;
      }
      int d0 = ix.def[static_cast<size_t>(inst.operands[0])];
      if (inst.op == Opcode::Add && d0 >= 0 &&
          ix.inst[static_cast<size_t>(d0)]->op == Opcode::Const) {
        offset += ix.inst[static_cast<size_t>(d0)]->imm;
        v = inst.operands[1];
        continue;
      }
      return std::nullopt;
    }
    if (inst.op != Opcode::Phi) return std::nullopt;
    if (ix.block[static_cast<size_t>(d)] != loop.header) return std::nullopt;
    // Strided iv: the latch incoming must be phi +/- loop-invariant const.
    for (size_t k = 0; k < inst.incoming_blocks.size(); ++k) {
      if (inst.incoming_blocks[k] != loop.latch) continue;
      int du = ix.def[static_cast<size_t>(inst.operands[k])];
      if (du < 0) return std::nullopt;
      const Instruction& upd = *ix.inst[static_cast<size_t>(du)];
      if ((upd.op != Opcode::Add && upd.op != Opcode::Sub) ||
          upd.operands[0] != inst.result)
        return std::nullopt;
      int dc = ix.def[static_cast<size_t>(upd.operands[1])];
      if (dc < 0 || ix.inst[static_cast<size_t>(dc)]->op != Opcode::Const)
        return std::nullopt;
      int64_t stride = ix.inst[static_cast<size_t>(dc)]->imm;
      if (upd.op == Opcode::Sub) stride = -stride;
      if (stride == 0) return std::nullopt;
      return AffineIndex{inst.id, stride, offset};
    }
    return std::nullopt;
  }
  return std::nullopt;
}

Ddg build_ddg(const mir::Function& fn, const Cfg& cfg, const LoopInfo& li) {
  (void)cfg;
  FnIndex ix = index_function(fn);
  Ddg ddg;
  ddg.fn = &fn;
  ddg.num_nodes = static_cast<int>(ix.inst.size());

  auto add_edge = [&](int src, int dst, int dist, DdgEdge::Kind kind,
                      bool unknown) {
    ddg.edges.push_back({src, dst, dist, kind, unknown});
  };

  // Def-use edges; phi operands arriving over the back edge carry distance 1.
  fn.for_each_inst([&](const Instruction& inst) {
    for (size_t k = 0; k < inst.operands.size(); ++k) {
      int src = ix.def[static_cast<size_t>(inst.operands[k])];
      if (src < 0) continue;
      int dist = 0;
      if (inst.op == Opcode::Phi) {
        int from = inst.incoming_blocks[k];
        int phi_block = ix.block[static_cast<size_t>(inst.id)];
        for (const Loop& l : li.loops)
          if (l.header == phi_block && l.latch == from) dist = 1;
      }
      add_edge(src, inst.id, dist, DdgEdge::Kind::Data, false);
    }
  });

  // Memory edges between accesses to the same array inside the same
  // innermost loop. Inter-loop ordering is enforced structurally (loops run
  // sequentially), so no edges are needed across loops.
  for (const Loop& loop : li.loops) {
    std::map<std::string, std::vector<const Instruction*>> by_array;
    for (int b : loop.blocks) {
      if (li.innermost_loop_of(b) < 0 ||
          &li.loops[static_cast<size_t>(li.innermost_loop_of(b))] != &loop)
        continue;
      for (const auto& inst : fn.blocks[static_cast<size_t>(b)].insts)
        if (inst.is_memory()) by_array[inst.base_array].push_back(&inst);
    }
    for (auto& [array, accs] : by_array) {
      // Program order within an iteration: sort by instruction id.
      std::sort(accs.begin(), accs.end(),
                [](const Instruction* a, const Instruction* b) {
                  return a->id < b->id;
                });
      for (size_t i = 0; i < accs.size(); ++i) {
        for (size_t j = i; j < accs.size(); ++j) {
          const Instruction& a = *accs[i];
          const Instruction& b = *accs[j];
          if (a.op != Opcode::Store && b.op != Opcode::Store) continue;
          if (i == j && a.op != Opcode::Store) continue;

          using K = mir::DistAnnotation::Kind;
          bool unk_ann = a.dist.kind == K::Unknown || b.dist.kind == K::Unknown;
          bool known_a = a.dist.kind == K::Known;
          bool known_b = b.dist.kind == K::Known;
          if (known_a && known_b && a.dist.value != b.dist.value)
            throw GraphError("contradictory distance annotations on %" +
                             array);
          if (unk_ann) {
            // An unknown annotation overrides a known one on the other
            // access; the pair may conflict at any distance.
            if (i != j) add_edge(a.id, b.id, 0, DdgEdge::Kind::Memory, true);
            add_edge(b.id, a.id, 1, DdgEdge::Kind::Memory, true);
            continue;
          }
          if (known_a || known_b) {
            int64_t k = known_a ? a.dist.value : b.dist.value;
            if (k == 0) {
              if (i != j)
                add_edge(a.id, b.id, 0, DdgEdge::Kind::Memory, false);
            } else {
              add_edge(a.id, b.id, static_cast<int>(k),
                       DdgEdge::Kind::Memory, false);
            }
            continue;
          }

          mir::ValueId ia = a.op == Opcode::Store ? a.operands[1]
                                                  : a.operands[0];
          mir::ValueId ib = b.op == Opcode::Store ? b.operands[1]
                                                  : b.operands[0];
          auto affa = affine_index(fn, loop, ia);
          auto affb = affine_index(fn, loop, ib);
          bool same_value = ia == ib;
          if (affa && affb && affa->iv_phi == affb->iv_phi &&
              affa->stride == affb->stride) {
            int64_t diff = affa->offset - affb->offset;
            if (diff == 0) {
              // Same strided address each iteration: conflicts only within
              // the iteration.
              if (i != j) add_edge(a.id, b.id, 0, DdgEdge::Kind::Memory, false);
            } else if (diff % affa->stride == 0) {
              int64_t g = diff / affa->stride;
              if (g > 0)
                add_edge(a.id, b.id, static_cast<int>(g),
                         DdgEdge::Kind::Memory, false);
              else
                add_edge(b.id, a.id, static_cast<int>(-g),
                         DdgEdge::Kind::Memory, false);
            }
            continue;
          }
          if (same_value) {
            // Identical index value, but it does not advance affinely: the
            // address repeats across iterations in an unknown pattern.
            if (i != j) add_edge(a.id, b.id, 0, DdgEdge::Kind::Memory, false);
            bool invariant = loop_invariant(ix, loop, ia);
            add_edge(b.id, a.id, 1, DdgEdge::Kind::Memory, !invariant);
            continue;
          }
          // Unrelated indexes: fully conservative.
          if (i != j) add_edge(a.id, b.id, 0, DdgEdge::Kind::Memory, true);
          add_edge(b.id, a.id, 1, DdgEdge::Kind::Memory, true);
        }
      }
    }
  }

  ddg.out.assign(static_cast<size_t>(ddg.num_nodes), {});
  for (size_t e = 0; e < ddg.edges.size(); ++e)
    ddg.out[static_cast<size_t>(ddg.edges[e].src)].push_back(
        static_cast<int>(e));
  return ddg;
}

std::vector<int> Ddg::loop_nodes(const Loop& loop) const {
  std::vector<int> nodes;
  for (int b : loop.blocks)
    for (const auto& inst : fn->blocks[static_cast<size_t>(b)].insts)
      nodes.push_back(inst.id);
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<int>& nodes,
    const std::vector<std::pair<int, int>>& edges) {
  std::map<int, int> local;  // node id -> dense index
  for (int v : nodes) local.emplace(v, static_cast<int>(local.size()));
  int n = static_cast<int>(local.size());
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (const auto& [s, d] : edges) {
    auto is = local.find(s), id = local.find(d);
    if (is != local.end() && id != local.end())
      adj[static_cast<size_t>(is->second)].push_back(id->second);
  }

  // Iterative Tarjan.
  std::vector<int> index(static_cast<size_t>(n), -1),
      low(static_cast<size_t>(n), 0), comp(static_cast<size_t>(n), -1);
  std::vector<char> on_stack(static_cast<size_t>(n), 0);
  std::vector<int> stck;
  int next_index = 0, num_comps = 0;
  struct Frame {
    int v;
    size_t child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<size_t>(root)] != -1) continue;
    std::vector<Frame> frames = {{root, 0}};
    while (!frames.empty()) {
      Frame& f = frames.back();
      size_t v = static_cast<size_t>(f.v);
      if (f.child == 0) {
        index[v] = low[v] = next_index++;
        stck.push_back(f.v);
        on_stack[v] = 1;
      }
      if (f.child < adj[v].size()) {
        int w = adj[v][f.child++];
        if (index[static_cast<size_t>(w)] == -1) {
          frames.push_back({w, 0});
        } else if (on_stack[static_cast<size_t>(w)]) {
          low[v] = std::min(low[v], index[static_cast<size_t>(w)]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        while (true) {
          int w = stck.back();
          stck.pop_back();
          on_stack[static_cast<size_t>(w)] = 0;
          comp[static_cast<size_t>(w)] = num_comps;
          if (w == f.v) break;
        }
        ++num_comps;
      }
      int parent_low = low[v];
      frames.pop_back();
      if (!frames.empty()) {
        size_t p = static_cast<size_t>(frames.back().v);
        low[p] = std::min(low[p], parent_low);
      }
    }
  }

  std::vector<std::vector<int>> comps(static_cast<size_t>(num_comps));
  for (const auto& [node, dense] : local)
    comps[static_cast<size_t>(comp[static_cast<size_t>(dense)])].push_back(
        node);
  for (auto& c : comps) std::sort(c.begin(), c.end());
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  return comps;
}

std::vector<std::vector<int>> ddg_sccs(const Ddg& ddg,
                                       const std::vector<int>& nodes) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(ddg.edges.size());
  for (const auto& e : ddg.edges) edges.emplace_back(e.src, e.dst);
  return strongly_connected_components(nodes, edges);
}

}  // namespace dhls::graphs
