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

#include "marking/marking.hpp"

#include <algorithm>

#include "mir/parser.hpp"
#include <map>
#include <set>
#include <sstream>

namespace dhls::marking {

using graphs::Cdg;
using graphs::Cfg;
using graphs::Ddg;
using graphs::DdgEdge;
using graphs::Loop;
using graphs::LoopInfo;
using mir::Instruction;
using mir::Opcode;

namespace {

std::vector<int> insts_of_block(const mir::Function& fn, int b) {
  std::vector<int> ids;
  for (const auto& inst : fn.blocks[static_cast<size_t>(b)].insts)
    ids.push_back(inst.id);
  return ids;
}

std::vector<int> path_insts(const mir::Function& fn,
                            const std::vector<int>& path) {
  std::vector<int> ids;
  for (int b : path)
    for (const auto& inst : fn.blocks[static_cast<size_t>(b)].insts)
      ids.push_back(inst.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

int ii_of(const Ddg& ddg, const std::vector<int>& nodes,
          const modsched::LatencyModel& lm, bool with_memory) {
  if (with_memory) return modsched::calculate_ii(modsched::subgraph(ddg, nodes, lm));
  Ddg filtered;
  filtered.fn = ddg.fn;
  filtered.num_nodes = ddg.num_nodes;
  for (const auto& e : ddg.edges)
    if (e.kind != DdgEdge::Kind::Memory) filtered.edges.push_back(e);
  filtered.out.assign(static_cast<size_t>(filtered.num_nodes), {});
  return modsched::calculate_ii(modsched::subgraph(filtered, nodes, lm));
}

// Maps for def lookup.
struct FnMaps {
  std::vector<int> def;                   // ValueId -> inst id, -1 params
  std::vector<const Instruction*> inst;   // by inst id
  std::vector<int> block;                 // inst id -> block
};

FnMaps build_maps(const mir::Function& fn) {
  FnMaps m;
  m.def.assign(static_cast<size_t>(fn.num_values()), -1);
  int count = 0;
  fn.for_each_inst([&](const Instruction&) { ++count; });
  m.inst.assign(static_cast<size_t>(count), nullptr);
  m.block.assign(static_cast<size_t>(count), -1);
  for (size_t b = 0; b < fn.blocks.size(); ++b)
    for (const auto& inst : fn.blocks[b].insts) {
      m.inst[static_cast<size_t>(inst.id)] = &inst;
      m.block[static_cast<size_t>(inst.id)] = static_cast<int>(b);
      if (inst.result != mir::kNoValue)
        m.def[static_cast<size_t>(inst.result)] = inst.id;
    }
  return m;
}

std::string labels_of(const mir::Function& fn, const std::vector<int>& path) {
  std::string s;
  for (size_t i = 0; i < path.size(); ++i) {
    if (i) s += " ";
    s += "^" + fn.blocks[static_cast<size_t>(path[i])].label;
  }
  return s;
}

bool is_exiting(const Loop& loop, int b) {
  return std::find(loop.exiting.begin(), loop.exiting.end(), b) !=
         loop.exiting.end();
}

}  // namespace

std::vector<std::vector<int>> enumerate_paths(const Cfg& cfg, const Loop& loop,
                                              int limit) {
  std::vector<std::vector<int>> paths;
  std::vector<int> cur = {loop.header};
  std::set<int> on_path = {loop.header};
  struct Frame {
    int block;
    size_t next = 0;
  };
  std::vector<Frame> stack = {{loop.header, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.block == loop.latch && f.next == 0) {
      paths.push_back(cur);
      if (static_cast<int>(paths.size()) > limit)
        throw MarkError("control-flow path explosion in loop at block " +
                        std::to_string(loop.header));
    }
    const auto& succs = cfg.succ[static_cast<size_t>(f.block)];
    bool descended = false;
    while (f.next < succs.size()) {
      int s = succs[f.next++];
      if (!loop.contains(s) || s == loop.header || on_path.count(s)) continue;
      if (f.block == loop.latch) continue;  // paths end at the latch
      cur.push_back(s);
      on_path.insert(s);
      stack.push_back({s, 0});
      descended = true;
      break;
    }
    if (!descended && stack.back().next >= succs.size()) {
      on_path.erase(stack.back().block);
      cur.pop_back();
      stack.pop_back();
    }
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

AguVerdict check_agu_decoupling(const mir::Function& fn, const Cfg& cfg,
                                const Cdg& cdg, const Loop& loop,
                                int loop_index, const Ddg& ddg,
                                const std::vector<MemoryMark>& memory) {
  (void)cfg;
  AguVerdict v;
  v.loop = loop_index;
  FnMaps maps = build_maps(fn);

  std::set<int> marked_ids;
  std::set<int> marked_loads;
  for (const auto& m : memory) {
    if (m.loop != loop_index) continue;
    marked_ids.insert(m.inst_id);
    if (maps.inst[static_cast<size_t>(m.inst_id)]->op == Opcode::Load)
      marked_loads.insert(m.inst_id);
  }
  if (marked_ids.empty()) {
    v.reason = "no queued accesses";
    return v;
  }

  // Everything data-derived from a queued load's value.
  std::set<int> derived(marked_loads);
  std::vector<int> work(marked_loads.begin(), marked_loads.end());
  while (!work.empty()) {
    int n = work.back();
    work.pop_back();
    for (int e : ddg.out[static_cast<size_t>(n)]) {
      const DdgEdge& edge = ddg.edges[static_cast<size_t>(e)];
      if (edge.kind != DdgEdge::Kind::Data) continue;
      if (derived.insert(edge.dst).second) work.push_back(edge.dst);
    }
  }

  // Backward slice of each queued access's address and predicates: every
  // value the address generator must compute on its own.
  for (int m : marked_ids) {
    const Instruction& acc = *maps.inst[static_cast<size_t>(m)];
    std::vector<mir::ValueId> starts;
    starts.push_back(acc.op == Opcode::Load ? acc.operands[0]
                                            : acc.operands[1]);
    std::set<int> seen_blocks;
    std::set<int> slice;
    std::vector<int> blocks = {maps.block[static_cast<size_t>(m)]};
    std::vector<int> todo;
    auto push_value = [&](mir::ValueId val) {
      int d = maps.def[static_cast<size_t>(val)];
      if (d >= 0 && slice.insert(d).second) todo.push_back(d);
    };
    for (auto s : starts) push_value(s);
    while (!todo.empty() || !blocks.empty()) {
      while (!blocks.empty()) {
        int b = blocks.back();
        blocks.pop_back();
        if (!seen_blocks.insert(b).second) continue;
        for (const auto& dep : cdg.deps[static_cast<size_t>(b)]) {
          if (!loop.contains(dep.src)) continue;
          const Instruction& t =
              fn.blocks[static_cast<size_t>(dep.src)].terminator();
          if (t.op == Opcode::CondBr) push_value(t.operands[0]);
          blocks.push_back(dep.src);
        }
      }
      if (todo.empty()) break;
      int n = todo.back();
      todo.pop_back();
      const Instruction& inst = *maps.inst[static_cast<size_t>(n)];
      for (auto opnd : inst.operands) push_value(opnd);
      int b = maps.block[static_cast<size_t>(n)];
      if (loop.contains(b)) blocks.push_back(b);
    }
    for (int s : slice) {
      if (derived.count(s)) {
        const Instruction& culprit = *maps.inst[static_cast<size_t>(s)];
        std::ostringstream os;
        os << "address/predicate of "
           << mir::inst_to_string(fn, acc) << " needs "
           << mir::inst_to_string(fn, culprit)
           << ", which derives from a queued load";
        v.can_decouple = false;
        v.reason = os.str();
        return v;
      }
    }
  }
  v.reason = "addresses and predicates are independent of queued loads";
  return v;
}

MarkingReport mark_function(const mir::Function& fn, const Cfg& cfg,
                            const Cdg& cdg, const LoopInfo& li, const Ddg& ddg,
                            const modsched::LatencyModel& lm,
                            const MarkOptions& opts) {
  MarkingReport rep;
  FnMaps maps = build_maps(fn);

  for (size_t lx = 0; lx < li.loops.size(); ++lx) {
    const Loop& loop = li.loops[lx];
    if (!loop.children.empty()) continue;  // innermost loops only
    auto paths = enumerate_paths(cfg, loop, opts.path_limit);
    std::vector<int> loop_nodes = ddg.loop_nodes(loop);

    // Union of the recurrence (cyclic SCC) members.
    std::set<int> cyclic;
    for (const auto& scc : graphs::ddg_sccs(ddg, loop_nodes)) {
      bool is_cyclic = scc.size() > 1;
      if (!is_cyclic)
        for (const auto& e : ddg.edges)
          if (e.src == scc[0] && e.dst == scc[0]) is_cyclic = true;
      if (is_cyclic) cyclic.insert(scc.begin(), scc.end());
    }

    // ---- block marking ----
    std::map<int, BlockMark> block_marks;
    for (const auto& path : paths) {
      std::vector<int> nodes = path_insts(fn, path);
      int path_ii = ii_of(ddg, nodes, lm, true);
      if (path_ii <= 1) continue;
      for (int bb : path) {
        // C1: the block is guarded by an in-loop branch other than the
        // loop exit condition.
        bool c1 = false;
        for (const auto& dep : cdg.deps[static_cast<size_t>(bb)])
          if (loop.contains(dep.src) && !is_exiting(loop, dep.src)) c1 = true;
        if (!c1) continue;
        // C2: the block's operations are on the critical recurrence.
        std::set<int> bb_ids;
        for (int id : insts_of_block(fn, bb)) bb_ids.insert(id);
        std::vector<int> rest;
        for (int id : nodes)
          if (!bb_ids.count(id)) rest.push_back(id);
        int rest_ii = ii_of(ddg, rest, lm, true);
        if (rest_ii >= path_ii) continue;
        std::vector<int> collect;
        for (int id : insts_of_block(fn, bb))
          if (cyclic.count(id) &&
              !maps.inst[static_cast<size_t>(id)]->is_terminator())
            collect.push_back(id);
        if (collect.empty()) continue;
        auto [it, fresh] = block_marks.try_emplace(bb);
        BlockMark& bm = it->second;
        if (fresh) {
          bm.loop = static_cast<int>(lx);
          bm.block = bb;
          std::ostringstream os;
          os << "on path [" << labels_of(fn, path) << "] the II is "
             << path_ii << " but only " << rest_ii << " without ^"
             << fn.blocks[static_cast<size_t>(bb)].label
             << "; the block is conditional, so a dynamic PE recovers the "
                "fast iterations";
          bm.justification = os.str();
        }
        for (int id : collect)
          if (std::find(bm.nodes.begin(), bm.nodes.end(), id) ==
              bm.nodes.end())
            bm.nodes.push_back(id);
      }
    }
    for (auto& [bb, bm] : block_marks) {
      std::sort(bm.nodes.begin(), bm.nodes.end());
      rep.blocks.push_back(std::move(bm));
    }

    // ---- memory marking ----
    std::map<int, std::string> mem_marks;
    fn.for_each_inst([&](const Instruction& inst) {
      if (!inst.is_memory()) return;
      if (!loop.contains(maps.block[static_cast<size_t>(inst.id)])) return;
      if (inst.dist.kind == mir::DistAnnotation::Kind::Unknown)
        mem_marks.try_emplace(inst.id,
                              "dependence distance on %" + inst.base_array +
                                  " is statically unknown");
    });
    for (const auto& path : paths) {
      std::vector<int> nodes = path_insts(fn, path);
      int with_mem = ii_of(ddg, nodes, lm, true);
      int without_mem = ii_of(ddg, nodes, lm, false);
      if (with_mem <= without_mem) continue;
      std::set<int> node_set(nodes.begin(), nodes.end());
      for (const auto& e : ddg.edges) {
        if (e.kind != DdgEdge::Kind::Memory || e.distance < 1) continue;
        if (!node_set.count(e.src) || !node_set.count(e.dst)) continue;
        std::ostringstream os;
        os << "loop-carried memory dependence raises the II of path ["
           << labels_of(fn, path) << "] from " << without_mem << " to "
           << with_mem;
        mem_marks.try_emplace(e.src, os.str());
        mem_marks.try_emplace(e.dst, os.str());
      }
    }
    // Base-array closure: every access to a queued array uses the queue.
    std::set<std::string> arrays;
    for (const auto& [id, why] : mem_marks)
      arrays.insert(maps.inst[static_cast<size_t>(id)]->base_array);
    fn.for_each_inst([&](const Instruction& inst) {
      if (!inst.is_memory() || !arrays.count(inst.base_array)) return;
      if (!loop.contains(maps.block[static_cast<size_t>(inst.id)])) return;
      mem_marks.try_emplace(inst.id, "shares %" + inst.base_array +
                                         " with a queued access");
    });
    for (const auto& [id, why] : mem_marks) {
      MemoryMark mm;
      mm.inst_id = id;
      mm.loop = static_cast<int>(lx);
      mm.array = maps.inst[static_cast<size_t>(id)]->base_array;
      mm.justification = why;
      rep.memory.push_back(std::move(mm));
    }
    if (!mem_marks.empty())
      rep.agu.push_back(check_agu_decoupling(fn, cfg, cdg, loop,
                                             static_cast<int>(lx), ddg,
                                             rep.memory));
  }

  // ---- loop marking ----
  std::map<int, std::string> loop_marks;
  // (a) an inner nest sitting on an outer recurrence serializes the outer
  // loop; decoupling the nest lets the outer loop pipeline around it.
  for (size_t lx = 0; lx < li.loops.size(); ++lx) {
    const Loop& parent = li.loops[lx];
    if (parent.children.empty()) continue;
    std::set<int> child_blocks;
    for (int c : parent.children)
      for (int b : li.loops[static_cast<size_t>(c)].blocks)
        child_blocks.insert(b);
    std::vector<int> own;
    for (int b : parent.blocks)
      if (!child_blocks.count(b))
        for (const auto& inst : fn.blocks[static_cast<size_t>(b)].insts)
          own.push_back(inst.id);
    std::sort(own.begin(), own.end());
    modsched::IIGraph base = modsched::subgraph(ddg, own, lm);
    int ii_base = modsched::calculate_ii(base);
    std::map<int, int> local;
    for (size_t k = 0; k < own.size(); ++k)
      local.emplace(own[k], static_cast<int>(k));
    for (int c : parent.children) {
      const Loop& child = li.loops[static_cast<size_t>(c)];
      int64_t child_cycles =
          modsched::estimate_cycles(ddg, li, c, lm, opts.default_trip);
      modsched::IIGraph g = base;
      int super = g.n++;
      g.latency.push_back(static_cast<int>(child_cycles));
      for (const auto& e : ddg.edges) {
        bool src_own = local.count(e.src), dst_own = local.count(e.dst);
        bool src_child =
            child.contains(maps.block[static_cast<size_t>(e.src)]);
        bool dst_child =
            child.contains(maps.block[static_cast<size_t>(e.dst)]);
        if (src_own && dst_child)
          g.edges.push_back({local[e.src], super, e.distance,
                             base.latency[static_cast<size_t>(local[e.src])]});
        else if (src_child && dst_own)
          g.edges.push_back({super, local[e.dst], e.distance,
                             static_cast<int>(child_cycles)});
      }
      int ii_with = modsched::calculate_ii(g);
      if (ii_with > ii_base) {
        std::ostringstream os;
        os << "nest at ^"
           << fn.blocks[static_cast<size_t>(child.header)].label
           << " sits on a recurrence of loop ^"
           << fn.blocks[static_cast<size_t>(parent.header)].label
           << " (II " << ii_base << " -> " << ii_with
           << " when collapsed); run it as its own process";
        loop_marks.try_emplace(c, os.str());
      }
    }
  }
  // (b) independent sibling loops can run concurrently.
  {
    // Forward data reachability per loop.
    auto reach_from = [&](const Loop& l) {
      std::set<int> seen;
      std::vector<int> work;
      for (int b : l.blocks)
        for (const auto& inst : fn.blocks[static_cast<size_t>(b)].insts) {
          seen.insert(inst.id);
          work.push_back(inst.id);
        }
      while (!work.empty()) {
        int n = work.back();
        work.pop_back();
        for (int e : ddg.out[static_cast<size_t>(n)])
          if (seen.insert(ddg.edges[static_cast<size_t>(e)].dst).second)
            work.push_back(ddg.edges[static_cast<size_t>(e)].dst);
      }
      return seen;
    };
    auto arrays_of = [&](const Loop& l, bool stores_only) {
      std::set<std::string> out;
      for (int b : l.blocks)
        for (const auto& inst : fn.blocks[static_cast<size_t>(b)].insts) {
          if (!inst.is_memory()) continue;
          if (stores_only && inst.op != Opcode::Store) continue;
          out.insert(inst.base_array);
        }
      return out;
    };
    for (size_t a = 0; a < li.loops.size(); ++a) {
      for (size_t b = a + 1; b < li.loops.size(); ++b) {
        const Loop& la = li.loops[a];
        const Loop& lb = li.loops[b];
        if (la.parent != lb.parent) continue;
        std::set<int> ra = reach_from(la), rb = reach_from(lb);
        bool dependent = false;
        for (int bx : lb.blocks)
          for (const auto& inst : fn.blocks[static_cast<size_t>(bx)].insts)
            if (ra.count(inst.id)) dependent = true;
        for (int bx : la.blocks)
          for (const auto& inst : fn.blocks[static_cast<size_t>(bx)].insts)
            if (rb.count(inst.id)) dependent = true;
        auto sa = arrays_of(la, true), sb = arrays_of(lb, true);
        for (const auto& arr : arrays_of(la, false))
          if (sb.count(arr)) dependent = true;
        for (const auto& arr : arrays_of(lb, false))
          if (sa.count(arr)) dependent = true;
        if (dependent) continue;
        std::string why =
            "independent of sibling loop; both can run concurrently as "
            "separate processes";
        loop_marks.try_emplace(static_cast<int>(a), why);
        loop_marks.try_emplace(static_cast<int>(b), why);
      }
    }
  }
  for (const auto& [lx, why] : loop_marks)
    rep.loops.push_back({lx, why});

  return rep;
}

}  // namespace dhls::marking
