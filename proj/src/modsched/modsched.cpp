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

#include "modsched/modsched.hpp"

#include <algorithm>
#include <set>

namespace dhls::modsched {

using mir::Opcode;

LatencyModel LatencyModel::defaults() {
  LatencyModel lm;
  lm.table = {
      {Opcode::Const, 0},   {Opcode::Phi, 0},        {Opcode::Br, 0},
      {Opcode::CondBr, 0},  {Opcode::Ret, 0},        {Opcode::Add, 1},
      {Opcode::Sub, 1},     {Opcode::ICmp, 1},       {Opcode::Select, 1},
      {Opcode::Mul, 3},     {Opcode::Div, 8},        {Opcode::Load, 2},
      {Opcode::Store, 1},   {Opcode::ChanRead, 0},   {Opcode::ChanReadNB, 0},
      {Opcode::ChanWrite, 0},
  };
  return lm;
}

int LatencyModel::latency(const mir::Instruction& inst) const {
  if (inst.op == Opcode::Call) return inst.call_latency;
  auto it = table.find(inst.op);
  if (it == table.end())
    throw SchedError(std::string("no latency for ") + opcode_name(inst.op));
  return it->second;
}

namespace {

// True iff the constraint system offset[dst] >= offset[src] + delay-II*dist
// has no positive cycle, i.e. the II is achievable.
bool feasible(const IIGraph& g, int64_t ii, std::vector<int64_t>* out) {
  std::vector<int64_t> off(static_cast<size_t>(g.n), 0);
  for (int pass = 0; pass <= g.n; ++pass) {
    bool changed = false;
    for (const auto& e : g.edges) {
      int64_t cand = off[static_cast<size_t>(e.src)] + e.delay - ii * e.dist;
      if (cand > off[static_cast<size_t>(e.dst)]) {
        off[static_cast<size_t>(e.dst)] = cand;
        changed = true;
      }
    }
    if (!changed) {
      if (out) *out = std::move(off);
      return true;
    }
  }
  return false;
}

}  // namespace

int calculate_ii(const IIGraph& g) {
  int64_t sum_delay = 0;
  for (const auto& e : g.edges) sum_delay += std::max(e.delay, 0);
  int64_t hi = std::max<int64_t>(1, sum_delay);
  if (!feasible(g, hi, nullptr))
    throw SchedError("zero-distance dependence cycle with positive delay");
  int64_t lo = 1;
  while (lo < hi) {
    int64_t mid = lo + (hi - lo) / 2;
    if (feasible(g, mid, nullptr))
      hi = mid;
    else
      lo = mid + 1;
  }
  return static_cast<int>(lo);
}

IIGraph subgraph(const graphs::Ddg& ddg, const std::vector<int>& nodes,
                 const LatencyModel& lm) {
  IIGraph g;
  g.n = static_cast<int>(nodes.size());
  std::map<int, int> local;
  for (size_t k = 0; k < nodes.size(); ++k)
    local.emplace(nodes[k], static_cast<int>(k));
  g.latency.assign(static_cast<size_t>(g.n), 0);
  const mir::Function& fn = *ddg.fn;
  fn.for_each_inst([&](const mir::Instruction& inst) {
    auto it = local.find(inst.id);
    if (it != local.end())
      g.latency[static_cast<size_t>(it->second)] = lm.latency(inst);
  });
  for (const auto& e : ddg.edges) {
    auto is = local.find(e.src), id = local.find(e.dst);
    if (is == local.end() || id == local.end()) continue;
    g.edges.push_back({is->second, id->second, e.distance,
                       g.latency[static_cast<size_t>(is->second)]});
  }
  // Channel ops in one block fire on strictly increasing cycles.
  for (const auto& bb : fn.blocks) {
    int prev = -1;
    for (const auto& inst : bb.insts) {
      if (!inst.is_channel_op()) continue;
      auto it = local.find(inst.id);
      if (it == local.end()) continue;
      if (prev >= 0) g.edges.push_back({prev, it->second, 0, 1});
      prev = it->second;
    }
  }
  return g;
}

LoopSchedule schedule_loop(const graphs::Ddg& ddg, const graphs::Loop& loop,
                           const LatencyModel& lm) {
  std::vector<int> nodes = ddg.loop_nodes(loop);
  IIGraph g = subgraph(ddg, nodes, lm);
  LoopSchedule sched;
  sched.ii = calculate_ii(g);
  std::vector<int64_t> off;
  if (!feasible(g, sched.ii, &off))
    throw SchedError("schedule did not converge at the computed II");
  int64_t lo = off.empty() ? 0 : *std::min_element(off.begin(), off.end());
  sched.offset.assign(static_cast<size_t>(ddg.num_nodes), -1);
  for (size_t k = 0; k < nodes.size(); ++k) {
    int64_t o = off[k] - lo;
    sched.offset[static_cast<size_t>(nodes[k])] = static_cast<int>(o);
    sched.length = std::max(
        sched.length, static_cast<int>(o) + g.latency[k]);
  }
  return sched;
}

int64_t estimate_cycles(const graphs::Ddg& ddg, const graphs::LoopInfo& li,
                        int loop_index, const LatencyModel& lm,
                        int64_t trip_count) {
  const graphs::Loop& loop = li.loops[static_cast<size_t>(loop_index)];
  if (loop.children.empty()) {
    LoopSchedule s = schedule_loop(ddg, loop, lm);
    return s.length + (trip_count - 1) * s.ii;
  }
  // Outer loops run sequentially: per iteration, the blocks owned by this
  // loop plus one full execution of every child nest.
  std::set<int> child_blocks;
  for (int c : loop.children)
    for (int b : li.loops[static_cast<size_t>(c)].blocks)
      child_blocks.insert(b);
  std::vector<int> own;
  const mir::Function& fn = *ddg.fn;
  for (int b : loop.blocks) {
    if (child_blocks.count(b)) continue;
    for (const auto& inst : fn.blocks[static_cast<size_t>(b)].insts)
      own.push_back(inst.id);
  }
  std::sort(own.begin(), own.end());
  IIGraph g = subgraph(ddg, own, lm);
  std::vector<int64_t> off;
  if (!feasible(g, calculate_ii(g), &off))
    throw SchedError("schedule did not converge at the computed II");
  int64_t own_len = 0;
  int64_t lo = off.empty() ? 0 : *std::min_element(off.begin(), off.end());
  for (size_t k = 0; k < own.size(); ++k)
    own_len = std::max(own_len, off[k] - lo + g.latency[k]);
  int64_t per_iter = own_len;
  for (int c : loop.children)
    per_iter += estimate_cycles(ddg, li, c, lm, trip_count);
  return trip_count * per_iter;
}

}  // namespace dhls::modsched
