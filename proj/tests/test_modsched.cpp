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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "mir/parser.hpp"
#include "modsched/modsched.hpp"

using namespace dhls;
using namespace dhls::modsched;

namespace {

mir::Program load(const std::string& name) {
  return mir::parse_file(std::string(DHLS_TESTDATA_DIR) + "/" + name);
}

int inst_of(const mir::Function& f, const std::string& value) {
  for (size_t v = 0; v < f.value_names.size(); ++v) {
    if (f.value_names[v] != value) continue;
    const mir::Instruction* found = nullptr;
    f.for_each_inst([&](const mir::Instruction& i) {
      if (i.result == static_cast<int>(v)) found = &i;
    });
    REQUIRE(found != nullptr);
    return found->id;
  }
  FAIL("no value named %" << value);
  return -1;
}

struct Built {
  mir::Program program;
  graphs::Cfg cfg;
  graphs::LoopInfo li;
  graphs::Ddg ddg;
};

Built build(mir::Program p) {
  Built b{std::move(p), {}, {}, {}};
  b.cfg = graphs::build_cfg(b.program.functions[0]);
  b.li = graphs::build_loop_info(b.cfg);
  b.ddg = graphs::build_ddg(b.program.functions[0], b.cfg, b.li);
  return b;
}

// Exhaustive simple-cycle enumeration, the oracle for calculate_ii.
struct CycleOracle {
  bool zero_distance_cycle = false;
  int64_t ii = 1;
};

CycleOracle enumerate_cycles(const IIGraph& g) {
  CycleOracle out;
  std::vector<std::vector<std::pair<int, int>>> adj(
      static_cast<size_t>(g.n));  // dst, edge index
  for (size_t e = 0; e < g.edges.size(); ++e)
    adj[static_cast<size_t>(g.edges[e].src)].push_back(
        {g.edges[e].dst, static_cast<int>(e)});
  // Paths restricted to nodes >= start give each cycle exactly once.
  for (int start = 0; start < g.n; ++start) {
    std::vector<char> on_path(static_cast<size_t>(g.n), 0);
    struct Frame {
      int node;
      size_t next;
      int64_t delay, dist;
    };
    std::vector<Frame> stack = {{start, 0, 0, 0}};
    on_path[static_cast<size_t>(start)] = 1;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next >= adj[static_cast<size_t>(f.node)].size()) {
        on_path[static_cast<size_t>(f.node)] = 0;
        stack.pop_back();
        continue;
      }
      auto [dst, eidx] = adj[static_cast<size_t>(f.node)][f.next++];
      if (dst < start) continue;
      int64_t delay = f.delay + g.edges[static_cast<size_t>(eidx)].delay;
      int64_t dist = f.dist + g.edges[static_cast<size_t>(eidx)].dist;
      if (dst == start) {
        if (dist == 0 && delay > 0) out.zero_distance_cycle = true;
        if (dist > 0)
          out.ii = std::max(out.ii, (delay + dist - 1) / dist);
        continue;
      }
      if (on_path[static_cast<size_t>(dst)]) continue;
      on_path[static_cast<size_t>(dst)] = 1;
      stack.push_back({dst, 0, delay, dist});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("motivating loop schedules at II 5, length 5") {
  Built b = build(load("motivating.mir"));
  LatencyModel lm = LatencyModel::defaults();
  LoopSchedule s = schedule_loop(b.ddg, b.li.loops[0], lm);
  CHECK(s.ii == 5);
  CHECK(s.length == 5);
  // 100 iterations, pipelined: L + (N-1) * II.
  CHECK(estimate_cycles(b.ddg, b.li, 0, lm, 100) == 500);

  const mir::Function& f = b.program.functions[0];
  CHECK(s.offset[static_cast<size_t>(inst_of(f, "x"))] == 0);
  CHECK(s.offset[static_cast<size_t>(inst_of(f, "x1"))] == 4);
  CHECK(s.offset[static_cast<size_t>(inst_of(f, "xm"))] == 5);
}

TEST_CASE("per-recurrence IIs of the motivating loop") {
  Built b = build(load("motivating.mir"));
  const mir::Function& f = b.program.functions[0];
  LatencyModel lm = LatencyModel::defaults();

  std::vector<int> slow = {inst_of(f, "x"), inst_of(f, "fx"),
                           inst_of(f, "x1"), inst_of(f, "xm")};
  std::sort(slow.begin(), slow.end());
  CHECK(calculate_ii(subgraph(b.ddg, slow, lm)) == 5);

  std::vector<int> fast = {inst_of(f, "y"), inst_of(f, "y1")};
  std::sort(fast.begin(), fast.end());
  CHECK(calculate_ii(subgraph(b.ddg, fast, lm)) == 1);

  std::vector<int> counter = {inst_of(f, "i"), inst_of(f, "i1")};
  std::sort(counter.begin(), counter.end());
  CHECK(calculate_ii(subgraph(b.ddg, counter, lm)) == 1);
}

TEST_CASE("calculate_ii matches cycle enumeration on random graphs") {
  std::mt19937 rng(98765);
  for (int trial = 0; trial < 300; ++trial) {
    IIGraph g;
    g.n = 2 + static_cast<int>(rng() % 11);
    g.latency.assign(static_cast<size_t>(g.n), 0);
    for (auto& l : g.latency) l = static_cast<int>(rng() % 5);
    int ne = 1 + static_cast<int>(rng() % 20);
    for (int e = 0; e < ne; ++e) {
      int src = static_cast<int>(rng() % g.n);
      g.edges.push_back({src, static_cast<int>(rng() % g.n),
                         static_cast<int>(rng() % 3),
                         g.latency[static_cast<size_t>(src)]});
    }
    CycleOracle oracle = enumerate_cycles(g);
    CAPTURE(trial);
    if (oracle.zero_distance_cycle) {
      CHECK_THROWS_AS(calculate_ii(g), SchedError);
    } else {
      CHECK(calculate_ii(g) == oracle.ii);
    }
  }
}

TEST_CASE("zero-distance cycles with delay are rejected") {
  IIGraph g;
  g.n = 2;
  g.latency = {1, 1};
  g.edges = {{0, 1, 0, 1}, {1, 0, 0, 1}};
  CHECK_THROWS_AS(calculate_ii(g), SchedError);
  // A free zero-distance cycle constrains nothing.
  g.edges = {{0, 1, 0, 0}, {1, 0, 0, 0}};
  CHECK(calculate_ii(g) == 1);
}

TEST_CASE("nested loops run sequentially in the estimate") {
  Built b = build(mir::parse_program(
      "func @nest(i64 %n, i64 %m) {\n"
      "^entry:\n"
      "  %zero = const 0\n"
      "  %one = const 1\n"
      "  br ^oh\n"
      "^oh:\n"
      "  %i = phi [%zero, ^entry], [%i1, ^ol]\n"
      "  br ^ih\n"
      "^ih:\n"
      "  %j = phi [%zero, ^oh], [%j1, ^ih]\n"
      "  %j1 = add %j, %one\n"
      "  %c1 = icmp lt %j1, %m\n"
      "  cond_br %c1, ^ih, ^ol\n"
      "^ol:\n"
      "  %i1 = add %i, %one\n"
      "  %c2 = icmp lt %i1, %n\n"
      "  cond_br %c2, ^oh, ^exit\n"
      "^exit:\n"
      "  ret\n"
      "}"));
  LatencyModel lm = LatencyModel::defaults();
  // Inner: II 1, length 2 -> N + 1 cycles. Outer body: 2 cycles of its own
  // plus the inner nest, N iterations in sequence.
  CHECK(estimate_cycles(b.ddg, b.li, 1, lm, 10) == 11);
  CHECK(estimate_cycles(b.ddg, b.li, 0, lm, 10) == 10 * (2 + 11));
}

TEST_CASE("channel ops in a block get strictly increasing offsets") {
  Built b = build(mir::parse_program(
      "func @c(i64 %n) {\n"
      "^entry:\n"
      "  %zero = const 0\n"
      "  br ^body\n"
      "^body:\n"
      "  %p = phi [%zero, ^entry], [%x, ^body]\n"
      "  chan_write $a, %p\n"
      "  %x = chan_read $b\n"
      "  chan_write $c, %x\n"
      "  %t = icmp lt %x, %n\n"
      "  cond_br %t, ^body, ^exit\n"
      "^exit:\n"
      "  ret\n"
      "}"));
  LatencyModel lm = LatencyModel::defaults();
  LoopSchedule s = schedule_loop(b.ddg, b.li.loops[0], lm);
  const mir::Function& f = b.program.functions[0];
  std::vector<int> chan_offsets;
  for (const auto& inst : f.blocks[1].insts)
    if (inst.is_channel_op())
      chan_offsets.push_back(s.offset[static_cast<size_t>(inst.id)]);
  REQUIRE(chan_offsets.size() == 3);
  CHECK(chan_offsets[0] < chan_offsets[1]);
  CHECK(chan_offsets[1] < chan_offsets[2]);
  CHECK(s.ii == 1);
}
