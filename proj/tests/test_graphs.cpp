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
#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "graphs/cdg.hpp"
#include "graphs/ddg.hpp"
#include "graphs/dot.hpp"
#include "graphs/loops.hpp"
#include "mir/parser.hpp"

using namespace dhls;
using namespace dhls::graphs;

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

}  // namespace

TEST_CASE("cfg of the motivating loop") {
  mir::Program p = load("motivating.mir");
  Cfg cfg = build_cfg(p.functions[0]);
  CHECK(cfg.num_blocks == 7);  // 6 blocks + synthetic exit
  int header = 1, ifbody = 2, merge = 3, latch = 4, exit = 5;
  CHECK(cfg.succ[0] == std::vector<int>{header});
  CHECK(cfg.succ[static_cast<size_t>(header)] ==
        std::vector<int>{ifbody, merge});
  CHECK(cfg.succ[static_cast<size_t>(latch)] ==
        std::vector<int>{header, exit});
  CHECK(cfg.succ[static_cast<size_t>(exit)] ==
        std::vector<int>{cfg.synthetic_exit});
  CHECK(cfg.pred[static_cast<size_t>(merge)] ==
        std::vector<int>{header, ifbody});
}

TEST_CASE("dominators and post-dominators") {
  mir::Program p = load("motivating.mir");
  Cfg cfg = build_cfg(p.functions[0]);
  auto idom = dominators(cfg);
  // entry=0 header=1 ifbody=2 merge=3 latch=4 exit=5
  CHECK(idom[0] == 0);
  CHECK(idom[1] == 0);
  CHECK(idom[2] == 1);
  CHECK(idom[3] == 1);  // merge is reached around ifbody
  CHECK(idom[4] == 3);
  CHECK(idom[5] == 4);
  CHECK(tree_dominates(idom, 1, 4));
  CHECK(!tree_dominates(idom, 2, 3));

  auto ipdom = post_dominators(cfg);
  CHECK(tree_dominates(ipdom, 3, 2));  // merge post-dominates ifbody
  CHECK(tree_dominates(ipdom, 3, 1));
  CHECK(!tree_dominates(ipdom, 2, 1));
}

TEST_CASE("cdg of the motivating loop") {
  mir::Program p = load("motivating.mir");
  Cfg cfg = build_cfg(p.functions[0]);
  Cdg cdg = build_cdg(cfg);
  int header = 1, ifbody = 2, merge = 3, latch = 4;
  // The conditional body depends on the header branch...
  CHECK(cdg.depends_on(ifbody, header));
  // ...while merge and latch run on every iteration regardless.
  CHECK(!cdg.depends_on(merge, header));
  CHECK(!cdg.depends_on(latch, header));
  // Loop continuation: every body block depends on the latch branch.
  CHECK(cdg.depends_on(header, latch));
  CHECK(cdg.depends_on(merge, latch));
  CHECK(cdg.depends_on(latch, latch));
}

TEST_CASE("cdg matches a brute-force path oracle on random graphs") {
  std::mt19937 rng(12345);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + static_cast<int>(rng() % 9);
    Cfg cfg;
    cfg.num_blocks = n + 1;
    cfg.synthetic_exit = n;
    cfg.succ.assign(static_cast<size_t>(n + 1), {});
    cfg.pred.assign(static_cast<size_t>(n + 1), {});
    auto add = [&](int a, int b) {
      auto& s = cfg.succ[static_cast<size_t>(a)];
      if (std::find(s.begin(), s.end(), b) != s.end()) return;
      if (s.size() >= 2) return;  // at most two successors, like cond_br
      s.push_back(b);
      cfg.pred[static_cast<size_t>(b)].push_back(a);
    };
    // A forward chain guarantees every node reaches the exit.
    for (int b = 0; b < n; ++b) add(b, b + 1);
    for (int extra = 0; extra < n; ++extra)
      add(static_cast<int>(rng() % n), static_cast<int>(rng() % n));

    Cdg cdg = build_cdg(cfg);

    // Oracle: B is control-dependent on branch A iff some successor edge of
    // A leads only to B (every path to the exit passes through B) while A
    // itself can avoid B.
    auto avoids = [&](int from, int avoid) {
      if (from == avoid) return false;
      std::vector<char> seen(static_cast<size_t>(n + 1), 0);
      std::vector<int> work = {from};
      seen[static_cast<size_t>(from)] = 1;
      while (!work.empty()) {
        int v = work.back();
        work.pop_back();
        if (v == n) return true;
        for (int s : cfg.succ[static_cast<size_t>(v)]) {
          if (s == avoid || seen[static_cast<size_t>(s)]) continue;
          seen[static_cast<size_t>(s)] = 1;
          work.push_back(s);
        }
      }
      return false;
    };
    auto postdom = [&](int b, int v) { return b == v || !avoids(v, b); };
    for (int b = 0; b < n; ++b) {
      for (int a = 0; a < n; ++a) {
        bool expect = false;
        for (int s : cfg.succ[static_cast<size_t>(a)])
          if (postdom(b, s) && (a == b || !postdom(b, a))) expect = true;
        CAPTURE(trial);
        CAPTURE(a);
        CAPTURE(b);
        CHECK(cdg.depends_on(b, a) == expect);
      }
    }
  }
}

TEST_CASE("loop forest of a simple and a nested function") {
  mir::Program p = load("motivating.mir");
  Cfg cfg = build_cfg(p.functions[0]);
  LoopInfo li = build_loop_info(cfg);
  REQUIRE(li.loops.size() == 1);
  const Loop& l = li.loops[0];
  CHECK(l.header == 1);
  CHECK(l.latch == 4);
  CHECK(l.preheader == 0);
  CHECK(l.blocks == std::vector<int>{1, 2, 3, 4});
  CHECK(l.exiting == std::vector<int>{4});
  CHECK(l.exit_targets == std::vector<int>{5});
  CHECK(l.depth == 1);
  CHECK(li.innermost_loop_of(2) == 0);
  CHECK(li.innermost_loop_of(0) == -1);

  mir::Program q = mir::parse_program(
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
      "}");
  Cfg qcfg = build_cfg(q.functions[0]);
  LoopInfo qli = build_loop_info(qcfg);
  REQUIRE(qli.loops.size() == 2);
  const Loop& outer = qli.loops[0];
  const Loop& inner = qli.loops[1];
  CHECK(outer.depth == 1);
  CHECK(inner.depth == 2);
  CHECK(inner.parent == 0);
  CHECK(outer.children == std::vector<int>{1});
  int ih = q.functions[0].block_index("ih");
  CHECK(inner.header == ih);
  CHECK(inner.latch == ih);
  CHECK(inner.preheader == q.functions[0].block_index("oh"));
  CHECK(qli.innermost_loop_of(ih) == 1);
}

TEST_CASE("ddg of the motivating loop has three recurrences") {
  mir::Program p = load("motivating.mir");
  const mir::Function& f = p.functions[0];
  Cfg cfg = build_cfg(f);
  LoopInfo li = build_loop_info(cfg);
  Ddg ddg = build_ddg(f, cfg, li);

  // Back-edge phi inputs carry distance 1.
  int xphi = inst_of(f, "x"), xm = inst_of(f, "xm");
  bool found = false;
  for (const auto& e : ddg.edges)
    if (e.src == xm && e.dst == xphi) {
      CHECK(e.distance == 1);
      found = true;
    }
  CHECK(found);

  auto sccs = ddg_sccs(ddg, ddg.loop_nodes(li.loops[0]));
  std::vector<std::vector<int>> cycles;
  for (auto& c : sccs)
    if (c.size() > 1) cycles.push_back(c);
  REQUIRE(cycles.size() == 3);

  std::set<int> xscc = {xphi, inst_of(f, "fx"), inst_of(f, "x1"), xm};
  std::set<int> yscc = {inst_of(f, "y"), inst_of(f, "y1")};
  std::set<int> iscc = {inst_of(f, "i"), inst_of(f, "i1")};
  std::set<std::set<int>> got;
  for (auto& c : cycles) got.insert(std::set<int>(c.begin(), c.end()));
  CHECK(got == std::set<std::set<int>>{xscc, yscc, iscc});
}

TEST_CASE("memory edges from annotations and affine indexes") {
  // Same non-affine index: definite intra-iteration edge, conservative
  // loop-carried edge.
  mir::Program p = mir::parse_program(
      "func @hist(i64 %n, i64[8] %keys, i64[4] %out) {\n"
      "^entry:\n"
      "  %zero = const 0\n"
      "  %one = const 1\n"
      "  br ^body\n"
      "^body:\n"
      "  %i = phi [%zero, ^entry], [%i1, ^body]\n"
      "  %k = load %keys[%i]\n"
      "  %h = load %out[%k]\n"
      "  %h1 = add %h, %one\n"
      "  store %h1, %out[%k]\n"
      "  %i1 = add %i, %one\n"
      "  %c = icmp lt %i1, %n\n"
      "  cond_br %c, ^body, ^exit\n"
      "^exit:\n"
      "  ret\n"
      "}");
  const mir::Function& f = p.functions[0];
  Cfg cfg = build_cfg(f);
  LoopInfo li = build_loop_info(cfg);
  Ddg ddg = build_ddg(f, cfg, li);
  int ld = inst_of(f, "h");
  int st = -1;
  f.for_each_inst([&](const mir::Instruction& i) {
    if (i.op == mir::Opcode::Store) st = i.id;
  });
  bool intra = false, carried = false;
  for (const auto& e : ddg.edges) {
    if (e.kind != DdgEdge::Kind::Memory) continue;
    if (e.src == ld && e.dst == st && e.distance == 0 && !e.unknown)
      intra = true;
    if (e.src == st && e.dst == ld && e.distance == 1 && e.unknown)
      carried = true;
  }
  CHECK(intra);
  CHECK(carried);
  // The keys load conflicts with nothing (no store to %keys).
  for (const auto& e : ddg.edges)
    CHECK((e.kind != DdgEdge::Kind::Memory ||
           (e.src != inst_of(f, "k") && e.dst != inst_of(f, "k"))));

  // Affine same-iv accesses: stride-1 store A[i] / load A[i-4] conflict at
  // distance 4 and nowhere else.
  mir::Program q = mir::parse_program(
      "func @shift(i64 %n, i64[64] %a) {\n"
      "^entry:\n"
      "  %zero = const 0\n"
      "  %one = const 1\n"
      "  %four = const 4\n"
      "  %c16 = const 16\n"
      "  br ^body\n"
      "^body:\n"
      "  %i = phi [%c16, ^entry], [%i1, ^body]\n"
      "  %im4 = sub %i, %four\n"
      "  %v = load %a[%im4]\n"
      "  %v1 = add %v, %one\n"
      "  store %v1, %a[%i]\n"
      "  %i1 = add %i, %one\n"
      "  %c = icmp lt %i1, %n\n"
      "  cond_br %c, ^body, ^exit\n"
      "^exit:\n"
      "  ret\n"
      "}");
  const mir::Function& g = q.functions[0];
  Cfg gcfg = build_cfg(g);
  LoopInfo gli = build_loop_info(gcfg);

  auto aff = affine_index(g, gli.loops[0], [&] {
    for (size_t v = 0; v < g.value_names.size(); ++v)
      if (g.value_names[v] == "im4") return static_cast<int>(v);
    return -1;
  }());
  REQUIRE(aff.has_value());
  CHECK(aff->stride == 1);
  CHECK(aff->offset == -4);

  Ddg gddg = build_ddg(g, gcfg, gli);
  int gst = -1;
  g.for_each_inst([&](const mir::Instruction& i) {
    if (i.op == mir::Opcode::Store) gst = i.id;
  });
  int gld = inst_of(g, "v");
  int mem_edges = 0;
  for (const auto& e : gddg.edges) {
    if (e.kind != DdgEdge::Kind::Memory) continue;
    ++mem_edges;
    CHECK(e.src == gst);
    CHECK(e.dst == gld);
    CHECK(e.distance == 4);
    CHECK(!e.unknown);
  }
  CHECK(mem_edges == 1);

  // Contradictory known annotations are rejected.
  CHECK_THROWS_AS(
      [&] {
        mir::Program r = mir::parse_program(
            "func @bad(i64 %n, i64[8] %a) {\n"
            "^entry:\n"
            "  %zero = const 0\n"
            "  %one = const 1\n"
            "  br ^body\n"
            "^body:\n"
            "  %i = phi [%zero, ^entry], [%i1, ^body]\n"
            "  %v = load %a[%i] dist(2)\n"
            "  store %v, %a[%i] dist(3)\n"
            "  %i1 = add %i, %one\n"
            "  %c = icmp lt %i1, %n\n"
            "  cond_br %c, ^body, ^exit\n"
            "^exit:\n"
            "  ret\n"
            "}");
        Cfg c = build_cfg(r.functions[0]);
        LoopInfo l = build_loop_info(c);
        build_ddg(r.functions[0], c, l);
      }(),
      GraphError);
}

TEST_CASE("scc computation is deterministic on sparse ids") {
  std::vector<int> nodes = {9, 5, 3, 12};
  std::vector<std::pair<int, int>> edges = {{3, 5}, {5, 3}, {9, 12}, {5, 9}};
  auto comps = strongly_connected_components(nodes, edges);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0] == std::vector<int>{3, 5});
  CHECK(comps[1] == std::vector<int>{9});
  CHECK(comps[2] == std::vector<int>{12});
}

TEST_CASE("dot emission smoke test") {
  mir::Program p = load("motivating.mir");
  const mir::Function& f = p.functions[0];
  Cfg cfg = build_cfg(f);
  LoopInfo li = build_loop_info(cfg);
  Ddg ddg = build_ddg(f, cfg, li);
  Cdg cdg = build_cdg(cfg);
  CHECK(cfg_to_dot(cfg).find("digraph cfg") == 0);
  CHECK(cdg_to_dot(cfg, cdg).find("digraph cdg") == 0);
  std::string d = ddg_to_dot(ddg);
  CHECK(d.find("digraph ddg") == 0);
  CHECK(d.find("call @f") != std::string::npos);
}
