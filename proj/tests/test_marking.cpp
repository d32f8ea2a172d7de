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
#include <set>

#include "doctest.h"
#include "marking/marking.hpp"
#include "mir/parser.hpp"

using namespace dhls;
using namespace dhls::marking;

namespace {

struct Built {
  mir::Program program;
  graphs::Cfg cfg;
  graphs::Cdg cdg;
  graphs::LoopInfo li;
  graphs::Ddg ddg;
  modsched::LatencyModel lm = modsched::LatencyModel::defaults();

  const mir::Function& fn() const { return program.functions[0]; }
  MarkingReport mark(const MarkOptions& opts = {}) const {
    return mark_function(fn(), cfg, cdg, li, ddg, lm, opts);
  }
};

Built build(mir::Program p) {
  Built b{std::move(p), {}, {}, {}, {}};
  b.cfg = graphs::build_cfg(b.program.functions[0]);
  b.cdg = graphs::build_cdg(b.cfg);
  b.li = graphs::build_loop_info(b.cfg);
  b.ddg = graphs::build_ddg(b.program.functions[0], b.cfg, b.li);
  return b;
}

Built load(const std::string& name) {
  return build(mir::parse_file(std::string(DHLS_TESTDATA_DIR) + "/" + name));
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

TEST_CASE("path enumeration") {
  Built b = load("motivating.mir");
  auto paths = enumerate_paths(b.cfg, b.li.loops[0]);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0] == std::vector<int>{1, 2, 3, 4});  // through ^ifbody
  CHECK(paths[1] == std::vector<int>{1, 3, 4});     // around it

  // Exponential diamonds trip the limit.
  Built d = build(mir::parse_program(
      "func @dia(i64 %n) {\n"
      "^entry:\n"
      "  %zero = const 0\n"
      "  %one = const 1\n"
      "  br ^h\n"
      "^h:\n"
      "  %i = phi [%zero, ^entry], [%i1, ^l]\n"
      "  %c = icmp gt %i, %zero\n"
      "  cond_br %c, ^a1, ^b1\n"
      "^a1: br ^m1\n"
      "^b1: br ^m1\n"
      "^m1: cond_br %c, ^a2, ^b2\n"
      "^a2: br ^m2\n"
      "^b2: br ^m2\n"
      "^m2: cond_br %c, ^a3, ^b3\n"
      "^a3: br ^l\n"
      "^b3: br ^l\n"
      "^l:\n"
      "  %i1 = add %i, %one\n"
      "  %cont = icmp lt %i1, %n\n"
      "  cond_br %cont, ^h, ^exit\n"
      "^exit:\n"
      "  ret\n"
      "}"));
  CHECK(enumerate_paths(d.cfg, d.li.loops[0]).size() == 8);
  CHECK_THROWS_AS(enumerate_paths(d.cfg, d.li.loops[0], 4), MarkError);
}

TEST_CASE("motivating loop: conditional slow block is marked") {
  Built b = load("motivating.mir");
  MarkingReport rep = b.mark();
  REQUIRE(rep.blocks.size() == 1);
  const BlockMark& bm = rep.blocks[0];
  CHECK(bm.block == b.fn().block_index("ifbody"));
  CHECK(bm.loop == 0);
  std::vector<int> expect = {inst_of(b.fn(), "fx"), inst_of(b.fn(), "x1")};
  std::sort(expect.begin(), expect.end());
  CHECK(bm.nodes == expect);
  CHECK(bm.justification.find("II is 5") != std::string::npos);
  CHECK(rep.memory.empty());
  CHECK(rep.loops.empty());
}

TEST_CASE("histogram: accesses with a carried dependence are queued") {
  Built b = build(mir::parse_program(
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
      "}"));
  MarkingReport rep = b.mark();
  CHECK(rep.blocks.empty());
  REQUIRE(rep.memory.size() == 2);
  for (const auto& m : rep.memory) CHECK(m.array == "out");
  CHECK(rep.memory[0].justification.find("raises the II") !=
        std::string::npos);
  REQUIRE(rep.agu.size() == 1);
  CHECK(rep.agu[0].can_decouple);
}

TEST_CASE("swap loop: address generation cannot be decoupled") {
  Built b = build(mir::parse_program(
      "func @swap(i64 %n, i64[16] %a) {\n"
      "^entry:\n"
      "  %zero = const 0\n"
      "  %one = const 1\n"
      "  br ^header\n"
      "^header:\n"
      "  %j = phi [%zero, ^entry], [%j1, ^latch]\n"
      "  %j1 = add %j, %one\n"
      "  %x = load %a[%j] dist(?)\n"
      "  %y = load %a[%j1] dist(?)\n"
      "  %c = icmp gt %x, %y\n"
      "  cond_br %c, ^swapb, ^latch\n"
      "^swapb:\n"
      "  store %y, %a[%j] dist(?)\n"
      "  store %x, %a[%j1] dist(?)\n"
      "  br ^latch\n"
      "^latch:\n"
      "  %cont = icmp lt %j1, %n\n"
      "  cond_br %cont, ^header, ^exit\n"
      "^exit:\n"
      "  ret\n"
      "}"));
  MarkingReport rep = b.mark();
  CHECK(rep.memory.size() == 4);  // all accesses to %a
  REQUIRE(rep.agu.size() == 1);
  CHECK(!rep.agu[0].can_decouple);
  CHECK(rep.agu[0].reason.find("queued load") != std::string::npos);
  // The conditional swap block itself is also a dynamic-PE candidate.
  REQUIRE(rep.blocks.size() == 1);
  CHECK(rep.blocks[0].block == b.fn().block_index("swapb"));
}

TEST_CASE("affine streaming loop: nothing is marked") {
  Built b = build(mir::parse_program(
      "func @axpy(i64 %n, i64[16] %a, i64[16] %b, i64[16] %c) {\n"
      "^entry:\n"
      "  %zero = const 0\n"
      "  %one = const 1\n"
      "  br ^body\n"
      "^body:\n"
      "  %i = phi [%zero, ^entry], [%i1, ^body]\n"
      "  %x = load %a[%i]\n"
      "  %y = load %b[%i]\n"
      "  %s = mul %x, %y\n"
      "  store %s, %c[%i]\n"
      "  %i1 = add %i, %one\n"
      "  %t = icmp lt %i1, %n\n"
      "  cond_br %t, ^body, ^exit\n"
      "^exit:\n"
      "  ret\n"
      "}"));
  MarkingReport rep = b.mark();
  CHECK(rep.empty());
  CHECK(rep.agu.empty());
}

TEST_CASE("inner nest on an outer recurrence is marked for decoupling") {
  Built b = build(mir::parse_program(
      "func @sparse(i64 %n, i64 %m, i64[16] %row, i64[256] %val) {\n"
      "^entry:\n"
      "  %zero = const 0\n"
      "  %one = const 1\n"
      "  br ^oh\n"
      "^oh:\n"
      "  %i = phi [%zero, ^entry], [%i1, ^ol]\n"
      "  %a0 = phi [%zero, ^entry], [%a2, ^ol]\n"
      "  br ^ih\n"
      "^ih:\n"
      "  %j = phi [%zero, ^oh], [%j1, ^ih]\n"
      "  %a1 = phi [%a0, ^oh], [%a2, ^ih]\n"
      "  %v = load %val[%j]\n"
      "  %a2 = add %a1, %v\n"
      "  %j1 = add %j, %one\n"
      "  %c1 = icmp lt %j1, %m\n"
      "  cond_br %c1, ^ih, ^ol\n"
      "^ol:\n"
      "  %i1 = add %i, %one\n"
      "  store %a2, %row[%i]\n"
      "  %c2 = icmp lt %i1, %n\n"
      "  cond_br %c2, ^oh, ^exit\n"
      "^exit:\n"
      "  ret\n"
      "}"));
  MarkingReport rep = b.mark();
  REQUIRE(rep.loops.size() == 1);
  CHECK(b.li.loops[static_cast<size_t>(rep.loops[0].loop)].header ==
        b.fn().block_index("ih"));
  CHECK(rep.loops[0].justification.find("recurrence") != std::string::npos);
  CHECK(rep.memory.empty());
}

TEST_CASE("independent sibling loops are marked, dependent ones are not") {
  const char* independent =
      "func @sib(i64 %n, i64[16] %a, i64[16] %b) {\n"
      "^entry:\n"
      "  %zero = const 0\n"
      "  %one = const 1\n"
      "  br ^l1\n"
      "^l1:\n"
      "  %i = phi [%zero, ^entry], [%i1, ^l1]\n"
      "  %v = load %a[%i]\n"
      "  %v1 = add %v, %one\n"
      "  store %v1, %a[%i]\n"
      "  %i1 = add %i, %one\n"
      "  %c = icmp lt %i1, %n\n"
      "  cond_br %c, ^l1, ^mid\n"
      "^mid:\n"
      "  br ^l2\n"
      "^l2:\n"
      "  %j = phi [%zero, ^mid], [%j1, ^l2]\n"
      "  %w = load %b[%j]\n"
      "  %w1 = add %w, %one\n"
      "  store %w1, %b[%j]\n"
      "  %j1 = add %j, %one\n"
      "  %d = icmp lt %j1, %n\n"
      "  cond_br %d, ^l2, ^exit\n"
      "^exit:\n"
      "  ret\n"
      "}";
  Built b = build(mir::parse_program(independent));
  MarkingReport rep = b.mark();
  std::set<int> marked;
  for (const auto& l : rep.loops) marked.insert(l.loop);
  CHECK(marked == std::set<int>{0, 1});

  // Same shape, but the second loop reads what the first wrote.
  std::string dependent = independent;
  auto pos = dependent.find("load %b[%j]");
  REQUIRE(pos != std::string::npos);
  dependent.replace(pos, 11, "load %a[%j]");
  Built d = build(mir::parse_program(dependent));
  CHECK(d.mark().loops.empty());
}
