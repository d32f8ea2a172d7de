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
#include "doctest.h"
#include "graphs/cdg.hpp"
#include "graphs/ddg.hpp"
#include "marking/marking.hpp"
#include "mir/interp.hpp"
#include "mir/parser.hpp"
#include "sim/sim.hpp"
#include "transform/transform.hpp"

using namespace dhls;
using dhls::transform::TransformOptions;
using dhls::transform::TransformResult;

namespace {

marking::MarkingReport mark(const mir::Function& fn) {
  graphs::Cfg cfg = graphs::build_cfg(fn);
  graphs::Cdg cdg = graphs::build_cdg(cfg);
  graphs::LoopInfo li = graphs::build_loop_info(cfg);
  graphs::Ddg ddg = graphs::build_ddg(fn, cfg, li);
  return marking::mark_function(fn, cfg, cdg, li, ddg,
                                modsched::LatencyModel::defaults());
}

TransformResult xform(const mir::Function& f, const marking::MarkingReport& r,
                      const TransformOptions& o = {}) {
  return dhls::transform::transform(f, r, o);
}

mir::Program load(const std::string& name) {
  return mir::parse_file(std::string(DHLS_TESTDATA_DIR) + "/" + name);
}

bool has_applied(const TransformResult& r, const std::string& kind) {
  for (const auto& m : r.log)
    if (m.kind == kind && m.applied) return true;
  return false;
}

}  // namespace

TEST_CASE("empty marking leaves the function untouched") {
  mir::Program p = mir::parse_program(
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
      "}");
  marking::MarkingReport rep = mark(p.functions[0]);
  REQUIRE(rep.empty());
  TransformResult r = xform(p.functions[0], rep);
  CHECK(r.identity());
  CHECK(r.program.functions.size() == 1);
  CHECK(mir::serialize(r.program) == mir::serialize(p));
}

TEST_CASE("motivating loop becomes a main process plus one PE") {
  mir::Program p = load("motivating.mir");
  marking::MarkingReport rep = mark(p.functions[0]);
  REQUIRE(rep.blocks.size() == 1);
  TransformOptions opts;
  opts.hoist = false;
  TransformResult r = xform(p.functions[0], rep, opts);
  REQUIRE(r.program.functions.size() == 2);
  CHECK(r.program.functions[1].name == "motivating.pe0");
  CHECK(r.program.network.present);
  CHECK(r.program.network.find_channel("motivating_pe0_pred") != nullptr);
  CHECK(r.program.network.find_channel("motivating_pe0_in_x") != nullptr);
  CHECK(r.program.network.find_channel("motivating_pe0_out_x1") != nullptr);
  CHECK(has_applied(r, "block"));

  // Serialization round trip is stable.
  std::string s1 = mir::serialize(r.program);
  CHECK(mir::serialize(mir::parse_program(s1)) == s1);

  const int64_t n = 400;
  mir::Inputs in;
  in.scalars = {{"x0", 1 << 20}, {"y0", 0}, {"n", n}};
  mir::FinalState ref;
  sim::SimReport never, always, third;
  for (int variant = 0; variant < 3; ++variant) {
    std::vector<int64_t> cond(10000, 0);
    for (size_t i = 0; i < cond.size(); ++i)
      cond[i] = variant == 0 ? 0 : variant == 1 ? 1 : (i % 3 == 0);
    in.arrays["cond"] = cond;
    ref = mir::interpret(p.functions[0], in);
    sim::SimReport rep2 = sim::simulate(r.program, in);
    REQUIRE(!rep2.deadlock);
    CHECK(rep2.result.ret == ref.ret);
    (variant == 0 ? never : variant == 1 ? always : third) = rep2;
  }
  // The untaken path streams at the static II; engaged iterations pay a
  // round trip through the PE.
  CHECK(never.cycles < n + 60);
  CHECK(always.cycles > third.cycles);
  CHECK(third.cycles > never.cycles);
}

TEST_CASE("channel hoisting keeps routing state inside the PE") {
  mir::Program p = load("motivating_hoist.mir");
  marking::MarkingReport rep = mark(p.functions[0]);
  REQUIRE(rep.blocks.size() == 1);

  TransformOptions plain;
  plain.hoist = false;
  TransformResult pe = xform(p.functions[0], rep, plain);
  TransformResult hoisted = xform(p.functions[0], rep);
  CHECK(has_applied(hoisted, "hoist"));
  CHECK(!has_applied(pe, "hoist"));

  const int64_t n = 600;
  mir::Inputs in;
  in.scalars = {{"x0", 1 << 20}, {"n", n}};
  std::vector<int64_t> cond(10000, 0);
  for (size_t i = 0; i < cond.size(); ++i) cond[i] = i % 4 == 0;  // p = 1/4
  in.arrays["cond"] = cond;
  mir::FinalState ref = mir::interpret(p.functions[0], in);

  sim::SimReport a = sim::simulate(pe.program, in);
  sim::SimReport b = sim::simulate(hoisted.program, in);
  REQUIRE(!a.deadlock);
  REQUIRE(!b.deadlock);
  CHECK(a.result.ret == ref.ret);
  CHECK(b.result.ret == ref.ret);
  // With the recurrence inside the PE the main loop no longer stalls on the
  // round trip, so the engaged fraction is absorbed.
  CHECK(b.cycles < a.cycles);
}

TEST_CASE("histogram memory marks become an AGU and a load-store queue") {
  mir::Program p = mir::parse_program(
      "func @hist(i64 %n, i64[64] %keys, i64[16] %out) {\n"
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
  marking::MarkingReport rep = mark(p.functions[0]);
  REQUIRE(rep.memory.size() == 2);
  TransformResult r = xform(p.functions[0], rep);
  CHECK(has_applied(r, "memory"));
  REQUIRE(r.program.functions.size() == 2);
  CHECK(r.program.functions[1].name == "hist.agu0");
  REQUIRE(r.program.network.lsqs.size() == 1);
  CHECK(r.program.network.lsqs[0].array == "out");
  std::string s1 = mir::serialize(r.program);
  CHECK(mir::serialize(mir::parse_program(s1)) == s1);

  mir::Inputs in;
  in.scalars = {{"n", 64}};
  std::vector<int64_t> keys(64);
  for (size_t i = 0; i < keys.size(); ++i) keys[i] = (i * 7 + 3) % 16;
  in.arrays["keys"] = keys;
  in.arrays["out"] = std::vector<int64_t>(16, 0);
  mir::FinalState ref = mir::interpret(p.functions[0], in);
  sim::SimReport rep2 = sim::simulate(r.program, in);
  REQUIRE(!rep2.deadlock);
  CHECK(rep2.result.arrays.at("out") == ref.arrays.at("out"));

  SUBCASE("all-identical keys serialize but stay correct") {
    in.arrays["keys"].assign(64, 5);
    in.arrays["out"].assign(16, 0);
    ref = mir::interpret(p.functions[0], in);
    sim::SimReport worst = sim::simulate(r.program, in);
    REQUIRE(!worst.deadlock);
    CHECK(worst.result.arrays.at("out") == ref.arrays.at("out"));
    CHECK(worst.cycles >= rep2.cycles);
  }
}

TEST_CASE("swap loop: every mark is rejected with a reason") {
  mir::Program p = mir::parse_program(
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
      "}");
  marking::MarkingReport rep = mark(p.functions[0]);
  REQUIRE(!rep.empty());
  TransformResult r = xform(p.functions[0], rep);
  CHECK(r.identity());
  REQUIRE(!r.log.empty());
  bool mem_reason = false, block_reason = false;
  for (const auto& m : r.log) {
    CHECK(!m.applied);
    CHECK(!m.reason.empty());
    if (m.kind == "memory" &&
        m.reason.find("cannot run ahead") != std::string::npos)
      mem_reason = true;
    if (m.kind == "block" &&
        m.reason.find("memory accesses") != std::string::npos)
      block_reason = true;
  }
  CHECK(mem_reason);
  CHECK(block_reason);
}

TEST_CASE("independent sibling loops run as concurrent processes") {
  mir::Program p = mir::parse_program(
      "func @sib(i64 %n, i64[512] %a, i64[512] %b) {\n"
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
      "}");
  marking::MarkingReport rep = mark(p.functions[0]);
  REQUIRE(rep.loops.size() == 2);
  TransformResult r = xform(p.functions[0], rep);
  REQUIRE(r.program.functions.size() == 3);
  CHECK(has_applied(r, "loop"));

  const int64_t n = 400;
  mir::Inputs in;
  in.scalars = {{"n", n}};
  in.arrays["a"] = std::vector<int64_t>(512, 3);
  in.arrays["b"] = std::vector<int64_t>(512, 9);
  mir::FinalState ref = mir::interpret(p.functions[0], in);
  sim::SimReport net = sim::simulate(r.program, in);
  REQUIRE(!net.deadlock);
  CHECK(net.result.arrays.at("a") == ref.arrays.at("a"));
  CHECK(net.result.arrays.at("b") == ref.arrays.at("b"));

  // Statically the loops run back to back; as processes they overlap.
  sim::SimReport seq = sim::simulate(p, in);
  CHECK(net.cycles < seq.cycles * 7 / 10);
}

TEST_CASE("nested reduction: the inner loop becomes its own process") {
  mir::Program p = mir::parse_program(
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
      "}");
  marking::MarkingReport rep = mark(p.functions[0]);
  REQUIRE(rep.loops.size() == 1);
  TransformResult r = xform(p.functions[0], rep);
  REQUIRE(r.program.functions.size() == 2);

  mir::Inputs in;
  in.scalars = {{"n", 16}, {"m", 16}};
  std::vector<int64_t> val(256);
  for (size_t i = 0; i < val.size(); ++i)
    val[i] = static_cast<int64_t>(i * i % 37);
  in.arrays["val"] = val;
  in.arrays["row"] = std::vector<int64_t>(16, 0);
  mir::FinalState ref = mir::interpret(p.functions[0], in);
  sim::SimReport net = sim::simulate(r.program, in);
  REQUIRE(!net.deadlock);
  CHECK(net.result.arrays.at("row") == ref.arrays.at("row"));
}

TEST_CASE("a dropped token is diagnosed as a deadlock") {
  mir::Program p = load("motivating.mir");
  TransformOptions opts;
  opts.hoist = false;
  TransformResult r = xform(p.functions[0], mark(p.functions[0]), opts);
  std::string text = r.text;
  std::string line = "chan_write $motivating_pe0_in_x, %x\n";
  size_t pos = text.find(line);
  REQUIRE(pos != std::string::npos);
  text.erase(pos, line.size());
  mir::Program broken = mir::parse_program(text);

  mir::Inputs in;
  in.scalars = {{"x0", 1 << 20}, {"y0", 0}, {"n", 50}};
  in.arrays["cond"] = std::vector<int64_t>(10000, 1);
  sim::SimConfig cfg;
  cfg.max_cycles = 20000;
  sim::SimReport rep = sim::simulate(broken, in, cfg);
  CHECK(rep.deadlock);
  CHECK(rep.deadlock_reason.find("motivating_pe0") != std::string::npos);
}
