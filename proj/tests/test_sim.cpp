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
#include "mir/parser.hpp"
#include "sim/sim.hpp"

using namespace dhls;
using namespace dhls::sim;

namespace {

mir::Program load(const std::string& name) {
  return mir::parse_file(std::string(DHLS_TESTDATA_DIR) + "/" + name);
}

}  // namespace

TEST_CASE("static pipeline: the recurrence-bound loop runs at its II") {
  mir::Program p = load("motivating.mir");
  mir::Inputs in;
  in.scalars = {{"x0", 1000}, {"y0", 0}, {"n", 100}};
  std::vector<int64_t> cond(10000, 0);
  for (size_t i = 0; i < cond.size(); ++i) cond[i] = i % 3 == 0 ? 1 : 0;
  in.arrays["cond"] = cond;

  SimReport rep = simulate(p, in);
  // L + (N-1)*II = 5 + 99*5, entry and exit blocks are free.
  CHECK(rep.cycles == 500);
  CHECK(!rep.deadlock);

  mir::FinalState ref = mir::interpret(p.functions[0], in);
  CHECK(rep.result.ret == ref.ret);

  REQUIRE(rep.processes.size() == 1);
  CHECK(rep.processes[0].loop_ii.at("header") == doctest::Approx(5.0));
  CHECK(rep.processes[0].iterations.at("header") == 100);

  // The taken/not-taken mix does not matter for a static schedule.
  in.arrays["cond"].assign(10000, 1);
  CHECK(simulate(p, in).cycles == 500);
}

TEST_CASE("static pipeline: nested loops run the inner loop per outer trip") {
  mir::Program p = mir::parse_program(
      "func @nest(i64 %n, i64 %m) {\n"
      "^entry:\n"
      "  %c0 = const 0\n"
      "  %c1 = const 1\n"
      "  br ^oh\n"
      "^oh:\n"
      "  %i = phi [ %c0, ^entry ], [ %i1, ^olatch ]\n"
      "  %acc0 = phi [ %c0, ^entry ], [ %acc2, ^olatch ]\n"
      "  br ^ih\n"
      "^ih:\n"
      "  %j = phi [ %c0, ^oh ], [ %j1, ^ih ]\n"
      "  %acc1 = phi [ %acc0, ^oh ], [ %acc2, ^ih ]\n"
      "  %acc2 = add %acc1, %j\n"
      "  %j1 = add %j, %c1\n"
      "  %jc = icmp lt %j1, %m\n"
      "  cond_br %jc, ^ih, ^olatch\n"
      "^olatch:\n"
      "  %i1 = add %i, %c1\n"
      "  %ic = icmp lt %i1, %n\n"
      "  cond_br %ic, ^oh, ^exit\n"
      "^exit:\n"
      "  ret %acc2\n"
      "}\n");
  mir::Inputs in;
  in.scalars = {{"n", 10}, {"m", 10}};
  SimReport rep = simulate(p, in);
  // Inner instance: L=2 plus 9 at II=1 -> 11; outer latch adds 2 per trip.
  CHECK(rep.cycles == 10 * (11 + 2));
  CHECK(rep.result.ret == mir::interpret(p.functions[0], in).ret);
  CHECK(rep.processes[0].iterations.at("ih") == 100);
}

namespace {

const char* kProdCons =
    "func @cons() {\n"
    "^entry:\n"
    "  %zero = const 0\n"
    "  br ^h\n"
    "^h:\n"
    "  %acc = phi [ %zero, ^entry ], [ %acc1, ^b ]\n"
    "  %p = chan_read $go\n"
    "  cond_br %p, ^b, ^x\n"
    "^b:\n"
    "  %v = chan_read $data\n"
    "  %acc1 = add %acc, %v\n"
    "  br ^h\n"
    "^x:\n"
    "  ret %acc\n"
    "}\n"
    "func @prod(i64 %n) {\n"
    "^entry:\n"
    "  %c0 = const 0\n"
    "  %c1 = const 1\n"
    "  br ^loop\n"
    "^loop:\n"
    "  %i = phi [ %c0, ^entry ], [ %i1, ^loop ]\n"
    "  chan_write $go, %c1\n"
    "  chan_write $data, %i\n"
    "  %i1 = add %i, %c1\n"
    "  %c = icmp lt %i1, %n\n"
    "  cond_br %c, ^loop, ^done\n"
    "^done:\n"
    "  chan_write $go, %c0\n"
    "  ret\n"
    "}\n"
    "network {\n"
    "  channel $go : i64, capacity 4, kind predicate, writer @prod, "
    "reader @cons\n"
    "  channel $data : i64, capacity 4, kind data, writer @prod, "
    "reader @cons\n"
    "}\n";

}  // namespace

TEST_CASE("process network: producer/consumer pipeline at II 1") {
  mir::Program p = mir::parse_program(kProdCons);
  mir::Inputs in;
  in.scalars = {{"n", 50}};
  SimReport rep = simulate(p, in);
  CHECK(!rep.deadlock);
  REQUIRE(rep.result.ret.size() == 1);
  CHECK(rep.result.ret[0] == 49 * 50 / 2);
  // Both loops stream one token per cycle plus small start-up and drain.
  CHECK(rep.cycles >= 50);
  CHECK(rep.cycles <= 90);
  REQUIRE(rep.processes.size() == 2);
  CHECK(rep.processes[0].iterations.at("h") == 51);
  CHECK(rep.processes[1].loop_ii.at("loop") <= 1.5);
  CHECK(rep.channel_high_water.at("data") >= 1);

  SUBCASE("runs are deterministic") {
    SimReport rep2 = simulate(p, in);
    CHECK(rep2.cycles == rep.cycles);
    CHECK(rep2.channel_high_water == rep.channel_high_water);
    CHECK(rep2.processes[0].stall_causes == rep.processes[0].stall_causes);
    CHECK(rep2.result.ret == rep.result.ret);
  }
  SUBCASE("a one-cycle channel transport only slows the pipeline") {
    SimConfig cfg;
    cfg.channel_transport = 1;
    SimReport rep1 = simulate(p, in, cfg);
    CHECK(!rep1.deadlock);
    CHECK(rep1.result.ret == rep.result.ret);
    CHECK(rep1.cycles >= rep.cycles);
  }
}

TEST_CASE("process network: a read with no producer deadlocks with a cause") {
  mir::Program p = mir::parse_program(
      "func @main() {\n"
      "^entry:\n"
      "  %v = chan_read $never\n"
      "  ret %v\n"
      "}\n"
      "func @other() {\n"
      "^entry:\n"
      "  ret\n"
      "}\n"
      "network {\n"
      "  channel $never : i64, capacity 2, kind data, writer @other, "
      "reader @main\n"
      "}\n");
  SimReport rep = simulate(p, mir::Inputs{});
  CHECK(rep.deadlock);
  CHECK(rep.deadlock_reason.find("$never") != std::string::npos);
  CHECK(rep.deadlock_reason.find("@main") != std::string::npos);
}

TEST_CASE("process network: store and load round-trip through the LSQ") {
  mir::Program p = mir::parse_program(
      "func @m(i64[8] %a) {\n"
      "^entry:\n"
      "  %c5 = const 5\n"
      "  %cs = const 4294967296\n"
      "  %c77 = const 77\n"
      "  %sreq = add %cs, %c5\n"
      "  chan_write $sr, %sreq\n"
      "  chan_write $sv, %c77\n"
      "  %lreq = add %cs, %c5\n"
      "  chan_write $lr, %lreq\n"
      "  %v = chan_read $lv\n"
      "  ret %v\n"
      "}\n"
      "network {\n"
      "  channel $sr : i64, capacity 4, kind st_req, writer @m, reader "
      "lsq:$L\n"
      "  channel $sv : i64, capacity 4, kind st_val, writer @m, reader "
      "lsq:$L\n"
      "  channel $lr : i64, capacity 4, kind ld_req, writer @m, reader "
      "lsq:$L\n"
      "  channel $lv : i64, capacity 4, kind ld_val, writer lsq:$L, reader "
      "@m\n"
      "  lsq $L { array %a ld_req $lr ld_val $lv st_req $sr st_val $sv }\n"
      "  memory %a : lsq:$L\n"
      "}\n");
  mir::Inputs in;
  in.arrays["a"] = std::vector<int64_t>(8, 0);
  SimConfig cfg;
  cfg.trace_lsq = true;
  SimReport rep = simulate(p, in, cfg);
  CHECK(!rep.deadlock);
  REQUIRE(rep.result.ret.size() == 1);
  CHECK(rep.result.ret[0] == 77);  // the load sees the older store
  CHECK(rep.result.arrays.at("a")[5] == 77);
  CHECK(rep.lsq_trace_csv.find("st_commit") != std::string::npos);
}

TEST_CASE("process network: a store that never gets its value is diagnosed") {
  mir::Program p = mir::parse_program(
      "func @m(i64[8] %a) {\n"
      "^entry:\n"
      "  %c5 = const 5\n"
      "  %cs = const 4294967296\n"
      "  %sreq = add %cs, %c5\n"
      "  chan_write $sr, %sreq\n"
      "  %lreq = add %cs, %c5\n"
      "  chan_write $lr, %lreq\n"
      "  %v = chan_read $lv\n"
      "  ret %v\n"
      "}\n"
      "network {\n"
      "  channel $sr : i64, capacity 4, kind st_req, writer @m, reader "
      "lsq:$L\n"
      "  channel $sv : i64, capacity 4, kind st_val, writer @m, reader "
      "lsq:$L\n"
      "  channel $lr : i64, capacity 4, kind ld_req, writer @m, reader "
      "lsq:$L\n"
      "  channel $lv : i64, capacity 4, kind ld_val, writer lsq:$L, reader "
      "@m\n"
      "  lsq $L { array %a ld_req $lr ld_val $lv st_req $sr st_val $sv }\n"
      "  memory %a : lsq:$L\n"
      "}\n");
  mir::Inputs in;
  in.arrays["a"] = std::vector<int64_t>(8, 0);
  SimReport rep = simulate(p, in);
  CHECK(rep.deadlock);
  CHECK(rep.deadlock_reason.find("waiting for its value") !=
        std::string::npos);
}

TEST_CASE("process network: non-blocking read falls back to its default") {
  mir::Program p = mir::parse_program(
      "func @main() {\n"
      "^entry:\n"
      "  %d = const 9\n"
      "  %v = chan_read_nb $empty, %d\n"
      "  ret %v\n"
      "}\n"
      "func @other() {\n"
      "^entry:\n"
      "  ret\n"
      "}\n"
      "network {\n"
      "  channel $empty : i64, capacity 2, kind data, writer @other, "
      "reader @main\n"
      "}\n");
  SimReport rep = simulate(p, mir::Inputs{});
  CHECK(!rep.deadlock);
  REQUIRE(rep.result.ret.size() == 1);
  CHECK(rep.result.ret[0] == 9);
}
