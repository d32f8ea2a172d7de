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

#include <set>

#include "driver/driver.hpp"
#include "mir/parser.hpp"

using namespace dhls;
using namespace dhls::driver;

TEST_CASE("config: defaults survive an empty object") {
  RunConfig cfg = config_from_json_text("{}");
  CHECK(cfg.transform.data_capacity == 8);
  CHECK(cfg.lsq.load_latency == 2);
  CHECK(cfg.trip == 256);
  CHECK(cfg.seed == 1);
}

TEST_CASE("config: fields parse and reject bad values") {
  RunConfig cfg = config_from_json_text(
      "{\"latency\": {\"mul\": 5}, \"channel_capacity\": 2,"
      " \"lsq\": {\"forwarding\": false}, \"trip\": 99, \"seed\": 7,"
      " \"taken_prob\": 0.25}");
  CHECK(cfg.latency.table.at(mir::Opcode::Mul) == 5);
  CHECK(cfg.transform.data_capacity == 2);
  CHECK(!cfg.lsq.forwarding);
  CHECK(cfg.trip == 99);
  CHECK(cfg.seed == 7);
  CHECK(cfg.taken_prob == doctest::Approx(0.25));

  CHECK_THROWS_AS(config_from_json_text("{\"bogus\": 1}"), DriverError);
  CHECK_THROWS_AS(config_from_json_text("{\"taken_prob\": 1.5}"), DriverError);
  CHECK_THROWS_AS(config_from_json_text("{\"latency\": {\"frobnicate\": 1}}"),
                  DriverError);
  CHECK_THROWS_AS(config_from_json_text("not json"), DriverError);
  CHECK_THROWS_AS(config_from_json_text("{\"trip\": 0}"), DriverError);
}

TEST_CASE("config: JSON emission round-trips") {
  RunConfig cfg;
  cfg.trip = 123;
  cfg.collision = 0.5;
  RunConfig back = config_from_json_text(config_to_json_text(cfg));
  CHECK(back.trip == 123);
  CHECK(back.collision == doctest::Approx(0.5));
  CHECK(config_to_json_text(back) == config_to_json_text(cfg));
}

TEST_CASE("analyze bundles graphs, schedules and marking") {
  Analysis a =
      analyze_file(std::string(DHLS_TESTDATA_DIR) + "/motivating.mir");
  REQUIRE(a.li.loops.size() == 1);
  CHECK(a.schedules[0].ii == 5);
  CHECK(a.marking.blocks.size() == 1);
  std::string js = analysis_to_json_text(a);
  CHECK(js.find("\"ii\": 5") != std::string::npos);
  CHECK(js.find("ifbody") != std::string::npos);
}

TEST_CASE("benchmark inputs are deterministic and shaped by the knobs") {
  mir::Program p =
      mir::parse_file(std::string(DHLS_CORPUS_DIR) + "/histogram.mir");
  const mir::Function& fn = p.functions[0];
  RunConfig cfg;

  mir::Inputs a = benchmark_inputs(fn, cfg, 42);
  mir::Inputs b = benchmark_inputs(fn, cfg, 42);
  CHECK(a.scalars == b.scalars);
  CHECK(a.arrays == b.arrays);

  mir::Inputs best = benchmark_inputs(fn, cfg, 42, DataKind::Best);
  int64_t n = best.scalars.at("n");
  std::set<int64_t> seen;
  for (int64_t i = 0; i < n; ++i)
    seen.insert(best.arrays.at("keys")[static_cast<size_t>(i)]);
  CHECK(static_cast<int64_t>(seen.size()) == n);  // all distinct

  mir::Inputs worst = benchmark_inputs(fn, cfg, 42, DataKind::Worst);
  for (int64_t i = 0; i < n; ++i)
    CHECK(worst.arrays.at("keys")[static_cast<size_t>(i)] == 0);
}

TEST_CASE("equivalence verdict reports the first divergence") {
  mir::FinalState oracle;
  oracle.ret = {4};
  oracle.arrays["a"] = {1, 2, 3};
  sim::SimReport rep;
  rep.result = oracle;
  CHECK(check_equivalence(rep, oracle).match);

  rep.result.arrays["a"][1] = 9;
  EquivalenceVerdict v = check_equivalence(rep, oracle);
  CHECK(!v.match);
  CHECK(v.detail.find("%a[1]") != std::string::npos);

  rep.result = oracle;
  rep.deadlock = true;
  rep.deadlock_reason = "blocked on $x";
  CHECK(!check_equivalence(rep, oracle).match);
}

TEST_CASE("corpus run covers every benchmark twice and is reproducible") {
  RunConfig cfg;
  cfg.trip = 64;
  CompareReport rep = run_corpus(DHLS_CORPUS_DIR, cfg);
  REQUIRE(rep.rows.size() == 20);
  CHECK(rep.all_equivalent());
  for (size_t i = 0; i + 2 < rep.rows.size(); i += 2)
    CHECK(rep.rows[i].benchmark <= rep.rows[i + 2].benchmark);
  for (const auto& row : rep.rows) CHECK(row.transformed_cycles > 0);

  CompareReport again = run_corpus(DHLS_CORPUS_DIR, cfg);
  CHECK(rep.to_json_text() == again.to_json_text());
  CHECK(rep.to_text() == again.to_text());
}

TEST_CASE("corpus run on a directory without benchmarks is empty") {
  CompareReport rep = run_corpus("/nonexistent-dir", RunConfig{});
  CHECK(rep.rows.empty());
  CHECK(rep.all_equivalent());
}
