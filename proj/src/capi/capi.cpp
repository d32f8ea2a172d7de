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

#include "dhls/dhls.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "driver/driver.hpp"
#include "graphs/dot.hpp"
#include "json.hpp"
#include "mir/parser.hpp"

using namespace dhls;

struct dhls_config {
  driver::RunConfig cfg;
};
struct dhls_program {
  mir::Program prog;
};
struct dhls_analysis {
  driver::Analysis a;
};
struct dhls_inputs {
  mir::Inputs in;
};
struct dhls_report {
  sim::SimReport rep;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Maps the library's exception hierarchy onto status codes and stores the
// message for dhls_last_error.
template <typename F>
dhls_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return DHLS_OK;
  } catch (const mir::ParseError& e) {
    g_last_error = e.what();
    return DHLS_ERR_PARSE;
  } catch (const mir::VerifyError& e) {
    g_last_error = e.what();
    return DHLS_ERR_VERIFY;
  } catch (const driver::DriverError& e) {
    g_last_error = e.what();
    return DHLS_ERR_CONFIG;
  } catch (const graphs::GraphError& e) {
    g_last_error = e.what();
    return DHLS_ERR_ANALYSIS;
  } catch (const marking::MarkError& e) {
    g_last_error = e.what();
    return DHLS_ERR_ANALYSIS;
  } catch (const modsched::SchedError& e) {
    g_last_error = e.what();
    return DHLS_ERR_ANALYSIS;
  } catch (const transform::TransformError& e) {
    g_last_error = e.what();
    return DHLS_ERR_TRANSFORM;
  } catch (const sim::SimError& e) {
    g_last_error = e.what();
    return DHLS_ERR_SIM;
  } catch (const lsq::LsqError& e) {
    g_last_error = e.what();
    return DHLS_ERR_SIM;
  } catch (const mir::InterpError& e) {
    g_last_error = e.what();
    return DHLS_ERR_SIM;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DHLS_ERR_INTERNAL;
  }
}

dhls_status invalid(const char* msg) {
  g_last_error = msg;
  return DHLS_ERR_INVALID_ARGUMENT;
}

bool file_missing(const char* path) {
  std::error_code ec;
  return !std::filesystem::exists(path, ec);
}

}  // namespace

extern "C" {

const char* dhls_status_name(dhls_status status) {
  switch (status) {
    case DHLS_OK: return "ok";
    case DHLS_ERR_IO: return "io error";
    case DHLS_ERR_PARSE: return "parse error";
    case DHLS_ERR_VERIFY: return "verification error";
    case DHLS_ERR_CONFIG: return "configuration error";
    case DHLS_ERR_ANALYSIS: return "analysis error";
    case DHLS_ERR_TRANSFORM: return "transform error";
    case DHLS_ERR_SIM: return "simulation error";
    case DHLS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DHLS_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* dhls_last_error(void) { return g_last_error.c_str(); }

void dhls_string_free(char* s) { std::free(s); }

/* ---- configuration -------------------------------------------------- */

dhls_config* dhls_config_create(void) { return new dhls_config{}; }

dhls_status dhls_config_from_json(const char* json_text, dhls_config** out) {
  if (!json_text || !out) return invalid("null argument");
  return guarded([&] {
    *out = new dhls_config{driver::config_from_json_text(json_text)};
  });
}

dhls_status dhls_config_load(const char* path, dhls_config** out) {
  if (!path || !out) return invalid("null argument");
  if (file_missing(path)) {
    g_last_error = std::string("no such file: ") + path;
    return DHLS_ERR_IO;
  }
  return guarded([&] { *out = new dhls_config{driver::load_config(path)}; });
}

char* dhls_config_to_json(const dhls_config* cfg) {
  if (!cfg) return nullptr;
  return dup_string(driver::config_to_json_text(cfg->cfg));
}

void dhls_config_destroy(dhls_config* cfg) { delete cfg; }

/* ---- programs ------------------------------------------------------- */

dhls_status dhls_program_parse(const char* text, dhls_program** out) {
  if (!text || !out) return invalid("null argument");
  return guarded([&] {
    *out = new dhls_program{mir::parse_program(text)};
  });
}

dhls_status dhls_program_load(const char* path, dhls_program** out) {
  if (!path || !out) return invalid("null argument");
  if (file_missing(path)) {
    g_last_error = std::string("no such file: ") + path;
    return DHLS_ERR_IO;
  }
  return guarded([&] { *out = new dhls_program{mir::parse_file(path)}; });
}

char* dhls_program_serialize(const dhls_program* p) {
  if (!p) return nullptr;
  return dup_string(mir::serialize(p->prog));
}

int dhls_program_has_network(const dhls_program* p) {
  return p && p->prog.network.present ? 1 : 0;
}

void dhls_program_destroy(dhls_program* p) { delete p; }

/* ---- analysis and transformation ------------------------------------ */

dhls_status dhls_analyze(const dhls_program* p, const dhls_config* cfg,
                         dhls_analysis** out) {
  if (!p || !out) return invalid("null argument");
  driver::RunConfig rc = cfg ? cfg->cfg : driver::RunConfig{};
  return guarded([&] {
    *out = new dhls_analysis{driver::analyze(p->prog, rc)};
  });
}

char* dhls_analysis_json(const dhls_analysis* a) {
  if (!a) return nullptr;
  return dup_string(driver::analysis_to_json_text(a->a));
}

char* dhls_analysis_dot(const dhls_analysis* a, const char* graph) {
  if (!a || !graph) return nullptr;
  std::string which = graph;
  if (which == "cfg") return dup_string(graphs::cfg_to_dot(a->a.cfg));
  if (which == "cdg")
    return dup_string(graphs::cdg_to_dot(a->a.cfg, a->a.cdg));
  if (which == "ddg") return dup_string(graphs::ddg_to_dot(a->a.ddg));
  g_last_error = "unknown graph kind '" + which + "'";
  return nullptr;
}

int dhls_analysis_marking_empty(const dhls_analysis* a) {
  return a && a->a.marking.empty() ? 1 : 0;
}

void dhls_analysis_destroy(dhls_analysis* a) { delete a; }

dhls_status dhls_transform(const dhls_analysis* a, const dhls_config* cfg,
                           dhls_program** out) {
  if (!a || !out) return invalid("null argument");
  driver::RunConfig rc = cfg ? cfg->cfg : driver::RunConfig{};
  return guarded([&] {
    auto tr = transform::transform(a->a.fn(), a->a.marking, rc.transform);
    *out = new dhls_program{std::move(tr.program)};
  });
}

/* ---- inputs --------------------------------------------------------- */

dhls_inputs* dhls_inputs_create(void) { return new dhls_inputs{}; }

dhls_status dhls_inputs_set_scalar(dhls_inputs* in, const char* name,
                                   int64_t value) {
  if (!in || !name) return invalid("null argument");
  in->in.scalars[name] = value;
  return DHLS_OK;
}

dhls_status dhls_inputs_set_array(dhls_inputs* in, const char* name,
                                  const int64_t* values, size_t count) {
  if (!in || !name || (!values && count)) return invalid("null argument");
  in->in.arrays[name].assign(values, values + count);
  return DHLS_OK;
}

dhls_status dhls_inputs_from_json(const char* json_text, dhls_inputs** out) {
  if (!json_text || !out) return invalid("null argument");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
      throw driver::DriverError(std::string("inputs are not valid JSON: ") +
                                e.what());
    }
    if (!j.is_object())
      throw driver::DriverError("inputs must be a JSON object");
    mir::Inputs in;
    if (j.contains("scalars"))
      for (const auto& [k, v] : j.at("scalars").items())
        in.scalars[k] = v.get<int64_t>();
    if (j.contains("arrays"))
      for (const auto& [k, v] : j.at("arrays").items())
        in.arrays[k] = v.get<std::vector<int64_t>>();
    *out = new dhls_inputs{std::move(in)};
  });
}

dhls_status dhls_inputs_generate(const dhls_program* p,
                                 const dhls_config* cfg, uint64_t seed,
                                 int kind, dhls_inputs** out) {
  if (!p || !out) return invalid("null argument");
  if (kind < 0 || kind > 2) return invalid("kind must be 0, 1 or 2");
  if (p->prog.functions.empty()) return invalid("program has no functions");
  driver::RunConfig rc = cfg ? cfg->cfg : driver::RunConfig{};
  auto dk = kind == 1   ? driver::DataKind::Best
            : kind == 2 ? driver::DataKind::Worst
                        : driver::DataKind::Random;
  return guarded([&] {
    *out = new dhls_inputs{
        driver::benchmark_inputs(p->prog.functions.front(), rc, seed, dk)};
  });
}

void dhls_inputs_destroy(dhls_inputs* in) { delete in; }

/* ---- simulation ----------------------------------------------------- */

dhls_status dhls_simulate(const dhls_program* p, const dhls_inputs* in,
                          const dhls_config* cfg, int trace_lsq,
                          dhls_report** out) {
  if (!p || !in || !out) return invalid("null argument");
  driver::RunConfig rc = cfg ? cfg->cfg : driver::RunConfig{};
  return guarded([&] {
    sim::SimConfig sc = rc.sim_config();
    sc.trace_lsq = trace_lsq != 0;
    *out = new dhls_report{sim::simulate(p->prog, in->in, sc)};
  });
}

int64_t dhls_report_cycles(const dhls_report* r) {
  return r ? r->rep.cycles : -1;
}

int dhls_report_deadlock(const dhls_report* r) {
  return r && r->rep.deadlock ? 1 : 0;
}

char* dhls_report_json(const dhls_report* r) {
  if (!r) return nullptr;
  return dup_string(driver::sim_report_to_json_text(r->rep));
}

char* dhls_report_lsq_trace(const dhls_report* r) {
  if (!r) return nullptr;
  return dup_string(r->rep.lsq_trace_csv);
}

dhls_status dhls_check_equivalence(const dhls_program* oracle,
                                   const dhls_inputs* in,
                                   const dhls_report* r, int* match,
                                   char** detail) {
  if (!oracle || !in || !r || !match) return invalid("null argument");
  if (oracle->prog.functions.empty())
    return invalid("oracle program has no functions");
  return guarded([&] {
    mir::FinalState ref =
        mir::interpret(oracle->prog.functions.front(), in->in);
    driver::EquivalenceVerdict v = driver::check_equivalence(r->rep, ref);
    *match = v.match ? 1 : 0;
    if (detail) *detail = v.match ? nullptr : dup_string(v.detail);
  });
}

void dhls_report_destroy(dhls_report* r) { delete r; }

/* ---- benchmark corpus ----------------------------------------------- */

dhls_status dhls_bench(const char* corpus_dir, const dhls_config* cfg,
                       char** text_table, char** json_report,
                       int* all_equivalent) {
  if (!corpus_dir) return invalid("null argument");
  driver::RunConfig rc = cfg ? cfg->cfg : driver::RunConfig{};
  return guarded([&] {
    driver::CompareReport rep = driver::run_corpus(corpus_dir, rc);
    if (text_table) *text_table = dup_string(rep.to_text());
    if (json_report) *json_report = dup_string(rep.to_json_text());
    if (all_equivalent) *all_equivalent = rep.all_equivalent() ? 1 : 0;
  });
}

} /* extern "C" */
