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

#include "driver/driver.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mir/parser.hpp"

namespace dhls::driver {

using json = nlohmann::ordered_json;

sim::SimConfig RunConfig::sim_config() const {
  sim::SimConfig sc;
  sc.max_cycles = max_cycles;
  sc.channel_transport = channel_transport;
  sc.lsq = lsq;
  sc.lm = latency;
  return sc;
}

namespace {

mir::Opcode opcode_from_name(const std::string& name) {
  using mir::Opcode;
  static const std::map<std::string, Opcode> table = {
      {"const", Opcode::Const},       {"add", Opcode::Add},
      {"sub", Opcode::Sub},           {"mul", Opcode::Mul},
      {"div", Opcode::Div},           {"icmp", Opcode::ICmp},
      {"select", Opcode::Select},     {"phi", Opcode::Phi},
      {"load", Opcode::Load},         {"store", Opcode::Store},
      {"br", Opcode::Br},             {"cond_br", Opcode::CondBr},
      {"ret", Opcode::Ret},           {"call", Opcode::Call},
      {"chan_read", Opcode::ChanRead}, {"chan_read_nb", Opcode::ChanReadNB},
      {"chan_write", Opcode::ChanWrite}};
  auto it = table.find(name);
  if (it == table.end())
    throw DriverError("unknown opcode in latency table: '" + name + "'");
  return it->second;
}

int64_t get_int(const json& j, const std::string& key, int64_t lo,
                int64_t hi) {
  if (!j.is_number_integer())
    throw DriverError("config field '" + key + "' must be an integer");
  int64_t v = j.get<int64_t>();
  if (v < lo || v > hi)
    throw DriverError("config field '" + key + "' out of range [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

double get_prob(const json& j, const std::string& key) {
  if (!j.is_number())
    throw DriverError("config field '" + key + "' must be a number");
  double v = j.get<double>();
  if (v < 0.0 || v > 1.0)
    throw DriverError("config field '" + key + "' must be in [0, 1]");
  return v;
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw DriverError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DriverError("config must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (key == "latency") {
      if (!val.is_object())
        throw DriverError("'latency' must map opcode names to cycles");
      for (const auto& [op, cyc] : val.items())
        cfg.latency.table[opcode_from_name(op)] =
            static_cast<int>(get_int(cyc, "latency." + op, 0, 1024));
    } else if (key == "channel_capacity") {
      cfg.transform.data_capacity = static_cast<int>(get_int(val, key, 1, 4096));
    } else if (key == "pred_capacity") {
      cfg.transform.pred_capacity = static_cast<int>(get_int(val, key, 1, 4096));
    } else if (key == "req_capacity") {
      cfg.transform.req_capacity = static_cast<int>(get_int(val, key, 1, 4096));
    } else if (key == "hoist") {
      if (!val.is_boolean()) throw DriverError("'hoist' must be a boolean");
      cfg.transform.hoist = val.get<bool>();
    } else if (key == "lsq") {
      if (!val.is_object()) throw DriverError("'lsq' must be an object");
      for (const auto& [k, v] : val.items()) {
        if (k == "ld_depth")
          cfg.lsq.ld_depth = static_cast<int>(get_int(v, "lsq.ld_depth", 1, 4096));
        else if (k == "st_depth")
          cfg.lsq.st_depth = static_cast<int>(get_int(v, "lsq.st_depth", 1, 4096));
        else if (k == "load_latency")
          cfg.lsq.load_latency =
              static_cast<int>(get_int(v, "lsq.load_latency", 0, 1024));
        else if (k == "forwarding") {
          if (!v.is_boolean())
            throw DriverError("'lsq.forwarding' must be a boolean");
          cfg.lsq.forwarding = v.get<bool>();
        } else {
          throw DriverError("unknown config field 'lsq." + k + "'");
        }
      }
    } else if (key == "path_limit") {
      cfg.marking.path_limit = static_cast<int>(get_int(val, key, 1, 1 << 24));
    } else if (key == "default_trip") {
      cfg.marking.default_trip = get_int(val, key, 1, 1 << 30);
    } else if (key == "channel_transport") {
      cfg.channel_transport = static_cast<int>(get_int(val, key, 0, 64));
    } else if (key == "max_cycles") {
      cfg.max_cycles = get_int(val, key, 1, int64_t{1} << 40);
    } else if (key == "trip") {
      cfg.trip = get_int(val, key, 1, 1 << 20);
    } else if (key == "taken_prob") {
      cfg.taken_prob = get_prob(val, key);
    } else if (key == "collision") {
      cfg.collision = get_prob(val, key);
    } else if (key == "seed") {
      cfg.seed = static_cast<uint64_t>(get_int(val, key, 0, int64_t{1} << 62));
    } else {
      throw DriverError("unknown config field '" + key + "'");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DriverError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const RunConfig& cfg) {
  json j;
  json lat;
  for (const auto& [op, cyc] : cfg.latency.table)
    lat[mir::opcode_name(op)] = cyc;
  j["latency"] = lat;
  j["channel_capacity"] = cfg.transform.data_capacity;
  j["pred_capacity"] = cfg.transform.pred_capacity;
  j["req_capacity"] = cfg.transform.req_capacity;
  j["hoist"] = cfg.transform.hoist;
  j["lsq"] = {{"ld_depth", cfg.lsq.ld_depth},
              {"st_depth", cfg.lsq.st_depth},
              {"load_latency", cfg.lsq.load_latency},
              {"forwarding", cfg.lsq.forwarding}};
  j["path_limit"] = cfg.marking.path_limit;
  j["default_trip"] = cfg.marking.default_trip;
  j["channel_transport"] = cfg.channel_transport;
  j["max_cycles"] = cfg.max_cycles;
  j["trip"] = cfg.trip;
  j["taken_prob"] = cfg.taken_prob;
  j["collision"] = cfg.collision;
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

Analysis analyze(mir::Program program, const RunConfig& cfg) {
  if (program.functions.empty())
    throw DriverError("program has no functions");
  Analysis a;
  a.program = std::move(program);
  const mir::Function& fn = a.program.functions.front();
  a.cfg = graphs::build_cfg(fn);
  a.cdg = graphs::build_cdg(a.cfg);
  a.li = graphs::build_loop_info(a.cfg);
  a.ddg = graphs::build_ddg(fn, a.cfg, a.li);
  for (const auto& loop : a.li.loops)
    a.schedules.push_back(modsched::schedule_loop(a.ddg, loop, cfg.latency));
  a.marking =
      marking::mark_function(fn, a.cfg, a.cdg, a.li, a.ddg, cfg.latency,
                             cfg.marking);
  return a;
}

Analysis analyze_file(const std::string& path, const RunConfig& cfg) {
  return analyze(mir::parse_file(path), cfg);
}

std::string analysis_to_json_text(const Analysis& a) {
  const mir::Function& fn = a.fn();
  json j;
  j["function"] = fn.name;
  json loops = json::array();
  for (size_t i = 0; i < a.li.loops.size(); ++i) {
    const auto& l = a.li.loops[i];
    json jl;
    jl["index"] = i;
    jl["header"] = fn.blocks[static_cast<size_t>(l.header)].label;
    jl["latch"] = fn.blocks[static_cast<size_t>(l.latch)].label;
    jl["depth"] = l.depth;
    jl["ii"] = a.schedules[i].ii;
    jl["schedule_length"] = a.schedules[i].length;
    loops.push_back(jl);
  }
  j["loops"] = loops;
  json marks;
  json blocks = json::array();
  for (const auto& m : a.marking.blocks) {
    json jm;
    jm["block"] = fn.blocks[static_cast<size_t>(m.block)].label;
    jm["loop"] = m.loop;
    jm["nodes"] = m.nodes;
    jm["justification"] = m.justification;
    blocks.push_back(jm);
  }
  marks["blocks"] = blocks;
  json memory = json::array();
  for (const auto& m : a.marking.memory) {
    json jm;
    jm["inst"] = mir::inst_to_string(fn, *fn.find_inst(m.inst_id));
    jm["loop"] = m.loop;
    jm["array"] = m.array;
    jm["justification"] = m.justification;
    memory.push_back(jm);
  }
  marks["memory"] = memory;
  json loops_m = json::array();
  for (const auto& m : a.marking.loops) {
    json jm;
    jm["loop"] = m.loop;
    jm["justification"] = m.justification;
    loops_m.push_back(jm);
  }
  marks["loops"] = loops_m;
  json agu = json::array();
  for (const auto& v : a.marking.agu) {
    json jv;
    jv["loop"] = v.loop;
    jv["can_decouple"] = v.can_decouple;
    jv["reason"] = v.reason;
    agu.push_back(jv);
  }
  marks["agu"] = agu;
  j["marking"] = marks;
  return j.dump(2) + "\n";
}

std::string sim_report_to_json_text(const sim::SimReport& rep) {
  json j;
  j["cycles"] = rep.cycles;
  j["deadlock"] = rep.deadlock;
  if (rep.deadlock) j["deadlock_reason"] = rep.deadlock_reason;
  json procs = json::array();
  for (const auto& p : rep.processes) {
    json jp;
    jp["name"] = p.name;
    jp["active_cycles"] = p.active_cycles;
    jp["stall_cycles"] = p.stall_cycles;
    json iis;
    for (const auto& [header, ii] : p.loop_ii) iis[header] = ii;
    jp["loop_ii"] = iis;
    json iters;
    for (const auto& [header, n] : p.iterations) iters[header] = n;
    jp["iterations"] = iters;
    json stalls;
    for (const auto& [chan, n] : p.stall_causes) stalls[chan] = n;
    jp["stall_causes"] = stalls;
    procs.push_back(jp);
  }
  j["processes"] = procs;
  json hw;
  for (const auto& [chan, n] : rep.channel_high_water) hw[chan] = n;
  j["channel_high_water"] = hw;
  j["ret"] = rep.result.ret;
  json arrays;
  for (const auto& [name, vals] : rep.result.arrays) arrays[name] = vals;
  j["arrays"] = arrays;
  return j.dump(2) + "\n";
}

namespace {

// Splitmix-style scalar generator: stable across standard libraries, so a
// seed pins the exact byte stream.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ull) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  int64_t range(int64_t lo, int64_t hi) {  // inclusive
    return lo + static_cast<int64_t>(
                    next() % static_cast<uint64_t>(hi - lo + 1));
  }
  bool bern(double p) { return next() % 1000000 < static_cast<uint64_t>(p * 1000000); }
};

std::vector<int64_t> fill(Rng& r, size_t n, int64_t lo, int64_t hi) {
  std::vector<int64_t> v(n);
  for (auto& x : v) x = r.range(lo, hi);
  return v;
}

int64_t array_size(const mir::Function& fn, const std::string& name,
                   int64_t fallback) {
  const mir::Param* p = fn.find_param(name);
  return p && p->is_array ? p->array_size : fallback;
}

int64_t clamp_trip(int64_t trip, int64_t maxv) {
  return std::max<int64_t>(1, std::min(trip, maxv));
}

// Threshold-style kernels: data is generated against a fixed threshold of
// 500 so `taken_prob` directly sets the conditional-update rate.
std::vector<int64_t> threshold_stream(Rng& r, size_t n, double p) {
  std::vector<int64_t> v(n);
  for (auto& x : v) x = r.bern(p) ? r.range(501, 1000) : r.range(0, 500);
  return v;
}

std::vector<int64_t> key_stream(Rng& r, size_t n, int64_t bins, double coll,
                                DataKind kind) {
  std::vector<int64_t> v(n);
  if (kind == DataKind::Best) {
    for (size_t i = 0; i < n; ++i) v[i] = static_cast<int64_t>(i) % bins;
  } else if (kind == DataKind::Worst) {
    std::fill(v.begin(), v.end(), 0);
  } else {
    int64_t hot = r.range(0, bins - 1);
    for (auto& x : v) x = r.bern(coll) ? hot : r.range(0, bins - 1);
  }
  return v;
}

}  // namespace

mir::Inputs benchmark_inputs(const mir::Function& fn, const RunConfig& cfg,
                             uint64_t seed, DataKind kind) {
  Rng r(seed);
  mir::Inputs in;
  const std::string& name = fn.name;
  double p = kind == DataKind::Best    ? 0.0
             : kind == DataKind::Worst ? 1.0
                                       : cfg.taken_prob;
  if (name == "motivating" || name == "motivating_hoist") {
    int64_t cap = array_size(fn, "cond", 10000);
    int64_t n = clamp_trip(cfg.trip, cap);
    in.scalars["x0"] = r.range(0, 1 << 20);
    if (fn.find_param("y0")) in.scalars["y0"] = r.range(0, 1 << 20);
    in.scalars["n"] = n;
    auto cond = std::vector<int64_t>(static_cast<size_t>(cap), 0);
    for (auto& c : cond) c = r.bern(p) ? 1 : 0;
    in.arrays["cond"] = cond;
  } else if (name == "sparseMatrix") {
    int64_t rows = array_size(fn, "rowlen", 64);
    int64_t n = clamp_trip(cfg.trip, rows);
    int64_t m = 16;
    in.scalars = {{"n", n}, {"m", m}};
    auto rl = std::vector<int64_t>(static_cast<size_t>(rows), 1);
    for (auto& x : rl)
      x = kind == DataKind::Best ? 1 : kind == DataKind::Worst ? m
                                                               : r.range(1, m);
    in.arrays["rowlen"] = rl;
    in.arrays["val"] =
        fill(r, static_cast<size_t>(array_size(fn, "val", 4096)), -50, 50);
    in.arrays["row"] =
        std::vector<int64_t>(static_cast<size_t>(rows), 0);
  } else if (name == "getTanhDouble" || name == "filterSum") {
    int64_t cap = array_size(fn, "data", 4096);
    int64_t n = clamp_trip(cfg.trip, cap);
    if (fn.find_param("x0")) in.scalars["x0"] = r.range(0, 1 << 20);
    in.scalars["n"] = n;
    in.scalars["thresh"] = 500;
    in.arrays["data"] = threshold_stream(r, static_cast<size_t>(cap), p);
  } else if (name == "vecNormTrans") {
    int64_t cap = array_size(fn, "data", 4096);
    in.scalars["n"] = clamp_trip(cfg.trip, cap);
    auto data = std::vector<int64_t>(static_cast<size_t>(cap), 0);
    for (auto& x : data) x = r.bern(p) ? r.range(1, 100) : 0;
    in.arrays["data"] = data;
  } else if (name == "histogram") {
    int64_t bins = array_size(fn, "out", 256);
    int64_t cap = array_size(fn, "keys", 4096);
    // All-distinct keys need one bin per element.
    int64_t n = clamp_trip(cfg.trip, std::min(bins, cap));
    in.scalars = {{"n", n}, {"cap", 1 << 20}};
    in.arrays["keys"] =
        key_stream(r, static_cast<size_t>(cap), bins, cfg.collision, kind);
    in.arrays["out"] = std::vector<int64_t>(static_cast<size_t>(bins), 0);
  } else if (name == "getTanh") {
    int64_t bins = array_size(fn, "lut", 256);
    int64_t cap = array_size(fn, "idx", 4096);
    in.scalars["n"] = clamp_trip(cfg.trip, cap);
    in.arrays["idx"] =
        key_stream(r, static_cast<size_t>(cap), bins, cfg.collision, kind);
    in.arrays["val"] = fill(r, static_cast<size_t>(cap), 0, 1000);
    in.arrays["lut"] = fill(r, static_cast<size_t>(bins), 0, 100);
  } else if (name == "BNN") {
    int64_t bins = array_size(fn, "out", 256);
    int64_t cap = array_size(fn, "in", 4096);
    in.scalars["n"] = clamp_trip(cfg.trip, cap);
    in.arrays["in"] =
        key_stream(r, static_cast<size_t>(cap), bins, cfg.collision, kind);
    in.arrays["wsel"] = fill(r, static_cast<size_t>(cap), -5, 5);
    in.arrays["out"] = fill(r, static_cast<size_t>(bins), -10, 10);
  } else if (name == "bubbleSort") {
    int64_t cap = array_size(fn, "a", 64);
    int64_t n = std::max<int64_t>(2, clamp_trip(cfg.trip, cap));
    in.scalars["n"] = n;
    auto a = fill(r, static_cast<size_t>(cap), -100, 100);
    if (kind == DataKind::Best) std::sort(a.begin(), a.begin() + n);
    if (kind == DataKind::Worst)
      std::sort(a.begin(), a.begin() + n, std::greater<int64_t>());
    in.arrays["a"] = a;
  } else if (name == "covariance") {
    int64_t rows = array_size(fn, "cov", 64);
    in.scalars = {{"n", clamp_trip(cfg.trip, rows)},
                  {"m", 16},
                  {"mean", r.range(0, 100)}};
    in.arrays["data"] =
        fill(r, static_cast<size_t>(array_size(fn, "data", 4096)), 0, 200);
    in.arrays["cov"] = std::vector<int64_t>(static_cast<size_t>(rows), 0);
  } else if (name == "gesummv") {
    int64_t rows = array_size(fn, "y", 64);
    in.scalars = {{"n", clamp_trip(cfg.trip, rows)},
                  {"m", 16},
                  {"alpha", r.range(0, 10)},
                  {"beta", r.range(0, 10)}};
    in.arrays["A"] =
        fill(r, static_cast<size_t>(array_size(fn, "A", 4096)), -20, 20);
    in.arrays["B"] =
        fill(r, static_cast<size_t>(array_size(fn, "B", 4096)), -20, 20);
    in.arrays["x"] =
        fill(r, static_cast<size_t>(array_size(fn, "x", 64)), -20, 20);
    in.arrays["y"] =
        std::vector<int64_t>(static_cast<size_t>(rows), 0);
  } else {
    // Unknown function: small positive scalars, small array values. The
    // caller is responsible for address safety of exotic kernels.
    int64_t smallest = 1 << 20;
    for (const auto& prm : fn.params)
      if (prm.is_array) smallest = std::min(smallest, prm.array_size);
    for (const auto& prm : fn.params) {
      if (prm.is_array)
        in.arrays[prm.name] =
            fill(r, static_cast<size_t>(prm.array_size), 0,
                 std::max<int64_t>(0, smallest - 1));
      else if (prm.name == "n")
        in.scalars[prm.name] = clamp_trip(cfg.trip, smallest);
      else
        in.scalars[prm.name] = r.range(1, 4);
    }
  }
  return in;
}

EquivalenceVerdict check_equivalence(const sim::SimReport& rep,
                                     const mir::FinalState& oracle) {
  if (rep.deadlock)
    return {false, "deadlock: " + rep.deadlock_reason};
  if (rep.result.ret != oracle.ret) {
    std::ostringstream os;
    os << "return values differ: got [";
    for (size_t i = 0; i < rep.result.ret.size(); ++i)
      os << (i ? " " : "") << rep.result.ret[i];
    os << "] want [";
    for (size_t i = 0; i < oracle.ret.size(); ++i)
      os << (i ? " " : "") << oracle.ret[i];
    os << "]";
    return {false, os.str()};
  }
  for (const auto& [name, want] : oracle.arrays) {
    auto it = rep.result.arrays.find(name);
    if (it == rep.result.arrays.end())
      return {false, "array %" + name + " missing from simulation state"};
    const auto& got = it->second;
    if (got.size() != want.size())
      return {false, "array %" + name + " size differs"};
    for (size_t i = 0; i < want.size(); ++i)
      if (got[i] != want[i]) {
        std::ostringstream os;
        os << "array %" << name << "[" << i << "]: got " << got[i]
           << " want " << want[i];
        return {false, os.str()};
      }
  }
  return {true, ""};
}

bool CompareReport::all_equivalent() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const BenchRow& r) { return r.equivalent; });
}

std::string CompareReport::to_text() const {
  std::ostringstream os;
  os << "benchmark        dist   static  transformed  speedup  marking"
        "                          equivalent\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof line,
                  "%-16s %-6s %7lld %12lld %8.2f  %-32s %s\n",
                  r.benchmark.c_str(), r.distribution.c_str(),
                  static_cast<long long>(r.static_cycles),
                  static_cast<long long>(r.transformed_cycles), r.speedup,
                  r.marking.c_str(), r.equivalent ? "yes" : "NO");
    os << line;
    if (!r.equivalent && !r.detail.empty()) os << "    " << r.detail << "\n";
  }
  return os.str();
}

std::string CompareReport::to_json_text() const {
  json rows_j = json::array();
  for (const auto& r : rows) {
    json jr;
    jr["benchmark"] = r.benchmark;
    jr["distribution"] = r.distribution;
    jr["static_cycles"] = r.static_cycles;
    jr["transformed_cycles"] = r.transformed_cycles;
    jr["speedup"] = r.speedup;
    jr["marking"] = r.marking;
    jr["equivalent"] = r.equivalent;
    if (!r.detail.empty()) jr["detail"] = r.detail;
    rows_j.push_back(jr);
  }
  json j;
  j["rows"] = rows_j;
  return j.dump(2) + "\n";
}

namespace {

std::string marking_summary(const marking::MarkingReport& rep) {
  std::ostringstream os;
  os << "blocks=" << rep.blocks.size() << " mem=" << rep.memory.size()
     << " loops=" << rep.loops.size() << " agu=";
  if (rep.agu.empty())
    os << "-";
  else
    for (size_t i = 0; i < rep.agu.size(); ++i)
      os << (i ? "," : "") << (rep.agu[i].can_decouple ? "dec" : "nodec");
  return os.str();
}

}  // namespace

CompareReport run_corpus(const std::string& dir, const RunConfig& cfg) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".mir") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  CompareReport report;
  for (const auto& path : files) {
    Analysis a = analyze_file(path.string(), cfg);
    const mir::Function& fn = a.fn();
    auto tr = transform::transform(fn, a.marking, cfg.transform);
    std::string marks = marking_summary(a.marking);
    for (DataKind kind : {DataKind::Best, DataKind::Worst}) {
      BenchRow row;
      row.benchmark = path.stem().string();
      row.distribution = kind == DataKind::Best ? "best" : "worst";
      row.marking = marks;
      try {
        mir::Inputs in = benchmark_inputs(fn, cfg, cfg.seed, kind);
        mir::FinalState oracle = mir::interpret(fn, in);
        sim::SimConfig sc = cfg.sim_config();
        sim::SimReport st = sim::simulate(a.program, in, sc);
        sim::SimReport dy = sim::simulate(tr.program, in, sc);
        row.static_cycles = st.cycles;
        row.transformed_cycles = dy.cycles;
        row.speedup = dy.cycles > 0 ? static_cast<double>(st.cycles) /
                                          static_cast<double>(dy.cycles)
                                    : 0.0;
        EquivalenceVerdict vs = check_equivalence(st, oracle);
        EquivalenceVerdict vd = check_equivalence(dy, oracle);
        row.equivalent = vs.match && vd.match;
        if (!vs.match)
          row.detail = "static: " + vs.detail;
        else if (!vd.match)
          row.detail = "transformed: " + vd.detail;
      } catch (const std::exception& e) {
        row.equivalent = false;
        row.detail = e.what();
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace dhls::driver
