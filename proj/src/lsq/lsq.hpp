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

#ifndef DHLS_LSQ_LSQ_HPP
#define DHLS_LSQ_LSQ_HPP

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhls::lsq {

struct LsqError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requests travel over plain i64 channels with the tag packed above the
// 32-bit address. 4294967296 (1 << 32) is the multiplier a producer uses to
// build `tag * kTagStride + addr` with ordinary arithmetic.
inline constexpr int64_t kTagStride = int64_t{1} << 32;

inline int64_t pack_request(int64_t tag, int64_t addr) {
  return tag * kTagStride + (addr & 0xffffffff);
}
inline int64_t request_tag(int64_t packed) { return packed >> 32; }
inline int64_t request_addr(int64_t packed) {
  return static_cast<int32_t>(static_cast<uint32_t>(packed & 0xffffffff));
}

struct LsqConfig {
  int ld_depth = 16;
  int st_depth = 16;
  int load_latency = 2;
  bool forwarding = true;
};

// Behavioral tagged load-store queue for one array.
//
// Tags order accesses against stores: the tag of an access is the number of
// stores that precede it in program order (a store counts itself). Tags are
// therefore contiguous over store requests, which lets the queue decide
// hazards from arrival counts alone:
//   - a load with tag t may fire once all store requests with tag <= t have
//     arrived and each one is committed, targets a different address, or
//     (with forwarding) can supply its value directly;
//   - stores commit strictly in tag order, one per cycle, once both their
//     address and value are present.
// Each static access owns one port; per-port traffic is FIFO.
class Lsq {
 public:
  Lsq(const LsqConfig& config, int num_ld_ports, int num_st_ports,
      std::vector<int64_t>* memory);

  // Port side. push_* may only be called when can_accept_* returns true.
  bool can_accept_ld_req(int port) const;
  void push_ld_req(int port, int64_t tag, int64_t addr);
  bool can_accept_st_req(int port) const;
  void push_st_req(int port, int64_t tag, int64_t addr);
  bool can_accept_st_val(int port) const;
  void push_st_val(int port, int64_t value);
  bool ld_val_ready(int port) const;
  int64_t pop_ld_val(int port);

  // Advances one cycle: commits at most one store, issues ready loads and
  // retires finished ones.
  void step();

  bool idle() const;
  int64_t cycle() const { return cycle_; }
  int64_t committed_stores() const { return committed_; }

  // Progress introspection for deadlock detection: event_count() bumps on
  // every request, issue, retirement and commit; advancing() reports loads
  // still counting down their latency.
  int64_t event_count() const { return event_count_; }
  bool advancing() const;

  // Human-readable explanation of why nothing can make progress; used for
  // deadlock diagnostics.
  std::string stuck_reason() const;

  struct TraceRow {
    int64_t cycle;
    std::string event;  // ld_req st_req st_val ld_issue ld_val st_commit
    int port;
    int64_t tag, addr, value;
  };
  const std::vector<TraceRow>& trace() const { return trace_; }
  void enable_trace(bool on) { trace_enabled_ = on; }
  std::string trace_csv() const;

 private:
  struct StoreEntry {
    int64_t tag = 0;
    int64_t addr = 0;
    int64_t value = 0;
    bool has_value = false;
    int port = 0;
  };
  struct LoadEntry {
    int64_t tag = 0;
    int64_t addr = 0;
    int port = 0;
    bool issued = false;
    bool forwarded = false;
    int cycles_left = 0;
    int64_t value = 0;
  };

  bool load_blockers(const LoadEntry& ld, bool* can_forward,
                     int64_t* forward_value) const;
  void retire_loads();
  void record(const std::string& event, int port, int64_t tag, int64_t addr,
              int64_t value);

  LsqConfig config_;
  std::vector<int64_t>* memory_;
  std::vector<StoreEntry> stores_;  // uncommitted, sorted by tag
  std::vector<LoadEntry> loads_;    // in arrival order
  std::vector<std::deque<int64_t>> ld_results_;   // per load port
  std::vector<std::deque<int64_t>> pending_vals_;  // per store port
  int64_t total_st_reqs_ = 0;
  int64_t committed_ = 0;
  int64_t event_count_ = 0;
  int64_t cycle_ = 0;
  bool trace_enabled_ = false;
  std::vector<TraceRow> trace_;
};

}  // namespace dhls::lsq

#endif  // DHLS_LSQ_LSQ_HPP
