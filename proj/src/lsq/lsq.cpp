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

#include "lsq/lsq.hpp"

#include <algorithm>
#include <sstream>

namespace dhls::lsq {

Lsq::Lsq(const LsqConfig& config, int num_ld_ports, int num_st_ports,
         std::vector<int64_t>* memory)
    : config_(config), memory_(memory) {
  ld_results_.resize(static_cast<size_t>(num_ld_ports));
  pending_vals_.resize(static_cast<size_t>(num_st_ports));
}

bool Lsq::can_accept_ld_req(int) const {
  return static_cast<int>(loads_.size()) < config_.ld_depth;
}

void Lsq::push_ld_req(int port, int64_t tag, int64_t addr) {
  if (!can_accept_ld_req(port)) throw LsqError("load queue overflow");
  loads_.push_back({tag, addr, port, false, false, 0, 0});
  record("ld_req", port, tag, addr, 0);
}

bool Lsq::can_accept_st_req(int) const {
  return static_cast<int>(stores_.size()) < config_.st_depth;
}

void Lsq::push_st_req(int port, int64_t tag, int64_t addr) {
  if (!can_accept_st_req(port)) throw LsqError("store queue overflow");
  StoreEntry e;
  e.tag = tag;
  e.addr = addr;
  e.port = port;
  if (!pending_vals_[static_cast<size_t>(port)].empty()) {
    // A value that raced ahead of its request on this port.
    e.value = pending_vals_[static_cast<size_t>(port)].front();
    pending_vals_[static_cast<size_t>(port)].pop_front();
    e.has_value = true;
  }
  auto it = std::lower_bound(
      stores_.begin(), stores_.end(), e.tag,
      [](const StoreEntry& s, int64_t t) { return s.tag < t; });
  stores_.insert(it, e);
  ++total_st_reqs_;
  record("st_req", port, tag, addr, 0);
}

bool Lsq::can_accept_st_val(int port) const {
  return static_cast<int>(pending_vals_[static_cast<size_t>(port)].size()) <
         config_.st_depth;
}

void Lsq::push_st_val(int port, int64_t value) {
  // Values match requests of the same port in FIFO order.
  for (auto& s : stores_)
    if (s.port == port && !s.has_value) {
      s.value = value;
      s.has_value = true;
      record("st_val", port, s.tag, s.addr, value);
      return;
    }
  if (!can_accept_st_val(port)) throw LsqError("store value buffer overflow");
  pending_vals_[static_cast<size_t>(port)].push_back(value);
  record("st_val", port, -1, -1, value);
}

bool Lsq::ld_val_ready(int port) const {
  return !ld_results_[static_cast<size_t>(port)].empty();
}

int64_t Lsq::pop_ld_val(int port) {
  if (!ld_val_ready(port)) throw LsqError("no load result on port");
  int64_t v = ld_results_[static_cast<size_t>(port)].front();
  ld_results_[static_cast<size_t>(port)].pop_front();
  return v;
}

bool Lsq::load_blockers(const LoadEntry& ld, bool* can_forward,
                        int64_t* forward_value) const {
  *can_forward = false;
  // All store requests up to the load's tag must have arrived. Tags are
  // contiguous, so a count suffices.
  if (total_st_reqs_ < ld.tag) return false;
  const StoreEntry* youngest_same = nullptr;
  for (const auto& s : stores_) {
    if (s.tag > ld.tag) break;
    if (s.addr == ld.addr) youngest_same = &s;
  }
  if (!youngest_same) return true;  // reads memory
  if (config_.forwarding && youngest_same->has_value) {
    *can_forward = true;
    *forward_value = youngest_same->value;
    return true;
  }
  return false;
}

void Lsq::step() {
  ++cycle_;
  // Age in-flight loads, then retire. Results leave in per-port request
  // order (the network matches them by FIFO), so a finished load waits for
  // older loads on its port.
  for (auto& ld : loads_)
    if (ld.issued && ld.cycles_left > 0) --ld.cycles_left;
  retire_loads();
  // Issue hazard-free loads. Issuing before the commit below lets a load
  // whose blocking store just received its value take the forwarding path
  // instead of waiting one more cycle for the commit to reach memory.
  for (size_t i = 0; i < loads_.size();) {
    LoadEntry& ld = loads_[i];
    bool fwd = false;
    int64_t fwd_val = 0;
    if (ld.issued || !load_blockers(ld, &fwd, &fwd_val)) {
      ++i;
      continue;
    }
    ld.issued = true;
    ld.cycles_left = config_.load_latency;
    if (fwd) {
      // A forwarded value comes from the queue entry, not from memory, and
      // skips one cycle of the memory round trip.
      ld.forwarded = true;
      ld.cycles_left = std::max(0, config_.load_latency - 1);
      ld.value = fwd_val;
    } else {
      if (ld.addr < 0 || ld.addr >= static_cast<int64_t>(memory_->size()))
        throw LsqError("load out of bounds at address " +
                       std::to_string(ld.addr));
      ld.value = (*memory_)[static_cast<size_t>(ld.addr)];
    }
    record("ld_issue", ld.port, ld.tag, ld.addr, ld.value);
    ++i;
  }
  // Commit at most one store per cycle, in tag order. A store may not pass
  // a queued earlier load that has not captured its value yet (WAR). Loads
  // that precede the store in program order arrive no later than it, so
  // checking the queue is sufficient.
  bool war_blocked = false;
  if (!stores_.empty())
    for (const auto& ld : loads_)
      if (!ld.issued && ld.tag < stores_.front().tag) war_blocked = true;
  if (!war_blocked && !stores_.empty() &&
      stores_.front().tag == committed_ + 1 && stores_.front().has_value) {
    const StoreEntry& s = stores_.front();
    if (s.addr < 0 || s.addr >= static_cast<int64_t>(memory_->size()))
      throw LsqError("store commit out of bounds at address " +
                     std::to_string(s.addr));
    (*memory_)[static_cast<size_t>(s.addr)] = s.value;
    record("st_commit", s.port, s.tag, s.addr, s.value);
    ++committed_;
    stores_.erase(stores_.begin());
  }
  retire_loads();  // zero-latency loads can leave in the same cycle
}

void Lsq::retire_loads() {
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<char> port_seen(ld_results_.size(), 0);
    for (size_t i = 0; i < loads_.size(); ++i) {
      const LoadEntry& ld = loads_[i];
      size_t p = static_cast<size_t>(ld.port);
      if (port_seen[p]) continue;
      port_seen[p] = 1;  // only the oldest load per port may leave
      if (!ld.issued || ld.cycles_left > 0) continue;
      ld_results_[p].push_back(ld.value);
      record("ld_val", ld.port, ld.tag, ld.addr, ld.value);
      loads_.erase(loads_.begin() + static_cast<long>(i));
      progress = true;
      break;
    }
  }
}

bool Lsq::idle() const {
  if (!stores_.empty() || !loads_.empty()) return false;
  for (const auto& q : pending_vals_)
    if (!q.empty()) return false;
  for (const auto& q : ld_results_)
    if (!q.empty()) return false;
  return true;
}

std::string Lsq::stuck_reason() const {
  std::ostringstream os;
  if (!stores_.empty() && stores_.front().tag != committed_ + 1) {
    os << "store request with tag " << committed_ + 1
       << " never arrived (oldest queued tag is " << stores_.front().tag
       << ")";
    return os.str();
  }
  if (!stores_.empty() && !stores_.front().has_value) {
    os << "store tag " << stores_.front().tag << " on port "
       << stores_.front().port << " is waiting for its value";
    return os.str();
  }
  for (const auto& ld : loads_) {
    if (ld.issued) continue;
    if (total_st_reqs_ < ld.tag) {
      os << "load (port " << ld.port << ", tag " << ld.tag
         << ") is waiting for store request #" << total_st_reqs_ + 1
         << ", which never arrived";
      return os.str();
    }
    os << "load (port " << ld.port << ", tag " << ld.tag
       << ") is blocked by an uncommitted store to address " << ld.addr;
    return os.str();
  }
  return "no blocked operations";
}

bool Lsq::advancing() const {
  for (const auto& ld : loads_)
    if (ld.issued && ld.cycles_left > 0) return true;
  return false;
}

void Lsq::record(const std::string& event, int port, int64_t tag,
                 int64_t addr, int64_t value) {
  ++event_count_;
  if (trace_enabled_) trace_.push_back({cycle_, event, port, tag, addr, value});
}

std::string Lsq::trace_csv() const {
  std::ostringstream os;
  os << "cycle,event,port,tag,addr,value\n";
  for (const auto& r : trace_)
    os << r.cycle << "," << r.event << "," << r.port << "," << r.tag << ","
       << r.addr << "," << r.value << "\n";
  return os.str();
}

}  // namespace dhls::lsq
