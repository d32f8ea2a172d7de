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

#include "sim/sim.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "graphs/ddg.hpp"

namespace dhls::sim {
namespace {

using mir::Instruction;
using mir::Opcode;
using mir::ValueId;

// ---------------------------------------------------------------------------
// Channels

struct Channel {
  std::string name;
  int capacity = 8;
  std::deque<std::pair<int64_t, int64_t>> q;  // (value, visible_at)
  int high_water = 0;

  bool can_write() const { return static_cast<int>(q.size()) < capacity; }
  void write(int64_t v, int64_t visible_at) {
    q.push_back({v, visible_at});
    high_water = std::max(high_water, static_cast<int>(q.size()));
  }
  bool can_read(int64_t now) const {
    return !q.empty() && q.front().second <= now;
  }
  int64_t read() {
    int64_t v = q.front().first;
    q.pop_front();
    return v;
  }
};

// ---------------------------------------------------------------------------
// Per-function static schedules

struct BlockSched {
  std::vector<int> offset;  // by instruction position in the block
  int length = 0;           // max completion time of any op in the block
};

struct FnSched {
  const mir::Function* fn = nullptr;
  graphs::Cfg cfg;
  graphs::LoopInfo li;
  graphs::Ddg ddg;
  std::vector<BlockSched> bs;                    // per block
  std::map<int, modsched::LoopSchedule> ls;      // per innermost loop index
  std::vector<const Instruction*> def_of;        // per value; null for params
  std::vector<int> def_block;                    // per value; -1 for params
  std::vector<int> idom;                         // immediate dominators

  explicit FnSched(const mir::Function& f, const modsched::LatencyModel& lm)
      : fn(&f),
        cfg(graphs::build_cfg(f)),
        li(graphs::build_loop_info(cfg)),
        ddg(graphs::build_ddg(f, cfg, li)),
        idom(graphs::dominators(cfg)) {
    for (const auto& bb : f.blocks) {
      BlockSched b;
      std::vector<int> ids;
      for (const auto& inst : bb.insts) ids.push_back(inst.id);
      auto g = modsched::subgraph(ddg, ids, lm);
      b.offset.assign(ids.size(), 0);
      // ASAP over the in-block dependence DAG.
      for (size_t pass = 0; pass < ids.size(); ++pass)
        for (const auto& e : g.edges)
          if (e.dist == 0)
            b.offset[static_cast<size_t>(e.dst)] =
                std::max(b.offset[static_cast<size_t>(e.dst)],
                         b.offset[static_cast<size_t>(e.src)] + e.delay);
      for (size_t k = 0; k < ids.size(); ++k)
        b.length = std::max(
            b.length, b.offset[k] + g.latency[k]);
      bs.push_back(std::move(b));
    }
    for (size_t l = 0; l < li.loops.size(); ++l)
      if (li.loops[l].children.empty())
        ls.emplace(static_cast<int>(l),
                   modsched::schedule_loop(ddg, li.loops[l], lm));
    def_of.assign(static_cast<size_t>(f.num_values()), nullptr);
    def_block.assign(static_cast<size_t>(f.num_values()), -1);
    for (size_t b = 0; b < f.blocks.size(); ++b)
      for (const auto& inst : f.blocks[b].insts)
        if (inst.result != mir::kNoValue) {
          def_of[static_cast<size_t>(inst.result)] = &inst;
          def_block[static_cast<size_t>(inst.result)] = static_cast<int>(b);
        }
  }

  // Innermost (childless) loop headed by `block`, or -1.
  int pipelined_loop_at(int block) const {
    int l = li.innermost_loop_of(block);
    if (l >= 0 && li.loops[static_cast<size_t>(l)].header == block &&
        li.loops[static_cast<size_t>(l)].children.empty())
      return l;
    return -1;
  }
};

// ---------------------------------------------------------------------------
// Process execution

struct OpInst {
  const Instruction* inst = nullptr;
  int block = -1;
  int64_t fire = 0;  // process-local cycle
  bool done = false;
};

struct Iter {
  int64_t index = 0;
  int64_t base = 0;
  Iter* prev = nullptr;
  std::vector<int64_t> val;
  std::vector<char> def;
  std::vector<int64_t> rdy;  // local cycle the value becomes consumable
  std::vector<OpInst> ops;
  std::map<int, int> came_from;  // block -> predecessor block
  bool latch_done = false;
  bool continues = false;

  bool all_done() const {
    for (const auto& o : ops)
      if (!o.done) return false;
    return true;
  }
};

struct LoopCtx {
  int loop = -1;
  const modsched::LoopSchedule* sched = nullptr;
  std::deque<std::unique_ptr<Iter>> iters;
  int64_t next_index = 0;
  int64_t spawn_base = 0;
  bool no_more_spawns = false;
  bool exited = false;
  int exit_target = -1;
  std::set<int> always;  // blocks executed on every iteration
  int64_t end_time = 0;
  int64_t first_base = 0;
  int64_t last_base = 0;
  int64_t count = 0;
};

class ProcessSim {
 public:
  ProcessSim(const FnSched& fs, const SimConfig& cfg,
             std::map<std::string, Channel>& channels,
             std::map<std::string, std::vector<int64_t>>& storage,
             const mir::Inputs& inputs)
      : fs_(fs), cfg_(cfg), channels_(channels), storage_(storage) {
    const mir::Function& fn = *fs.fn;
    stats_.name = fn.name;
    fval_.assign(static_cast<size_t>(fn.num_values()), 0);
    fdef_.assign(static_cast<size_t>(fn.num_values()), 0);
    frdy_.assign(static_cast<size_t>(fn.num_values()), 0);
    for (const auto& p : fn.params) {
      if (p.is_array) continue;
      auto it = inputs.scalars.find(p.name);
      if (it == inputs.scalars.end())
        throw SimError("scalar parameter %" + p.name + " of @" + fn.name +
                       " not bound");
      fval_[static_cast<size_t>(p.value)] = it->second;
      fdef_[static_cast<size_t>(p.value)] = 1;
    }
    enter_block(0, 0, -1);
  }

  // Fires every runnable operation at the current local time; returns how
  // many fired. Stops at the first blocked channel port: the pipeline is
  // rigid, so nothing behind a stalled port may move either.
  int attempt(int64_t now) {
    if (done_) return 0;
    now_ = now;
    int fired = 0;
    blocked_ = false;
    if (mode_ == Mode::Loop) {
      try_spawn();
      // Ops wait for control (block entry), their schedule slot, and their
      // operands. Only a channel port without a token freezes the process
      // clock; a data wait lets time pass so the producer can reach its own
      // slot. `held` keeps same-channel ops in program order when an older
      // one is still waiting.
      std::set<std::string> held;
      size_t live0 = 0;  // oldest iteration that still has work
      while (live0 < lc_.iters.size() && lc_.iters[live0]->all_done()) ++live0;
      for (size_t i = 0; i < lc_.iters.size() && !done_; ++i) {
        Iter& it = *lc_.iters[i];
        for (size_t k = 0; k < it.ops.size(); ++k) {
          if (done_) break;
          OpInst& oi = it.ops[k];
          if (oi.done) continue;
          bool chan = oi.inst->is_channel_op();
          auto hold = [&] {
            if (chan) held.insert(oi.inst->channel);
          };
          if (oi.fire > local_t_) {
            hold();
            continue;
          }
          if (oi.inst->op == Opcode::Ret && pending_ops() > 1) continue;
          if (needs_control(*oi.inst) && oi.block != cur_loop().header &&
              !it.came_from.count(oi.block)) {
            hold();
            continue;
          }
          std::optional<int64_t> ready = ready_time(oi, &it);
          if (!ready || *ready > local_t_) {
            hold();
            continue;
          }
          if (chan && held.count(oi.inst->channel)) {
            hold();
            continue;
          }
          oi.fire = std::max(oi.fire, *ready);
          // A port op's result is timed by when its token actually moves,
          // which is now, not by the slot the static schedule had in mind.
          if (chan) oi.fire = std::max(oi.fire, local_t_);
          if (!fire_op(oi, &it)) {
            // A token-blocked port freezes the clock only when it belongs to
            // the oldest live iteration; a younger iteration merely waits so
            // that in-flight work ahead of it can drain (otherwise two
            // processes whose heads feed each other's tails would deadlock).
            // The waiting op is pushed to the current time so the delay is
            // visible to everything that depends on its result.
            if (i == live0) {
              blocked_ = true;
              return fired;
            }
            oi.fire = local_t_;
            hold();
            continue;
          }
          ++fired;
        }
      }
      prune_iters();
      if (!done_ && lc_.exited && all_iters_done()) fired += finish_loop();
    } else if (mode_ == Mode::Seq) {
      for (size_t k = 0; k < seq_ops_.size() && !done_; ++k) {
        OpInst& oi = seq_ops_[k];
        if (oi.done || oi.fire > local_t_) continue;
        if (oi.inst->op == Opcode::Ret && pending_ops() > 1) continue;
        if (!fire_op(oi, nullptr)) {
          blocked_ = true;
          return fired;
        }
        ++fired;
      }
      if (!done_ && seq_pending_ && seq_all_done()) {
        apply_seq_transition();
        ++fired;  // structural progress; rescan in the next sweep
      }
    }
    return fired;
  }

  void end_cycle() {
    if (done_) return;
    if (blocked_) {
      ++stats_.stall_cycles;
      ++stats_.stall_causes[block_cause_.empty() ? "internal" : block_cause_];
    } else {
      ++local_t_;
      ++stats_.active_cycles;
    }
  }

  bool done() const { return done_; }
  const std::vector<int64_t>& ret() const { return ret_; }
  ProcessStats take_stats() {
    for (auto& [label, acc] : ii_acc_)
      if (acc.second > 0)
        stats_.loop_ii[label] =
            static_cast<double>(acc.first) / static_cast<double>(acc.second);
    return stats_;
  }
  std::string stall_info() const {
    if (done_ || !blocked_) return "";
    return "process @" + fs_.fn->name + " stalled on " +
           (block_cause_.empty() ? "an internal dependency" : block_cause_);
  }

 private:
  enum class Mode { Seq, Loop };

  const mir::BasicBlock& bb(int b) const {
    return fs_.fn->blocks[static_cast<size_t>(b)];
  }

  Channel& channel(const std::string& name) {
    auto it = channels_.find(name);
    if (it == channels_.end())
      throw SimError("unknown channel $" + name + " in @" + fs_.fn->name);
    return it->second;
  }

  std::vector<int64_t>& array(const std::string& name) {
    auto it = storage_.find(name);
    if (it == storage_.end())
      throw SimError("array %" + name + " not bound");
    return it->second;
  }

  int64_t rd(ValueId v, const Iter* it) const {
    if (it && it->def[static_cast<size_t>(v)])
      return it->val[static_cast<size_t>(v)];
    if (fdef_[static_cast<size_t>(v)]) return fval_[static_cast<size_t>(v)];
    throw SimError("value %" + fs_.fn->value_names[static_cast<size_t>(v)] +
                   " read before it was computed in @" + fs_.fn->name);
  }
  void wr(ValueId v, int64_t x, Iter* it) {
    if (it) {
      it->val[static_cast<size_t>(v)] = x;
      it->def[static_cast<size_t>(v)] = 1;
      it->rdy[static_cast<size_t>(v)] = wr_rdy_;
    } else {
      fval_[static_cast<size_t>(v)] = x;
      fdef_[static_cast<size_t>(v)] = 1;
      frdy_[static_cast<size_t>(v)] = wr_rdy_;
    }
  }

  // Local cycle at which %v can feed a consumer, or nothing if it has not
  // been produced yet. In-loop values must come from the same iteration;
  // the merged function env only serves values from before the loop.
  std::optional<int64_t> rdy_of(ValueId v, const Iter* it) const {
    if (it && it->def[static_cast<size_t>(v)])
      return it->rdy[static_cast<size_t>(v)];
    if (it && fs_.def_of[static_cast<size_t>(v)] &&
        cur_loop().contains(fs_.def_block[static_cast<size_t>(v)]))
      return std::nullopt;
    if (fdef_[static_cast<size_t>(v)]) return frdy_[static_cast<size_t>(v)];
    return std::nullopt;
  }

  // Ops that touch channels or memory, and terminators, must wait until the
  // control path has actually reached their block; pure ops may run ahead.
  static bool needs_control(const Instruction& I) {
    switch (I.op) {
      case Opcode::Load:
      case Opcode::Store:
      case Opcode::ChanRead:
      case Opcode::ChanReadNB:
      case Opcode::ChanWrite:
      case Opcode::Br:
      case Opcode::CondBr:
      case Opcode::Ret:
        return true;
      default:
        return false;
    }
  }

  std::optional<int64_t> ready_time(const OpInst& oi, Iter* it) const {
    const Instruction& I = *oi.inst;
    if (I.op == Opcode::Phi) {
      const graphs::Loop& L = cur_loop();
      int from;
      if (oi.block == L.header) {
        from = it->index == 0 ? L.preheader : L.latch;
      } else {
        auto f = it->came_from.find(oi.block);
        if (f == it->came_from.end()) return std::nullopt;
        from = f->second;
      }
      for (size_t k = 0; k < I.incoming_blocks.size(); ++k) {
        if (I.incoming_blocks[k] != from) continue;
        ValueId src = I.operands[k];
        if (oi.block == L.header && it->index > 0) {
          if (it->prev && it->prev->def[static_cast<size_t>(src)])
            return it->prev->rdy[static_cast<size_t>(src)];
          if (it->prev && fs_.def_of[static_cast<size_t>(src)] &&
              L.contains(fs_.def_block[static_cast<size_t>(src)]))
            return std::nullopt;  // the carried value is still in flight
          if (fdef_[static_cast<size_t>(src)])
            return frdy_[static_cast<size_t>(src)];
          return std::nullopt;
        }
        return rdy_of(src, it);
      }
      return oi.fire;  // no matching edge; fire_op reports the error
    }
    int64_t r = oi.fire;
    for (ValueId v : I.operands) {
      auto t = rdy_of(v, it);
      if (!t) return std::nullopt;
      r = std::max(r, *t);
    }
    return r;
  }

  int pending_ops() const {
    int n = 0;
    if (mode_ == Mode::Loop) {
      for (const auto& it : lc_.iters)
        for (const auto& o : it->ops) n += !o.done;
    } else {
      for (const auto& o : seq_ops_) n += !o.done;
    }
    return n;
  }

  // ---- block entry ----

  void enter_block(int b, int64_t base, int prev_block) {
    int l = fs_.pipelined_loop_at(b);
    if (l >= 0) {
      mode_ = Mode::Loop;
      lc_ = LoopCtx{};
      lc_.loop = l;
      lc_.sched = &fs_.ls.at(l);
      lc_.spawn_base = base;
      lc_.first_base = base;
      lc_.end_time = base;
      const graphs::Loop& L = fs_.li.loops[static_cast<size_t>(l)];
      for (int blk : L.blocks)
        if (graphs::tree_dominates(fs_.idom, blk, L.latch))
          lc_.always.insert(blk);
      spawn_iter(base);
      return;
    }
    mode_ = Mode::Seq;
    seq_block_ = b;
    seq_base_ = base;
    seq_prev_ = prev_block;
    seq_pending_ = false;
    seq_ops_.clear();
    const auto& blk = bb(b);
    const auto& sched = fs_.bs[static_cast<size_t>(b)];
    // Phis read their incoming values simultaneously at block entry.
    std::vector<std::pair<ValueId, int64_t>> phi_writes;
    for (const auto& inst : blk.insts) {
      if (inst.op != Opcode::Phi) break;
      bool found = false;
      for (size_t k = 0; k < inst.incoming_blocks.size(); ++k)
        if (inst.incoming_blocks[k] == prev_block) {
          phi_writes.push_back({inst.result, rd(inst.operands[k], nullptr)});
          found = true;
          break;
        }
      if (!found)
        throw SimError("phi has no incoming value for the taken edge in @" +
                       fs_.fn->name);
    }
    wr_rdy_ = base;
    for (auto& [v, x] : phi_writes) wr(v, x, nullptr);
    for (size_t k = 0; k < blk.insts.size(); ++k) {
      OpInst oi;
      oi.inst = &blk.insts[k];
      oi.block = b;
      oi.fire = base + sched.offset[k];
      oi.done = oi.inst->op == Opcode::Phi;
      seq_ops_.push_back(oi);
    }
  }

  void apply_seq_transition() {
    int next = seq_next_;
    int64_t base = seq_next_base_;
    int prev = seq_block_;
    seq_pending_ = false;
    enter_block(next, base, prev);
  }

  bool seq_all_done() const {
    for (const auto& o : seq_ops_)
      if (!o.done) return false;
    return true;
  }

  // ---- pipelined loop execution ----

  const graphs::Loop& cur_loop() const {
    return fs_.li.loops[static_cast<size_t>(lc_.loop)];
  }

  void spawn_iter(int64_t base) {
    auto it = std::make_unique<Iter>();
    it->index = lc_.next_index++;
    it->base = base;
    it->prev = lc_.iters.empty() ? nullptr : lc_.iters.back().get();
    it->val.assign(static_cast<size_t>(fs_.fn->num_values()), 0);
    it->def.assign(static_cast<size_t>(fs_.fn->num_values()), 0);
    it->rdy.assign(static_cast<size_t>(fs_.fn->num_values()), 0);
    const graphs::Loop& L = cur_loop();
    it->came_from[L.header] = it->index == 0 ? L.preheader : L.latch;
    // Blocks that run on every trip are issued up front so that pure ops on
    // recurrence paths fire as soon as their operands are ready; ops with
    // side effects still wait for the control path to reach their block.
    append_loop_block(*it, L.header, base);
    for (int blk : lc_.always)
      if (blk != L.header) append_loop_block(*it, blk, base);
    lc_.last_base = base;
    ++lc_.count;
    lc_.iters.push_back(std::move(it));
  }

  void append_loop_block(Iter& it, int b, int64_t entry) {
    // A late entry shifts the block's schedule as a whole; the relative
    // spacing between its slots is kept (rigid schedule, not a flatten).
    int min_off = 0;
    bool first = true;
    for (const auto& inst : bb(b).insts) {
      int off = lc_.sched->offset[static_cast<size_t>(inst.id)];
      min_off = first ? off : std::min(min_off, off);
      first = false;
    }
    for (const auto& inst : bb(b).insts) {
      OpInst oi;
      oi.inst = &inst;
      oi.block = b;
      int off = lc_.sched->offset[static_cast<size_t>(inst.id)];
      oi.fire = std::max(it.base + off, entry + (off - min_off));
      it.ops.push_back(oi);
    }
  }

  void try_spawn() {
    while (!lc_.no_more_spawns && !lc_.exited && local_t_ >= lc_.spawn_base) {
      Iter& last = *lc_.iters.back();
      int outcome;
      if (last.latch_done)
        outcome = last.continues ? 1 : 0;
      else
        outcome = eager_outcome(last);
      if (outcome < 0) return;  // retry once the branch chain resolves
      if (outcome == 0) {
        lc_.no_more_spawns = true;
        return;
      }
      int64_t base = std::max(lc_.spawn_base, local_t_);
      spawn_iter(base);
      lc_.spawn_base = base + lc_.sched->ii;
    }
  }

  // Walks the remaining control path of `it` to the latch using only values
  // that are pure functions of what is already computed. 1 = the loop
  // continues, 0 = it exits, -1 = not decidable yet.
  int eager_outcome(const Iter& it) const {
    const graphs::Loop& L = cur_loop();
    int cur = L.header;
    for (size_t guard = 0; guard <= fs_.fn->blocks.size(); ++guard) {
      const Instruction& term = bb(cur).terminator();
      if (term.op == Opcode::Ret) return 0;
      int next;
      if (term.op == Opcode::Br) {
        next = term.succ_blocks[0];
      } else {
        auto c = try_eval(term.operands[0], &it, 0);
        if (!c) return -1;
        next = *c != 0 ? term.succ_blocks[0] : term.succ_blocks[1];
      }
      if (next == L.header) return 1;
      if (!L.contains(next)) return 0;
      cur = next;
    }
    return -1;
  }

  std::optional<int64_t> try_eval(ValueId v, const Iter* it, int depth) const {
    if (depth > 200) return std::nullopt;
    if (it && it->def[static_cast<size_t>(v)])
      return it->val[static_cast<size_t>(v)];
    const Instruction* d = fs_.def_of[static_cast<size_t>(v)];
    const graphs::Loop& L = cur_loop();
    if (!d || !L.contains(fs_.def_block[static_cast<size_t>(v)]) || !it)
      return fdef_[static_cast<size_t>(v)]
                 ? std::optional<int64_t>(fval_[static_cast<size_t>(v)])
                 : std::nullopt;
    auto op = [&](size_t i) { return try_eval(d->operands[i], it, depth + 1); };
    switch (d->op) {
      case Opcode::Const:
        return d->imm;
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul: {
        auto a = op(0), b = op(1);
        if (!a || !b) return std::nullopt;
        return mir::eval_binop(d->op, *a, *b);
      }
      case Opcode::Div: {
        auto a = op(0), b = op(1);
        if (!a || !b || *b == 0) return std::nullopt;
        return mir::eval_binop(d->op, *a, *b);
      }
      case Opcode::ICmp: {
        auto a = op(0), b = op(1);
        if (!a || !b) return std::nullopt;
        return mir::eval_cmp(d->pred, *a, *b) ? 1 : 0;
      }
      case Opcode::Select: {
        auto c = op(0);
        if (!c) return std::nullopt;
        return op(*c != 0 ? 1 : 2);
      }
      case Opcode::Call: {
        auto a = op(0);
        if (!a) return std::nullopt;
        return mir::opaque_call(d->callee, *a);
      }
      case Opcode::Phi: {
        if (fs_.def_block[static_cast<size_t>(v)] != L.header)
          return std::nullopt;  // path-dependent
        int from = it->index == 0 ? L.preheader : L.latch;
        for (size_t k = 0; k < d->incoming_blocks.size(); ++k)
          if (d->incoming_blocks[k] == from)
            return try_eval(d->operands[k],
                            from == L.latch ? it->prev : nullptr, depth + 1);
        return std::nullopt;
      }
      default:
        return std::nullopt;
    }
  }

  void prune_iters() {
    while (lc_.iters.size() >= 2) {
      Iter& front = *lc_.iters.front();
      if (!front.all_done()) return;
      Iter& second = *lc_.iters[1];
      for (const auto& o : second.ops)
        if (o.inst->op == Opcode::Phi && o.block == cur_loop().header &&
            !o.done)
          return;
      merge_env(front);
      second.prev = nullptr;
      lc_.iters.pop_front();
    }
  }

  void merge_env(const Iter& it) {
    for (size_t v = 0; v < it.def.size(); ++v)
      if (it.def[v]) {
        fval_[v] = it.val[v];
        fdef_[v] = 1;
        frdy_[v] = it.rdy[v];
      }
  }

  bool all_iters_done() const {
    for (const auto& it : lc_.iters)
      if (!it->all_done()) return false;
    return true;
  }

  int finish_loop() {
    for (const auto& it : lc_.iters) merge_env(*it);
    const std::string& label =
        bb(cur_loop().header).label;
    stats_.iterations[label] += lc_.count;
    auto& acc = ii_acc_[label];
    acc.first += lc_.last_base - lc_.first_base;
    acc.second += lc_.count - 1;
    int target = lc_.exit_target;
    int64_t base = lc_.end_time;
    lc_.iters.clear();
    enter_block(target, base, exit_prev_);
    return 1;
  }

  // ---- firing ----

  bool fire_op(OpInst& oi, Iter* it) {
    const Instruction& I = *oi.inst;
    LoopCtx* lc = mode_ == Mode::Loop ? &lc_ : nullptr;
    wr_rdy_ = oi.fire + cfg_.lm.latency(I);
    auto opval = [&](size_t i) { return rd(I.operands[i], it); };
    switch (I.op) {
      case Opcode::Const:
        wr(I.result, I.imm, it);
        break;
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul:
      case Opcode::Div:
        try {
          wr(I.result, mir::eval_binop(I.op, opval(0), opval(1)), it);
        } catch (const mir::InterpError& e) {
          throw SimError(e.what());
        }
        break;
      case Opcode::ICmp:
        wr(I.result, mir::eval_cmp(I.pred, opval(0), opval(1)) ? 1 : 0, it);
        break;
      case Opcode::Select:
        wr(I.result, opval(0) != 0 ? opval(1) : opval(2), it);
        break;
      case Opcode::Call:
        wr(I.result, mir::opaque_call(I.callee, opval(0)), it);
        break;
      case Opcode::Phi: {
        // Loop-mode only; sequential phis resolve at block entry.
        const graphs::Loop& L = cur_loop();
        int from = oi.block == L.header
                       ? (it->index == 0 ? L.preheader : L.latch)
                       : it->came_from.at(oi.block);
        bool found = false;
        for (size_t k = 0; k < I.incoming_blocks.size(); ++k)
          if (I.incoming_blocks[k] == from) {
            int64_t v;
            if (oi.block == L.header && it->index > 0) {
              ValueId src = I.operands[k];
              if (it->prev && it->prev->def[static_cast<size_t>(src)])
                v = it->prev->val[static_cast<size_t>(src)];
              else
                v = rd(src, nullptr);
            } else {
              v = rd(I.operands[k], it);
            }
            wr(I.result, v, it);
            found = true;
            break;
          }
        if (!found)
          throw SimError("phi has no incoming value for the taken edge in @" +
                         fs_.fn->name);
        break;
      }
      case Opcode::Load: {
        auto& arr = array(I.base_array);
        int64_t idx = opval(0);
        if (idx < 0 || idx >= static_cast<int64_t>(arr.size()))
          throw SimError("out-of-bounds load from %" + I.base_array + "[" +
                         std::to_string(idx) + "] in @" + fs_.fn->name);
        wr(I.result, arr[static_cast<size_t>(idx)], it);
        break;
      }
      case Opcode::Store: {
        auto& arr = array(I.base_array);
        int64_t idx = opval(1);
        if (idx < 0 || idx >= static_cast<int64_t>(arr.size()))
          throw SimError("out-of-bounds store to %" + I.base_array + "[" +
                         std::to_string(idx) + "] in @" + fs_.fn->name);
        arr[static_cast<size_t>(idx)] = opval(0);
        break;
      }
      case Opcode::ChanRead: {
        Channel& ch = channel(I.channel);
        if (!ch.can_read(now_)) {
          block_cause_ = "$" + I.channel + " (read)";
          return false;
        }
        wr(I.result, ch.read(), it);
        break;
      }
      case Opcode::ChanReadNB: {
        Channel& ch = channel(I.channel);
        wr(I.result, ch.can_read(now_) ? ch.read() : opval(0), it);
        break;
      }
      case Opcode::ChanWrite: {
        Channel& ch = channel(I.channel);
        if (!ch.can_write()) {
          block_cause_ = "$" + I.channel + " (write)";
          return false;
        }
        ch.write(opval(0), now_ + cfg_.channel_transport);
        break;
      }
      case Opcode::Br:
      case Opcode::CondBr: {
        int next = I.op == Opcode::Br
                       ? I.succ_blocks[0]
                       : (opval(0) != 0 ? I.succ_blocks[0] : I.succ_blocks[1]);
        oi.done = true;
        track_completion(oi, lc);
        if (lc) {
          const graphs::Loop& L = cur_loop();
          if (next == L.header && oi.block == L.latch) {
            it->latch_done = true;
            it->continues = true;
          } else if (!L.contains(next)) {
            it->latch_done = true;
            it->continues = false;
            lc->exited = true;
            lc->exit_target = next;
            exit_prev_ = oi.block;
            // Pre-issued blocks past the exit never run this trip: drop
            // their ops and discard anything computed ahead of time.
            for (auto& o : it->ops) {
              if (o.block == L.header || it->came_from.count(o.block))
                continue;
              o.done = true;
              if (o.inst->result != mir::kNoValue)
                it->def[static_cast<size_t>(o.inst->result)] = 0;
            }
          } else {
            it->came_from[next] = oi.block;
            if (lc->always.count(next)) {
              // Already issued at spawn; just release its control-gated ops.
              for (auto& o : it->ops)
                if (o.block == next && !o.done && needs_control(*o.inst))
                  o.fire = std::max(o.fire, oi.fire);
            } else {
              append_loop_block(*it, next, oi.fire);
            }
          }
        } else {
          seq_pending_ = true;
          seq_next_ = next;
          int64_t len = fs_.bs[static_cast<size_t>(seq_block_)].length;
          // A zero-latency lap around an outer loop still takes a cycle.
          if (len == 0 && is_back_edge(seq_block_, next)) len = 1;
          seq_next_base_ = seq_base_ + len;
        }
        return true;
      }
      case Opcode::Ret: {
        for (size_t k = 0; k < I.operands.size(); ++k)
          ret_.push_back(opval(k));
        oi.done = true;
        done_ = true;
        return true;
      }
    }
    oi.done = true;
    track_completion(oi, lc);
    return true;
  }

  bool is_back_edge(int from, int to) const {
    for (const auto& L : fs_.li.loops)
      if (L.header == to && L.contains(from)) return true;
    return false;
  }

  void track_completion(const OpInst& oi, LoopCtx* lc) {
    if (lc)
      lc->end_time =
          std::max(lc->end_time, oi.fire + cfg_.lm.latency(*oi.inst));
  }

  const FnSched& fs_;
  const SimConfig& cfg_;
  std::map<std::string, Channel>& channels_;
  std::map<std::string, std::vector<int64_t>>& storage_;

  std::vector<int64_t> fval_;
  std::vector<char> fdef_;
  std::vector<int64_t> frdy_;
  int64_t wr_rdy_ = 0;
  Mode mode_ = Mode::Seq;
  int64_t local_t_ = 0;
  int64_t now_ = 0;
  bool done_ = false;
  bool blocked_ = false;
  std::string block_cause_;
  std::vector<int64_t> ret_;

  // Sequential region state.
  int seq_block_ = 0;
  int64_t seq_base_ = 0;
  int seq_prev_ = -1;
  bool seq_pending_ = false;
  int seq_next_ = 0;
  int64_t seq_next_base_ = 0;
  std::vector<OpInst> seq_ops_;

  // Pipelined loop state.
  LoopCtx lc_;
  int exit_prev_ = -1;

  ProcessStats stats_;
  std::map<std::string, std::pair<int64_t, int64_t>> ii_acc_;
};

// ---------------------------------------------------------------------------
// LSQ glue: moves request/value tokens between channels and the queues.

struct LsqInst {
  const mir::LsqBinding* binding = nullptr;
  std::unique_ptr<lsq::Lsq> q;
  int64_t last_events = 0;

  // Returns the number of tokens moved.
  int exchange(std::map<std::string, Channel>& channels, int64_t now,
               int transport) {
    int moved = 0;
    for (size_t p = 0; p < binding->ld_req.size(); ++p) {
      Channel& ch = channels.at(binding->ld_req[p]);
      while (ch.can_read(now) && q->can_accept_ld_req(static_cast<int>(p))) {
        int64_t v = ch.read();
        q->push_ld_req(static_cast<int>(p), lsq::request_tag(v),
                       lsq::request_addr(v));
        ++moved;
      }
    }
    for (size_t p = 0; p < binding->st_req.size(); ++p) {
      Channel& ch = channels.at(binding->st_req[p]);
      while (ch.can_read(now) && q->can_accept_st_req(static_cast<int>(p))) {
        int64_t v = ch.read();
        q->push_st_req(static_cast<int>(p), lsq::request_tag(v),
                       lsq::request_addr(v));
        ++moved;
      }
    }
    for (size_t p = 0; p < binding->st_val.size(); ++p) {
      Channel& ch = channels.at(binding->st_val[p]);
      while (ch.can_read(now) && q->can_accept_st_val(static_cast<int>(p))) {
        q->push_st_val(static_cast<int>(p), ch.read());
        ++moved;
      }
    }
    for (size_t p = 0; p < binding->ld_val.size(); ++p) {
      Channel& ch = channels.at(binding->ld_val[p]);
      while (q->ld_val_ready(static_cast<int>(p)) && ch.can_write()) {
        ch.write(q->pop_ld_val(static_cast<int>(p)), now + transport);
        ++moved;
      }
    }
    return moved;
  }
};

// ---------------------------------------------------------------------------
// Static (single statically scheduled pipeline) simulation

SimReport simulate_static(const mir::Function& fn, const mir::Inputs& inputs,
                          const SimConfig& cfg) {
  FnSched fs(fn, cfg.lm);
  SimReport rep;
  ProcessStats stats;
  stats.name = fn.name;

  std::vector<int64_t> vals(static_cast<size_t>(fn.num_values()), 0);
  std::map<std::string, std::vector<int64_t>> arrays;
  for (const auto& p : fn.params) {
    if (p.is_array) {
      auto it = inputs.arrays.find(p.name);
      if (it == inputs.arrays.end())
        throw SimError("array parameter %" + p.name + " not bound");
      if (static_cast<int64_t>(it->second.size()) != p.array_size)
        throw SimError("array %" + p.name + " has wrong size");
      arrays[p.name] = it->second;
    } else {
      auto it = inputs.scalars.find(p.name);
      if (it == inputs.scalars.end())
        throw SimError("scalar parameter %" + p.name + " not bound");
      vals[static_cast<size_t>(p.value)] = it->second;
    }
  }

  int64_t cycles = 0;
  int active_loop = -1;  // innermost loop instance being charged
  int64_t iters = 0;
  auto close_loop = [&]() {
    if (active_loop < 0) return;
    const auto& sched = fs.ls.at(active_loop);
    cycles += sched.length + (iters - 1) * sched.ii;
    const std::string& label =
        fn.blocks[static_cast<size_t>(
                      fs.li.loops[static_cast<size_t>(active_loop)].header)]
            .label;
    stats.iterations[label] += iters;
    stats.loop_ii[label] = sched.ii;
    active_loop = -1;
    iters = 0;
  };

  int block = 0, prev_block = -1;
  int64_t steps = 0;
  while (true) {
    if (active_loop >= 0 &&
        !fs.li.loops[static_cast<size_t>(active_loop)].contains(block))
      close_loop();
    int il = fs.li.innermost_loop_of(block);
    bool in_inner =
        il >= 0 && fs.li.loops[static_cast<size_t>(il)].children.empty();
    if (in_inner) {
      if (fs.li.loops[static_cast<size_t>(il)].header == block) {
        if (active_loop == il) {
          ++iters;
        } else {
          active_loop = il;
          iters = 1;
        }
      }
    } else {
      cycles += fs.bs[static_cast<size_t>(block)].length;
    }

    const mir::BasicBlock& bbk = fn.blocks[static_cast<size_t>(block)];
    std::vector<std::pair<ValueId, int64_t>> phi_writes;
    for (const auto& inst : bbk.insts) {
      if (inst.op != Opcode::Phi) break;
      for (size_t k = 0; k < inst.incoming_blocks.size(); ++k)
        if (inst.incoming_blocks[k] == prev_block) {
          phi_writes.push_back(
              {inst.result, vals[static_cast<size_t>(inst.operands[k])]});
          break;
        }
    }
    for (auto& [v, x] : phi_writes) vals[static_cast<size_t>(v)] = x;

    bool moved = false;
    for (const auto& inst : bbk.insts) {
      if (++steps > cfg.max_cycles * 64)
        throw SimError("step budget exceeded");
      auto opval = [&](size_t i) {
        return vals[static_cast<size_t>(inst.operands[i])];
      };
      switch (inst.op) {
        case Opcode::Phi:
          break;
        case Opcode::Const:
          vals[static_cast<size_t>(inst.result)] = inst.imm;
          break;
        case Opcode::Add:
        case Opcode::Sub:
        case Opcode::Mul:
        case Opcode::Div:
          try {
            vals[static_cast<size_t>(inst.result)] =
                mir::eval_binop(inst.op, opval(0), opval(1));
          } catch (const mir::InterpError& e) {
            throw SimError(e.what());
          }
          break;
        case Opcode::ICmp:
          vals[static_cast<size_t>(inst.result)] =
              mir::eval_cmp(inst.pred, opval(0), opval(1)) ? 1 : 0;
          break;
        case Opcode::Select:
          vals[static_cast<size_t>(inst.result)] =
              opval(0) != 0 ? opval(1) : opval(2);
          break;
        case Opcode::Call:
          vals[static_cast<size_t>(inst.result)] =
              mir::opaque_call(inst.callee, opval(0));
          break;
        case Opcode::Load: {
          auto& arr = arrays.at(inst.base_array);
          int64_t idx = opval(0);
          if (idx < 0 || idx >= static_cast<int64_t>(arr.size()))
            throw SimError("out-of-bounds load from %" + inst.base_array +
                           "[" + std::to_string(idx) + "]");
          vals[static_cast<size_t>(inst.result)] =
              arr[static_cast<size_t>(idx)];
          break;
        }
        case Opcode::Store: {
          auto& arr = arrays.at(inst.base_array);
          int64_t idx = opval(1);
          if (idx < 0 || idx >= static_cast<int64_t>(arr.size()))
            throw SimError("out-of-bounds store to %" + inst.base_array + "[" +
                           std::to_string(idx) + "]");
          arr[static_cast<size_t>(idx)] = opval(0);
          break;
        }
        case Opcode::Br:
          prev_block = block;
          block = inst.succ_blocks[0];
          moved = true;
          break;
        case Opcode::CondBr:
          prev_block = block;
          block = opval(0) != 0 ? inst.succ_blocks[0] : inst.succ_blocks[1];
          moved = true;
          break;
        case Opcode::Ret: {
          close_loop();
          for (size_t k = 0; k < inst.operands.size(); ++k)
            rep.result.ret.push_back(opval(k));
          rep.result.arrays = std::move(arrays);
          rep.cycles = cycles;
          rep.result.steps = cycles;
          stats.active_cycles = cycles;
          rep.processes.push_back(std::move(stats));
          return rep;
        }
        case Opcode::ChanRead:
        case Opcode::ChanReadNB:
        case Opcode::ChanWrite:
          throw SimError("channel operation outside a process network");
      }
      if (moved) break;
    }
  }
}

// ---------------------------------------------------------------------------
// Process-network simulation

SimReport simulate_network(const mir::Program& program,
                           const mir::Inputs& inputs, const SimConfig& cfg) {
  const mir::Function& main_fn = program.functions.front();

  std::map<std::string, std::vector<int64_t>> storage;
  for (const auto& f : program.functions)
    for (const auto& p : f.params) {
      if (!p.is_array || storage.count(p.name)) continue;
      auto it = inputs.arrays.find(p.name);
      if (it == inputs.arrays.end())
        throw SimError("array parameter %" + p.name + " not bound");
      if (static_cast<int64_t>(it->second.size()) != p.array_size)
        throw SimError("array %" + p.name + " has wrong size");
      storage[p.name] = it->second;
    }

  std::map<std::string, Channel> channels;
  for (const auto& c : program.network.channels) {
    Channel ch;
    ch.name = c.name;
    ch.capacity = c.capacity;
    channels[c.name] = ch;
  }

  std::vector<LsqInst> lsqs;
  for (const auto& b : program.network.lsqs) {
    auto it = storage.find(b.array);
    if (it == storage.end())
      throw SimError("lsq " + b.name + " manages unbound array %" + b.array);
    LsqInst li;
    li.binding = &b;
    li.q = std::make_unique<lsq::Lsq>(cfg.lsq,
                                      static_cast<int>(b.ld_req.size()),
                                      static_cast<int>(b.st_req.size()),
                                      &it->second);
    if (cfg.trace_lsq) li.q->enable_trace(true);
    lsqs.push_back(std::move(li));
  }

  std::vector<FnSched> scheds;
  scheds.reserve(program.functions.size());
  for (const auto& f : program.functions) scheds.emplace_back(f, cfg.lm);
  std::vector<std::unique_ptr<ProcessSim>> procs;
  for (const auto& fs : scheds)
    procs.push_back(
        std::make_unique<ProcessSim>(fs, cfg, channels, storage, inputs));

  SimReport rep;
  int64_t cycle = 0;
  int stuck = 0;
  bool finished = false;
  for (; cycle < cfg.max_cycles; ++cycle) {
    int events = 0;
    for (auto& l : lsqs) {
      events += l.exchange(channels, cycle, cfg.channel_transport);
      l.q->step();
    }
    // Fixed-order sweeps to a fixed point: with zero transport latency a
    // value written this cycle is readable this cycle.
    bool again = true;
    while (again) {
      again = false;
      for (auto& p : procs) {
        int n = p->attempt(cycle);
        events += n;
        again |= n > 0;
      }
      for (auto& l : lsqs) {
        int n = l.exchange(channels, cycle, cfg.channel_transport);
        events += n;
        again |= n > 0;
      }
    }
    for (auto& p : procs) p->end_cycle();

    bool all_done = true;
    for (const auto& p : procs) all_done &= p->done();
    bool lsqs_idle = true;
    for (const auto& l : lsqs) lsqs_idle &= l.q->idle();
    if (all_done && lsqs_idle) {
      finished = true;
      ++cycle;
      break;
    }

    bool lsq_progress = false;
    for (auto& l : lsqs) {
      if (l.q->event_count() != l.last_events || l.q->advancing())
        lsq_progress = true;
      l.last_events = l.q->event_count();
    }
    bool any_advance = false;
    for (const auto& p : procs)
      if (!p->done() && p->stall_info().empty()) any_advance = true;
    if (events == 0 && !any_advance && !lsq_progress) {
      if (++stuck >= 4) {
        rep.deadlock = true;
        std::ostringstream os;
        os << "no progress for " << stuck << " cycles:";
        for (const auto& p : procs) {
          std::string s = p->stall_info();
          if (!s.empty()) os << " " << s << ";";
        }
        for (const auto& l : lsqs)
          if (!l.q->idle())
            os << " lsq " << l.binding->name << ": " << l.q->stuck_reason()
               << ";";
        rep.deadlock_reason = os.str();
        ++cycle;
        break;
      }
    } else {
      stuck = 0;
    }
  }
  if (!finished && !rep.deadlock) {
    rep.deadlock = true;
    rep.deadlock_reason =
        "cycle limit of " + std::to_string(cfg.max_cycles) + " reached";
  }

  rep.cycles = cycle;
  for (auto& p : procs) rep.processes.push_back(p->take_stats());
  for (auto& [name, ch] : channels) rep.channel_high_water[name] = ch.high_water;
  for (size_t i = 0; i < procs.size(); ++i)
    if (scheds[i].fn == &main_fn) rep.result.ret = procs[i]->ret();
  rep.result.arrays = storage;
  rep.result.steps = rep.cycles;
  if (cfg.trace_lsq) {
    std::ostringstream os;
    for (auto& l : lsqs)
      os << "## lsq " << l.binding->name << "\n" << l.q->trace_csv();
    rep.lsq_trace_csv = os.str();
  }
  return rep;
}

}  // namespace

SimReport simulate(const mir::Program& program, const mir::Inputs& inputs,
                   const SimConfig& config) {
  if (program.functions.empty()) throw SimError("program has no functions");
  if (program.network.present)
    return simulate_network(program, inputs, config);
  return simulate_static(program.functions.front(), inputs, config);
}

}  // namespace dhls::sim
