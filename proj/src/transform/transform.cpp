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

#include "transform/transform.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "graphs/loops.hpp"
#include "mir/parser.hpp"

namespace dhls::transform {
namespace {

using mir::Function;
using mir::Instruction;
using mir::Opcode;
using mir::ValueId;

// Replaces %name tokens according to `map`. Used to retarget a handful of
// operands when an instruction line is reused in a rewritten context.
std::string apply_rename(const std::string& line,
                         const std::map<std::string, std::string>& map) {
  if (map.empty()) return line;
  std::string out;
  for (size_t i = 0; i < line.size();) {
    if (line[i] != '%') {
      out += line[i++];
      continue;
    }
    size_t j = i + 1;
    while (j < line.size() &&
           (std::isalnum(static_cast<unsigned char>(line[j])) ||
            line[j] == '_' || line[j] == '.'))
      ++j;
    std::string name = line.substr(i + 1, j - i - 1);
    auto it = map.find(name);
    out += "%" + (it == map.end() ? name : it->second);
    i = j;
  }
  return out;
}

struct Builder {
  const Function& fn;
  const marking::MarkingReport& rep;
  TransformOptions opts;

  graphs::Cfg cfg;
  graphs::LoopInfo li;
  std::vector<int> idom;

  std::vector<const Instruction*> def_of;   // per value
  std::vector<int> def_block;               // per value
  std::map<ValueId, std::vector<int>> uses; // value -> inst ids, program order
  std::map<int, const Instruction*> by_id;
  std::map<int, int> order;  // inst id -> program-order position
  std::map<int, int> block_of;

  // Planned edits to the main function, keyed by instruction id.
  std::map<int, std::vector<std::string>> replace;
  std::map<int, std::vector<std::string>> before;
  std::vector<std::string> entry_prefix;
  std::vector<std::string> ret_prologue;
  std::map<int, std::string> term_override;      // block -> terminator line
  std::set<int> deleted_blocks;
  std::map<int, std::map<int, int>> phi_retarget; // block -> old inc -> new
  std::map<std::string, std::string> rename;
  std::set<int> taken;  // instructions consumed by an applied mark

  std::vector<std::string> extra_functions;
  std::vector<std::string> net_lines;
  std::map<std::string, std::string> memory_owner;  // array -> endpoint
  std::vector<AppliedMark> log;

  bool applied_any = false;
  bool need_pred_consts = false;
  std::string one_name, zero_name;
  std::set<std::string> used_names;
  int fresh_n = 0;

  explicit Builder(const Function& f, const marking::MarkingReport& r,
                   const TransformOptions& o)
      : fn(f), rep(r), opts(o) {
    cfg = graphs::build_cfg(fn);
    li = graphs::build_loop_info(cfg);
    idom = graphs::dominators(cfg);
    def_of.assign(static_cast<size_t>(fn.num_values()), nullptr);
    def_block.assign(static_cast<size_t>(fn.num_values()), -1);
    for (const auto& name : fn.value_names) used_names.insert(name);
    int pos = 0;
    for (size_t b = 0; b < fn.blocks.size(); ++b)
      for (const auto& inst : fn.blocks[b].insts) {
        by_id[inst.id] = &inst;
        order[inst.id] = pos++;
        block_of[inst.id] = static_cast<int>(b);
        if (inst.result != mir::kNoValue) {
          def_of[static_cast<size_t>(inst.result)] = &inst;
          def_block[static_cast<size_t>(inst.result)] = static_cast<int>(b);
        }
        for (ValueId v : inst.operands) uses[v].push_back(inst.id);
      }
  }

  // ---- small helpers ----

  std::string vn(ValueId v) const {
    return fn.value_names.at(static_cast<size_t>(v));
  }
  std::string lbl(int b) const {
    return fn.blocks.at(static_cast<size_t>(b)).label;
  }
  std::string fresh(const std::string& stem) {
    for (;;) {
      std::string n = stem + std::to_string(fresh_n++);
      if (used_names.insert(n).second) return n;
    }
  }

  using LabelOf = std::function<std::string(int)>;

  std::string phi_line(const Instruction& I, const LabelOf& label,
                       const std::map<std::string, std::string>& rn) const {
    std::ostringstream os;
    os << "%" << vn(I.result) << " = phi ";
    for (size_t k = 0; k < I.operands.size(); ++k) {
      if (k) os << ", ";
      std::string op = vn(I.operands[k]);
      auto it = rn.find(op);
      if (it != rn.end()) op = it->second;
      os << "[%" << op << ", ^" << label(I.incoming_blocks[k]) << "]";
    }
    return os.str();
  }

  std::string term_line(const Instruction& I, const LabelOf& label,
                        const std::map<std::string, std::string>& rn) const {
    std::ostringstream os;
    if (I.op == Opcode::Br) {
      os << "br ^" << label(I.succ_blocks[0]);
    } else if (I.op == Opcode::CondBr) {
      std::string c = vn(I.operands[0]);
      auto it = rn.find(c);
      if (it != rn.end()) c = it->second;
      os << "cond_br %" << c << ", ^" << label(I.succ_blocks[0]) << ", ^"
         << label(I.succ_blocks[1]);
    } else {
      os << apply_rename(mir::inst_to_string(fn, I), rn);
    }
    return os.str();
  }

  std::string render(const Instruction& I, const LabelOf& label,
                     const std::map<std::string, std::string>& rn) const {
    if (I.op == Opcode::Phi) return phi_line(I, label, rn);
    if (I.is_terminator()) return term_line(I, label, rn);
    return apply_rename(mir::inst_to_string(fn, I), rn);
  }

  void ensure_pred_consts() {
    if (need_pred_consts) return;
    need_pred_consts = true;
    one_name = fresh("_c1v");
    zero_name = fresh("_c0v");
    entry_prefix.push_back("%" + one_name + " = const 1");
    entry_prefix.push_back("%" + zero_name + " = const 0");
  }

  void chan_decl(const std::string& name, const std::string& kind, int cap,
                 const std::string& writer, const std::string& reader) {
    net_lines.push_back("  channel $" + name + " : i64, capacity " +
                        std::to_string(cap) + ", kind " + kind + ", writer " +
                        writer + ", reader " + reader);
  }

  bool in_loop(const graphs::Loop& L, ValueId v) const {
    int b = def_block[static_cast<size_t>(v)];
    return b >= 0 && L.contains(b);
  }

  // ---- stage 1: marked memory accesses -> AGU + load-store queue ----

  void run_memory() {
    std::map<int, std::map<std::string, std::vector<const marking::MemoryMark*>>>
        groups;
    for (const auto& m : rep.memory) groups[m.loop][m.array].push_back(&m);
    int agu_n = 0;
    for (auto& [loop_idx, arrays] : groups) run_memory_loop(loop_idx, arrays,
                                                           agu_n);
  }

  void skip_memory(
      const std::map<std::string, std::vector<const marking::MemoryMark*>>&
          arrays,
      const std::string& reason) {
    for (const auto& [array, marks] : arrays)
      log.push_back({"memory",
                     "%" + array + " (" + std::to_string(marks.size()) +
                         " accesses)",
                     false, reason});
  }

  void run_memory_loop(
      int loop_idx,
      std::map<std::string, std::vector<const marking::MemoryMark*>>& arrays,
      int& agu_n) {
    const graphs::Loop& L = li.loops.at(static_cast<size_t>(loop_idx));
    const AguVerdictOrNull v = verdict_for(loop_idx);
    if (!v.found || !v.can_decouple) {
      skip_memory(arrays, v.found ? "address generation cannot run ahead: " +
                                        v.reason
                                  : "no decoupling verdict for this loop");
      return;
    }
    if (!L.children.empty() || L.depth != 1) {
      skip_memory(arrays, "queue tags do not survive nested loop instances");
      return;
    }
    // Every access to a queued array must go through the queue, and the tag
    // chain must advance exactly once per site and iteration.
    for (const auto& [array, marks] : arrays) {
      std::set<int> ids;
      for (const auto* m : marks) ids.insert(m->inst_id);
      for (const auto& [id, I] : by_id) {
        if (!I->is_memory() || I->base_array != array) continue;
        bool inside = L.contains(block_of.at(id));
        if (inside && !ids.count(id)) {
          skip_memory(arrays, "an access to %" + array +
                                  " in the loop is not marked");
          return;
        }
        if (!inside) {
          skip_memory(arrays, "%" + array + " is also accessed outside the "
                                            "loop");
          return;
        }
        if (inside && !graphs::tree_dominates(idom, block_of.at(id), L.latch)) {
          skip_memory(arrays, "a queued access is control dependent inside "
                              "the loop");
          return;
        }
      }
    }

    // Backward slice of every address and of the loop's branch conditions.
    std::set<int> slice;
    std::set<ValueId> ext;
    std::vector<ValueId> work;
    std::vector<const Instruction*> accesses;
    for (const auto& [array, marks] : arrays)
      for (const auto* m : marks) {
        const Instruction* I = by_id.at(m->inst_id);
        accesses.push_back(I);
        work.push_back(I->operands[I->op == Opcode::Store ? 1 : 0]);
      }
    for (int b : L.blocks) {
      const Instruction& t = fn.blocks[static_cast<size_t>(b)].terminator();
      if (t.op == Opcode::CondBr) work.push_back(t.operands[0]);
    }
    std::set<ValueId> seen(work.begin(), work.end());
    while (!work.empty()) {
      ValueId val = work.back();
      work.pop_back();
      const Instruction* d = def_of[static_cast<size_t>(val)];
      if (!d || !L.contains(def_block[static_cast<size_t>(val)])) {
        ext.insert(val);
        continue;
      }
      if (d->is_memory() && arrays.count(d->base_array)) {
        skip_memory(arrays, "an address depends on a queued load");
        return;
      }
      slice.insert(d->id);
      for (ValueId o : d->operands)
        if (seen.insert(o).second) work.push_back(o);
    }

    // Externals: scalar params stay params, outside constants are cloned.
    std::vector<std::string> agu_params, clone_consts;
    std::set<std::string> slice_arrays;
    for (int id : slice) {
      const Instruction* I = by_id.at(id);
      if (I->op == Opcode::Load) slice_arrays.insert(I->base_array);
    }
    for (const auto& p : fn.params) {
      if (!p.is_array && p.value != mir::kNoValue && ext.count(p.value))
        agu_params.push_back("i64 %" + p.name);
      if (p.is_array && slice_arrays.count(p.name))
        agu_params.push_back("i64[" + std::to_string(p.array_size) + "] %" +
                             p.name);
    }
    for (ValueId e : ext) {
      const Instruction* d = def_of[static_cast<size_t>(e)];
      if (!d) continue;  // parameter, handled above
      if (d->op != Opcode::Const) {
        skip_memory(arrays, "an address depends on %" + vn(e) +
                                " computed outside the loop");
        return;
      }
      clone_consts.push_back(mir::inst_to_string(fn, *d));
    }

    // Port numbering and the per-array tag chain, in execution order. Every
    // access block dominates the latch, so dominance gives that order.
    std::sort(accesses.begin(), accesses.end(),
              [&](const Instruction* a, const Instruction* b) {
                int ba = block_of.at(a->id), bb = block_of.at(b->id);
                if (ba == bb) return order.at(a->id) < order.at(b->id);
                return graphs::tree_dominates(idom, ba, bb);
              });
    std::string agu_name = fn.name + ".agu" + std::to_string(agu_n++);
    std::string stride = fresh("_ts");
    std::string tag0 = fresh("_tz");
    bool any_store = false;
    std::map<std::string, std::string> tag_cur, tag_first, tag_last;
    std::map<std::string, int> next_ld, next_st;
    std::map<int, std::vector<std::string>> agu_at;  // inst id -> lines
    std::string tone = fresh("_tone");
    for (const auto& [array, marks] : arrays) {
      (void)marks;
      tag_cur[array] = tag_first[array] = fresh("_tag");
    }
    for (const Instruction* I : accesses) {
      const std::string& A = I->base_array;
      std::string base = fn.name + "_" + A;
      std::vector<std::string>& out = agu_at[I->id];
      if (I->op == Opcode::Store) {
        any_store = true;
        std::string nt = fresh("_tg");
        out.push_back("%" + nt + " = add %" + tag_cur[A] + ", %" + tone);
        tag_cur[A] = nt;
      }
      std::string sh = fresh("_rs"), rq = fresh("_rq");
      std::string addr = vn(I->operands[I->op == Opcode::Store ? 1 : 0]);
      out.push_back("%" + sh + " = mul %" + tag_cur[A] + ", %" + stride);
      out.push_back("%" + rq + " = add %" + sh + ", %" + addr);
      if (I->op == Opcode::Store) {
        int j = next_st[A]++;
        out.push_back("chan_write $" + base + "_stq" + std::to_string(j) +
                      ", %" + rq);
        replace[I->id] = {"chan_write $" + base + "_stv" + std::to_string(j) +
                          ", %" + vn(I->operands[0])};
      } else {
        int j = next_ld[A]++;
        out.push_back("chan_write $" + base + "_ldq" + std::to_string(j) +
                      ", %" + rq);
        replace[I->id] = {"%" + vn(I->result) + " = chan_read $" + base +
                          "_ldv" + std::to_string(j)};
      }
      taken.insert(I->id);
    }
    for (auto& [array, cur] : tag_cur) tag_last[array] = cur;

    // Emit the AGU function.
    std::ostringstream os;
    os << "func @" << agu_name << "(";
    for (size_t i = 0; i < agu_params.size(); ++i)
      os << (i ? ", " : "") << agu_params[i];
    os << ") {\n^agu_entry:\n";
    for (const auto& c : clone_consts) os << "  " << c << "\n";
    os << "  %" << tag0 << " = const 0\n";
    if (any_store) os << "  %" << tone << " = const 1\n";
    os << "  %" << stride << " = const 4294967296\n";
    os << "  br ^" << lbl(L.header) << "\n";
    LabelOf agu_label = [&](int b) -> std::string {
      if (b == L.preheader) return "agu_entry";
      if (!L.contains(b)) return "agu_exit";
      return lbl(b);
    };
    for (int b : L.blocks) {
      os << "^" << lbl(b) << ":\n";
      const auto& blk = fn.blocks[static_cast<size_t>(b)];
      size_t k = 0;
      for (; k < blk.insts.size() && blk.insts[k].op == Opcode::Phi; ++k)
        if (slice.count(blk.insts[k].id))
          os << "  " << phi_line(blk.insts[k], agu_label, {}) << "\n";
      if (b == L.header)
        for (const auto& [array, first] : tag_first)
          os << "  %" << first << " = phi [%" << tag0 << ", ^agu_entry], [%"
             << tag_last.at(array) << ", ^" << lbl(L.latch) << "]\n";
      for (; k < blk.insts.size(); ++k) {
        const Instruction& I = blk.insts[k];
        if (slice.count(I.id))
          os << "  " << render(I, agu_label, {}) << "\n";
        else if (I.is_terminator())
          os << "  " << term_line(I, agu_label, {}) << "\n";
        auto at = agu_at.find(I.id);
        if (at != agu_at.end())
          for (const auto& line : at->second) os << "  " << line << "\n";
      }
    }
    os << "^agu_exit:\n  ret\n}\n";
    extra_functions.push_back(os.str());

    // Channels, queue bindings and memory ownership.
    for (const auto& [array, marks] : arrays) {
      (void)marks;
      std::string base = fn.name + "_" + array;
      std::string q = base + "_q";
      std::vector<std::string> lr, lv, sr, sv;
      for (int j = 0; j < next_ld[array]; ++j) {
        lr.push_back(base + "_ldq" + std::to_string(j));
        lv.push_back(base + "_ldv" + std::to_string(j));
        chan_decl(lr.back(), "ld_req", opts.req_capacity, "@" + agu_name,
                  "lsq:$" + q);
        chan_decl(lv.back(), "ld_val", opts.req_capacity, "lsq:$" + q,
                  "@" + fn.name);
      }
      for (int j = 0; j < next_st[array]; ++j) {
        sr.push_back(base + "_stq" + std::to_string(j));
        sv.push_back(base + "_stv" + std::to_string(j));
        chan_decl(sr.back(), "st_req", opts.req_capacity, "@" + agu_name,
                  "lsq:$" + q);
        chan_decl(sv.back(), "st_val", opts.req_capacity, "@" + fn.name,
                  "lsq:$" + q);
      }
      auto ports = [](const char* key, const std::vector<std::string>& v) {
        std::string s = std::string(" ") + key;
        for (size_t i = 0; i < v.size(); ++i)
          s += (i ? ", $" : " $") + v[i];
        return s;
      };
      net_lines.push_back("  lsq $" + q + " { array %" + array +
                          ports("ld_req", lr) + ports("ld_val", lv) +
                          ports("st_req", sr) + ports("st_val", sv) + " }");
      memory_owner[array] = "lsq:$" + q;
      log.push_back({"memory",
                     "%" + array + " through $" + q + " fed by @" + agu_name,
                     true, ""});
    }
    applied_any = true;
  }

  struct AguVerdictOrNull {
    bool found = false;
    bool can_decouple = false;
    std::string reason;
  };
  AguVerdictOrNull verdict_for(int loop_idx) const {
    for (const auto& v : rep.agu)
      if (v.loop == loop_idx) return {true, v.can_decouple, v.reason};
    return {};
  }

  // ---- stage 2: marked blocks -> processing elements ----

  void run_blocks() {
    int pe_n = 0;
    for (const auto& bm : rep.blocks) run_block(bm, pe_n);
  }

  void run_block(const marking::BlockMark& bm, int& pe_n) {
    std::string where = "^" + lbl(bm.block);
    std::set<int> N(bm.nodes.begin(), bm.nodes.end());
    for (int id : bm.nodes) {
      const Instruction* I = by_id.at(id);
      if (I->is_memory()) {
        log.push_back({"block", where, false,
                       "the slice contains memory accesses; moving them "
                       "would reorder the program's loads and stores"});
        return;
      }
      if (taken.count(id)) {
        log.push_back(
            {"block", where, false, "overlaps an earlier transformation"});
        return;
      }
    }
    std::vector<int> nodes(bm.nodes.begin(), bm.nodes.end());
    std::sort(nodes.begin(), nodes.end(),
              [&](int a, int b) { return order.at(a) < order.at(b); });

    // Classify operands: internal, cloned constants, or input channels.
    std::vector<ValueId> inputs;
    std::vector<std::string> clone_consts;
    std::set<ValueId> seen;
    std::map<int, std::vector<ValueId>> input_at;  // first consuming node
    for (int id : nodes)
      for (ValueId v : by_id.at(id)->operands) {
        if (!seen.insert(v).second) continue;
        const Instruction* d = def_of[static_cast<size_t>(v)];
        if (d && N.count(d->id)) continue;
        if (d && d->op == Opcode::Const) {
          clone_consts.push_back(mir::inst_to_string(fn, *d));
        } else {
          inputs.push_back(v);
          input_at[id].push_back(v);
        }
      }
    std::vector<ValueId> outputs;
    for (int id : nodes) {
      const Instruction* I = by_id.at(id);
      if (I->result == mir::kNoValue) continue;
      for (int u : uses[I->result])
        if (!N.count(u)) {
          outputs.push_back(I->result);
          break;
        }
    }

    std::string pe = fn.name + ".pe" + std::to_string(pe_n);
    std::string base = fn.name + "_pe" + std::to_string(pe_n);
    if (opts.hoist && try_hoist(bm, nodes, N, inputs, outputs, clone_consts,
                                pe, base)) {
      ++pe_n;
      return;
    }

    ensure_pred_consts();
    // Main side: the predicate and the inputs leave at the marked slice's
    // position, results come back where they used to be defined.
    before[nodes.front()].push_back("chan_write $" + base + "_pred, %" +
                                    one_name);
    for (int id : nodes) {
      for (ValueId v : input_at.count(id) ? input_at[id] : std::vector<ValueId>{})
        before[id].push_back("chan_write $" + base + "_in_" + vn(v) + ", %" +
                             vn(v));
      const Instruction* I = by_id.at(id);
      bool is_out = I->result != mir::kNoValue &&
                    std::count(outputs.begin(), outputs.end(), I->result);
      replace[id] = is_out ? std::vector<std::string>{
                                 "%" + vn(I->result) + " = chan_read $" +
                                 base + "_out_" + vn(I->result)}
                           : std::vector<std::string>{};
      taken.insert(id);
    }
    ret_prologue.push_back("chan_write $" + base + "_pred, %" + zero_name);

    // The processing element.
    std::ostringstream os;
    os << "func @" << pe << "() {\n^entry:\n";
    for (const auto& c : clone_consts) os << "  " << c << "\n";
    os << "  br ^h\n^h:\n";
    std::string p = fresh("_p");
    os << "  %" << p << " = chan_read $" << base << "_pred\n";
    os << "  cond_br %" << p << ", ^body, ^done\n^body:\n";
    for (ValueId v : inputs)
      os << "  %" << vn(v) << " = chan_read $" << base << "_in_" << vn(v)
         << "\n";
    for (int id : nodes)
      os << "  " << mir::inst_to_string(fn, *by_id.at(id)) << "\n";
    for (ValueId v : outputs)
      os << "  chan_write $" << base << "_out_" << vn(v) << ", %" << vn(v)
         << "\n";
    os << "  br ^h\n^done:\n  ret\n}\n";
    extra_functions.push_back(os.str());

    chan_decl(base + "_pred", "predicate", opts.pred_capacity, "@" + fn.name,
              "@" + pe);
    for (ValueId v : inputs)
      chan_decl(base + "_in_" + vn(v), "data", opts.data_capacity,
                "@" + fn.name, "@" + pe);
    for (ValueId v : outputs)
      chan_decl(base + "_out_" + vn(v), "data", opts.data_capacity, "@" + pe,
                "@" + fn.name);
    log.push_back({"block", where + " -> @" + pe, true, ""});
    applied_any = true;
    ++pe_n;
  }

  // A slice whose single input is a pure loop-carried routing of its single
  // output can keep that state inside the processing element: the main loop
  // then sends one token per engaged iteration and no longer waits for the
  // result. The state enters once before the loop and leaves after it.
  bool try_hoist(const marking::BlockMark& bm, const std::vector<int>& nodes,
                 const std::set<int>& N, const std::vector<ValueId>& inputs,
                 const std::vector<ValueId>& outputs,
                 const std::vector<std::string>& clone_consts,
                 const std::string& pe, const std::string& base) {
    if (inputs.size() != 1 || outputs.size() != 1) return false;
    ValueId v = inputs[0], w = outputs[0];
    const graphs::Loop& L = li.loops.at(static_cast<size_t>(bm.loop));
    const Instruction* vphi = def_of[static_cast<size_t>(v)];
    if (!vphi || vphi->op != Opcode::Phi ||
        def_block[static_cast<size_t>(v)] != L.header)
      return false;
    ValueId init = mir::kNoValue, m = mir::kNoValue;
    for (size_t k = 0; k < vphi->operands.size(); ++k) {
      if (vphi->incoming_blocks[k] == L.preheader)
        init = vphi->operands[k];
      else if (vphi->incoming_blocks[k] == L.latch)
        m = vphi->operands[k];
    }
    if (init == mir::kNoValue || m == mir::kNoValue) return false;
    const Instruction* mphi = def_of[static_cast<size_t>(m)];
    if (!mphi || mphi->op != Opcode::Phi) return false;
    bool routes_v = false, routes_w = false;
    for (ValueId o : mphi->operands) {
      routes_v |= o == v;
      routes_w |= o == w;
    }
    if (!routes_v || !routes_w || mphi->operands.size() != 2) return false;
    // v may only feed the slice and the routing phi; m may only feed the
    // header phi and instructions after the loop, all on a single ret.
    for (int u : uses[v])
      if (!N.count(u) && u != mphi->id) return false;
    int ret_block = -1;
    for (int u : uses[m]) {
      if (u == vphi->id) continue;
      const Instruction* U = by_id.at(u);
      if (U->op != Opcode::Ret) return false;
      if (ret_block >= 0 && block_of.at(u) != ret_block) return false;
      ret_block = block_of.at(u);
    }
    if (ret_block < 0) return false;  // state never observed; keep it simple
    const Instruction& pre_term =
        fn.blocks[static_cast<size_t>(L.preheader)].terminator();
    if (pre_term.op != Opcode::Br) return false;

    ensure_pred_consts();
    before[nodes.front()].push_back("chan_write $" + base + "_pred, %" +
                                    one_name);
    for (int id : nodes) {
      replace[id] = {};
      taken.insert(id);
    }
    replace[vphi->id] = {};
    replace[mphi->id] = {};
    before[pre_term.id].push_back("chan_write $" + base + "_in_" + vn(v) +
                                  ", %" + vn(init));
    std::string fin = fresh("_fin");
    ret_prologue.push_back("chan_write $" + base + "_pred, %" + zero_name);
    before[fn.blocks[static_cast<size_t>(ret_block)].terminator().id]
        .push_back("%" + fin + " = chan_read $" + base + "_out_" + vn(w));
    rename[vn(m)] = fin;

    std::ostringstream os;
    std::string i0 = fresh("_i"), p = fresh("_p");
    os << "func @" << pe << "() {\n^entry:\n";
    for (const auto& c : clone_consts) os << "  " << c << "\n";
    os << "  %" << i0 << " = chan_read $" << base << "_in_" << vn(v) << "\n";
    os << "  br ^h\n^h:\n";
    os << "  %" << vn(v) << " = phi [%" << i0 << ", ^entry], [%" << vn(w)
       << ", ^body]\n";
    os << "  %" << p << " = chan_read $" << base << "_pred\n";
    os << "  cond_br %" << p << ", ^body, ^done\n^body:\n";
    for (int id : nodes)
      os << "  " << mir::inst_to_string(fn, *by_id.at(id)) << "\n";
    os << "  br ^h\n^done:\n";
    os << "  chan_write $" << base << "_out_" << vn(w) << ", %" << vn(v)
       << "\n  ret\n}\n";
    extra_functions.push_back(os.str());

    chan_decl(base + "_pred", "predicate", opts.pred_capacity, "@" + fn.name,
              "@" + pe);
    chan_decl(base + "_in_" + vn(v), "data", opts.data_capacity,
              "@" + fn.name, "@" + pe);
    chan_decl(base + "_out_" + vn(w), "data", opts.data_capacity, "@" + pe,
              "@" + fn.name);
    log.push_back({"hoist", "^" + lbl(bm.block) + " -> @" + pe +
                                " (state %" + vn(v) + " kept inside)",
                   true, ""});
    applied_any = true;
    return true;
  }

  // ---- stage 3: marked loops -> loop processes ----

  void run_loops() {
    int loop_n = 0;
    for (const auto& lm : rep.loops) run_loop(lm, loop_n);
  }

  void run_loop(const marking::LoopMark& lm, int& loop_n) {
    const graphs::Loop& L = li.loops.at(static_cast<size_t>(lm.loop));
    std::string where = "loop at ^" + lbl(L.header);
    auto skip = [&](const std::string& why) {
      log.push_back({"loop", where, false, why});
    };
    if (L.exit_targets.size() != 1) return skip("more than one exit target");
    int exit_tgt = L.exit_targets[0];
    for (int b : L.blocks) {
      if (deleted_blocks.count(b))
        return skip("overlaps an earlier transformation");
      for (const auto& I : fn.blocks[static_cast<size_t>(b)].insts)
        if (taken.count(I.id) || replace.count(I.id) || before.count(I.id))
          return skip("overlaps an earlier transformation");
    }
    const Instruction& pre_term =
        fn.blocks[static_cast<size_t>(L.preheader)].terminator();
    if (pre_term.op != Opcode::Br)
      return skip("the preheader enters the loop conditionally");

    // Live-ins and live-outs across the loop boundary.
    std::vector<ValueId> in_chans, live_outs;
    std::vector<std::string> clone_consts, scalar_params;
    std::set<ValueId> seen_in, seen_out;
    std::set<std::string> loop_arrays;
    for (int b : L.blocks)
      for (const auto& I : fn.blocks[static_cast<size_t>(b)].insts) {
        if (I.is_memory()) loop_arrays.insert(I.base_array);
        for (ValueId v : I.operands) {
          if (in_loop(L, v) || !seen_in.insert(v).second) continue;
          const Instruction* d = def_of[static_cast<size_t>(v)];
          if (!d) {
            scalar_params.push_back(vn(v));
          } else if (d->op == Opcode::Const) {
            clone_consts.push_back(mir::inst_to_string(fn, *d));
          } else {
            in_chans.push_back(v);
          }
        }
        if (I.result == mir::kNoValue) continue;
        for (int u : uses[I.result])
          if (!L.contains(block_of.at(u)) && seen_out.insert(I.result).second)
            live_outs.push_back(I.result);
      }
    for (ValueId v : live_outs)
      for (int eb : L.exiting)
        if (!graphs::tree_dominates(idom, def_block[static_cast<size_t>(v)],
                                    eb))
          return skip("a live value does not dominate every loop exit");
    for (const auto& [b, ov] : phi_retarget) {
      (void)ov;
      if (b == exit_tgt) return skip("overlaps an earlier transformation");
    }
    // Exit-target phis keep their operand but the edge now comes from the
    // preheader, where the value re-enters through its channel.
    std::map<int, int>& retarget = phi_retarget[exit_tgt];
    for (const auto& I : fn.blocks[static_cast<size_t>(exit_tgt)].insts) {
      if (I.op != Opcode::Phi) break;
      int hits = 0;
      for (size_t k = 0; k < I.incoming_blocks.size(); ++k)
        if (L.contains(I.incoming_blocks[k])) {
          retarget[I.incoming_blocks[k]] = L.preheader;
          ++hits;
        }
      if (hits > 1) {
        phi_retarget.erase(exit_tgt);
        return skip("several exit edges reach one phi");
      }
    }
    if (retarget.empty()) phi_retarget.erase(exit_tgt);

    ensure_pred_consts();
    std::string proc = fn.name + ".loop" + std::to_string(loop_n);
    std::string base = fn.name + "_loop" + std::to_string(loop_n);
    ++loop_n;
    std::vector<std::string>& pre = before[pre_term.id];
    pre.push_back("chan_write $" + base + "_pred, %" + one_name);
    for (ValueId v : in_chans)
      pre.push_back("chan_write $" + base + "_in_" + vn(v) + ", %" + vn(v));
    for (ValueId v : live_outs)
      pre.push_back("%" + vn(v) + " = chan_read $" + base + "_out_" + vn(v));
    term_override[L.preheader] = "br ^" + lbl(exit_tgt);
    for (int b : L.blocks) {
      deleted_blocks.insert(b);
      for (const auto& I : fn.blocks[static_cast<size_t>(b)].insts)
        taken.insert(I.id);
    }
    ret_prologue.push_back("chan_write $" + base + "_pred, %" + zero_name);

    // The loop process: one guarded instance per predicate token.
    std::ostringstream os;
    os << "func @" << proc << "(";
    bool first = true;
    for (const auto& p : fn.params) {
      bool want = (!p.is_array && std::count(scalar_params.begin(),
                                             scalar_params.end(), p.name)) ||
                  (p.is_array && loop_arrays.count(p.name));
      if (!want) continue;
      os << (first ? "" : ", ") << "i64";
      if (p.is_array) os << "[" << p.array_size << "]";
      os << " %" << p.name;
      first = false;
    }
    os << ") {\n^lp_entry:\n";
    for (const auto& c : clone_consts) os << "  " << c << "\n";
    os << "  br ^lp_h\n^lp_h:\n";
    std::string p = fresh("_p");
    os << "  %" << p << " = chan_read $" << base << "_pred\n";
    os << "  cond_br %" << p << ", ^lp_pre, ^lp_done\n^lp_pre:\n";
    for (ValueId v : in_chans)
      os << "  %" << vn(v) << " = chan_read $" << base << "_in_" << vn(v)
         << "\n";
    os << "  br ^" << lbl(L.header) << "\n";
    LabelOf lp_label = [&](int b) -> std::string {
      if (b == L.preheader) return "lp_pre";
      if (!L.contains(b)) return "lp_post";
      return lbl(b);
    };
    for (int b : L.blocks) {
      os << "^" << lbl(b) << ":\n";
      for (const auto& I : fn.blocks[static_cast<size_t>(b)].insts)
        os << "  " << render(I, lp_label, {}) << "\n";
    }
    os << "^lp_post:\n";
    for (ValueId v : live_outs)
      os << "  chan_write $" << base << "_out_" << vn(v) << ", %" << vn(v)
         << "\n";
    os << "  br ^lp_h\n^lp_done:\n  ret\n}\n";
    extra_functions.push_back(os.str());

    chan_decl(base + "_pred", "predicate", opts.pred_capacity, "@" + fn.name,
              "@" + proc);
    for (ValueId v : in_chans)
      chan_decl(base + "_in_" + vn(v), "data", opts.data_capacity,
                "@" + fn.name, "@" + proc);
    for (ValueId v : live_outs)
      chan_decl(base + "_out_" + vn(v), "data", opts.data_capacity,
                "@" + proc, "@" + fn.name);
    log.push_back({"loop", where + " -> @" + proc, true, ""});
    applied_any = true;
  }

  // ---- emission ----

  std::string emit_main() const {
    std::vector<std::string> lines;
    std::ostringstream head;
    head << "func @" << fn.name << "(";
    for (size_t i = 0; i < fn.params.size(); ++i) {
      const auto& p = fn.params[i];
      head << (i ? ", " : "") << "i64";
      if (p.is_array) head << "[" << p.array_size << "]";
      head << " %" << p.name;
    }
    head << ") {";
    lines.push_back(head.str());
    for (size_t b = 0; b < fn.blocks.size(); ++b) {
      if (deleted_blocks.count(static_cast<int>(b))) continue;
      lines.push_back("^" + fn.blocks[b].label + ":");
      if (b == 0)
        for (const auto& l : entry_prefix) lines.push_back("  " + l);
      LabelOf label = [&](int x) { return lbl(x); };
      auto rt = phi_retarget.find(static_cast<int>(b));
      for (const auto& I : fn.blocks[b].insts) {
        if (I.op == Opcode::Ret)
          for (const auto& l : ret_prologue) lines.push_back("  " + l);
        auto bi = before.find(I.id);
        if (bi != before.end())
          for (const auto& l : bi->second) lines.push_back("  " + l);
        auto ri = replace.find(I.id);
        if (ri != replace.end()) {
          for (const auto& l : ri->second) lines.push_back("  " + l);
          continue;
        }
        auto ti = term_override.find(static_cast<int>(b));
        if (I.is_terminator() && ti != term_override.end()) {
          lines.push_back("  " + ti->second);
          continue;
        }
        if (I.op == Opcode::Phi && rt != phi_retarget.end()) {
          LabelOf mapped = [&](int x) {
            auto m = rt->second.find(x);
            return lbl(m == rt->second.end() ? x : m->second);
          };
          lines.push_back("  " + phi_line(I, mapped, rename));
          continue;
        }
        lines.push_back("  " + render(I, label, rename));
      }
    }
    dce(lines);
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out + "}\n";
  }

  // Drops pure instructions whose results became unused. Channel and memory
  // side effects are kept.
  static void dce(std::vector<std::string>& lines) {
    auto result_of = [](const std::string& l) -> std::string {
      if (l.rfind("  %", 0) != 0) return "";
      size_t eq = l.find(" = ");
      if (eq == std::string::npos) return "";
      std::string rhs = l.substr(eq + 3);
      static const char* pure[] = {"const", "add",    "sub",  "mul", "div",
                                   "icmp",  "select", "load", "call", "phi"};
      for (const char* p : pure)
        if (rhs.rfind(p, 0) == 0 &&
            (rhs.size() == strlen(p) || rhs[strlen(p)] == ' '))
          return l.substr(3, eq - 3);
      return "";
    };
    auto used = [&](const std::string& name, size_t skip) {
      std::string tok = "%" + name;
      for (size_t i = 0; i < lines.size(); ++i) {
        if (i == skip) continue;
        const std::string& l = lines[i];
        for (size_t p = l.find(tok); p != std::string::npos;
             p = l.find(tok, p + 1)) {
          size_t e = p + tok.size();
          if (e >= l.size() || (!std::isalnum(static_cast<unsigned char>(l[e])) &&
                                l[e] != '_' && l[e] != '.'))
            return true;
        }
      }
      return false;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < lines.size(); ++i) {
        std::string r = result_of(lines[i]);
        if (r.empty() || used(r, i)) continue;
        lines.erase(lines.begin() + static_cast<long>(i));
        changed = true;
        --i;
      }
    }
  }

  TransformResult finish() {
    TransformResult res;
    if (!applied_any) {
      res.text = mir::serialize(fn);
      res.program = mir::parse_program(res.text);
      res.log = log;
      return res;
    }
    std::string text = emit_main();
    for (const auto& f : extra_functions) text += "\n" + f;
    text += "\nnetwork {\n";
    for (const auto& l : net_lines) text += l + "\n";
    for (const auto& p : fn.params) {
      if (!p.is_array) continue;
      auto it = memory_owner.find(p.name);
      text += "  memory %" + p.name + " : " +
              (it != memory_owner.end() ? it->second : "@" + fn.name) + "\n";
    }
    text += "}\n";
    res.text = text;
    try {
      res.program = mir::parse_program(text);
    } catch (const std::exception& e) {
      throw TransformError(std::string("transformed program is invalid: ") +
                           e.what());
    }
    res.log = log;
    return res;
  }
};

}  // namespace

TransformResult transform(const Function& fn, const marking::MarkingReport& rep,
                          const TransformOptions& opts) {
  Builder b(fn, rep, opts);
  b.run_memory();
  b.run_blocks();
  b.run_loops();
  return b.finish();
}

}  // namespace dhls::transform
