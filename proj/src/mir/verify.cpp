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

#include <algorithm>
#include <set>

#include "mir/parser.hpp"

namespace dhls::mir {
namespace {

struct CfgView {
  std::vector<std::vector<int>> succ, pred;
  // dom[b] = set of dominators of b, as a bitvector over blocks.
  std::vector<std::vector<bool>> dom;

  explicit CfgView(const Function& f) {
    int n = static_cast<int>(f.blocks.size());
    succ.resize(static_cast<size_t>(n));
    pred.resize(static_cast<size_t>(n));
    for (int b = 0; b < n; ++b) {
      for (int s : f.blocks[static_cast<size_t>(b)].terminator().succ_blocks) {
        succ[static_cast<size_t>(b)].push_back(s);
        pred[static_cast<size_t>(s)].push_back(b);
      }
    }
    dom.assign(static_cast<size_t>(n),
               std::vector<bool>(static_cast<size_t>(n), true));
    dom[0].assign(static_cast<size_t>(n), false);
    dom[0][0] = true;
    bool changed = true;
    while (changed) {
      changed = false;
      for (int b = 1; b < n; ++b) {
        std::vector<bool> nd(static_cast<size_t>(n),
                             !pred[static_cast<size_t>(b)].empty());
        for (int p : pred[static_cast<size_t>(b)])
          for (int k = 0; k < n; ++k)
            nd[static_cast<size_t>(k)] =
                nd[static_cast<size_t>(k)] &&
                dom[static_cast<size_t>(p)][static_cast<size_t>(k)];
        nd[static_cast<size_t>(b)] = true;
        if (nd != dom[static_cast<size_t>(b)]) {
          dom[static_cast<size_t>(b)] = std::move(nd);
          changed = true;
        }
      }
    }
  }

  bool dominates(int a, int b) const {
    return dom[static_cast<size_t>(b)][static_cast<size_t>(a)];
  }
};

[[noreturn]] void fail(const Function& f, const std::string& msg) {
  throw VerifyError("function @" + f.name + ": " + msg);
}

void check_ssa(const Function& f) {
  int n = f.num_values();
  std::vector<int> def_block(static_cast<size_t>(n), -2);  // -2: undefined
  std::vector<int> def_pos(static_cast<size_t>(n), -1);
  for (const auto& p : f.params)
    if (!p.is_array) def_block[static_cast<size_t>(p.value)] = -1;  // param
  for (size_t b = 0; b < f.blocks.size(); ++b) {
    int pos = 0;
    bool seen_non_phi = false;
    for (const auto& inst : f.blocks[b].insts) {
      if (inst.op == Opcode::Phi) {
        if (seen_non_phi)
          fail(f, "phi not at head of block ^" + f.blocks[b].label);
      } else {
        seen_non_phi = true;
      }
      if (inst.is_terminator() &&
          &inst != &f.blocks[b].insts.back())
        fail(f, "terminator not last in block ^" + f.blocks[b].label);
      if (inst.result != kNoValue) {
        if (def_block[static_cast<size_t>(inst.result)] != -2)
          fail(f, "value %" +
                      f.value_names[static_cast<size_t>(inst.result)] +
                      " defined more than once");
        def_block[static_cast<size_t>(inst.result)] = static_cast<int>(b);
        def_pos[static_cast<size_t>(inst.result)] = pos;
      }
      if (inst.is_memory()) {
        const Param* p = f.find_param(inst.base_array);
        if (!p || !p->is_array)
          fail(f, "memory op references unknown array %" + inst.base_array);
      }
      ++pos;
    }
  }
  for (int v = 0; v < n; ++v)
    if (def_block[static_cast<size_t>(v)] == -2)
      fail(f, "value %" + f.value_names[static_cast<size_t>(v)] +
                  " used but never defined");

  CfgView cfg(f);
  // Reachability from entry.
  {
    std::vector<bool> seen(f.blocks.size(), false);
    std::vector<int> work{0};
    seen[0] = true;
    while (!work.empty()) {
      int b = work.back();
      work.pop_back();
      for (int s : cfg.succ[static_cast<size_t>(b)])
        if (!seen[static_cast<size_t>(s)]) {
          seen[static_cast<size_t>(s)] = true;
          work.push_back(s);
        }
    }
    for (size_t b = 0; b < f.blocks.size(); ++b)
      if (!seen[b]) fail(f, "unreachable block ^" + f.blocks[b].label);
  }

  // Phi shape: incoming blocks are exactly the predecessors.
  for (size_t b = 0; b < f.blocks.size(); ++b) {
    std::multiset<int> preds(cfg.pred[b].begin(), cfg.pred[b].end());
    for (const auto& inst : f.blocks[b].insts) {
      if (inst.op != Opcode::Phi) continue;
      std::multiset<int> inc(inst.incoming_blocks.begin(),
                             inst.incoming_blocks.end());
      if (inc != preds)
        fail(f, "phi %" + f.value_names[static_cast<size_t>(inst.result)] +
                    " incoming blocks do not match predecessors of ^" +
                    f.blocks[b].label);
    }
  }

  // Dominance of defs over uses.
  for (size_t b = 0; b < f.blocks.size(); ++b) {
    int pos = 0;
    for (const auto& inst : f.blocks[b].insts) {
      for (size_t oi = 0; oi < inst.operands.size(); ++oi) {
        ValueId v = inst.operands[oi];
        int db = def_block[static_cast<size_t>(v)];
        if (db == -1) continue;  // param, always available
        int use_block = static_cast<int>(b);
        if (inst.op == Opcode::Phi) use_block = inst.incoming_blocks[oi];
        if (db == use_block) {
          if (inst.op != Opcode::Phi &&
              def_pos[static_cast<size_t>(v)] >= pos)
            fail(f, "value %" + f.value_names[static_cast<size_t>(v)] +
                        " used before definition in ^" + f.blocks[b].label);
        } else if (!cfg.dominates(db, use_block)) {
          fail(f, "use of %" + f.value_names[static_cast<size_t>(v)] +
                      " in ^" + f.blocks[b].label +
                      " is not dominated by its definition");
        }
      }
      ++pos;
    }
  }
}

// Returns header -> latches for all natural loops.
std::vector<std::pair<int, std::vector<int>>> find_loops(const Function& f,
                                                         const CfgView& cfg) {
  std::vector<std::pair<int, std::vector<int>>> loops;
  for (size_t b = 0; b < f.blocks.size(); ++b) {
    for (int s : cfg.succ[b]) {
      if (cfg.dominates(s, static_cast<int>(b))) {
        auto it = std::find_if(loops.begin(), loops.end(),
                               [&](auto& l) { return l.first == s; });
        if (it == loops.end())
          loops.push_back({s, {static_cast<int>(b)}});
        else
          it->second.push_back(static_cast<int>(b));
      }
    }
  }
  return loops;
}

void check_reducible(const Function& f, const CfgView& cfg) {
  // Reducible iff the graph is acyclic once back edges (target dominates
  // source) are removed.
  int n = static_cast<int>(f.blocks.size());
  std::vector<int> state(static_cast<size_t>(n), 0);
  std::vector<std::pair<int, size_t>> stack{{0, 0}};
  state[0] = 1;
  while (!stack.empty()) {
    auto& [b, i] = stack.back();
    if (i < cfg.succ[static_cast<size_t>(b)].size()) {
      int s = cfg.succ[static_cast<size_t>(b)][i++];
      if (cfg.dominates(s, b)) continue;  // proper back edge
      if (state[static_cast<size_t>(s)] == 1)
        fail(f, "irreducible control flow (retreating edge into ^" +
                    f.blocks[static_cast<size_t>(s)].label + ")");
      if (state[static_cast<size_t>(s)] == 0) {
        state[static_cast<size_t>(s)] = 1;
        stack.push_back({s, 0});
      }
    } else {
      state[static_cast<size_t>(b)] = 2;
      stack.pop_back();
    }
  }
}

// Shifts all block indices >= at by one (after inserting a block at `at`).
void shift_block_refs(Function& f, int at) {
  for (auto& bb : f.blocks) {
    for (auto& inst : bb.insts) {
      for (auto& s : inst.succ_blocks)
        if (s >= at) ++s;
      for (auto& s : inst.incoming_blocks)
        if (s >= at) ++s;
    }
  }
}

void normalize_loops(Function& f) {
  for (bool again = true; again;) {
    again = false;
    CfgView cfg(f);
    check_reducible(f, cfg);
    for (auto& [header, latches] : find_loops(f, cfg)) {
      if (latches.size() != 1)
        fail(f, "multi-latch loop at header ^" +
                    f.blocks[static_cast<size_t>(header)].label);
      int latch = latches[0];
      std::vector<int> entries;
      for (int p : cfg.pred[static_cast<size_t>(header)])
        if (p != latch) entries.push_back(p);
      if (entries.empty())
        fail(f, "loop header ^" +
                    f.blocks[static_cast<size_t>(header)].label +
                    " has no entry edge");
      if (entries.size() > 1)
        fail(f, "loop header ^" +
                    f.blocks[static_cast<size_t>(header)].label +
                    " has multiple entry edges; needs a dedicated preheader");
      int entry = entries[0];
      const auto& esuccs =
          f.blocks[static_cast<size_t>(entry)].terminator().succ_blocks;
      if (esuccs.size() == 1) continue;  // already a dedicated preheader
      // Insert a preheader between entry and header.
      int max_id = 0;
      f.for_each_inst([&](const Instruction& i) {
        max_id = std::max(max_id, i.id);
      });
      BasicBlock pre;
      pre.label = f.blocks[static_cast<size_t>(header)].label + ".pre";
      Instruction br;
      br.id = max_id + 1;
      br.op = Opcode::Br;
      br.succ_blocks.push_back(header);
      pre.insts.push_back(std::move(br));
      int at = header;  // insert right before the header
      f.blocks.insert(f.blocks.begin() + at, std::move(pre));
      shift_block_refs(f, at);
      int new_header = header + 1;
      int new_entry = entry >= at ? entry + 1 : entry;
      // pre's br target was shifted too; point it back at the header.
      f.blocks[static_cast<size_t>(at)].insts.back().succ_blocks[0] =
          new_header;
      for (auto& s : f.blocks[static_cast<size_t>(new_entry)]
                         .insts.back()
                         .succ_blocks)
        if (s == new_header) s = at;
      for (auto& inst : f.blocks[static_cast<size_t>(new_header)].insts) {
        if (inst.op != Opcode::Phi) break;
        for (auto& ib : inst.incoming_blocks)
          if (ib == new_entry) ib = at;
      }
      again = true;
      break;  // indices changed; recompute
    }
  }
}

void check_network(const Program& p) {
  const NetworkDesc& net = p.network;
  if (!net.present) return;
  std::set<std::string> names;
  for (const auto& c : net.channels) {
    if (!names.insert(c.name).second)
      throw VerifyError("duplicate channel $" + c.name);
  }
  auto endpoint_ok = [&](const std::string& e) {
    if (e.rfind("lsq:", 0) == 0) {
      for (const auto& l : net.lsqs)
        if (l.name == e.substr(4)) return true;
      return false;
    }
    return p.find_function(e) != nullptr;
  };
  for (const auto& c : net.channels) {
    if (!endpoint_ok(c.writer) || !endpoint_ok(c.reader))
      throw VerifyError("channel $" + c.name + " has an unknown endpoint");
  }
  // Each channel is referenced by at most one chan op per endpoint function;
  // single-reader/single-writer is enforced per declaration above.
  for (const auto& l : net.lsqs) {
    for (const auto* vec : {&l.ld_req, &l.ld_val, &l.st_req, &l.st_val})
      for (const auto& ch : *vec)
        if (!net.find_channel(ch))
          throw VerifyError("lsq $" + l.name + " references unknown channel $" +
                            ch);
    if (l.ld_req.size() != l.ld_val.size() ||
        l.st_req.size() != l.st_val.size())
      throw VerifyError("lsq $" + l.name + " has mismatched req/val lists");
  }
}

}  // namespace

void verify_and_normalize(Program& p) {
  for (auto& f : p.functions) {
    if (f.blocks.empty()) fail(f, "function has no blocks");
    normalize_loops(f);
    check_ssa(f);
  }
  check_network(p);
}

}  // namespace dhls::mir
