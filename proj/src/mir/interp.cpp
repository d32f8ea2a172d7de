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

#include "mir/interp.hpp"

namespace dhls::mir {

int64_t eval_binop(Opcode op, int64_t a, int64_t b) {
  uint64_t ua = static_cast<uint64_t>(a), ub = static_cast<uint64_t>(b);
  switch (op) {
    case Opcode::Add: return static_cast<int64_t>(ua + ub);
    case Opcode::Sub: return static_cast<int64_t>(ua - ub);
    case Opcode::Mul: return static_cast<int64_t>(ua * ub);
    case Opcode::Div:
      if (b == 0) throw InterpError("division by zero");
      if (a == INT64_MIN && b == -1) return INT64_MIN;  // wrap
      return a / b;
    default: throw InterpError("not a binary op");
  }
}

bool eval_cmp(CmpPred pred, int64_t a, int64_t b) {
  switch (pred) {
    case CmpPred::Eq: return a == b;
    case CmpPred::Ne: return a != b;
    case CmpPred::Lt: return a < b;
    case CmpPred::Le: return a <= b;
    case CmpPred::Gt: return a > b;
    case CmpPred::Ge: return a >= b;
  }
  return false;
}

int64_t opaque_call(const std::string& callee, int64_t x) {
  // Fixed pure functions so runs are reproducible and hand-checkable.
  if (callee == "f") return x / 2;
  if (callee == "g") return (x % 7) + 1;
  if (callee == "h") return x * 3 - 1;
  if (callee == "id") return x;
  if (callee == "inc") return x + 1;
  // Any other name: a deterministic integer mix.
  uint64_t h = 1469598103934665603ull;
  for (char c : callee) h = (h ^ static_cast<uint64_t>(c)) * 1099511628211ull;
  return static_cast<int64_t>((h ^ static_cast<uint64_t>(x)) % 1000003ull);
}

FinalState interpret(const Function& fn, const Inputs& inputs,
                     int64_t max_steps) {
  FinalState out;
  std::vector<int64_t> vals(static_cast<size_t>(fn.num_values()), 0);
  std::map<std::string, std::vector<int64_t>> arrays;
  for (const auto& p : fn.params) {
    if (p.is_array) {
      auto it = inputs.arrays.find(p.name);
      if (it == inputs.arrays.end())
        throw InterpError("array parameter %" + p.name + " not bound");
      if (static_cast<int64_t>(it->second.size()) != p.array_size)
        throw InterpError("array %" + p.name + " has wrong size");
      arrays[p.name] = it->second;
    } else {
      auto it = inputs.scalars.find(p.name);
      if (it == inputs.scalars.end())
        throw InterpError("scalar parameter %" + p.name + " not bound");
      vals[static_cast<size_t>(p.value)] = it->second;
    }
  }

  int block = 0, prev_block = -1;
  int64_t steps = 0;
  while (true) {
    const BasicBlock& bb = fn.blocks[static_cast<size_t>(block)];
    // Phis read their incoming values simultaneously at block entry.
    std::vector<std::pair<ValueId, int64_t>> phi_writes;
    for (const auto& inst : bb.insts) {
      if (inst.op != Opcode::Phi) break;
      bool found = false;
      for (size_t k = 0; k < inst.incoming_blocks.size(); ++k) {
        if (inst.incoming_blocks[k] == prev_block) {
          phi_writes.push_back(
              {inst.result, vals[static_cast<size_t>(inst.operands[k])]});
          found = true;
          break;
        }
      }
      if (!found) throw InterpError("phi has no incoming for predecessor");
    }
    for (auto& [v, x] : phi_writes) vals[static_cast<size_t>(v)] = x;

    for (const auto& inst : bb.insts) {
      if (++steps > max_steps)
        throw InterpError("step budget exceeded (" +
                          std::to_string(max_steps) + " steps)");
      auto opval = [&](size_t i) {
        return vals[static_cast<size_t>(inst.operands[i])];
      };
      switch (inst.op) {
        case Opcode::Phi:
          break;  // handled above
        case Opcode::Const:
          vals[static_cast<size_t>(inst.result)] = inst.imm;
          break;
        case Opcode::Add:
        case Opcode::Sub:
        case Opcode::Mul:
        case Opcode::Div:
          vals[static_cast<size_t>(inst.result)] =
              eval_binop(inst.op, opval(0), opval(1));
          break;
        case Opcode::ICmp:
          vals[static_cast<size_t>(inst.result)] =
              eval_cmp(inst.pred, opval(0), opval(1)) ? 1 : 0;
          break;
        case Opcode::Select:
          vals[static_cast<size_t>(inst.result)] =
              opval(0) != 0 ? opval(1) : opval(2);
          break;
        case Opcode::Call:
          vals[static_cast<size_t>(inst.result)] =
              opaque_call(inst.callee, opval(0));
          break;
        case Opcode::Load: {
          auto& arr = arrays.at(inst.base_array);
          int64_t idx = opval(0);
          if (idx < 0 || idx >= static_cast<int64_t>(arr.size()))
            throw InterpError("out-of-bounds load from %" + inst.base_array +
                              "[" + std::to_string(idx) + "]");
          vals[static_cast<size_t>(inst.result)] =
              arr[static_cast<size_t>(idx)];
          break;
        }
        case Opcode::Store: {
          auto& arr = arrays.at(inst.base_array);
          int64_t idx = opval(1);
          if (idx < 0 || idx >= static_cast<int64_t>(arr.size()))
            throw InterpError("out-of-bounds store to %" + inst.base_array +
                              "[" + std::to_string(idx) + "]");
          arr[static_cast<size_t>(idx)] = opval(0);
          break;
        }
        case Opcode::Br:
          prev_block = block;
          block = inst.succ_blocks[0];
          break;
        case Opcode::CondBr:
          prev_block = block;
          block = opval(0) != 0 ? inst.succ_blocks[0] : inst.succ_blocks[1];
          break;
        case Opcode::Ret:
          for (size_t k = 0; k < inst.operands.size(); ++k)
            out.ret.push_back(opval(k));
          out.arrays = std::move(arrays);
          out.steps = steps;
          return out;
        case Opcode::ChanRead:
        case Opcode::ChanReadNB:
        case Opcode::ChanWrite:
          throw InterpError(
              "channel operation under sequential interpretation");
      }
      if (inst.op == Opcode::Br || inst.op == Opcode::CondBr) break;
    }
  }
}

}  // namespace dhls::mir
