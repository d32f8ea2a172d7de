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

#include "mir/ir.hpp"

namespace dhls::mir {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Const: return "const";
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::Div: return "div";
    case Opcode::ICmp: return "icmp";
    case Opcode::Select: return "select";
    case Opcode::Phi: return "phi";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::Br: return "br";
    case Opcode::CondBr: return "cond_br";
    case Opcode::Ret: return "ret";
    case Opcode::Call: return "call";
    case Opcode::ChanRead: return "chan_read";
    case Opcode::ChanReadNB: return "chan_read_nb";
    case Opcode::ChanWrite: return "chan_write";
  }
  return "?";
}

const char* pred_name(CmpPred p) {
  switch (p) {
    case CmpPred::Eq: return "eq";
    case CmpPred::Ne: return "ne";
    case CmpPred::Lt: return "lt";
    case CmpPred::Le: return "le";
    case CmpPred::Gt: return "gt";
    case CmpPred::Ge: return "ge";
  }
  return "?";
}

const char* channel_kind_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::Data: return "data";
    case ChannelKind::Predicate: return "predicate";
    case ChannelKind::LdReq: return "ld_req";
    case ChannelKind::StReq: return "st_req";
    case ChannelKind::StVal: return "st_val";
    case ChannelKind::LdVal: return "ld_val";
  }
  return "?";
}

int Function::block_index(const std::string& label) const {
  for (size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].label == label) return static_cast<int>(i);
  return -1;
}

const Param* Function::find_param(const std::string& pname) const {
  for (const auto& p : params)
    if (p.name == pname) return &p;
  return nullptr;
}

const Instruction* Function::find_inst(int id) const {
  for (const auto& bb : blocks)
    for (const auto& inst : bb.insts)
      if (inst.id == id) return &inst;
  return nullptr;
}

int Function::block_of_inst(int id) const {
  for (size_t b = 0; b < blocks.size(); ++b)
    for (const auto& inst : blocks[b].insts)
      if (inst.id == id) return static_cast<int>(b);
  return -1;
}

const ChannelDecl* NetworkDesc::find_channel(const std::string& name) const {
  for (const auto& c : channels)
    if (c.name == name) return &c;
  return nullptr;
}

const Function* Program::find_function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

}  // namespace dhls::mir
