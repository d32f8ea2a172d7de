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

#include <sstream>

#include "mir/parser.hpp"

namespace dhls::mir {
namespace {

std::string vname(const Function& f, ValueId v) {
  return "%" + f.value_names.at(static_cast<size_t>(v));
}

void print_dist(std::ostream& os, const Instruction& inst) {
  if (inst.dist.kind == DistAnnotation::Kind::Known)
    os << " dist(" << inst.dist.value << ")";
  else if (inst.dist.kind == DistAnnotation::Kind::Unknown)
    os << " dist(?)";
}

void print_inst(std::ostream& os, const Function& f, const Instruction& i) {
  switch (i.op) {
    case Opcode::Const:
      os << vname(f, i.result) << " = const " << i.imm;
      break;
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Div:
      os << vname(f, i.result) << " = " << opcode_name(i.op) << " "
         << vname(f, i.operands[0]) << ", " << vname(f, i.operands[1]);
      break;
    case Opcode::ICmp:
      os << vname(f, i.result) << " = icmp " << pred_name(i.pred) << " "
         << vname(f, i.operands[0]) << ", " << vname(f, i.operands[1]);
      break;
    case Opcode::Select:
      os << vname(f, i.result) << " = select " << vname(f, i.operands[0])
         << ", " << vname(f, i.operands[1]) << ", " << vname(f, i.operands[2]);
      break;
    case Opcode::Phi: {
      os << vname(f, i.result) << " = phi ";
      for (size_t k = 0; k < i.operands.size(); ++k) {
        if (k) os << ", ";
        os << "[" << vname(f, i.operands[k]) << ", ^"
           << f.blocks[static_cast<size_t>(i.incoming_blocks[k])].label << "]";
      }
      break;
    }
    case Opcode::Load:
      os << vname(f, i.result) << " = load %" << i.base_array << "["
         << vname(f, i.operands[0]) << "]";
      print_dist(os, i);
      break;
    case Opcode::Store:
      os << "store " << vname(f, i.operands[0]) << ", %" << i.base_array << "["
         << vname(f, i.operands[1]) << "]";
      print_dist(os, i);
      break;
    case Opcode::Call:
      os << vname(f, i.result) << " = call @" << i.callee << "("
         << vname(f, i.operands[0]) << ") lat(" << i.call_latency << ")";
      break;
    case Opcode::ChanRead:
      os << vname(f, i.result) << " = chan_read $" << i.channel;
      break;
    case Opcode::ChanReadNB:
      os << vname(f, i.result) << " = chan_read_nb $" << i.channel << ", "
         << vname(f, i.operands[0]);
      break;
    case Opcode::ChanWrite:
      os << "chan_write $" << i.channel << ", " << vname(f, i.operands[0]);
      break;
    case Opcode::Br:
      os << "br ^" << f.blocks[static_cast<size_t>(i.succ_blocks[0])].label;
      break;
    case Opcode::CondBr:
      os << "cond_br " << vname(f, i.operands[0]) << ", ^"
         << f.blocks[static_cast<size_t>(i.succ_blocks[0])].label << ", ^"
         << f.blocks[static_cast<size_t>(i.succ_blocks[1])].label;
      break;
    case Opcode::Ret:
      os << "ret";
      for (size_t k = 0; k < i.operands.size(); ++k)
        os << (k ? ", " : " ") << vname(f, i.operands[k]);
      break;
  }
}

}  // namespace

std::string inst_to_string(const Function& f, const Instruction& inst) {
  std::ostringstream os;
  print_inst(os, f, inst);
  return os.str();
}

std::string serialize(const Function& f) {
  std::ostringstream os;
  os << "func @" << f.name << "(";
  for (size_t i = 0; i < f.params.size(); ++i) {
    if (i) os << ", ";
    const Param& p = f.params[i];
    os << "i64";
    if (p.is_array) os << "[" << p.array_size << "]";
    os << " %" << p.name;
  }
  os << ") {\n";
  for (const auto& bb : f.blocks) {
    os << "^" << bb.label << ":\n";
    for (const auto& inst : bb.insts) {
      os << "  ";
      print_inst(os, f, inst);
      os << "\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::string serialize(const Program& p) {
  std::ostringstream os;
  for (size_t i = 0; i < p.functions.size(); ++i) {
    if (i) os << "\n";
    os << serialize(p.functions[i]);
  }
  if (p.network.present) {
    os << "\nnetwork {\n";
    for (const auto& c : p.network.channels) {
      os << "  channel $" << c.name << " : i64, capacity " << c.capacity
         << ", kind " << channel_kind_name(c.kind) << ", writer "
         << (c.writer.rfind("lsq:", 0) == 0 ? "lsq:$" + c.writer.substr(4)
                                            : "@" + c.writer)
         << ", reader "
         << (c.reader.rfind("lsq:", 0) == 0 ? "lsq:$" + c.reader.substr(4)
                                            : "@" + c.reader)
         << "\n";
    }
    for (const auto& l : p.network.lsqs) {
      os << "  lsq $" << l.name << " { array %" << l.array;
      auto list = [&os](const char* key, const std::vector<std::string>& v) {
        os << " " << key;
        for (size_t i = 0; i < v.size(); ++i) os << (i ? ", $" : " $") << v[i];
      };
      list("ld_req", l.ld_req);
      list("ld_val", l.ld_val);
      list("st_req", l.st_req);
      list("st_val", l.st_val);
      os << " }\n";
    }
    for (const auto& m : p.network.memories) {
      os << "  memory %" << m.array << " : "
         << (m.owner.rfind("lsq:", 0) == 0 ? "lsq:$" + m.owner.substr(4)
                                           : "@" + m.owner)
         << "\n";
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace dhls::mir
