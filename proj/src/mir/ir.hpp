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

#ifndef DHLS_MIR_IR_HPP
#define DHLS_MIR_IR_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhls::mir {

// SSA value index into Function::value_names. kNoValue means "no result".
using ValueId = int;
inline constexpr ValueId kNoValue = -1;

enum class Opcode {
  Const,
  Add,
  Sub,
  Mul,
  Div,
  ICmp,
  Select,
  Phi,
  Load,
  Store,
  Br,
  CondBr,
  Ret,
  Call,
  ChanRead,
  ChanReadNB,
  ChanWrite,
};

enum class CmpPred { Eq, Ne, Lt, Le, Gt, Ge };

const char* opcode_name(Opcode op);
const char* pred_name(CmpPred p);

// Dependence-distance annotation carried by load/store. Distances are
// iteration counts of the innermost loop containing the access.
struct DistAnnotation {
  enum class Kind { None, Known, Unknown };
  Kind kind = Kind::None;
  int64_t value = 0;
};

struct Instruction {
  int id = -1;  // unique within the function, assigned by the parser
  Opcode op = Opcode::Const;
  ValueId result = kNoValue;
  std::vector<ValueId> operands;

  // phi: incoming block index parallel to operands.
  std::vector<int> incoming_blocks;

  CmpPred pred = CmpPred::Eq;  // icmp
  int64_t imm = 0;             // const

  std::string callee;    // call
  int call_latency = 1;  // call, from lat(k)

  // load/store: operands = [index] resp. [value, index]; base array by name.
  std::string base_array;
  DistAnnotation dist;

  std::string channel;  // chan_read / chan_read_nb / chan_write

  std::vector<int> succ_blocks;  // br: 1 target, cond_br: [true, false]

  bool is_terminator() const {
    return op == Opcode::Br || op == Opcode::CondBr || op == Opcode::Ret;
  }
  bool is_memory() const { return op == Opcode::Load || op == Opcode::Store; }
  bool is_channel_op() const {
    return op == Opcode::ChanRead || op == Opcode::ChanReadNB ||
           op == Opcode::ChanWrite;
  }
};

struct BasicBlock {
  std::string label;
  std::vector<Instruction> insts;  // terminator last

  const Instruction& terminator() const { return insts.back(); }
};

struct Param {
  std::string name;
  bool is_array = false;
  int64_t array_size = 0;
  ValueId value = kNoValue;  // scalar params define an SSA value
};

struct Function {
  std::string name;
  std::vector<Param> params;
  std::vector<BasicBlock> blocks;  // blocks[0] is the entry
  std::vector<std::string> value_names;

  int block_index(const std::string& label) const;
  const Param* find_param(const std::string& name) const;
  int num_values() const { return static_cast<int>(value_names.size()); }

  // Walks all instructions in block/program order.
  template <typename F>
  void for_each_inst(F&& f) const {
    for (const auto& bb : blocks)
      for (const auto& inst : bb.insts) f(inst);
  }

  const Instruction* find_inst(int id) const;
  int block_of_inst(int id) const;
};

// ---- Process-network description (the `network` section) ----

enum class ChannelKind { Data, Predicate, LdReq, StReq, StVal, LdVal };

const char* channel_kind_name(ChannelKind k);

struct ChannelDecl {
  std::string name;
  ChannelKind kind = ChannelKind::Data;
  int capacity = 8;
  std::string writer;  // function name, or "lsq:<name>" for LSQ-driven ends
  std::string reader;
};

struct LsqBinding {
  std::string name;
  std::string array;  // base array managed by this LSQ
  std::vector<std::string> ld_req;  // channel names, one per static load
  std::vector<std::string> ld_val;
  std::vector<std::string> st_req;  // one per static store
  std::vector<std::string> st_val;
};

struct MemoryDecl {
  std::string array;
  std::string owner;  // function name or "lsq:<name>"
};

struct NetworkDesc {
  bool present = false;
  std::vector<ChannelDecl> channels;
  std::vector<LsqBinding> lsqs;
  std::vector<MemoryDecl> memories;

  const ChannelDecl* find_channel(const std::string& name) const;
};

struct Program {
  std::vector<Function> functions;
  NetworkDesc network;

  const Function* find_function(const std::string& name) const;
};

struct ParseError : std::runtime_error {
  int line, column;
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", col " +
                           std::to_string(column) + ")"),
        line(line),
        column(column) {}
};

struct VerifyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dhls::mir

#endif  // DHLS_MIR_IR_HPP
