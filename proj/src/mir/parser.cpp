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

#include "mir/parser.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace dhls::mir {
namespace {

struct Token {
  enum class Kind { Ident, Value, Block, Func, Chan, Int, Punct, End };
  Kind kind;
  std::string text;
  int64_t ival = 0;
  int line = 0, col = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      tok_.text.clear();
      return;
    }
    char c = src_[pos_];
    if (c == '%' || c == '^' || c == '@' || c == '$') {
      get();
      std::string name = read_word();
      if (name.empty()) fail("expected identifier after sigil");
      tok_.kind = c == '%'   ? Token::Kind::Value
                  : c == '^' ? Token::Kind::Block
                  : c == '@' ? Token::Kind::Func
                             : Token::Kind::Chan;
      tok_.text = name;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      std::string num;
      if (c == '-') num += get();
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        num += get();
      tok_.kind = Token::Kind::Int;
      tok_.text = num;
      tok_.ival = std::stoll(num);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      tok_.kind = Token::Kind::Ident;
      tok_.text = read_word();
      return;
    }
    if (std::string("(){}[],:=?").find(c) != std::string::npos) {
      tok_.kind = Token::Kind::Punct;
      tok_.text = std::string(1, get());
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') get();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        get();
      } else {
        break;
      }
    }
  }

  std::string read_word() {
    std::string w;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_' || src_[pos_] == '.')) {
      w += get();
    }
    return w;
  }

  char get() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, line_, col_);
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

// Label reference found while parsing one instruction; resolved to a block
// index once the whole function is read.
struct LabelRef {
  bool is_phi;  // incoming_blocks slot vs. succ_blocks slot
  int slot;
  std::string label;
  int line, col;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  Program parse() {
    Program p;
    while (lex_.peek().kind != Token::Kind::End) {
      if (peek_ident("func")) {
        p.functions.push_back(parse_function());
      } else if (peek_ident("network")) {
        parse_network(p.network);
      } else {
        fail("expected 'func' or 'network'");
      }
    }
    return p;
  }

 private:
  Lexer lex_;
  Function* fn_ = nullptr;
  std::map<std::string, ValueId> value_ids_;
  int next_inst_id_ = 0;

  // Value references may appear before their defining instruction
  // (loop phis), so ids are handed out on first mention.
  ValueId value_ref(const std::string& name) {
    auto it = value_ids_.find(name);
    if (it != value_ids_.end()) return it->second;
    ValueId id = static_cast<ValueId>(fn_->value_names.size());
    fn_->value_names.push_back(name);
    value_ids_[name] = id;
    return id;
  }

  Function parse_function() {
    expect_ident("func");
    Function f;
    fn_ = &f;
    value_ids_.clear();
    next_inst_id_ = 0;
    f.name = expect(Token::Kind::Func).text;
    expect_punct("(");
    if (!peek_punct(")")) {
      do {
        f.params.push_back(parse_param());
      } while (accept_punct(","));
    }
    expect_punct(")");
    expect_punct("{");
    // (block idx, inst idx) -> label refs, stable under vector growth.
    std::vector<std::tuple<int, int, LabelRef>> pending;
    while (!accept_punct("}")) {
      Token bt = expect(Token::Kind::Block);
      expect_punct(":");
      if (f.block_index(bt.text) >= 0)
        fail_at(bt, "duplicate block label ^" + bt.text);
      f.blocks.push_back(BasicBlock{bt.text, {}});
      int bidx = static_cast<int>(f.blocks.size()) - 1;
      while (lex_.peek().kind != Token::Kind::Block && !peek_punct("}")) {
        std::vector<LabelRef> refs;
        Instruction inst = parse_inst(refs);
        f.blocks[bidx].insts.push_back(std::move(inst));
        int iidx = static_cast<int>(f.blocks[bidx].insts.size()) - 1;
        for (auto& r : refs) pending.emplace_back(bidx, iidx, std::move(r));
      }
      if (f.blocks[bidx].insts.empty() ||
          !f.blocks[bidx].insts.back().is_terminator())
        fail_at(bt, "block ^" + f.blocks[bidx].label + " lacks a terminator");
    }
    for (auto& [bidx, iidx, ref] : pending) {
      int target = f.block_index(ref.label);
      if (target < 0)
        throw ParseError("unknown block label ^" + ref.label, ref.line,
                         ref.col);
      Instruction& inst = f.blocks[bidx].insts[iidx];
      if (ref.is_phi)
        inst.incoming_blocks[ref.slot] = target;
      else
        inst.succ_blocks[ref.slot] = target;
    }
    fn_ = nullptr;
    return f;
  }

  Param parse_param() {
    Param p;
    expect_ident("i64");
    if (accept_punct("[")) {
      p.is_array = true;
      p.array_size = expect(Token::Kind::Int).ival;
      expect_punct("]");
    }
    p.name = expect(Token::Kind::Value).text;
    if (!p.is_array) p.value = value_ref(p.name);
    return p;
  }

  Instruction parse_inst(std::vector<LabelRef>& refs) {
    Instruction inst;
    inst.id = next_inst_id_++;
    Token first = lex_.next();
    if (first.kind == Token::Kind::Value) {
      inst.result = value_ref(first.text);
      expect_punct("=");
      Token opTok = expect(Token::Kind::Ident);
      const std::string& op = opTok.text;
      if (op == "const") {
        inst.op = Opcode::Const;
        inst.imm = expect(Token::Kind::Int).ival;
      } else if (op == "add" || op == "sub" || op == "mul" || op == "div") {
        inst.op = op == "add"   ? Opcode::Add
                  : op == "sub" ? Opcode::Sub
                  : op == "mul" ? Opcode::Mul
                                : Opcode::Div;
        inst.operands.push_back(value_operand());
        expect_punct(",");
        inst.operands.push_back(value_operand());
      } else if (op == "icmp") {
        inst.op = Opcode::ICmp;
        Token pr = expect(Token::Kind::Ident);
        if (pr.text == "eq") inst.pred = CmpPred::Eq;
        else if (pr.text == "ne") inst.pred = CmpPred::Ne;
        else if (pr.text == "lt") inst.pred = CmpPred::Lt;
        else if (pr.text == "le") inst.pred = CmpPred::Le;
        else if (pr.text == "gt") inst.pred = CmpPred::Gt;
        else if (pr.text == "ge") inst.pred = CmpPred::Ge;
        else fail_at(pr, "unknown icmp predicate '" + pr.text + "'");
        inst.operands.push_back(value_operand());
        expect_punct(",");
        inst.operands.push_back(value_operand());
      } else if (op == "select") {
        inst.op = Opcode::Select;
        for (int i = 0; i < 3; ++i) {
          if (i) expect_punct(",");
          inst.operands.push_back(value_operand());
        }
      } else if (op == "phi") {
        inst.op = Opcode::Phi;
        do {
          expect_punct("[");
          inst.operands.push_back(value_operand());
          expect_punct(",");
          Token lb = expect(Token::Kind::Block);
          inst.incoming_blocks.push_back(-1);
          refs.push_back(
              {true, static_cast<int>(inst.incoming_blocks.size()) - 1,
               lb.text, lb.line, lb.col});
          expect_punct("]");
        } while (accept_punct(","));
      } else if (op == "load") {
        inst.op = Opcode::Load;
        inst.base_array = expect(Token::Kind::Value).text;
        expect_punct("[");
        inst.operands.push_back(value_operand());
        expect_punct("]");
        parse_dist(inst);
      } else if (op == "call") {
        inst.op = Opcode::Call;
        inst.callee = expect(Token::Kind::Func).text;
        expect_punct("(");
        inst.operands.push_back(value_operand());
        expect_punct(")");
        expect_ident("lat");
        expect_punct("(");
        inst.call_latency = static_cast<int>(expect(Token::Kind::Int).ival);
        expect_punct(")");
      } else if (op == "chan_read") {
        inst.op = Opcode::ChanRead;
        inst.channel = expect(Token::Kind::Chan).text;
      } else if (op == "chan_read_nb") {
        inst.op = Opcode::ChanReadNB;
        inst.channel = expect(Token::Kind::Chan).text;
        expect_punct(",");
        inst.operands.push_back(value_operand());
      } else {
        fail_at(opTok, "unknown opcode '" + op + "'");
      }
      return inst;
    }
    if (first.kind != Token::Kind::Ident) fail_at(first, "expected opcode");
    const std::string& op = first.text;
    if (op == "store") {
      inst.op = Opcode::Store;
      inst.operands.push_back(value_operand());
      expect_punct(",");
      inst.base_array = expect(Token::Kind::Value).text;
      expect_punct("[");
      inst.operands.push_back(value_operand());
      expect_punct("]");
      parse_dist(inst);
    } else if (op == "chan_write") {
      inst.op = Opcode::ChanWrite;
      inst.channel = expect(Token::Kind::Chan).text;
      expect_punct(",");
      inst.operands.push_back(value_operand());
    } else if (op == "br") {
      inst.op = Opcode::Br;
      Token lb = expect(Token::Kind::Block);
      inst.succ_blocks.push_back(-1);
      refs.push_back({false, 0, lb.text, lb.line, lb.col});
    } else if (op == "cond_br") {
      inst.op = Opcode::CondBr;
      inst.operands.push_back(value_operand());
      for (int i = 0; i < 2; ++i) {
        expect_punct(",");
        Token lb = expect(Token::Kind::Block);
        inst.succ_blocks.push_back(-1);
        refs.push_back({false, i, lb.text, lb.line, lb.col});
      }
    } else if (op == "ret") {
      inst.op = Opcode::Ret;
      if (lex_.peek().kind == Token::Kind::Value) {
        inst.operands.push_back(value_operand());
        while (accept_punct(",")) inst.operands.push_back(value_operand());
      }
    } else {
      fail_at(first, "unknown opcode '" + op + "'");
    }
    return inst;
  }

  ValueId value_operand() { return value_ref(expect(Token::Kind::Value).text); }

  void parse_dist(Instruction& inst) {
    if (peek_ident("dist")) {
      lex_.next();
      expect_punct("(");
      if (accept_punct("?")) {
        inst.dist.kind = DistAnnotation::Kind::Unknown;
      } else {
        inst.dist.kind = DistAnnotation::Kind::Known;
        inst.dist.value = expect(Token::Kind::Int).ival;
      }
      expect_punct(")");
    }
  }

  void parse_network(NetworkDesc& net) {
    expect_ident("network");
    net.present = true;
    expect_punct("{");
    while (!accept_punct("}")) {
      if (peek_ident("channel")) {
        lex_.next();
        ChannelDecl c;
        c.name = expect(Token::Kind::Chan).text;
        expect_punct(":");
        expect_ident("i64");
        expect_punct(",");
        expect_ident("capacity");
        c.capacity = static_cast<int>(expect(Token::Kind::Int).ival);
        expect_punct(",");
        expect_ident("kind");
        Token k = expect(Token::Kind::Ident);
        if (k.text == "data") c.kind = ChannelKind::Data;
        else if (k.text == "predicate") c.kind = ChannelKind::Predicate;
        else if (k.text == "ld_req") c.kind = ChannelKind::LdReq;
        else if (k.text == "st_req") c.kind = ChannelKind::StReq;
        else if (k.text == "st_val") c.kind = ChannelKind::StVal;
        else if (k.text == "ld_val") c.kind = ChannelKind::LdVal;
        else fail_at(k, "unknown channel kind '" + k.text + "'");
        expect_punct(",");
        expect_ident("writer");
        c.writer = parse_endpoint();
        expect_punct(",");
        expect_ident("reader");
        c.reader = parse_endpoint();
        net.channels.push_back(std::move(c));
      } else if (peek_ident("lsq")) {
        lex_.next();
        LsqBinding l;
        l.name = expect(Token::Kind::Chan).text;
        expect_punct("{");
        while (!accept_punct("}")) {
          Token key = expect(Token::Kind::Ident);
          if (key.text == "array") {
            l.array = expect(Token::Kind::Value).text;
          } else {
            std::vector<std::string>* list =
                key.text == "ld_req"   ? &l.ld_req
                : key.text == "ld_val" ? &l.ld_val
                : key.text == "st_req" ? &l.st_req
                : key.text == "st_val" ? &l.st_val
                                       : nullptr;
            if (!list) fail_at(key, "unknown lsq field '" + key.text + "'");
            if (lex_.peek().kind == Token::Kind::Chan) {
              do {
                list->push_back(expect(Token::Kind::Chan).text);
              } while (accept_punct(","));
            }
          }
        }
        net.lsqs.push_back(std::move(l));
      } else if (peek_ident("memory")) {
        lex_.next();
        MemoryDecl m;
        m.array = expect(Token::Kind::Value).text;
        expect_punct(":");
        m.owner = parse_endpoint();
        net.memories.push_back(std::move(m));
      } else {
        fail("expected 'channel', 'lsq' or 'memory'");
      }
    }
  }

  std::string parse_endpoint() {
    if (lex_.peek().kind == Token::Kind::Func) return lex_.next().text;
    expect_ident("lsq");
    expect_punct(":");
    return "lsq:" + expect(Token::Kind::Chan).text;
  }

  Token expect(Token::Kind k) {
    Token t = lex_.next();
    if (t.kind != k) fail_at(t, "unexpected token '" + t.text + "'");
    return t;
  }
  void expect_ident(const std::string& s) {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Ident || t.text != s)
      fail_at(t, "expected '" + s + "'");
  }
  void expect_punct(const std::string& s) {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Punct || t.text != s)
      fail_at(t, "expected '" + s + "'");
  }
  bool accept_punct(const std::string& s) {
    if (peek_punct(s)) {
      lex_.next();
      return true;
    }
    return false;
  }
  bool peek_punct(const std::string& s) const {
    return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == s;
  }
  bool peek_ident(const std::string& s) const {
    return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == s;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, lex_.peek().line, lex_.peek().col);
  }
  [[noreturn]] void fail_at(const Token& t, const std::string& msg) {
    throw ParseError(msg, t.line, t.col);
  }
};

}  // namespace

Program parse_program_raw(const std::string& text) {
  return Parser(text).parse();
}

Program parse_program(const std::string& text) {
  Program p = parse_program_raw(text);
  verify_and_normalize(p);
  return p;
}

Program parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

}  // namespace dhls::mir
