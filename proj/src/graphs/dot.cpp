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

#include "graphs/dot.hpp"

#include <sstream>

#include "mir/parser.hpp"

namespace dhls::graphs {

namespace {

std::string block_name(const Cfg& cfg, int b) {
  if (b == cfg.synthetic_exit) return "(exit)";
  return cfg.fn->blocks[static_cast<size_t>(b)].label;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string cfg_to_dot(const Cfg& cfg) {
  std::ostringstream os;
  os << "digraph cfg {\n  node [shape=box];\n";
  for (int b = 0; b < cfg.num_blocks; ++b)
    os << "  n" << b << " [label=\"" << escape(block_name(cfg, b)) << "\"];\n";
  for (int b = 0; b < cfg.num_blocks; ++b)
    for (int s : cfg.succ[static_cast<size_t>(b)])
      os << "  n" << b << " -> n" << s << ";\n";
  os << "}\n";
  return os.str();
}

std::string cdg_to_dot(const Cfg& cfg, const Cdg& cdg) {
  std::ostringstream os;
  os << "digraph cdg {\n  node [shape=box];\n";
  for (int b = 0; b < cfg.num_blocks; ++b)
    os << "  n" << b << " [label=\"" << escape(block_name(cfg, b)) << "\"];\n";
  for (int b = 0; b < cfg.num_blocks; ++b)
    for (const auto& d : cdg.deps[static_cast<size_t>(b)])
      os << "  n" << d.src << " -> n" << b << " [label=\"" << d.edge
         << "\"];\n";
  os << "}\n";
  return os.str();
}

std::string ddg_to_dot(const Ddg& ddg) {
  std::ostringstream os;
  os << "digraph ddg {\n  node [shape=box];\n";
  ddg.fn->for_each_inst([&](const mir::Instruction& inst) {
    os << "  n" << inst.id << " [label=\""
       << escape(mir::inst_to_string(*ddg.fn, inst)) << "\"];\n";
  });
  for (const auto& e : ddg.edges) {
    os << "  n" << e.src << " -> n" << e.dst << " [label=\"" << e.distance
       << "\"";
    if (e.kind == DdgEdge::Kind::Memory)
      os << ", style=" << (e.unknown ? "dotted" : "dashed");
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace dhls::graphs
