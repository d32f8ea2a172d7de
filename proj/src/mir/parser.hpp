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

#ifndef DHLS_MIR_PARSER_HPP
#define DHLS_MIR_PARSER_HPP

#include <string>

#include "mir/ir.hpp"

namespace dhls::mir {

// Parses, verifies and normalizes a textual .mir program.
// Throws ParseError on syntax errors and VerifyError on semantic ones
// (SSA violations, irreducible CFGs, multi-latch loops, ...).
Program parse_program(const std::string& text);

// Parse without verification/normalization. Used by the tests.
Program parse_program_raw(const std::string& text);

Program parse_file(const std::string& path);

// Canonical-whitespace serializer; parse(serialize(p)) == serialize-stable.
std::string serialize(const Program& p);
std::string serialize(const Function& f);
std::string inst_to_string(const Function& f, const Instruction& inst);

// Verifies SSA form and structural invariants, then normalizes loops
// (inserts dedicated preheaders where missing). Throws VerifyError.
void verify_and_normalize(Program& p);

}  // namespace dhls::mir

#endif  // DHLS_MIR_PARSER_HPP
