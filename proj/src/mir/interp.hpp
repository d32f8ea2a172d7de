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

#ifndef DHLS_MIR_INTERP_HPP
#define DHLS_MIR_INTERP_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mir/ir.hpp"

namespace dhls::mir {

struct Inputs {
  std::map<std::string, int64_t> scalars;
  std::map<std::string, std::vector<int64_t>> arrays;
};

struct FinalState {
  std::vector<int64_t> ret;
  std::map<std::string, std::vector<int64_t>> arrays;
  int64_t steps = 0;
};

struct InterpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Strict sequential reference semantics; the functional oracle for all
// equivalence checks.
FinalState interpret(const Function& fn, const Inputs& inputs,
                     int64_t max_steps = 100'000'000);

// Semantics of the opaque latency-annotated intrinsics (call @name). Pure
// and shared between the interpreter and the simulator.
int64_t opaque_call(const std::string& callee, int64_t x);

// Wrapping two's-complement arithmetic used for all IR arithmetic.
int64_t eval_binop(Opcode op, int64_t a, int64_t b);
bool eval_cmp(CmpPred pred, int64_t a, int64_t b);

}  // namespace dhls::mir

#endif  // DHLS_MIR_INTERP_HPP
