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

#ifndef DHLS_TRANSFORM_TRANSFORM_HPP
#define DHLS_TRANSFORM_TRANSFORM_HPP

#include "marking/marking.hpp"

namespace dhls::transform {

struct TransformError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransformOptions {
  int data_capacity = 8;
  int pred_capacity = 8;
  int req_capacity = 16;
  bool hoist = true;  // move loop-invariant channel traffic out of loops
};

// One marking decision and what the transform did with it. Marks are
// skipped (applied == false) when realizing them would be unsound here,
// e.g. a processing element that would have to take memory accesses along.
struct AppliedMark {
  std::string kind;  // "block" | "memory" | "loop" | "hoist"
  std::string detail;
  bool applied = true;
  std::string reason;
};

struct TransformResult {
  mir::Program program;
  std::string text;  // the emitted source; parse(text) == program
  std::vector<AppliedMark> log;

  bool identity() const { return !program.network.present; }
};

// Realizes a marking report as a process network: marked blocks become
// predicated processing elements, marked memory accesses go through a
// tagged load-store queue fed by an address-generation slice, and marked
// loops become their own processes. An empty (or fully skipped) report
// returns the function unchanged with no network.
TransformResult transform(const mir::Function& fn,
                          const marking::MarkingReport& rep,
                          const TransformOptions& opts = {});

}  // namespace dhls::transform

#endif  // DHLS_TRANSFORM_TRANSFORM_HPP
