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

#ifndef DHLS_GRAPHS_DOT_HPP
#define DHLS_GRAPHS_DOT_HPP

#include <string>

#include "graphs/cdg.hpp"
#include "graphs/ddg.hpp"

namespace dhls::graphs {

std::string cfg_to_dot(const Cfg& cfg);
std::string cdg_to_dot(const Cfg& cfg, const Cdg& cdg);
std::string ddg_to_dot(const Ddg& ddg);

}  // namespace dhls::graphs

#endif  // DHLS_GRAPHS_DOT_HPP
