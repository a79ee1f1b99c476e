// Copyright 2026 The LLMClean Authors
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

#pragma once

#include <string>
#include <vector>

#include "llmclean/rule.hpp"
#include "llmclean/util.hpp"

namespace llmclean::fixtures {

// Random structurally valid rules.
inline OfdRule random_rule(Rng& rng) {
  static const std::vector<std::string> columns = {"System", "Device", "Zip Code", "value_1", "MinValue", "Ä"};
  static const std::vector<std::string> literals = {"", "x", "Room 1", "a\"b", "back\\slash", "-55", "ü,&()"};
  OfdRule r;
  r.kind = static_cast<DependencyKind>(rng.below(7));
  const bool binary = rng.below(2) == 1;
  r.aliases = binary ? std::vector<std::string>{"t1", "t2"} : std::vector<std::string>{"t1"};
  const std::size_t n = 1 + rng.below(4);
  for (std::size_t i = 0; i < n; ++i) {
    Predicate p;
    p.op = static_cast<PredicateOp>(rng.below(3));
    auto operand = [&]() -> Operand {
      if (rng.below(3) == 0) return Literal{literals[rng.below(literals.size())]};
      return ColumnRef{r.aliases[rng.below(r.aliases.size())], columns[rng.below(columns.size())]};
    };
    p.left = operand();
    p.right = operand();
    if (p.op == PredicateOp::SIM) p.sim_threshold = static_cast<double>(rng.below(101)) / 100.0;
    r.predicates.push_back(p);
  }
  if (binary) {
    r.predicates.push_back(Predicate{PredicateOp::EQ, ColumnRef{"t1", "Device"}, ColumnRef{"t2", "Device"}, std::nullopt});
  } else {
    r.predicates.push_back(Predicate{PredicateOp::EQ, ColumnRef{"t1", "Device"}, Literal{"d"}, std::nullopt});
  }
  return r;
}

}  // namespace llmclean::fixtures
