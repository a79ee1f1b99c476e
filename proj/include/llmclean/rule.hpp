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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace llmclean {

enum class DependencyKind { Denial, Matching, DeviceLink, Temporal, Locality, Monitoring, Capability };

// Rule-file spelling: denial, matching, device_link, temporal, locality,
// monitoring, capability.
std::string_view kind_name(DependencyKind kind);
std::optional<DependencyKind> kind_from_name(std::string_view name);

struct ColumnRef {
  std::string alias;
  std::string column;
  bool operator==(const ColumnRef&) const = default;
};

struct Literal {
  std::string value;
  bool operator==(const Literal&) const = default;
};

using Operand = std::variant<ColumnRef, Literal>;

enum class PredicateOp { EQ, IQ, SIM };

struct Predicate {
  PredicateOp op = PredicateOp::EQ;
  Operand left;
  Operand right;
  std::optional<double> sim_threshold;  // SIM only
  bool operator==(const Predicate&) const = default;
};

struct OfdRule {
  std::string id;
  DependencyKind kind = DependencyKind::Denial;
  std::vector<std::string> aliases;
  std::vector<Predicate> predicates;
  bool operator==(const OfdRule&) const = default;
};

// Threshold used for a bare `SIM(...)` token.
inline constexpr double kDefaultSimThreshold = 0.75;

// Parses `alias(&alias)?&pred(&pred)*`. Throws ParseError carrying the byte
// offset of the problem. The returned rule has an empty id.
OfdRule parse_rule(std::string_view text, DependencyKind kind);

// Inverse of parse_rule (the id is not part of the text).
std::string render_rule(const OfdRule& rule);

// Checks the structural invariants parse_rule guarantees. Throws ParseError
// (offset 0) on violation; used for rules built in code.
void validate_rule(const OfdRule& rule);

// Number of parse_rule invocations since process start. Lets callers assert
// that a timed region performed no rule parsing.
std::uint64_t rule_parse_count();

// Rule files: one `kind: text` or `kind[id]: text` per line, `#` comments,
// blank lines ignored. Rules without an explicit id get `<kind>_<n>`, n being
// the rule's 1-based position in the file.
struct RuleFileError {
  std::size_t line = 0;
  std::string message;
};

struct RuleFile {
  std::vector<OfdRule> rules;
  std::vector<RuleFileError> errors;
};

// Strict mode throws ParseError (offset = line number) on the first bad line;
// lenient mode collects bad lines in `errors` and keeps going.
RuleFile parse_rule_file(std::string_view text, bool strict = true);
std::string render_rule_file(const std::vector<OfdRule>& rules);

}  // namespace llmclean
