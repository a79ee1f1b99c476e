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

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llmclean/context_graph.hpp"
#include "llmclean/dataset.hpp"
#include "llmclean/rule.hpp"

namespace llmclean {

enum class Reason {
  Missing,
  Denial,
  FdViolation,
  MatchingViolation,
  CapabilityViolation,
  TypeMismatch,
  TemporalViolation
};

// missing, denial, fd_violation, matching_violation, capability_violation,
// type_mismatch, temporal_violation
std::string_view reason_name(Reason r);
std::optional<Reason> reason_from_name(std::string_view name);

struct Finding {
  CellRef cell;
  std::string rule_id;
  Reason reason = Reason::Denial;
  bool operator==(const Finding&) const = default;
};

// Levenshtein distance over Unicode code points.
std::size_t edit_distance(std::string_view a, std::string_view b);
// 1 - distance / max length; 1.0 for two empty strings.
double levenshtein_ratio(std::string_view a, std::string_view b);

struct SimilaritySpec {
  std::string metric = "levenshtein_ratio";
  // Used only by SIM predicates built without a threshold.
  double threshold = kDefaultSimThreshold;
  // Compare every row pair instead of blocking on the first four characters
  // of the determinant.
  bool exact = false;
};

// Cell predicates shared by every detector. A Missing cell equals a literal
// only when the literal is a placeholder token, and never equals, differs
// from, or resembles another cell.
bool cell_equals_literal(const CellValue& v, std::string_view literal);
bool cells_equal(const CellValue& a, const CellValue& b);
bool cells_differ(const CellValue& a, const CellValue& b);

// Unary denial of the form EQ(t1.col, <placeholder>): flags Missing cells of
// the column. Throws RuleError for any other shape or an unknown column.
std::vector<Finding> detect_missing(const Dataset& d, const OfdRule& rule);

// Any unary denial: flags the rule's last-referenced column in every row that
// satisfies all predicates.
std::vector<Finding> detect_unary_denial(const Dataset& d, const OfdRule& rule);

// FD-shaped binary rule: EQ(t1.X, t2.X) for each determinant X, one
// IQ(t1.Y, t2.Y), and optional EQ(tN.X, "literal") conditions on determinant
// columns. Groups rows by determinant and flags dependent cells that differ
// from the group's modal value (ties go to the lexicographically smallest
// value). Rows with a Missing determinant or dependent take no part.
std::vector<Finding> detect_fd_violations(const Dataset& d, const OfdRule& rule);

// SIM(t1.A, t2.A) & ... & SIM(t1.B, t2.B): the last predicate is the
// dependent. Flags both dependent cells of every row pair that is similar on
// all determinants but dissimilar on the dependent.
std::vector<Finding> detect_matching_violations(const Dataset& d, const OfdRule& rule,
                                                const SimilaritySpec& sim = {});

// Looks a sensor up by id, then by model name (id without its `_<n>` suffix).
const SensorSpec* find_spec(const std::map<std::string, SensorSpec>& specs, std::string_view sensor);

// Range check of the canonical value column for every sensor with a spec.
// Bounds are inclusive; non-numeric values are type mismatches. Sensors
// without a spec are appended to `uncovered` when given.
std::vector<Finding> detect_capability_violations(const Dataset& d, const std::map<std::string, SensorSpec>& specs,
                                                  std::vector<std::string>* uncovered = nullptr,
                                                  std::string_view rule_id = "capability");

// Rule-driven variant. Bounds come from the rule's MinValue/MaxValue
// literals, else from `specs`. Returns false in `covered` when neither has
// bounds for the sensor.
std::vector<Finding> detect_capability_rule(const Dataset& d, const OfdRule& rule,
                                            const std::map<std::string, SensorSpec>& specs, bool* covered = nullptr);

// EQ(t1.device, "from") & EQ(t2.device, "to") [& EQ(t1.C, t2.C)]. With a
// correlation column C, rows sharing a C value are paired; otherwise the k-th
// row of each device is paired with the k-th row of the other. The
// downstream timestamp is flagged unless t_from < t_to.
std::vector<Finding> detect_temporal_violations(const Dataset& d, const OfdRule& rule);

struct SkippedRule {
  std::string rule_id;
  std::string reason;
};

struct DetectionReport {
  std::vector<Finding> findings;  // sorted by (row, column position, rule id)
  std::vector<SkippedRule> skipped_rules;
  std::vector<std::string> uncovered_sensors;
  std::chrono::nanoseconds duration{0};

  std::size_t distinct_cells() const;
  std::map<std::string, std::size_t> per_rule_counts() const;
};

struct RunOptions {
  std::map<std::string, SensorSpec> specs;
  SimilaritySpec sim;
  std::size_t parallel = 1;
};

// Dispatches every rule to its detector. A rule that cannot be enforced is
// listed in skipped_rules and does not affect the others.
DetectionReport run_all(const Dataset& d, const std::vector<OfdRule>& rules, const RunOptions& options = {});

// {"findings": [...], "skipped_rules": [...], "duration_ms": ...}
std::string report_to_json(const DetectionReport& report);
DetectionReport report_from_json(std::string_view json);

}  // namespace llmclean
