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
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace llmclean {

using LabelSet = std::set<std::string>;

// Every label present in at least `threshold` of the input sets. Each set
// votes once per label.
LabelSet find_consensus(const std::vector<LabelSet>& results, std::size_t threshold);

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Set-overlap precision/recall/F1. An empty prediction scores 1.0 against an
// empty truth and 0.0 otherwise (recall symmetric).
Scores score_micro_f1(const LabelSet& predicted, const LabelSet& truth);

struct EvalRecord {
  std::string instance_id;
  LabelSet truth;
  std::map<std::string, LabelSet> answers;  // prompt id -> answer set
  bool operator==(const EvalRecord&) const = default;
};

struct EnsembleConfig {
  std::size_t threshold = 0;
  std::vector<std::string> prompts;  // sorted
  double train_f1 = 0.0;
  double val_f1 = 0.0;
};

struct SearchSpec {
  std::size_t tr_range = 0;
};

// Upper bound on the prompt universe (the search enumerates every subset).
inline constexpr std::size_t kMaxEnsemblePrompts = 20;

// Mean per-instance F1 of the consensus of `prompts` at `threshold`.
double ensemble_f1(const std::vector<EvalRecord>& records, const std::vector<std::string>& prompts,
                   std::size_t threshold);

// Two-phase search. Phase 1 scores every (threshold, subset) with threshold in
// [0, tr_range] and threshold <= |subset| on `train` and keeps the configs
// that reach the maximum; phase 2 re-scores those on `val` and returns the
// ones reaching the validation maximum, sorted by (threshold, prompts).
// Throws ArgumentError for empty inputs, an empty or oversized prompt list,
// or records lacking an answer for one of the prompts.
std::vector<EnsembleConfig> find_best_ensemble(const std::vector<EvalRecord>& train,
                                               const std::vector<EvalRecord>& val,
                                               const std::vector<std::string>& prompts, const SearchSpec& spec,
                                               std::size_t parallel = 1);

// JSON Lines: {"instance": ..., "truth": [...], "answers": {"p1": [...]}}.
// Throws InputError naming the offending line.
std::vector<EvalRecord> parse_eval_records(std::string_view jsonl);
std::string render_eval_records(const std::vector<EvalRecord>& records);

// {"configs": [{"threshold", "prompts", "train_f1", "val_f1"}]}
std::string configs_to_json(const std::vector<EnsembleConfig>& configs);

}  // namespace llmclean
