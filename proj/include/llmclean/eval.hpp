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
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmclean/dataset.hpp"
#include "llmclean/detection.hpp"
#include "llmclean/ensemble.hpp"

namespace llmclean {

enum class CorruptionKind { Missing, Outlier, FdSwap };

// missing, outlier, fd_swap
std::string_view corruption_name(CorruptionKind k);

struct ErrorSpec {
  double missing_rate = 0.0;
  double outlier_rate = 0.0;
  double fd_swap_rate = 0.0;
  double outlier_multiplier = 100.0;
  std::uint64_t seed = 0;
  // Empty: every column.
  std::vector<std::string> missing_columns;
  // Empty: every numeric column.
  std::vector<std::string> outlier_columns;
  // (determinant, dependent) pairs whose dependent receives fd swaps.
  std::vector<std::pair<std::string, std::string>> fd_pairs;
  std::string placeholder = "N/A";
};

struct TruthEntry {
  CellRef cell;
  CellValue original;
  CorruptionKind kind = CorruptionKind::Missing;
  bool operator==(const TruthEntry&) const = default;
};

struct GroundTruth {
  std::vector<TruthEntry> entries;  // sorted by cell
  std::set<CellRef> cells() const;
  bool operator==(const GroundTruth&) const = default;
};

struct Injection {
  Dataset dirty;
  GroundTruth truth;
};

// Corrupts round_half_up(rate * rows) cells per target column and kind, in
// the order fd_swap, outlier, missing; a cell is corrupted at most once.
// Missing cells become the placeholder text, outliers are multiplied (or
// shifted when the product equals the value), fd swaps take another group's
// modal dependent value while keeping each group's corrupted share below half.
// Throws ArgumentError for invalid rates or when a column lacks capacity.
Injection inject_errors(const Dataset& clean, const ErrorSpec& spec);

// Writes every truth entry's original value back into `dirty`.
Dataset restore(const Dataset& dirty, const GroundTruth& truth);

// JSON Lines: {"row", "column", "original", "kind"}; originals are strings,
// numbers, {"timestamp_ms": n} or null.
std::string truth_to_jsonl(const GroundTruth& truth);
GroundTruth truth_from_jsonl(std::string_view jsonl);

// Cell-level comparison of flagged cells against the truth. Throws
// ArgumentError for references outside the dataset shape.
Scores score_detection(const DetectionReport& report, const GroundTruth& truth, const Dataset& shape);
Scores score_cells(const std::set<CellRef>& flagged, const std::set<CellRef>& truth);

struct RepairScores {
  double rmse = 0.0;
  std::size_t numeric_cells = 0;  // truth cells that entered the RMSE
  Scores categorical;
};

// RMSE over truth cells of numeric columns whose repaired value is numeric;
// categorical precision/recall over non-numeric columns, where a repair
// action is a cell that differs from `dirty`. Throws ArgumentError on shape
// mismatch.
RepairScores score_repair(const Dataset& repaired, const Dataset& dirty, const Dataset& clean,
                          const GroundTruth& truth);

struct RuntimeMeasurement {
  std::chrono::nanoseconds duration{0};
  std::uint64_t parse_calls = 0;  // parse_rule invocations inside the timed region
};

// Wall clock around `run` only.
RuntimeMeasurement measure_runtime(const std::function<void()>& run);

}  // namespace llmclean
