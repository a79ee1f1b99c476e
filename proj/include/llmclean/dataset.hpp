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
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace llmclean {

struct Missing {
  bool operator==(const Missing&) const = default;
};

struct Timestamp {
  std::int64_t epoch_ms = 0;
  auto operator<=>(const Timestamp&) const = default;
};

// A typed cell. Numbers are always finite; NaN inputs are stored as Missing.
using CellValue = std::variant<Missing, std::string, double, Timestamp>;
using Row = std::vector<CellValue>;

inline bool is_missing(const CellValue& v) { return std::holds_alternative<Missing>(v); }
inline bool is_number(const CellValue& v) { return std::holds_alternative<double>(v); }
inline bool is_text(const CellValue& v) { return std::holds_alternative<std::string>(v); }
inline bool is_timestamp(const CellValue& v) { return std::holds_alternative<Timestamp>(v); }

// Builds a Number cell, mapping NaN to Missing. Infinite values are rejected
// with ArgumentError.
CellValue number_cell(double v);

// Canonical text form of a cell: Text as-is, Number in shortest round-trip
// form, Timestamp as ISO-8601 UTC, Missing as the empty string.
std::string render_cell(const CellValue& v);

// ISO-8601 `YYYY-MM-DDTHH:MM:SS[.fff][Z]` (a space is accepted in place of
// `T`). Returns nullopt for anything else, including pre-epoch instants.
std::optional<Timestamp> parse_iso_timestamp(std::string_view s);
std::string format_iso_timestamp(Timestamp t);

// Numeric value of a Number or Timestamp cell.
std::optional<double> numeric_value(const CellValue& v);

class Dataset {
 public:
  Dataset() = default;
  // Throws SchemaError on empty or duplicate headers and StructuralError on a
  // row whose length differs from the header count.
  Dataset(std::vector<std::string> headers, std::vector<Row> rows);

  const std::vector<std::string>& headers() const { return headers_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t column_count() const { return headers_.size(); }
  const CellValue& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }

  // Exact header match, else a unique case-insensitive match.
  std::optional<std::size_t> find_column(std::string_view name) const;
  // As find_column, but throws SchemaError when absent.
  std::size_t column_index(std::string_view name) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<std::string> headers_;
  std::vector<Row> rows_;
};

struct CellRef {
  std::size_t row = 0;
  std::string column;
  auto operator<=>(const CellRef&) const = default;
};

class PlaceholderSet {
 public:
  // {"N/A", "nan", "none", "null", ""}
  PlaceholderSet();
  // Throws ArgumentError when tokens is empty.
  explicit PlaceholderSet(const std::vector<std::string>& tokens);

  bool matches(std::string_view text) const;
  const std::set<std::string>& tokens() const { return tokens_; }

 private:
  std::set<std::string> tokens_;  // trimmed + lowercased
};

// RFC-4180 CSV reader with per-column type inference.
Dataset load_csv(std::istream& in, bool has_header = true);
Dataset load_csv_file(const std::string& path, bool has_header = true);
Dataset load_csv_string(std::string_view text, bool has_header = true);

void write_csv(std::ostream& out, const Dataset& d);
std::string to_csv_string(const Dataset& d);

Dataset normalize_missing(const Dataset& d, const PlaceholderSet& p = PlaceholderSet());

// Seeded shuffle-and-cut. The first part holds round(fraction * N) rows; both
// parts keep the original relative row order.
std::pair<Dataset, Dataset> split_train_validation(const Dataset& d, double fraction,
                                                   std::uint64_t seed);

// Index-level variant used by callers that split non-tabular records.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double fraction, std::uint64_t seed);

// True when most non-missing cells of the column are Numbers.
bool is_numeric_column(const Dataset& d, std::size_t col);

}  // namespace llmclean
