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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "llmclean/detection.hpp"
#include "llmclean/error.hpp"
#include "llmclean/eval.hpp"
#include "llmclean/rule.hpp"

namespace llmclean {
namespace {

Dataset numbers(std::size_t n) {
  std::vector<Row> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back({static_cast<double>(i % 17) + 0.5});
  return Dataset({"x"}, rows);
}

// Groups g0..g4 of 20 rows; group k holds dependent value v<k>.
Dataset grouped() {
  std::vector<Row> rows;
  for (int i = 0; i < 100; ++i) {
    const int g = i % 5;
    rows.push_back({"g" + std::to_string(g), "v" + std::to_string(g), static_cast<double>(i), std::string("c")});
  }
  return Dataset({"det", "dep", "num", "txt"}, rows);
}

std::set<CellRef> first_cells(std::size_t n, const std::string& column) {
  std::set<CellRef> out;
  for (std::size_t i = 0; i < n; ++i) out.insert({i, column});
  return out;
}

TEST(Inject, MissingCountFromRate) {
  ErrorSpec spec;
  spec.missing_rate = 0.13;
  spec.seed = 1;
  const auto inj = inject_errors(numbers(1000), spec);
  ASSERT_EQ(inj.truth.entries.size(), 130u);
  std::size_t placeholders = 0;
  for (const auto& row : inj.dirty.rows()) placeholders += row[0] == CellValue{std::string("N/A")};
  EXPECT_EQ(placeholders, 130u);
  const auto normalized = normalize_missing(inj.dirty);
  std::size_t missing = 0;
  for (const auto& row : normalized.rows()) missing += is_missing(row[0]);
  EXPECT_EQ(missing, 130u);
  for (const auto& e : inj.truth.entries) EXPECT_EQ(e.kind, CorruptionKind::Missing);
}

TEST(Inject, ZeroRatesChangeNothing) {
  const auto clean = grouped();
  const auto inj = inject_errors(clean, ErrorSpec{});
  EXPECT_EQ(inj.dirty, clean);
  EXPECT_TRUE(inj.truth.entries.empty());
}

TEST(Inject, SeedDeterminesOutput) {
  ErrorSpec spec;
  spec.missing_rate = 0.1;
  spec.outlier_rate = 0.1;
  spec.seed = 42;
  const auto a = inject_errors(grouped(), spec);
  const auto b = inject_errors(grouped(), spec);
  EXPECT_EQ(a.dirty, b.dirty);
  EXPECT_EQ(a.truth, b.truth);
  spec.seed = 43;
  EXPECT_NE(inject_errors(grouped(), spec).truth, a.truth);
}

TEST(Inject, OutliersScaleNumericCells) {
  ErrorSpec spec;
  spec.outlier_rate = 0.2;
  spec.seed = 3;
  const auto clean = grouped();
  const auto inj = inject_errors(clean, spec);
  ASSERT_EQ(inj.truth.entries.size(), 20u);
  for (const auto& e : inj.truth.entries) {
    EXPECT_EQ(e.cell.column, "num");
    const double before = std::get<double>(e.original);
    const double after = std::get<double>(inj.dirty.at(e.cell.row, 2));
    EXPECT_EQ(after, before == 0.0 ? 100.0 : before * 100.0);
  }
}

TEST(Inject, FdSwapsTakeAnotherGroupsMode) {
  ErrorSpec spec;
  spec.fd_swap_rate = 0.3;
  spec.fd_pairs = {{"det", "dep"}};
  spec.seed = 9;
  const auto clean = grouped();
  const auto inj = inject_errors(clean, spec);
  ASSERT_EQ(inj.truth.entries.size(), 30u);
  std::map<std::string, std::size_t> per_group;
  for (const auto& e : inj.truth.entries) {
    const std::string group = std::get<std::string>(clean.at(e.cell.row, 0));
    const std::string now = std::get<std::string>(inj.dirty.at(e.cell.row, 1));
    EXPECT_NE(now, std::get<std::string>(e.original));
    EXPECT_EQ(now.substr(0, 1), "v");
    ++per_group[group];
  }
  for (const auto& [g, n] : per_group) EXPECT_LT(2 * n, 20u) << g;

  // Each group keeps its mode, so the FD detector finds exactly the swaps.
  OfdRule r = parse_rule("t1&t2&EQ(t1.det,t2.det)&IQ(t1.dep,t2.dep)", DependencyKind::Denial);
  r.id = "fd";
  std::set<CellRef> flagged;
  for (const auto& f : detect_fd_violations(inj.dirty, r)) flagged.insert(f.cell);
  EXPECT_EQ(flagged, inj.truth.cells());
}

TEST(Inject, CellsCorruptedOnce) {
  ErrorSpec spec;
  spec.missing_rate = 0.3;
  spec.outlier_rate = 0.3;
  spec.fd_swap_rate = 0.2;
  spec.fd_pairs = {{"det", "dep"}};
  spec.seed = 4;
  const auto inj = inject_errors(grouped(), spec);
  const auto cells = inj.truth.cells();
  EXPECT_EQ(cells.size(), inj.truth.entries.size());
}

TEST(Inject, RestoreGivesCleanBack) {
  std::mt19937_64 rng(5);
  const auto clean = grouped();
  for (int i = 0; i < 50; ++i) {
    ErrorSpec spec;
    spec.missing_rate = (rng() % 30) / 100.0;
    spec.outlier_rate = (rng() % 30) / 100.0;
    spec.fd_swap_rate = (rng() % 20) / 100.0;
    spec.fd_pairs = {{"det", "dep"}};
    spec.seed = rng();
    const auto inj = inject_errors(clean, spec);
    ASSERT_EQ(restore(inj.dirty, inj.truth), clean);
  }
}

TEST(Inject, RejectsBadSpecs) {
  ErrorSpec spec;
  spec.missing_rate = 1.5;
  EXPECT_THROW(inject_errors(grouped(), spec), ArgumentError);
  spec = {};
  spec.missing_rate = 0.7;
  spec.outlier_rate = 0.7;
  spec.outlier_columns = {"num"};
  EXPECT_THROW(inject_errors(grouped(), spec), ArgumentError);
  spec = {};
  spec.fd_swap_rate = 0.1;
  EXPECT_THROW(inject_errors(grouped(), spec), ArgumentError);
  spec = {};
  spec.outlier_rate = 0.1;
  spec.outlier_columns = {"txt"};
  EXPECT_THROW(inject_errors(grouped(), spec), ArgumentError);
  spec = {};
  spec.missing_rate = 0.1;
  spec.missing_columns = {"nope"};
  EXPECT_THROW(inject_errors(grouped(), spec), SchemaError);
}

TEST(Truth, JsonlRoundTrip) {
  GroundTruth t;
  t.entries = {{{0, "a"}, std::string("x"), CorruptionKind::Missing},
               {{1, "b"}, 2.5, CorruptionKind::Outlier},
               {{2, "c"}, Timestamp{1718064000000}, CorruptionKind::FdSwap},
               {{3, "d"}, Missing{}, CorruptionKind::Missing}};
  EXPECT_EQ(truth_from_jsonl(truth_to_jsonl(t)), t);
  EXPECT_THROW(truth_from_jsonl("{\"row\": 1}"), InputError);
}

TEST(ScoreDetection, Perfect) {
  GroundTruth t;
  for (std::size_t i = 0; i < 5; ++i) t.entries.push_back({{i, "x"}, 1.0, CorruptionKind::Outlier});
  DetectionReport r;
  for (std::size_t i = 0; i < 5; ++i) r.findings.push_back({{i, "x"}, "rule", Reason::CapabilityViolation});
  const Scores s = score_detection(r, t, numbers(10));
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f1, 1.0);
}

TEST(ScoreCells, Arithmetic) {
  // 50 flags, 40 of them among the 80 truth cells.
  std::set<CellRef> truth = first_cells(80, "x");
  std::set<CellRef> flagged = first_cells(40, "x");
  for (std::size_t i = 0; i < 10; ++i) flagged.insert({i, "y"});
  const Scores s = score_cells(flagged, truth);
  EXPECT_EQ(s.precision, 0.8);
  EXPECT_EQ(s.recall, 0.5);
  EXPECT_NEAR(s.f1, 0.8 / 1.3, 1e-15);
  EXPECT_NEAR(s.f1, 0.615, 5e-4);
}

TEST(ScoreCells, Conventions) {
  const Scores none = score_cells({}, first_cells(3, "x"));
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_EQ(score_cells({}, {}).f1, 1.0);
  EXPECT_EQ(score_cells(first_cells(1, "x"), {}).f1, 0.0);
}

TEST(ScoreDetection, RejectsCellsOutsideShape) {
  DetectionReport r;
  r.findings.push_back({{10, "x"}, "rule", Reason::Missing});
  EXPECT_THROW(score_detection(r, {}, numbers(10)), ArgumentError);
  r.findings = {{{0, "nope"}, "rule", Reason::Missing}};
  EXPECT_THROW(score_detection(r, {}, numbers(10)), ArgumentError);
}

TEST(ScoreRepair, PerfectRepair) {
  ErrorSpec spec;
  spec.missing_rate = 0.1;
  spec.outlier_rate = 0.1;
  spec.missing_columns = {"txt"};
  spec.seed = 2;
  const auto clean = grouped();
  const auto inj = inject_errors(clean, spec);
  const auto s = score_repair(clean, inj.dirty, clean, inj.truth);
  EXPECT_EQ(s.rmse, 0.0);
  EXPECT_EQ(s.numeric_cells, 10u);
  EXPECT_EQ(s.categorical.precision, 1.0);
  EXPECT_EQ(s.categorical.recall, 1.0);
  EXPECT_EQ(s.categorical.f1, 1.0);
}

TEST(ScoreRepair, NoRepairActions) {
  ErrorSpec spec;
  spec.missing_rate = 0.1;
  spec.missing_columns = {"txt"};
  const auto clean = grouped();
  const auto inj = inject_errors(clean, spec);
  const auto s = score_repair(inj.dirty, inj.dirty, clean, inj.truth);
  EXPECT_EQ(s.categorical.precision, 0.0);
  EXPECT_EQ(s.categorical.recall, 0.0);
  EXPECT_EQ(s.categorical.f1, 0.0);
}

TEST(ScoreRepair, RmseOverTruthCells) {
  const Dataset clean({"x"}, {{1.0}, {2.0}, {3.0}, {4.0}});
  const Dataset dirty({"x"}, {{100.0}, {200.0}, {300.0}, {400.0}});
  const Dataset repaired({"x"}, {{1.0}, {2.0}, {5.0}, {4.0}});
  GroundTruth t;
  for (std::size_t i = 0; i < 4; ++i) t.entries.push_back({{i, "x"}, clean.at(i, 0), CorruptionKind::Outlier});
  const auto s = score_repair(repaired, dirty, clean, t);
  EXPECT_EQ(s.rmse, 1.0);
  EXPECT_EQ(s.numeric_cells, 4u);
}

TEST(ScoreRepair, ShapeMismatch) {
  EXPECT_THROW(score_repair(numbers(3), numbers(4), numbers(4), {}), ArgumentError);
  EXPECT_THROW(score_repair(Dataset({"y"}, {{1.0}}), numbers(1), numbers(1), {}), ArgumentError);
}

TEST(Runtime, ExcludesRuleParsing) {
  const auto rules = parse_rule_file("denial[m]: t1&EQ(t1.x,\"\")\n").rules;
  const auto data = numbers(100);
  const auto m = measure_runtime([&] { run_all(data, rules); });
  EXPECT_EQ(m.parse_calls, 0u);
  const auto parsing = measure_runtime([&] { run_all(data, parse_rule_file("denial[m]: t1&EQ(t1.x,\"\")\n").rules); });
  EXPECT_EQ(parsing.parse_calls, 1u);
}

TEST(Runtime, ZeroRuleRunIsFast) {
  const auto data = numbers(100);
  const auto m = measure_runtime([&] { run_all(data, {}); });
  EXPECT_GT(m.duration.count(), 0);
  EXPECT_LT(m.duration, std::chrono::milliseconds(10));
}

TEST(Runtime, GrowsWithRuleCount) {
  std::vector<Row> rows;
  for (int i = 0; i < 20000; ++i) rows.push_back({"g" + std::to_string(i % 50), "v" + std::to_string(i % 7)});
  const Dataset d({"a", "b"}, rows);
  std::vector<OfdRule> rules;
  for (int i = 0; i < 8; ++i) {
    OfdRule r = parse_rule("t1&t2&EQ(t1.a,t2.a)&IQ(t1.b,t2.b)", DependencyKind::Denial);
    r.id = "r" + std::to_string(i);
    rules.push_back(r);
  }
  auto median = [&](std::size_t n) {
    const std::vector<OfdRule> subset(rules.begin(), rules.begin() + n);
    std::vector<std::chrono::nanoseconds> times;
    for (int k = 0; k < 7; ++k) times.push_back(measure_runtime([&] { run_all(d, subset); }).duration);
    std::sort(times.begin(), times.end());
    return times[3];
  };
  const auto one = median(1), four = median(4), eight = median(8);
  EXPECT_LE(one, four);
  EXPECT_LE(four, eight);
}

}  // namespace
}  // namespace llmclean
