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
#include <sstream>

#include "llmclean/dataset.hpp"
#include "llmclean/error.hpp"
#include "llmclean/util.hpp"

namespace llmclean {
namespace {

const std::string kData = LLMCLEAN_TEST_DATA;

TEST(LoadCsv, MinimalFileTypesNumbers) {
  Dataset d = load_csv_string("a,b\n1,x\n2,y\n");
  EXPECT_EQ(d.headers(), (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(d.row_count(), 2u);
  EXPECT_TRUE(is_number(d.at(0, 0)));
  EXPECT_EQ(std::get<double>(d.at(1, 0)), 2.0);
  EXPECT_EQ(std::get<std::string>(d.at(1, 1)), "y");
}

TEST(LoadCsv, RaggedRowReportsRow) {
  try {
    load_csv_string("a\n1\n1,2\n");
    FAIL() << "expected StructuralError";
  } catch (const StructuralError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
}

TEST(LoadCsv, RejectsBadHeaders) {
  EXPECT_THROW(load_csv_string("a,a\n1,2\n"), SchemaError);
  EXPECT_THROW(load_csv_string("a,\n1,2\n"), SchemaError);
  EXPECT_THROW(load_csv_string(""), SchemaError);
}

TEST(LoadCsv, QuotingAndCrlf) {
  Dataset d = load_csv_string("name,note\r\n\"Smith, J\",\"said \"\"hi\"\"\"\r\nx,\"multi\nline\"\r\n");
  ASSERT_EQ(d.row_count(), 2u);
  EXPECT_EQ(render_cell(d.at(0, 0)), "Smith, J");
  EXPECT_EQ(render_cell(d.at(0, 1)), "said \"hi\"");
  EXPECT_EQ(render_cell(d.at(1, 1)), "multi\nline");
  EXPECT_THROW(load_csv_string("a\n\"open\n"), StructuralError);
}

TEST(LoadCsv, MajorityTypingFallsBackToText) {
  Dataset d = load_csv_string("v,w\n1,1\n2,x\n3,y\nabc,z\n");
  EXPECT_TRUE(is_number(d.at(0, 0)));
  EXPECT_TRUE(is_text(d.at(3, 0)));
  EXPECT_TRUE(is_text(d.at(0, 1)));
}

TEST(LoadCsv, NanBecomesMissing) {
  Dataset d = load_csv_string("v\n1\nNaN\n3\n");
  EXPECT_TRUE(is_missing(d.at(1, 0)));
}

TEST(LoadCsv, TimestampsIsoAndEpoch) {
  Dataset d = load_csv_string("timestamp,x\n2024-06-11T00:00:00Z,1\n1718064060000,2\n");
  ASSERT_TRUE(is_timestamp(d.at(0, 0)));
  ASSERT_TRUE(is_timestamp(d.at(1, 0)));
  EXPECT_EQ(std::get<Timestamp>(d.at(0, 0)).epoch_ms, 1718064000000);
  EXPECT_EQ(std::get<Timestamp>(d.at(1, 0)).epoch_ms, 1718064060000);
}

TEST(IsoTimestamp, ParseAndFormat) {
  EXPECT_EQ(parse_iso_timestamp("1970-01-01T00:00:00Z")->epoch_ms, 0);
  EXPECT_EQ(parse_iso_timestamp("2000-03-01 12:30:45.250")->epoch_ms, 951913845250);
  EXPECT_FALSE(parse_iso_timestamp("1969-12-31T23:59:59Z"));
  EXPECT_FALSE(parse_iso_timestamp("2024-02-30T00:00:00Z"));
  EXPECT_FALSE(parse_iso_timestamp("yesterday"));
  EXPECT_EQ(format_iso_timestamp(Timestamp{951913845250}), "2000-03-01T12:30:45.250Z");
  EXPECT_EQ(format_iso_timestamp(Timestamp{0}), "1970-01-01T00:00:00Z");
}

TEST(LoadCsv, IotFixtureHeaders) {
  Dataset d = load_csv_file(kData + "/iot_sensors.csv");
  EXPECT_EQ(d.headers(), (std::vector<std::string>{"System", "Device", "SensingDevice", "Sensor", "Name", "Value",
                                                  "Timestamp", "Location"}));
  EXPECT_EQ(d.row_count(), 1000u);
  EXPECT_TRUE(is_number(d.at(0, 5)));
  EXPECT_TRUE(is_timestamp(d.at(0, 6)));
}

TEST(CsvWriter, RoundTrips) {
  Dataset d = load_csv_string("a,b,t\n1.5,\"x,y\",2024-06-11T00:00:00Z\n,\"q\"\"\",2024-06-11T00:01:00Z\n");
  Dataset back = load_csv_string(to_csv_string(d));
  EXPECT_EQ(back, d);
}

TEST(FindColumn, ExactThenUniqueCaseInsensitive) {
  Dataset d({"Sensor", "value", "VALUE"}, {});
  EXPECT_EQ(d.find_column("sensor"), 0u);
  EXPECT_EQ(d.find_column("value"), 1u);
  EXPECT_EQ(d.find_column("Value"), std::nullopt);  // ambiguous
  EXPECT_THROW(d.column_index("missing"), SchemaError);
}

TEST(NormalizeMissing, Placeholders) {
  Dataset d({"x"}, {{std::string("N/A")}, {std::string("NULL")}, {std::string(" none ")}, {std::string("")},
                    {std::string("nonempty")}, {1.0}});
  Dataset n = normalize_missing(d);
  EXPECT_TRUE(is_missing(n.at(0, 0)));
  EXPECT_TRUE(is_missing(n.at(1, 0)));
  EXPECT_TRUE(is_missing(n.at(2, 0)));
  EXPECT_TRUE(is_missing(n.at(3, 0)));
  EXPECT_EQ(render_cell(n.at(4, 0)), "nonempty");
  EXPECT_EQ(n.at(5, 0), CellValue(1.0));
}

TEST(NormalizeMissing, IdempotentAndTypedCellsUntouched) {
  Rng rng(11);
  const std::vector<std::string> pool = {"N/A", "nan", "x", "", "NONE", "Null", "y"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Row> rows;
    for (int r = 0; r < 20; ++r) {
      Row row;
      row.emplace_back(pool[rng.below(pool.size())]);
      row.emplace_back(static_cast<double>(rng.below(100)));
      row.emplace_back(Timestamp{static_cast<std::int64_t>(rng.below(1000))});
      rows.push_back(row);
    }
    Dataset d({"t", "n", "ts"}, rows);
    Dataset once = normalize_missing(d);
    EXPECT_EQ(normalize_missing(once), once);
    for (std::size_t r = 0; r < d.row_count(); ++r) {
      EXPECT_EQ(once.at(r, 1), d.at(r, 1));
      EXPECT_EQ(once.at(r, 2), d.at(r, 2));
    }
  }
}

TEST(PlaceholderSet, CustomTokens) {
  PlaceholderSet p({"-", "missing"});
  EXPECT_TRUE(p.matches(" MISSING "));
  EXPECT_FALSE(p.matches("N/A"));
  EXPECT_THROW(PlaceholderSet(std::vector<std::string>{}), ArgumentError);
}

Dataset numbered(std::size_t n) {
  std::vector<Row> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back({static_cast<double>(i)});
  return Dataset({"i"}, rows);
}

TEST(Split, PartitionSizes) {
  auto [a, b] = split_train_validation(numbered(10), 0.8, 7);
  EXPECT_EQ(a.row_count(), 8u);
  EXPECT_EQ(b.row_count(), 2u);
  auto [c, e] = split_train_validation(numbered(2), 0.5, 1);
  EXPECT_EQ(c.row_count(), 1u);
  EXPECT_EQ(e.row_count(), 1u);
  EXPECT_THROW(split_train_validation(numbered(10), 0.0, 1), ArgumentError);
  EXPECT_THROW(split_train_validation(numbered(10), 1.0, 1), ArgumentError);
}

TEST(Split, DeterministicPartition) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dataset d = numbered(37);
    auto [a, b] = split_train_validation(d, 0.3, seed);
    auto [a2, b2] = split_train_validation(d, 0.3, seed);
    EXPECT_EQ(a, a2);
    EXPECT_EQ(b, b2);
    std::vector<double> all;
    for (const auto& r : a.rows()) all.push_back(std::get<double>(r[0]));
    for (const auto& r : b.rows()) all.push_back(std::get<double>(r[0]));
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], static_cast<double>(i));
    EXPECT_EQ(all.size(), 37u);
    // Relative order is preserved inside each part.
    for (std::size_t i = 1; i < a.row_count(); ++i) EXPECT_LT(std::get<double>(a.at(i - 1, 0)), std::get<double>(a.at(i, 0)));
  }
}

TEST(DatasetInvariants, RowLengthChecked) {
  EXPECT_THROW(Dataset({"a", "b"}, {{1.0}}), StructuralError);
}

TEST(NumberCell, NanIsMissing) {
  EXPECT_TRUE(is_missing(number_cell(std::nan(""))));
  EXPECT_THROW(number_cell(1.0 / 0.0), ArgumentError);
}

}  // namespace
}  // namespace llmclean
