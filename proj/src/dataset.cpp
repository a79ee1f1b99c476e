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

#include "llmclean/dataset.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "llmclean/error.hpp"
#include "llmclean/util.hpp"

namespace llmclean {

CellValue number_cell(double v) {
  if (std::isnan(v)) return Missing{};
  if (!std::isfinite(v)) throw ArgumentError("infinite value cannot be stored in a cell");
  return v;
}

std::string render_cell(const CellValue& v) {
  struct Visitor {
    std::string operator()(const Missing&) const { return {}; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(const Timestamp& t) const { return format_iso_timestamp(t); }
  };
  return std::visit(Visitor{}, v);
}

std::optional<double> numeric_value(const CellValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* t = std::get_if<Timestamp>(&v)) return static_cast<double>(t->epoch_ms);
  return std::nullopt;
}

namespace {

bool read_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

std::optional<double> parse_double(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  std::string_view sv = s;
  if (sv.front() == '+') sv.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (res.ec != std::errc() || res.ptr != sv.data() + sv.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool time_like_header(std::string_view name) {
  const std::string lower = to_lower(name);
  return lower.find("time") != std::string::npos || lower.find("date") != std::string::npos ||
         lower == "ts";
}

}  // namespace

std::optional<Timestamp> parse_iso_timestamp(std::string_view raw) {
  const std::string owned = trim(raw);
  std::string_view s = owned;
  int y, mo, d, h, mi, sec;
  if (s.size() < 19) return std::nullopt;
  if (!read_digits(s, 0, 4, y) || s[4] != '-' || !read_digits(s, 5, 2, mo) || s[7] != '-' ||
      !read_digits(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') || !read_digits(s, 11, 2, h) ||
      s[13] != ':' || !read_digits(s, 14, 2, mi) || s[16] != ':' || !read_digits(s, 17, 2, sec)) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  std::int64_t millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    std::int64_t frac = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 3) frac = frac * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (std::size_t k = digits; k < 3; ++k) frac *= 10;
    millis = frac;
  }
  if (pos < s.size() && s[pos] == 'Z') ++pos;
  if (pos != s.size()) return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t ms =
      ((static_cast<std::int64_t>(days) * 24 + h) * 60 + mi) * 60'000 + sec * 1000 + millis;
  if (ms < 0) return std::nullopt;
  return Timestamp{ms};
}

std::string format_iso_timestamp(Timestamp t) {
  using namespace std::chrono;
  const std::int64_t ms = t.epoch_ms;
  const std::int64_t days = ms / 86'400'000;
  std::int64_t rem = ms % 86'400'000;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  const int h = static_cast<int>(rem / 3'600'000);
  rem %= 3'600'000;
  const int mi = static_cast<int>(rem / 60'000);
  rem %= 60'000;
  const int sec = static_cast<int>(rem / 1000);
  const int milli = static_cast<int>(rem % 1000);
  char buf[40];
  if (milli != 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), h, mi, sec, milli);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), h, mi, sec);
  }
  return buf;
}

Dataset::Dataset(std::vector<std::string> headers, std::vector<Row> rows)
    : headers_(std::move(headers)), rows_(std::move(rows)) {
  std::unordered_set<std::string> seen;
  for (const auto& h : headers_) {
    if (h.empty()) throw SchemaError("empty column name");
    if (!seen.insert(h).second) throw SchemaError("duplicate column name: " + h);
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != headers_.size()) {
      throw StructuralError("row " + std::to_string(r) + " has " +
                                std::to_string(rows_[r].size()) + " fields, expected " +
                                std::to_string(headers_.size()),
                            r);
    }
  }
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < headers_.size(); ++i) {
    if (headers_[i] == name) return i;
  }
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < headers_.size(); ++i) {
    if (iequals(headers_[i], name)) {
      if (found) return std::nullopt;  // ambiguous
      found = i;
    }
  }
  return found;
}

std::size_t Dataset::column_index(std::string_view name) const {
  auto idx = find_column(name);
  if (!idx) throw SchemaError("unknown column: " + std::string(name));
  return *idx;
}

PlaceholderSet::PlaceholderSet() : PlaceholderSet({"N/A", "nan", "none", "null", ""}) {}

PlaceholderSet::PlaceholderSet(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw ArgumentError("placeholder set must not be empty");
  for (const auto& t : tokens) tokens_.insert(to_lower(trim(t)));
}

bool PlaceholderSet::matches(std::string_view text) const {
  return tokens_.count(to_lower(trim(text))) > 0;
}

namespace {

// Splits CSV text into records. Quoted fields may span lines; "" escapes a
// quote inside a quoted field.
std::vector<std::vector<std::string>> read_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // distinguishes an empty line from a line with one empty field
  bool any_char_in_record = false;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    if (any_char_in_record) {
      end_field();
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
    any_char_in_record = false;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
      any_char_in_record = true;
    } else if (c == ',') {
      any_char_in_record = true;
      end_field();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      end_record();
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
      any_char_in_record = true;
    }
  }
  if (in_quotes) throw StructuralError("unterminated quoted field", records.size());
  end_record();
  return records;
}

enum class ColumnType { Text, Number, Timestamp };

ColumnType infer_column(const std::vector<std::vector<std::string>>& records, std::size_t first,
                        std::size_t col, bool time_like) {
  static const PlaceholderSet kDefault;
  std::size_t votes = 0, numeric = 0, temporal = 0;
  for (std::size_t r = first; r < records.size(); ++r) {
    const std::string& raw = records[r][col];
    if (kDefault.matches(raw)) continue;
    ++votes;
    if (parse_iso_timestamp(raw)) {
      ++temporal;
    } else if (auto v = parse_double(raw); v && std::isfinite(*v)) {
      ++numeric;
      if (time_like) {
        if (auto i = parse_int(raw); i && *i >= 0) ++temporal;
      }
    }
  }
  if (votes == 0) return ColumnType::Text;
  if (temporal * 2 > votes) return ColumnType::Timestamp;
  if (numeric * 2 > votes) return ColumnType::Number;
  return ColumnType::Text;
}

CellValue convert(const std::string& raw, ColumnType type, bool time_like) {
  if (raw.empty()) return std::string();
  switch (type) {
    case ColumnType::Number:
      if (auto v = parse_double(raw)) {
        if (std::isnan(*v)) return Missing{};
        if (std::isfinite(*v)) return *v;
      }
      return raw;
    case ColumnType::Timestamp:
      if (auto t = parse_iso_timestamp(raw)) return *t;
      if (time_like) {
        if (auto i = parse_int(raw); i && *i >= 0) return Timestamp{*i};
      }
      return raw;
    case ColumnType::Text:
      break;
  }
  return raw;
}

}  // namespace

Dataset load_csv(std::istream& in, bool has_header) {
  auto records = read_records(in);
  std::vector<std::string> headers;
  std::size_t first = 0;
  if (has_header) {
    if (records.empty()) throw SchemaError("missing header row");
    headers = records[0];
    for (auto& h : headers) h = trim(h);
    first = 1;
  } else if (!records.empty()) {
    for (std::size_t i = 0; i < records[0].size(); ++i) headers.push_back("col" + std::to_string(i + 1));
  }
  for (std::size_t r = first; r < records.size(); ++r) {
    if (records[r].size() != headers.size()) {
      throw StructuralError("ragged row " + std::to_string(r) + ": " +
                                std::to_string(records[r].size()) + " fields, expected " +
                                std::to_string(headers.size()),
                            r);
    }
  }
  {
    std::unordered_set<std::string> seen;
    for (const auto& h : headers) {
      if (h.empty()) throw SchemaError("empty column name");
      if (!seen.insert(h).second) throw SchemaError("duplicate column name: " + h);
    }
  }
  std::vector<ColumnType> types(headers.size());
  std::vector<bool> time_like(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    time_like[c] = time_like_header(headers[c]);
    types[c] = infer_column(records, first, c, time_like[c]);
  }
  std::vector<Row> rows;
  rows.reserve(records.size() - first);
  for (std::size_t r = first; r < records.size(); ++r) {
    Row row;
    row.reserve(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
      row.push_back(convert(records[r][c], types[c], time_like[c]));
    }
    rows.push_back(std::move(row));
  }
  return Dataset(std::move(headers), std::move(rows));
}

Dataset load_csv_file(const std::string& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return load_csv(in, has_header);
}

Dataset load_csv_string(std::string_view text, bool has_header) {
  std::istringstream in{std::string(text)};
  return load_csv(in, has_header);
}

namespace {

void write_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void write_csv(std::ostream& out, const Dataset& d) {
  for (std::size_t c = 0; c < d.column_count(); ++c) {
    if (c) out << ',';
    write_field(out, d.headers()[c]);
  }
  out << '\n';
  for (const auto& row : d.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      write_field(out, render_cell(row[c]));
    }
    out << '\n';
  }
}

std::string to_csv_string(const Dataset& d) {
  std::ostringstream out;
  write_csv(out, d);
  return out.str();
}

Dataset normalize_missing(const Dataset& d, const PlaceholderSet& p) {
  std::vector<Row> rows = d.rows();
  for (auto& row : rows) {
    for (auto& cell : row) {
      if (const auto* s = std::get_if<std::string>(&cell); s && p.matches(*s)) cell = Missing{};
    }
  }
  return Dataset(d.headers(), std::move(rows));
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double fraction,
                                                                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("split fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
  std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<std::size_t> second(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {std::move(first), std::move(second)};
}

std::pair<Dataset, Dataset> split_train_validation(const Dataset& d, double fraction,
                                                   std::uint64_t seed) {
  if (d.row_count() < 2) throw ArgumentError("split needs at least 2 rows");
  auto [a, b] = split_indices(d.row_count(), fraction, seed);
  auto take = [&](const std::vector<std::size_t>& idx) {
    std::vector<Row> rows;
    rows.reserve(idx.size());
    for (auto i : idx) rows.push_back(d.rows()[i]);
    return Dataset(d.headers(), std::move(rows));
  };
  return {take(a), take(b)};
}

bool is_numeric_column(const Dataset& d, std::size_t col) {
  std::size_t present = 0, numeric = 0;
  for (const auto& row : d.rows()) {
    if (is_missing(row[col])) continue;
    ++present;
    if (is_number(row[col])) ++numeric;
  }
  return present > 0 && numeric * 2 > present;
}

}  // namespace llmclean
