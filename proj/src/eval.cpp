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

#include "llmclean/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "llmclean/error.hpp"
#include "llmclean/rule.hpp"
#include "llmclean/util.hpp"

namespace llmclean {

using json = nlohmann::json;

namespace {

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9)); }

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) throw ArgumentError(std::string(name) + " must be in [0, 1]");
}

std::vector<std::size_t> target_columns(const Dataset& d, const std::vector<std::string>& names, bool numeric_only) {
  std::vector<std::size_t> out;
  if (names.empty()) {
    for (std::size_t c = 0; c < d.column_count(); ++c) {
      if (!numeric_only || is_numeric_column(d, c)) out.push_back(c);
    }
    return out;
  }
  for (const auto& n : names) {
    const std::size_t c = d.column_index(n);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

json cell_to_json(const CellValue& v) {
  if (is_missing(v)) return nullptr;
  if (is_number(v)) return std::get<double>(v);
  if (is_timestamp(v)) return json{{"timestamp_ms", std::get<Timestamp>(v).epoch_ms}};
  return std::get<std::string>(v);
}

CellValue cell_from_json(const json& j) {
  if (j.is_null()) return Missing{};
  if (j.is_number()) return number_cell(j.get<double>());
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("timestamp_ms")) return Timestamp{j["timestamp_ms"].get<std::int64_t>()};
  throw InputError("unsupported original value " + j.dump());
}

bool same_cell(const CellValue& a, const CellValue& b) {
  if (is_missing(a) || is_missing(b)) return is_missing(a) && is_missing(b);
  return render_cell(a) == render_cell(b);
}

}  // namespace

std::string_view corruption_name(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::Missing: return "missing";
    case CorruptionKind::Outlier: return "outlier";
    case CorruptionKind::FdSwap: return "fd_swap";
  }
  return {};
}

std::set<CellRef> GroundTruth::cells() const {
  std::set<CellRef> out;
  for (const auto& e : entries) out.insert(e.cell);
  return out;
}

Injection inject_errors(const Dataset& clean, const ErrorSpec& spec) {
  check_rate(spec.missing_rate, "missing_rate");
  check_rate(spec.outlier_rate, "outlier_rate");
  check_rate(spec.fd_swap_rate, "fd_swap_rate");
  if (!std::isfinite(spec.outlier_multiplier)) throw ArgumentError("outlier multiplier must be finite");
  if (spec.fd_swap_rate > 0.0 && spec.fd_pairs.empty()) throw ArgumentError("fd_swap_rate needs at least one fd pair");

  const std::size_t n = clean.row_count();
  const std::size_t cols = clean.column_count();
  std::vector<Row> rows = clean.rows();
  std::vector<std::vector<bool>> used(n, std::vector<bool>(cols, false));
  std::vector<TruthEntry> entries;
  Rng rng(spec.seed);

  // Per-column share of the three kinds may not exceed 1.
  std::vector<double> load(cols, 0.0);

  auto corrupt = [&](std::size_t r, std::size_t c, CellValue v, CorruptionKind kind) {
    entries.push_back({CellRef{r, clean.headers()[c]}, rows[r][c], kind});
    rows[r][c] = std::move(v);
    used[r][c] = true;
  };

  // fd swaps
  if (spec.fd_swap_rate > 0.0) {
    for (const auto& [det_name, dep_name] : spec.fd_pairs) {
      const std::size_t det = clean.column_index(det_name);
      const std::size_t dep = clean.column_index(dep_name);
      if (det == dep) throw ArgumentError("fd pair uses one column twice: " + det_name);
      load[dep] += spec.fd_swap_rate;
      const std::size_t want = round_half_up(spec.fd_swap_rate * static_cast<double>(n));
      if (want == 0) continue;

      std::map<std::string, std::vector<std::size_t>> groups;
      for (std::size_t r = 0; r < n; ++r) {
        if (is_missing(rows[r][det]) || is_missing(rows[r][dep])) continue;
        groups[render_cell(rows[r][det])].push_back(r);
      }
      std::map<std::string, std::size_t> mode_row;  // group -> a row holding the mode
      for (const auto& [key, members] : groups) {
        std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // value -> (count, row)
        for (std::size_t r : members) {
          auto& slot = counts[render_cell(rows[r][dep])];
          if (slot.first++ == 0) slot.second = r;
        }
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it) {
          if (it->second.first > best->second.first) best = it;
        }
        mode_row[key] = best->second.second;
      }
      std::vector<std::size_t> candidates;
      for (const auto& [key, members] : groups) {
        for (std::size_t r : members) {
          if (!used[r][dep]) candidates.push_back(r);
        }
      }
      rng.shuffle(candidates);
      std::map<std::string, std::size_t> taken;
      std::size_t done = 0;
      for (std::size_t r : candidates) {
        if (done == want) break;
        const std::string key = render_cell(rows[r][det]);
        const std::size_t size = groups[key].size();
        if ((taken[key] + 1) * 2 >= size) continue;
        const std::string own_mode = render_cell(rows[mode_row[key]][dep]);
        if (render_cell(rows[r][dep]) != own_mode) continue;
        std::vector<std::size_t> donors;
        for (const auto& [other, row] : mode_row) {
          if (other != key && render_cell(rows[row][dep]) != own_mode) donors.push_back(row);
        }
        if (donors.empty()) continue;
        const std::size_t donor = donors[rng.below(donors.size())];
        corrupt(r, dep, rows[donor][dep], CorruptionKind::FdSwap);
        ++taken[key];
        ++done;
      }
      if (done < want) {
        throw ArgumentError("column " + dep_name + " can hold only " + std::to_string(done) + " of " +
                            std::to_string(want) + " fd swaps");
      }
    }
  }

  // outliers
  if (spec.outlier_rate > 0.0) {
    for (std::size_t c : target_columns(clean, spec.outlier_columns, true)) {
      load[c] += spec.outlier_rate;
      const std::size_t want = round_half_up(spec.outlier_rate * static_cast<double>(n));
      std::vector<std::size_t> candidates;
      for (std::size_t r = 0; r < n; ++r) {
        if (!used[r][c] && is_number(rows[r][c])) candidates.push_back(r);
      }
      if (candidates.size() < want) {
        throw ArgumentError("column " + clean.headers()[c] + " has only " + std::to_string(candidates.size()) +
                            " numeric cells for " + std::to_string(want) + " outliers");
      }
      rng.shuffle(candidates);
      for (std::size_t k = 0; k < want; ++k) {
        const std::size_t r = candidates[k];
        const double v = std::get<double>(rows[r][c]);
        double out = v * spec.outlier_multiplier;
        if (out == v) out = v + spec.outlier_multiplier;
        if (!std::isfinite(out)) throw ArgumentError("outlier overflows in column " + clean.headers()[c]);
        corrupt(r, c, out, CorruptionKind::Outlier);
      }
    }
  }

  // missing values
  if (spec.missing_rate > 0.0) {
    for (std::size_t c : target_columns(clean, spec.missing_columns, false)) {
      load[c] += spec.missing_rate;
      const std::size_t want = round_half_up(spec.missing_rate * static_cast<double>(n));
      std::vector<std::size_t> candidates;
      for (std::size_t r = 0; r < n; ++r) {
        if (!used[r][c] && !is_missing(rows[r][c])) candidates.push_back(r);
      }
      if (candidates.size() < want) {
        throw ArgumentError("column " + clean.headers()[c] + " has only " + std::to_string(candidates.size()) +
                            " cells left for " + std::to_string(want) + " missing values");
      }
      rng.shuffle(candidates);
      for (std::size_t k = 0; k < want; ++k) corrupt(candidates[k], c, spec.placeholder, CorruptionKind::Missing);
    }
  }

  for (std::size_t c = 0; c < cols; ++c) {
    if (load[c] > 1.0 + 1e-12) throw ArgumentError("error rates for column " + clean.headers()[c] + " exceed 1");
  }

  std::sort(entries.begin(), entries.end(), [](const TruthEntry& a, const TruthEntry& b) { return a.cell < b.cell; });
  return Injection{Dataset(clean.headers(), std::move(rows)), GroundTruth{std::move(entries)}};
}

Dataset restore(const Dataset& dirty, const GroundTruth& truth) {
  std::vector<Row> rows = dirty.rows();
  for (const auto& e : truth.entries) {
    if (e.cell.row >= rows.size()) throw ArgumentError("truth row out of range");
    rows[e.cell.row][dirty.column_index(e.cell.column)] = e.original;
  }
  return Dataset(dirty.headers(), std::move(rows));
}

std::string truth_to_jsonl(const GroundTruth& truth) {
  std::string out;
  for (const auto& e : truth.entries) {
    json j = {{"row", e.cell.row},
              {"column", e.cell.column},
              {"original", cell_to_json(e.original)},
              {"kind", corruption_name(e.kind)}};
    out += j.dump() + "\n";
  }
  return out;
}

GroundTruth truth_from_jsonl(std::string_view text) {
  GroundTruth t;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      TruthEntry e;
      e.cell = CellRef{j.at("row").get<std::size_t>(), j.at("column").get<std::string>()};
      e.original = cell_from_json(j.at("original"));
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "missing") {
        e.kind = CorruptionKind::Missing;
      } else if (kind == "outlier") {
        e.kind = CorruptionKind::Outlier;
      } else if (kind == "fd_swap") {
        e.kind = CorruptionKind::FdSwap;
      } else {
        throw InputError("unknown corruption kind " + kind);
      }
      t.entries.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw InputError("truth line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::sort(t.entries.begin(), t.entries.end(), [](const TruthEntry& a, const TruthEntry& b) { return a.cell < b.cell; });
  return t;
}

Scores score_cells(const std::set<CellRef>& flagged, const std::set<CellRef>& truth) {
  std::size_t tp = 0;
  for (const auto& c : flagged) tp += truth.count(c);
  Scores s;
  s.precision = flagged.empty() ? (truth.empty() ? 1.0 : 0.0) : static_cast<double>(tp) / flagged.size();
  s.recall = truth.empty() ? (flagged.empty() ? 1.0 : 0.0) : static_cast<double>(tp) / truth.size();
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

Scores score_detection(const DetectionReport& report, const GroundTruth& truth, const Dataset& shape) {
  auto check = [&](const CellRef& c) {
    if (c.row >= shape.row_count() || !shape.find_column(c.column)) {
      throw ArgumentError("cell (" + std::to_string(c.row) + ", " + c.column + ") is outside the dataset");
    }
  };
  std::set<CellRef> flagged;
  for (const auto& f : report.findings) {
    check(f.cell);
    flagged.insert(f.cell);
  }
  const auto truth_cells = truth.cells();
  for (const auto& c : truth_cells) check(c);
  return score_cells(flagged, truth_cells);
}

RepairScores score_repair(const Dataset& repaired, const Dataset& dirty, const Dataset& clean,
                          const GroundTruth& truth) {
  if (repaired.headers() != clean.headers() || dirty.headers() != clean.headers() ||
      repaired.row_count() != clean.row_count() || dirty.row_count() != clean.row_count()) {
    throw ArgumentError("repaired, dirty and clean datasets must share one shape");
  }
  std::vector<bool> numeric(clean.column_count());
  for (std::size_t c = 0; c < clean.column_count(); ++c) numeric[c] = is_numeric_column(clean, c);

  RepairScores out;
  double sq = 0.0;
  std::set<CellRef> categorical_truth;
  for (const auto& e : truth.entries) {
    if (e.cell.row >= clean.row_count()) throw ArgumentError("truth row out of range");
    const std::size_t c = clean.column_index(e.cell.column);
    if (numeric[c]) {
      const auto fixed = numeric_value(repaired.at(e.cell.row, c));
      const auto want = numeric_value(clean.at(e.cell.row, c));
      if (!fixed || !want || !is_number(repaired.at(e.cell.row, c))) continue;
      sq += (*fixed - *want) * (*fixed - *want);
      ++out.numeric_cells;
    } else {
      categorical_truth.insert(e.cell);
    }
  }
  out.rmse = out.numeric_cells ? std::sqrt(sq / static_cast<double>(out.numeric_cells)) : 0.0;

  std::size_t actions = 0, correct = 0;
  for (std::size_t r = 0; r < clean.row_count(); ++r) {
    for (std::size_t c = 0; c < clean.column_count(); ++c) {
      if (numeric[c] || same_cell(repaired.at(r, c), dirty.at(r, c))) continue;
      ++actions;
      if (same_cell(repaired.at(r, c), clean.at(r, c)) && categorical_truth.count(CellRef{r, clean.headers()[c]})) {
        ++correct;
      }
    }
  }
  Scores& s = out.categorical;
  if (actions == 0) {
    s.precision = categorical_truth.empty() ? 1.0 : 0.0;
  } else {
    s.precision = static_cast<double>(correct) / actions;
  }
  s.recall = categorical_truth.empty() ? (actions == 0 ? 1.0 : 0.0)
                                       : static_cast<double>(correct) / categorical_truth.size();
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return out;
}

RuntimeMeasurement measure_runtime(const std::function<void()>& run) {
  const std::uint64_t before = rule_parse_count();
  const auto start = std::chrono::steady_clock::now();
  run();
  RuntimeMeasurement m;
  m.duration = std::chrono::steady_clock::now() - start;
  m.parse_calls = rule_parse_count() - before;
  return m;
}

}  // namespace llmclean
