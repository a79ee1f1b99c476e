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

#include "llmclean/detection.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "llmclean/error.hpp"
#include "llmclean/util.hpp"

namespace llmclean {

using json = nlohmann::json;

namespace {

constexpr std::string_view kReasonNames[] = {"missing",  "denial",        "fd_violation",      "matching_violation",
                                             "capability_violation", "type_mismatch", "temporal_violation"};

const PlaceholderSet& default_placeholders() {
  static const PlaceholderSet kSet;
  return kSet;
}

std::size_t resolve(const Dataset& d, const std::string& column) {
  auto idx = d.find_column(column);
  if (!idx) throw RuleError("unknown column " + column);
  return *idx;
}

void sort_findings(const Dataset& d, std::vector<Finding>& f) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < d.headers().size(); ++i) pos[d.headers()[i]] = i;
  auto col_pos = [&](const std::string& c) {
    auto it = pos.find(c);
    return it == pos.end() ? d.headers().size() : it->second;
  };
  std::sort(f.begin(), f.end(), [&](const Finding& a, const Finding& b) {
    if (a.cell.row != b.cell.row) return a.cell.row < b.cell.row;
    const auto pa = col_pos(a.cell.column), pb = col_pos(b.cell.column);
    if (pa != pb) return pa < pb;
    if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
    return a.reason < b.reason;
  });
  f.erase(std::unique(f.begin(), f.end(),
                      [](const Finding& a, const Finding& b) { return a.cell == b.cell && a.rule_id == b.rule_id; }),
          f.end());
}

Finding make_finding(const Dataset& d, std::size_t row, std::size_t col, const OfdRule& rule, Reason reason) {
  return Finding{CellRef{row, d.headers()[col]}, rule.id, reason};
}

bool same_column_cross(const Predicate& p, const Dataset& d, std::size_t* col) {
  const auto* l = std::get_if<ColumnRef>(&p.left);
  const auto* r = std::get_if<ColumnRef>(&p.right);
  if (!l || !r || l->alias == r->alias) return false;
  const std::size_t a = resolve(d, l->column);
  const std::size_t b = resolve(d, r->column);
  if (a != b) return false;
  *col = a;
  return true;
}

// Column + literal operands of an EQ predicate, in either order.
bool column_literal(const Predicate& p, const ColumnRef** c, const Literal** lit) {
  *c = std::get_if<ColumnRef>(&p.left);
  *lit = std::get_if<Literal>(&p.right);
  if (*c && *lit) return true;
  *c = std::get_if<ColumnRef>(&p.right);
  *lit = std::get_if<Literal>(&p.left);
  return *c && *lit;
}

struct FdShape {
  std::vector<std::size_t> determinants;
  std::size_t dependent = 0;
  std::vector<std::pair<std::size_t, std::string>> conditions;
};

FdShape fd_shape(const Dataset& d, const OfdRule& rule) {
  if (rule.aliases.size() != 2) throw RuleError("rule " + rule.id + " is not a two-tuple rule");
  FdShape s;
  bool have_dep = false;
  for (const auto& p : rule.predicates) {
    std::size_t col = 0;
    const ColumnRef* c = nullptr;
    const Literal* lit = nullptr;
    if (p.op == PredicateOp::EQ && same_column_cross(p, d, &col)) {
      if (std::find(s.determinants.begin(), s.determinants.end(), col) == s.determinants.end()) {
        s.determinants.push_back(col);
      }
    } else if (p.op == PredicateOp::IQ && same_column_cross(p, d, &col)) {
      if (have_dep) throw RuleError("rule " + rule.id + " has more than one IQ predicate");
      have_dep = true;
      s.dependent = col;
    } else if (p.op == PredicateOp::EQ && column_literal(p, &c, &lit)) {
      s.conditions.emplace_back(resolve(d, c->column), lit->value);
    } else {
      throw RuleError("rule " + rule.id + " is not of the form EQ(t1.X,t2.X)&IQ(t1.Y,t2.Y)");
    }
  }
  if (s.determinants.empty() || !have_dep) {
    throw RuleError("rule " + rule.id + " needs at least one EQ determinant and one IQ dependent");
  }
  if (std::find(s.determinants.begin(), s.determinants.end(), s.dependent) != s.determinants.end()) {
    throw RuleError("rule " + rule.id + " uses the same column as determinant and dependent");
  }
  for (const auto& [col, value] : s.conditions) {
    if (std::find(s.determinants.begin(), s.determinants.end(), col) == s.determinants.end()) {
      throw RuleError("rule " + rule.id + " constrains a non-determinant column with a literal");
    }
  }
  return s;
}

bool eval_unary(const Predicate& p, const Row& row, const Dataset& d, double default_sim) {
  auto cell = [&](const Operand& o) -> const CellValue* {
    if (const auto* c = std::get_if<ColumnRef>(&o)) return &row[resolve(d, c->column)];
    return nullptr;
  };
  const CellValue* a = cell(p.left);
  const CellValue* b = cell(p.right);
  const std::string* la = a ? nullptr : &std::get<Literal>(p.left).value;
  const std::string* lb = b ? nullptr : &std::get<Literal>(p.right).value;
  switch (p.op) {
    case PredicateOp::EQ:
      if (a && b) return cells_equal(*a, *b);
      if (a) return cell_equals_literal(*a, *lb);
      if (b) return cell_equals_literal(*b, *la);
      return *la == *lb;
    case PredicateOp::IQ:
      if (a && b) return cells_differ(*a, *b);
      if (a) return !is_missing(*a) && render_cell(*a) != *lb;
      if (b) return !is_missing(*b) && render_cell(*b) != *la;
      return *la != *lb;
    case PredicateOp::SIM: {
      if ((a && is_missing(*a)) || (b && is_missing(*b))) return false;
      const std::string sa = a ? render_cell(*a) : *la;
      const std::string sb = b ? render_cell(*b) : *lb;
      return levenshtein_ratio(sa, sb) >= p.sim_threshold.value_or(default_sim);
    }
  }
  return false;
}

std::string first_code_points(std::string_view s, std::size_t n) {
  std::size_t i = 0;
  for (std::size_t k = 0; k < n && i < s.size(); ++k) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    i = std::min(s.size(), i + len);
  }
  return std::string(s.substr(0, i));
}

std::size_t edit_distance_u32(const std::u32string& a, const std::u32string& b, std::vector<std::size_t>& row) {
  if (a.size() < b.size()) return edit_distance_u32(b, a, row);
  row.resize(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double ratio_u32(const std::u32string& a, const std::u32string& b, std::vector<std::size_t>& scratch) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance_u32(a, b, scratch)) / static_cast<double>(longest);
}

}  // namespace

std::string_view reason_name(Reason r) { return kReasonNames[static_cast<int>(r)]; }

std::optional<Reason> reason_from_name(std::string_view name) {
  for (int i = 0; i < 7; ++i) {
    if (kReasonNames[i] == name) return static_cast<Reason>(i);
  }
  return std::nullopt;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> scratch;
  return edit_distance_u32(decode_utf8(a), decode_utf8(b), scratch);
}

double levenshtein_ratio(std::string_view a, std::string_view b) {
  std::vector<std::size_t> scratch;
  return ratio_u32(decode_utf8(a), decode_utf8(b), scratch);
}

bool cell_equals_literal(const CellValue& v, std::string_view literal) {
  if (is_missing(v)) return default_placeholders().matches(literal);
  return render_cell(v) == literal;
}

bool cells_equal(const CellValue& a, const CellValue& b) {
  return !is_missing(a) && !is_missing(b) && render_cell(a) == render_cell(b);
}

bool cells_differ(const CellValue& a, const CellValue& b) {
  return !is_missing(a) && !is_missing(b) && render_cell(a) != render_cell(b);
}

std::vector<Finding> detect_missing(const Dataset& d, const OfdRule& rule) {
  const ColumnRef* c = nullptr;
  const Literal* lit = nullptr;
  if (rule.aliases.size() != 1 || rule.predicates.size() != 1 || rule.predicates[0].op != PredicateOp::EQ ||
      !column_literal(rule.predicates[0], &c, &lit) || !default_placeholders().matches(lit->value)) {
    throw RuleError("rule " + rule.id + " is not a missing-value rule EQ(t1.col,\"\")");
  }
  const std::size_t col = resolve(d, c->column);
  std::vector<Finding> out;
  for (std::size_t r = 0; r < d.row_count(); ++r) {
    if (is_missing(d.at(r, col))) out.push_back(make_finding(d, r, col, rule, Reason::Missing));
  }
  return out;
}

std::vector<Finding> detect_unary_denial(const Dataset& d, const OfdRule& rule) {
  if (rule.aliases.size() != 1) throw RuleError("rule " + rule.id + " is not a single-tuple rule");
  const ColumnRef* flagged = nullptr;
  for (const auto& p : rule.predicates) {
    for (const Operand* o : {&p.left, &p.right}) {
      if (const auto* c = std::get_if<ColumnRef>(o)) flagged = c;
    }
  }
  if (!flagged) throw RuleError("rule " + rule.id + " references no column");
  const std::size_t col = resolve(d, flagged->column);
  for (const auto& p : rule.predicates) {
    for (const Operand* o : {&p.left, &p.right}) {
      if (const auto* c = std::get_if<ColumnRef>(o)) resolve(d, c->column);
    }
  }
  const bool missing_shape = [&] {
    const ColumnRef* c = nullptr;
    const Literal* lit = nullptr;
    return rule.predicates.size() == 1 && rule.predicates[0].op == PredicateOp::EQ &&
           column_literal(rule.predicates[0], &c, &lit) && default_placeholders().matches(lit->value);
  }();
  if (missing_shape) return detect_missing(d, rule);

  std::vector<Finding> out;
  for (std::size_t r = 0; r < d.row_count(); ++r) {
    bool all = true;
    for (const auto& p : rule.predicates) {
      if (!eval_unary(p, d.rows()[r], d, kDefaultSimThreshold)) {
        all = false;
        break;
      }
    }
    if (all) out.push_back(make_finding(d, r, col, rule, Reason::Denial));
  }
  return out;
}

std::vector<Finding> detect_fd_violations(const Dataset& d, const OfdRule& rule) {
  const FdShape shape = fd_shape(d, rule);
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> order;
  for (std::size_t r = 0; r < d.row_count(); ++r) {
    bool skip = false;
    for (const auto& [col, value] : shape.conditions) {
      if (!cell_equals_literal(d.at(r, col), value)) skip = true;
    }
    if (skip || is_missing(d.at(r, shape.dependent))) continue;
    std::string key;
    for (std::size_t col : shape.determinants) {
      const CellValue& v = d.at(r, col);
      if (is_missing(v)) {
        skip = true;
        break;
      }
      key += render_cell(v);
      key += '\x1f';
    }
    if (skip) continue;
    auto [it, inserted] = groups.try_emplace(std::move(key));
    if (inserted) order.push_back(it->first);
    it->second.push_back(r);
  }

  std::vector<Finding> out;
  for (const auto& key : order) {
    const auto& rows = groups[key];
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> values;
    values.reserve(rows.size());
    for (std::size_t r : rows) {
      values.push_back(render_cell(d.at(r, shape.dependent)));
      ++counts[values.back()];
    }
    if (counts.size() < 2) continue;
    // std::map iterates in lexicographic order, so the first maximum wins ties.
    auto mode = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > mode->second) mode = it;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (values[i] != mode->first) out.push_back(make_finding(d, rows[i], shape.dependent, rule, Reason::FdViolation));
    }
  }
  sort_findings(d, out);
  return out;
}

std::vector<Finding> detect_matching_violations(const Dataset& d, const OfdRule& rule, const SimilaritySpec& sim) {
  if (sim.metric != "levenshtein_ratio") throw RuleError("unknown similarity metric " + sim.metric);
  if (rule.aliases.size() != 2 || rule.predicates.size() < 2) {
    throw RuleError("rule " + rule.id + " is not a two-tuple similarity rule");
  }
  std::vector<std::size_t> cols;
  std::vector<double> thresholds;
  for (const auto& p : rule.predicates) {
    std::size_t col = 0;
    if (p.op != PredicateOp::SIM || !same_column_cross(p, d, &col)) {
      throw RuleError("rule " + rule.id + " must consist of SIM(t1.X,t2.X) predicates");
    }
    cols.push_back(col);
    thresholds.push_back(p.sim_threshold.value_or(sim.threshold));
  }
  const std::size_t n_det = cols.size() - 1;
  const std::size_t dep = cols.back();

  // Distinct value combinations; pairs inside one combination never violate.
  struct Combo {
    std::vector<std::u32string> values;
    std::vector<std::size_t> rows;
    bool violated = false;
  };
  std::vector<Combo> combos;
  std::unordered_map<std::string, std::size_t> combo_index;
  std::map<std::string, std::vector<std::size_t>> blocks;
  for (std::size_t r = 0; r < d.row_count(); ++r) {
    std::vector<std::string> text;
    bool skip = false;
    for (std::size_t c : cols) {
      if (is_missing(d.at(r, c))) {
        skip = true;
        break;
      }
      text.push_back(render_cell(d.at(r, c)));
    }
    if (skip) continue;
    std::string key;
    for (const auto& t : text) {
      key += t;
      key += '\x1f';
    }
    auto [it, inserted] = combo_index.try_emplace(key, combos.size());
    if (inserted) {
      Combo combo;
      for (const auto& t : text) combo.values.push_back(decode_utf8(t));
      combos.push_back(std::move(combo));
      blocks[sim.exact ? std::string() : first_code_points(text[0], 4)].push_back(it->second);
    }
    combos[it->second].rows.push_back(r);
  }

  std::vector<std::size_t> scratch;
  for (const auto& [block_key, members] : blocks) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        Combo& a = combos[members[i]];
        Combo& b = combos[members[j]];
        if (a.violated && b.violated) continue;
        bool similar = true;
        for (std::size_t k = 0; k < n_det && similar; ++k) {
          similar = ratio_u32(a.values[k], b.values[k], scratch) >= thresholds[k];
        }
        if (!similar) continue;
        if (ratio_u32(a.values[n_det], b.values[n_det], scratch) < thresholds[n_det]) {
          a.violated = b.violated = true;
        }
      }
    }
  }

  std::vector<Finding> out;
  for (const auto& combo : combos) {
    if (!combo.violated) continue;
    for (std::size_t r : combo.rows) out.push_back(make_finding(d, r, dep, rule, Reason::MatchingViolation));
  }
  sort_findings(d, out);
  return out;
}

const SensorSpec* find_spec(const std::map<std::string, SensorSpec>& specs, std::string_view sensor) {
  auto it = specs.find(std::string(sensor));
  if (it == specs.end()) it = specs.find(sensor_model_name(sensor));
  return it == specs.end() ? nullptr : &it->second;
}

namespace {

void check_range(const Dataset& d, std::size_t sensor_col, std::size_t value_col, std::string_view sensor,
                 double lo, double hi, const std::string& rule_id, std::vector<Finding>& out) {
  for (std::size_t r = 0; r < d.row_count(); ++r) {
    const CellValue& s = d.at(r, sensor_col);
    if (is_missing(s) || render_cell(s) != sensor) continue;
    const CellValue& v = d.at(r, value_col);
    if (is_missing(v)) continue;
    if (!is_number(v)) {
      out.push_back({CellRef{r, d.headers()[value_col]}, rule_id, Reason::TypeMismatch});
    } else {
      const double x = std::get<double>(v);
      if (x < lo || x > hi) out.push_back({CellRef{r, d.headers()[value_col]}, rule_id, Reason::CapabilityViolation});
    }
  }
}

}  // namespace

std::vector<Finding> detect_capability_violations(const Dataset& d, const std::map<std::string, SensorSpec>& specs,
                                                  std::vector<std::string>* uncovered, std::string_view rule_id) {
  const std::size_t sensor_col = resolve(d, std::string(columns::kSensor));
  const std::size_t value_col = resolve(d, std::string(columns::kValue));
  std::vector<std::string> sensors;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < d.row_count(); ++r) {
    const CellValue& s = d.at(r, sensor_col);
    if (is_missing(s)) continue;
    std::string id = render_cell(s);
    if (seen.insert(id).second) sensors.push_back(std::move(id));
  }
  std::vector<Finding> out;
  for (const auto& sensor : sensors) {
    const SensorSpec* spec = find_spec(specs, sensor);
    if (!spec) {
      if (uncovered) uncovered->push_back(sensor);
      continue;
    }
    check_range(d, sensor_col, value_col, sensor, spec->min_value, spec->max_value, std::string(rule_id), out);
  }
  sort_findings(d, out);
  return out;
}

std::vector<Finding> detect_capability_rule(const Dataset& d, const OfdRule& rule,
                                            const std::map<std::string, SensorSpec>& specs, bool* covered) {
  auto binding = capability_binding(rule);
  if (!binding) throw RuleError("rule " + rule.id + " is not a capability rule EQ(t1.sensor,\"id\")&...");
  const std::size_t sensor_col = resolve(d, binding->sensor_column);
  const std::size_t value_col = resolve(d, std::string(columns::kValue));
  std::optional<double> lo = binding->min_value, hi = binding->max_value;
  if (!lo || !hi) {
    if (const SensorSpec* spec = find_spec(specs, binding->sensor)) {
      if (!lo) lo = spec->min_value;
      if (!hi) hi = spec->max_value;
    }
  }
  if (covered) *covered = lo && hi;
  std::vector<Finding> out;
  if (!lo || !hi) return out;
  check_range(d, sensor_col, value_col, binding->sensor, *lo, *hi, rule.id, out);
  sort_findings(d, out);
  return out;
}

std::vector<Finding> detect_temporal_violations(const Dataset& d, const OfdRule& rule) {
  if (rule.aliases.size() != 2) throw RuleError("rule " + rule.id + " is not a two-tuple rule");
  std::optional<std::string> from, to;
  std::optional<std::size_t> device_col, corr_col;
  for (const auto& p : rule.predicates) {
    const ColumnRef* c = nullptr;
    const Literal* lit = nullptr;
    std::size_t col = 0;
    if (p.op == PredicateOp::EQ && column_literal(p, &c, &lit)) {
      const std::size_t idx = resolve(d, c->column);
      if (device_col && *device_col != idx) throw RuleError("rule " + rule.id + " names two device columns");
      device_col = idx;
      auto& slot = c->alias == rule.aliases[0] ? from : to;
      if (slot) throw RuleError("rule " + rule.id + " names two devices for one tuple");
      slot = lit->value;
    } else if (p.op == PredicateOp::EQ && same_column_cross(p, d, &col)) {
      if (corr_col) throw RuleError("rule " + rule.id + " names two correlation columns");
      corr_col = col;
    } else {
      throw RuleError("rule " + rule.id + " is not of the form EQ(t1.device,\"a\")&EQ(t2.device,\"b\")");
    }
  }
  if (!from || !to) throw RuleError("rule " + rule.id + " must name an upstream and a downstream device");
  auto ts_idx = d.find_column(columns::kTimestamp);
  if (!ts_idx) throw RuleError("rule " + rule.id + ": dataset has no timestamp column");
  const std::size_t ts_col = *ts_idx;

  std::vector<std::size_t> up, down;
  for (std::size_t r = 0; r < d.row_count(); ++r) {
    const CellValue& dev = d.at(r, *device_col);
    if (is_missing(dev)) continue;
    const std::string name = render_cell(dev);
    if (name == *from) up.push_back(r);
    if (name == *to) down.push_back(r);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (corr_col) {
    std::unordered_map<std::string, std::vector<std::size_t>> by_id;
    for (std::size_t r : down) {
      const CellValue& v = d.at(r, *corr_col);
      if (!is_missing(v)) by_id[render_cell(v)].push_back(r);
    }
    for (std::size_t r : up) {
      const CellValue& v = d.at(r, *corr_col);
      if (is_missing(v)) continue;
      auto it = by_id.find(render_cell(v));
      if (it == by_id.end()) continue;
      for (std::size_t s : it->second) pairs.emplace_back(r, s);
    }
  } else {
    for (std::size_t k = 0; k < std::min(up.size(), down.size()); ++k) pairs.emplace_back(up[k], down[k]);
  }

  std::vector<Finding> out;
  for (const auto& [a, b] : pairs) {
    if (a == b) continue;
    const CellValue& ta = d.at(a, ts_col);
    const CellValue& tb = d.at(b, ts_col);
    if (!(is_number(ta) || is_timestamp(ta)) || !(is_number(tb) || is_timestamp(tb))) continue;
    if (*numeric_value(ta) >= *numeric_value(tb)) out.push_back(make_finding(d, b, ts_col, rule, Reason::TemporalViolation));
  }
  sort_findings(d, out);
  return out;
}

std::size_t DetectionReport::distinct_cells() const {
  std::set<CellRef> cells;
  for (const auto& f : findings) cells.insert(f.cell);
  return cells.size();
}

std::map<std::string, std::size_t> DetectionReport::per_rule_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& f : findings) ++out[f.rule_id];
  return out;
}

DetectionReport run_all(const Dataset& d, const std::vector<OfdRule>& rules, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  DetectionReport report;
  struct Outcome {
    std::vector<Finding> findings;
    std::optional<std::string> skipped;
    std::optional<std::string> uncovered;
  };
  std::vector<Outcome> outcomes(rules.size());
  parallel_for(rules.size(), options.parallel, [&](std::size_t i) {
    const OfdRule& rule = rules[i];
    Outcome& out = outcomes[i];
    try {
      switch (rule.kind) {
        case DependencyKind::Denial:
          out.findings = rule.aliases.size() == 1 ? detect_unary_denial(d, rule) : detect_fd_violations(d, rule);
          break;
        case DependencyKind::DeviceLink:
        case DependencyKind::Locality:
          out.findings = detect_fd_violations(d, rule);
          break;
        case DependencyKind::Matching:
          out.findings = detect_matching_violations(d, rule, options.sim);
          break;
        case DependencyKind::Temporal:
          out.findings = detect_temporal_violations(d, rule);
          break;
        case DependencyKind::Capability: {
          bool covered = true;
          out.findings = detect_capability_rule(d, rule, options.specs, &covered);
          if (!covered) out.uncovered = capability_binding(rule)->sensor;
          break;
        }
        case DependencyKind::Monitoring:
          out.skipped = "monitoring dependencies are modeled but not enforced";
          break;
      }
    } catch (const Error& e) {
      out.findings.clear();
      out.skipped = e.what();
    }
  });

  std::set<std::string> uncovered;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    auto& o = outcomes[i];
    report.findings.insert(report.findings.end(), o.findings.begin(), o.findings.end());
    if (o.skipped) report.skipped_rules.push_back({rules[i].id, *o.skipped});
    if (o.uncovered) uncovered.insert(*o.uncovered);
  }
  report.uncovered_sensors.assign(uncovered.begin(), uncovered.end());
  sort_findings(d, report.findings);
  report.duration = std::chrono::steady_clock::now() - start;
  return report;
}

std::string report_to_json(const DetectionReport& report) {
  json findings = json::array();
  for (const auto& f : report.findings) {
    findings.push_back(
        {{"row", f.cell.row}, {"column", f.cell.column}, {"rule", f.rule_id}, {"reason", reason_name(f.reason)}});
  }
  json skipped = json::array();
  for (const auto& s : report.skipped_rules) skipped.push_back({{"rule", s.rule_id}, {"reason", s.reason}});
  json j = {{"findings", findings},
            {"skipped_rules", skipped},
            {"uncovered_sensors", report.uncovered_sensors},
            {"duration_ms", std::chrono::duration<double, std::milli>(report.duration).count()}};
  return j.dump(2) + "\n";
}

DetectionReport report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
  if (!j.is_object() || !j.contains("findings") || !j["findings"].is_array()) {
    throw InputError("malformed report: missing findings array");
  }
  DetectionReport r;
  try {
    for (const auto& f : j["findings"]) {
      auto reason = reason_from_name(f.at("reason").get<std::string>());
      if (!reason) throw InputError("malformed report: unknown reason " + f.at("reason").get<std::string>());
      r.findings.push_back({CellRef{f.at("row").get<std::size_t>(), f.at("column").get<std::string>()},
                            f.at("rule").get<std::string>(), *reason});
    }
    if (j.contains("skipped_rules")) {
      for (const auto& s : j["skipped_rules"]) {
        r.skipped_rules.push_back({s.at("rule").get<std::string>(), s.value("reason", "")});
      }
    }
    if (j.contains("uncovered_sensors")) r.uncovered_sensors = j["uncovered_sensors"].get<std::vector<std::string>>();
    if (j.contains("duration_ms")) {
      r.duration = std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::duration<double, std::milli>(j["duration_ms"].get<double>()));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
  return r;
}

}  // namespace llmclean
