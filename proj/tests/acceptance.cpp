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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "llmclean/cli.hpp"
#include "llmclean/context_gen.hpp"
#include "llmclean/context_graph.hpp"
#include "llmclean/detection.hpp"
#include "llmclean/ensemble.hpp"
#include "llmclean/error.hpp"
#include "llmclean/eval.hpp"
#include "llmclean/rule.hpp"
#include "llmclean/util.hpp"
#include "oracles.hpp"
#include "random_rules.hpp"
#include "random_tables.hpp"

namespace fs = std::filesystem;
using namespace llmclean;

namespace {

const std::string kData = LLMCLEAN_TEST_DATA;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks still run.
struct Check {
  Outcome out;
  void require(bool ok, const std::string& what) {
    if (!ok && out.pass) {
      out.pass = false;
      out.detail = what;
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// 1. run_all against the brute-force definitions.
Outcome detection_oracle() {
  Check c;
  std::mt19937_64 rng(20240611);
  std::size_t findings = 0;
  const int cases = 60;
  for (int i = 0; i < cases && c.out.pass; ++i) {
    const auto rc = fixtures::make_random_case(rng);
    RunOptions opts;
    opts.sim.exact = !rc.blocking;
    const auto report = run_all(rc.data, parse_rule_file(rc.rule_file).rules, opts);
    c.require(report.skipped_rules.empty(), "case " + std::to_string(i) + ": a rule was skipped");
    c.require(oracle::to_flags(report.findings) == rc.expected && report.findings.size() == rc.expected.size(),
              "case " + std::to_string(i) + ": findings differ from the oracle");
    c.require(rc.data.column_count() <= 6 && rc.data.row_count() <= 200, "fixture exceeds 200x6");
    findings += report.findings.size();
  }
  if (c.out.pass) c.out.detail = std::to_string(cases) + " tables, " + std::to_string(findings) + " findings";
  return c.out;
}

LabelSet random_labels(std::mt19937_64& rng, std::size_t universe) {
  LabelSet s;
  for (std::size_t i = 0; i < universe; ++i) {
    if (rng() % 2) s.insert(std::string(1, static_cast<char>('A' + i)));
  }
  return s;
}

// 2. find_consensus against a counting oracle, plus monotonicity and
// permutation invariance.
Outcome consensus() {
  Check c;
  std::mt19937_64 rng(7);
  const int fixtures = 2000;
  for (int i = 0; i < fixtures && c.out.pass; ++i) {
    std::vector<LabelSet> in(rng() % 6);
    const std::size_t universe = 1 + rng() % 6;
    for (auto& s : in) s = random_labels(rng, universe);
    std::vector<LabelSet> shuffled = in;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::size_t t = 0; t <= 6; ++t) {
      const LabelSet got = find_consensus(in, t);
      c.require(got == oracle::consensus(in, t), "fixture " + std::to_string(i) + ": differs from counting oracle");
      c.require(got == find_consensus(shuffled, t), "fixture " + std::to_string(i) + ": order changed the result");
      const LabelSet higher = find_consensus(in, t + 1);
      c.require(std::includes(got.begin(), got.end(), higher.begin(), higher.end()),
                "fixture " + std::to_string(i) + ": not monotone in the threshold");
    }
  }
  if (c.out.pass) c.out.detail = std::to_string(fixtures) + " fixtures x 7 thresholds";
  return c.out;
}

std::vector<EvalRecord> random_records(std::mt19937_64& rng, std::size_t n, const std::vector<std::string>& prompts) {
  std::vector<EvalRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    EvalRecord r;
    r.instance_id = "i" + std::to_string(i);
    r.truth = random_labels(rng, 4);
    for (const auto& p : prompts) r.answers[p] = random_labels(rng, 4);
    out.push_back(std::move(r));
  }
  return out;
}

// 3. find_best_ensemble against exhaustive enumeration.
Outcome ensemble_exactness() {
  Check c;
  std::mt19937_64 rng(99);
  int fixtures = 0;
  for (std::size_t n_prompts = 1; n_prompts <= 4; ++n_prompts) {
    std::vector<std::string> prompts;
    for (std::size_t i = 0; i < n_prompts; ++i) prompts.push_back("p" + std::to_string(i));
    for (std::size_t tr = 0; tr <= 4; ++tr) {
      for (int rep = 0; rep < 40 && c.out.pass; ++rep, ++fixtures) {
        const auto train = random_records(rng, 1 + rng() % 10, prompts);
        const auto val = random_records(rng, 1 + rng() % 10, prompts);
        const auto got = find_best_ensemble(train, val, prompts, {tr});
        const auto want = oracle::best_ensemble(train, val, prompts, tr);
        const std::string where = std::to_string(n_prompts) + " prompts, tr " + std::to_string(tr);
        c.require(got.size() == want.size(), where + ": config count differs");
        for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
          c.require(got[i].threshold == want[i].threshold && got[i].prompts == want[i].prompts,
                    where + ": config differs");
          c.require(std::abs(got[i].train_f1 - want[i].train_f1) <= 1e-12, where + ": train F1 differs");
          c.require(std::abs(got[i].val_f1 - want[i].val_f1) <= 1e-12, where + ": validation F1 differs");
        }
      }
    }
  }
  if (c.out.pass) c.out.detail = std::to_string(fixtures) + " fixtures";
  return c.out;
}

// 4. One prompt answers the truth 95% of the time, three answer noise.
Outcome signal_prompt() {
  Check c;
  std::mt19937_64 rng(4);
  const std::vector<std::string> prompts = {"noise_a", "noise_b", "noise_c", "signal"};
  double worst_val = 1.0;
  const int fixtures = 20;
  for (int f = 0; f < fixtures && c.out.pass; ++f) {
    auto make = [&](std::size_t n) {
      std::vector<EvalRecord> out;
      for (std::size_t i = 0; i < n; ++i) {
        EvalRecord r;
        r.instance_id = "i" + std::to_string(i);
        r.truth = random_labels(rng, 6);
        r.answers["signal"] = rng() % 100 < 95 ? r.truth : random_labels(rng, 6);
        for (const char* p : {"noise_a", "noise_b", "noise_c"}) r.answers[p] = random_labels(rng, 6);
        out.push_back(std::move(r));
      }
      return out;
    };
    const auto train = make(200);
    const auto val = make(200);
    const auto configs = find_best_ensemble(train, val, prompts, {4}, 4);
    const std::string where = "fixture " + std::to_string(f);
    c.require(!configs.empty(), where + ": no configs");
    double best_single = 0.0;
    for (const auto& p : prompts) best_single = std::max(best_single, ensemble_f1(train, {p}, 1));
    for (const auto& cfg : configs) {
      worst_val = std::min(worst_val, cfg.val_f1);
      c.require(cfg.val_f1 >= 0.9, where + ": validation F1 " + fmt(cfg.val_f1));
      c.require(std::find(cfg.prompts.begin(), cfg.prompts.end(), "signal") != cfg.prompts.end(),
                where + ": signal prompt missing from a config");
      c.require(cfg.train_f1 >= best_single, where + ": ensemble below the best single prompt");
    }
  }
  if (c.out.pass) c.out.detail = std::to_string(fixtures) + " fixtures, lowest validation F1 " + fmt(worst_val);
  return c.out;
}

// Binary rule whose column-column EQ predicates are `eq` and whose single IQ
// predicate is on `iq`; literal conditions are allowed.
bool binary_shape(const OfdRule& r, const std::vector<std::string>& eq, const std::string& iq) {
  if (r.aliases.size() != 2) return false;
  std::vector<std::string> eq_cols, iq_cols;
  for (const auto& p : r.predicates) {
    const auto* l = std::get_if<ColumnRef>(&p.left);
    const auto* rt = std::get_if<ColumnRef>(&p.right);
    if (!l || !rt) continue;
    if (l->column != rt->column || l->alias == rt->alias) return false;
    (p.op == PredicateOp::IQ ? iq_cols : eq_cols).push_back(l->column);
  }
  return eq_cols == eq && iq_cols == std::vector<std::string>{iq};
}

bool capability_shape(const OfdRule& r) {
  if (r.aliases.size() != 1) return false;
  std::set<std::string> cols;
  for (const auto& p : r.predicates) {
    if (const auto* l = std::get_if<ColumnRef>(&p.left)) cols.insert(l->column);
  }
  return cols == std::set<std::string>{"sensor", "MinValue", "MaxValue"};
}

int cli(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

// 5. build-context from the cassette, inject errors, detect, score.
Outcome iot_end_to_end() {
  Check c;
  const fs::path dir = fs::temp_directory_path() / "llmclean_acceptance_iot";
  fs::remove_all(dir);
  std::string err;
  const int built = cli({"build-context", kData + "/iot_sensors.csv", "--backend", "replay", "--cassette",
                         kData + "/cassette.json", "--sensors", kData + "/sensors.json", "--out-dir",
                         (dir / "ctx").string()},
                        &err);
  c.require(built == kExitOk, "build-context failed: " + err);
  if (!c.out.pass) return c.out;

  const auto rules = extract_ofds(deserialize(slurp(dir / "ctx" / "context.nt")));
  std::size_t device_link = 0, locality = 0, capability = 0, denial = 0;
  for (const auto& r : rules) {
    switch (r.kind) {
      case DependencyKind::DeviceLink:
        device_link += binary_shape(r, {"sensor"}, "device");
        break;
      case DependencyKind::Locality:
        locality += binary_shape(r, {"sensingdevice"}, "location");
        break;
      case DependencyKind::Capability:
        capability += capability_shape(r);
        break;
      case DependencyKind::Denial:
        denial += binary_shape(r, {"device"}, "system") || binary_shape(r, {"sensingdevice"}, "device");
        break;
      default:
        break;
    }
  }
  c.require(device_link > 0 && locality > 0 && capability > 0 && denial > 0,
            "rule kinds missing: device_link " + std::to_string(device_link) + ", locality " +
                std::to_string(locality) + ", capability " + std::to_string(capability) + ", denial " +
                std::to_string(denial));

  // 13% missing over the fixture's columns except sensor, which keys the
  // capability bounds; 5% value outliers.
  const Dataset clean = load_csv_file((dir / "ctx" / "transformed.csv").string());
  ErrorSpec spec;
  spec.missing_rate = 0.13;
  spec.missing_columns = {"system", "device", "sensingdevice", "Name", "value", "timestamp", "location"};
  spec.outlier_rate = 0.05;
  spec.outlier_columns = {"value"};
  spec.seed = 13;
  const Injection inj = inject_errors(clean, spec);
  std::ofstream(dir / "dirty.csv", std::ios::binary) << to_csv_string(inj.dirty);

  // Every outlier must break its sensor's bounds for the run to be meaningful.
  const auto specs = parse_sensor_specs(slurp(kData + "/sensors.json"));
  for (const auto& e : inj.truth.entries) {
    if (e.kind != CorruptionKind::Outlier) continue;
    const std::string sensor = render_cell(inj.dirty.at(e.cell.row, inj.dirty.column_index("sensor")));
    const SensorSpec* s = find_spec(specs, sensor);
    const double v = std::get<double>(inj.dirty.at(e.cell.row, inj.dirty.column_index("value")));
    c.require(s && (v < s->min_value || v > s->max_value), "outlier inside bounds at row " + std::to_string(e.cell.row));
  }

  const int detected = cli({"detect", (dir / "dirty.csv").string(), "--rules", (dir / "ctx" / "rules.ofd").string(),
                            "--out", (dir / "report.json").string()},
                           &err);
  c.require(detected == kExitOk, "detect failed: " + err);
  if (!c.out.pass) return c.out;
  const DetectionReport report = report_from_json(slurp(dir / "report.json"));
  const Scores s = score_detection(report, inj.truth, inj.dirty);
  c.require(s.precision == 1.0 && s.recall == 1.0 && s.f1 == 1.0,
            "P " + fmt(s.precision) + " R " + fmt(s.recall) + " F1 " + fmt(s.f1));
  if (c.out.pass) {
    c.out.detail = std::to_string(rules.size()) + " rules, " + std::to_string(inj.truth.entries.size()) +
                   " injected cells, P=R=F1=1";
  }
  fs::remove_all(dir);
  return c.out;
}

// 6. parse/render identity, the two documented rules, fuzzing.
Outcome rule_language() {
  Check c;
  Rng rng(6);
  const int generated = 10000;
  for (int i = 0; i < generated && c.out.pass; ++i) {
    const OfdRule r = fixtures::random_rule(rng);
    const std::string text = render_rule(r);
    try {
      const OfdRule back = parse_rule(text, r.kind);
      c.require(back == r && render_rule(back) == text, "round trip changed " + text);
    } catch (const Error& e) {
      c.require(false, "valid rule rejected: " + text + ": " + e.what());
    }
  }

  const OfdRule missing = parse_rule("t1&EQ(t1.System,\"\")", DependencyKind::Denial);
  c.require(missing.aliases == std::vector<std::string>{"t1"} && missing.predicates.size() == 1 &&
                missing.predicates[0] ==
                    Predicate{PredicateOp::EQ, ColumnRef{"t1", "System"}, Literal{""}, std::nullopt},
            "missing-value rule structure");
  const OfdRule fd =
      parse_rule("t1&t2&EQ(t1.SensingDevice,t2.SensingDevice)&IQ(t1.Device,t2.Device)", DependencyKind::Denial);
  c.require(fd.aliases == (std::vector<std::string>{"t1", "t2"}) && fd.predicates.size() == 2 &&
                fd.predicates[0] == Predicate{PredicateOp::EQ, ColumnRef{"t1", "SensingDevice"},
                                              ColumnRef{"t2", "SensingDevice"}, std::nullopt} &&
                fd.predicates[1] ==
                    Predicate{PredicateOp::IQ, ColumnRef{"t1", "Device"}, ColumnRef{"t2", "Device"}, std::nullopt},
            "FD rule structure");

  const std::string alphabet = "t12&EQIQSIM075(),.\"\\ abcXYZ\n\xc3\xa4";
  int accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    if (i % 2 == 0) {
      const std::size_t len = rng.below(48);
      for (std::size_t k = 0; k < len; ++k) s.push_back(alphabet[rng.below(alphabet.size())]);
    } else {
      // A few edits to a valid rule.
      s = render_rule(fixtures::random_rule(rng));
      for (std::size_t k = rng.below(3); k > 0 && !s.empty(); --k) {
        const std::size_t at = rng.below(s.size());
        switch (rng.below(3)) {
          case 0: s.erase(at, 1); break;
          case 1: s.insert(at, 1, alphabet[rng.below(alphabet.size())]); break;
          default: s[at] = alphabet[rng.below(alphabet.size())]; break;
        }
      }
    }
    try {
      const OfdRule r = parse_rule(s, DependencyKind::Denial);
      ++accepted;
      c.require(parse_rule(render_rule(r), DependencyKind::Denial) == r, "fuzz round trip: " + s);
    } catch (const ParseError&) {
    } catch (const std::exception& e) {
      c.require(false, std::string("unexpected exception: ") + e.what());
    }
  }
  if (c.out.pass) {
    c.out.detail = std::to_string(generated) + " round trips, 10000 fuzz inputs (" + std::to_string(accepted) +
                   " accepted)";
  }
  return c.out;
}

// 7. 100,000 x 20 table, five rules.
Outcome scale() {
  Check c;
  std::mt19937_64 rng(100);
  auto word = [&](std::size_t len) {
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng() % 12));
    return w;
  };
  std::vector<std::string> names;
  for (int i = 0; i < 3000; ++i) names.push_back(word(8));

  std::vector<std::string> headers = {"sensor", "value", "device", "system", "location", "name", "phone"};
  while (headers.size() < 20) headers.push_back("attr" + std::to_string(headers.size()));
  std::vector<Row> rows;
  rows.reserve(100000);
  for (std::size_t r = 0; r < 100000; ++r) {
    const std::size_t sensor = rng() % 500;
    Row row;
    row.emplace_back("s" + std::to_string(sensor));
    row.emplace_back(static_cast<double>(rng() % 400) / 10.0);
    row.emplace_back("d" + std::to_string(sensor / 5));
    row.emplace_back("sys" + std::to_string(sensor / 100));
    row.emplace_back("room" + std::to_string(sensor / 10));
    const std::size_t n = rng() % names.size();
    std::string name = names[n];
    if (rng() % 50 == 0) name[rng() % name.size()] = 'z';  // typo
    row.emplace_back(name);
    row.emplace_back("555-" + std::to_string(1000 + n));
    for (std::size_t c2 = row.size(); c2 < 20; ++c2) row.emplace_back(static_cast<double>(rng() % 1000));
    if (rng() % 100 == 0) row[2] = std::string("d_wrong");
    if (rng() % 100 == 0) row[4] = Missing{};
    rows.push_back(std::move(row));
  }
  const Dataset d(headers, std::move(rows));
  const auto rules = parse_rule_file(
                         "denial[missing]: t1&EQ(t1.location,\"\")\n"
                         "device_link[link]: t1&t2&EQ(t1.sensor,t2.sensor)&IQ(t1.device,t2.device)\n"
                         "denial[fd]: t1&t2&EQ(t1.device,t2.device)&IQ(t1.system,t2.system)\n"
                         "matching[match]: t1&t2&SIM75(t1.name,t2.name)&SIM75(t1.phone,t2.phone)\n"
                         "capability[cap]: t1&EQ(t1.sensor,\"s1\")&EQ(t1.MinValue,\"0\")&EQ(t1.MaxValue,\"30\")\n")
                         .rules;
  c.require(rules.size() == 5, "rule file did not parse");
  DetectionReport report;
  const auto m = measure_runtime([&] { report = run_all(d, rules); });
  const double secs = std::chrono::duration<double>(m.duration).count();
  c.require(report.skipped_rules.empty(), "a rule was skipped");
  c.require(secs < 120.0, "took " + fmt(secs) + " s");
  std::set<std::string> fired;
  for (const auto& f : report.findings) fired.insert(f.rule_id);
  c.require(fired.size() == 5, "only " + std::to_string(fired.size()) + " rules produced findings");
  if (c.out.pass) {
    c.out.detail = "detection " + fmt(secs) + " s, " + std::to_string(report.findings.size()) + " findings";
  }
  return c.out;
}

// 8. Scoring conventions and arithmetic.
Outcome metrics() {
  Check c;
  auto cells = [](std::size_t n, const std::string& col) {
    std::set<CellRef> s;
    for (std::size_t i = 0; i < n; ++i) s.insert({i, col});
    return s;
  };
  auto equal = [](const Scores& s, double p, double r, double f) {
    return s.precision == p && s.recall == r && s.f1 == f;
  };
  // flags == truth
  const Dataset shape({"x", "y"}, std::vector<Row>(100, Row{1.0, 2.0}));
  GroundTruth truth;
  DetectionReport report;
  for (std::size_t i = 0; i < 5; ++i) {
    truth.entries.push_back({{i, "x"}, 1.0, CorruptionKind::Outlier});
    report.findings.push_back({{i, "x"}, "r", Reason::CapabilityViolation});
  }
  c.require(equal(score_detection(report, truth, shape), 1, 1, 1), "flags == truth");
  // 50 flags, 40 correct, 80 truth cells
  std::set<CellRef> flagged = cells(40, "x");
  for (std::size_t i = 0; i < 10; ++i) flagged.insert({i, "y"});
  c.require(equal(score_cells(flagged, cells(80, "x")), 0.8, 0.5, 2 * 0.8 * 0.5 / 1.3), "50/40/80 arithmetic");
  c.require(equal(score_cells({}, cells(3, "x")), 0, 0, 0), "empty flags");
  c.require(score_cells({}, {}).f1 == 1.0, "empty/empty detection F1");
  c.require(score_micro_f1({}, {}).f1 == 1.0, "empty/empty label F1");
  c.require(score_micro_f1({"A"}, {}).f1 == 0.0, "{A} vs empty");

  // Repair examples.
  const Dataset clean({"num", "txt"}, {{1.0, std::string("a")}, {2.0, std::string("b")}, {3.0, std::string("c")},
                                      {4.0, std::string("d")}});
  ErrorSpec spec;
  spec.missing_rate = 0.5;
  spec.missing_columns = {"txt"};
  spec.outlier_rate = 1.0;
  spec.outlier_columns = {"num"};
  const Injection inj = inject_errors(clean, spec);
  const RepairScores perfect = score_repair(clean, inj.dirty, clean, inj.truth);
  c.require(perfect.rmse == 0.0 && equal(perfect.categorical, 1, 1, 1), "perfect repair");
  const RepairScores untouched = score_repair(inj.dirty, inj.dirty, clean, inj.truth);
  c.require(equal(untouched.categorical, 0, 0, 0), "no repair actions");
  std::vector<Row> rows = clean.rows();
  rows[2][0] = 5.0;
  const Dataset off_by_two(clean.headers(), rows);
  const RepairScores rmse = score_repair(off_by_two, inj.dirty, clean, inj.truth);
  c.require(rmse.rmse == 1.0 && rmse.numeric_cells == 4, "one of four cells off by 2 -> RMSE " + fmt(rmse.rmse));

  // A perfect report scores (1,1,1) on generated fixtures.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ErrorSpec s;
    s.missing_rate = 0.1;
    s.outlier_rate = 0.05;
    s.seed = seed;
    const Injection i = inject_errors(shape, s);
    DetectionReport r;
    for (const auto& e : i.truth.entries) r.findings.push_back({e.cell, "oracle", Reason::Missing});
    c.require(equal(score_detection(r, i.truth, i.dirty), 1, 1, 1), "perfect report, seed " + std::to_string(seed));
  }
  if (c.out.pass) c.out.detail = "all examples exact";
  return c.out;
}

struct Criterion {
  int number;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "detection matches brute-force oracle", 30, detection_oracle},
      {2, "consensus matches counting oracle", 5, consensus},
      {3, "ensemble search is exhaustive-optimal", 10, ensemble_exactness},
      {4, "signal prompt recovered", 0, signal_prompt},
      {5, "IoT pipeline end to end", 60, iot_end_to_end},
      {6, "rule language round trip and fuzzing", 0, rule_language},
      {7, "100000 x 20 table with five rules", 120, scale},
      {8, "metric conventions", 0, metrics},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && cr.budget_s > 0 && secs >= cr.budget_s) {
      o = {false, "took " + fmt(secs) + " s, budget " + fmt(cr.budget_s) + " s"};
    }
    failed += !o.pass;
    std::printf("criterion %d: %s  %s (%s; %.2f s)\n", cr.number, o.pass ? "PASS" : "FAIL", cr.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
