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

#include "llmclean/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "llmclean/context_gen.hpp"
#include "llmclean/context_graph.hpp"
#include "llmclean/dataset.hpp"
#include "llmclean/detection.hpp"
#include "llmclean/ensemble.hpp"
#include "llmclean/error.hpp"
#include "llmclean/eval.hpp"
#include "llmclean/llm.hpp"
#include "llmclean/rule.hpp"
#include "llmclean/util.hpp"

namespace llmclean {

namespace {

using ordered_json = nlohmann::ordered_json;

struct BackendFlags {
  std::string backend;
  std::string cassette;
  std::string model = RemoteConfig{}.model;
  std::string record;
  std::size_t parallel = 4;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& f) {
  cmd->add_option("--backend", f.backend, "LLM backend")->required()->check(CLI::IsMember({"remote", "replay"}));
  cmd->add_option("--cassette", f.cassette, "Replay cassette (required with --backend replay)");
  cmd->add_option("--model", f.model, "Remote model name");
  cmd->add_option("--record", f.record, "Write every exchange to this cassette");
  cmd->add_option("--parallel", f.parallel, "Concurrent requests")->check(CLI::PositiveNumber);
}

// Owns the backend and, when recording, the cassette it writes at the end.
struct BackendHandle {
  std::unique_ptr<Backend> base;
  Cassette recorded;
  std::unique_ptr<RecordingBackend> recorder;
  std::string record_path;

  Backend& get() { return recorder ? static_cast<Backend&>(*recorder) : *base; }
  void finish() {
    if (recorder) recorded.save(record_path);
  }
};

std::unique_ptr<BackendHandle> open_backend(const BackendFlags& f) {
  auto h = std::make_unique<BackendHandle>();
  if (f.backend == "replay") {
    if (f.cassette.empty()) throw ArgumentError("--backend replay needs --cassette");
    h->base = ReplayBackend::from_file(f.cassette);
  } else {
    RemoteConfig cfg;
    cfg.model = f.model;
    cfg.max_parallel = f.parallel;
    h->base = std::make_unique<RemoteBackend>(cfg, nullptr, [](std::string_view line) { std::cerr << line << "\n"; });
  }
  if (!f.record.empty()) {
    h->record_path = f.record;
    h->recorder = std::make_unique<RecordingBackend>(*h->base, h->recorded);
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::pair<std::string, std::string> split_pair(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ArgumentError(flag + " expects FROM:TO, got " + text);
  }
  return {text.substr(0, colon), text.substr(colon + 1)};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& part : split(text, ',')) {
    std::string t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

struct RuleSource {
  std::string rules_path;
  std::string graph_path;
  std::string sensors_path;
  bool exact = false;
  std::size_t parallel = 4;
};

void add_rule_flags(CLI::App* cmd, RuleSource& r) {
  auto* rules = cmd->add_option("--rules", r.rules_path, "Rule file");
  auto* graph = cmd->add_option("--graph", r.graph_path, "Context graph (.nt); rules are extracted from it");
  rules->excludes(graph);
  graph->excludes(rules);
  cmd->add_option("--sensors", r.sensors_path, "Sensor specification JSON");
  cmd->add_flag("--exact-matching", r.exact, "Compare every value pair for matching rules (no blocking)");
  cmd->add_option("--parallel", r.parallel, "Worker threads")->check(CLI::PositiveNumber);
}

struct LoadedRules {
  std::vector<OfdRule> rules;
  std::map<std::string, SensorSpec> specs;
};

LoadedRules load_rules(const RuleSource& r, const Dataset& d, std::ostream& err) {
  LoadedRules out;
  if (!r.rules_path.empty()) {
    RuleFile file = parse_rule_file(read_file(r.rules_path), false);
    for (const auto& e : file.errors) err << r.rules_path << ":" << e.line << ": " << e.message << "\n";
    out.rules = std::move(file.rules);
  } else if (!r.graph_path.empty()) {
    out.rules = extract_ofds(deserialize(read_file(r.graph_path)));
  } else {
    throw ArgumentError("one of --rules or --graph is required");
  }
  if (!r.sensors_path.empty()) {
    out.specs = parse_sensor_specs(read_file(r.sensors_path));
    // Sensors with a spec but no capability rule get one.
    if (auto sc = d.find_column(columns::kSensor)) {
      std::set<std::string> ids;
      for (const auto& rule : out.rules) ids.insert(rule.id);
      std::set<std::string> seen;
      for (std::size_t row = 0; row < d.row_count(); ++row) {
        const CellValue& v = d.at(row, *sc);
        if (is_missing(v)) continue;
        const std::string sensor = render_cell(v);
        if (!seen.insert(sensor).second) continue;
        const SensorSpec* spec = find_spec(out.specs, sensor);
        if (!spec) continue;
        OfdRule rule = make_capability_rule(sensor, *spec);
        if (!ids.count(rule.id)) out.rules.push_back(std::move(rule));
      }
    }
  }
  return out;
}

RunOptions run_options(const RuleSource& r, const LoadedRules& loaded) {
  RunOptions o;
  o.specs = loaded.specs;
  o.sim.exact = r.exact;
  o.parallel = r.parallel;
  return o;
}

std::string summary_line(const DetectionReport& report) {
  std::ostringstream s;
  s << report.findings.size() << " findings on " << report.distinct_cells() << " cells, "
    << report.skipped_rules.size() << " skipped rules";
  return s.str();
}

ordered_json scores_json(const Scores& s) {
  return ordered_json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Context-driven error detection for tabular and IoT data", "llmclean"};
  app.require_subcommand(1);

  // classify
  std::string csv_path;
  BackendFlags bflags;
  auto* classify = app.add_subcommand("classify", "Print IoT or NonIoT for a CSV file");
  classify->add_option("csv", csv_path, "Input CSV")->required();
  add_backend_flags(classify, bflags);

  // build-context
  std::string out_dir;
  std::string sensors_path;
  std::vector<std::string> forwards;
  std::uint64_t seed = 0;
  bool llm_sensors = false;
  std::string force_class;
  auto* build = app.add_subcommand("build-context", "Build the context graph and rules for a CSV file");
  build->add_option("csv", csv_path, "Input CSV")->required();
  add_backend_flags(build, bflags);
  build->add_option("--out-dir", out_dir, "Output directory")->required();
  build->add_option("--sensors", sensors_path, "Sensor specification JSON");
  build->add_flag("--llm-sensors", llm_sensors, "Ask the model for sensors missing from --sensors");
  build->add_option("--forwards", forwards, "Device forwarding edge FROM:TO (repeatable)");
  build->add_option("--seed", seed, "Seed recorded in the manifest");
  build->add_option("--class", force_class, "Skip classification")->check(CLI::IsMember({"iot", "noniot"}));

  // detect
  RuleSource rsrc;
  std::string report_path;
  auto* detect = app.add_subcommand("detect", "Run rules against a CSV file and print a JSON report");
  detect->add_option("csv", csv_path, "Input CSV")->required();
  add_rule_flags(detect, rsrc);
  detect->add_option("--out", report_path, "Write the report here instead of stdout");

  // evaluate
  ErrorSpec espec;
  std::string missing_columns;
  std::string outlier_columns;
  std::vector<std::string> fd_pairs;
  auto* evaluate = app.add_subcommand("evaluate", "Inject errors into a clean CSV, detect them and score");
  evaluate->add_option("csv", csv_path, "Clean CSV")->required();
  add_rule_flags(evaluate, rsrc);
  evaluate->add_option("--missing-rate", espec.missing_rate)->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--outlier-rate", espec.outlier_rate)->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--fd-swap-rate", espec.fd_swap_rate)->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--outlier-multiplier", espec.outlier_multiplier);
  evaluate->add_option("--missing-columns", missing_columns, "Comma-separated columns (default: all)");
  evaluate->add_option("--outlier-columns", outlier_columns, "Comma-separated columns (default: numeric)");
  evaluate->add_option("--fd-pair", fd_pairs, "DETERMINANT:DEPENDENT for fd swaps (repeatable)");
  evaluate->add_option("--seed", espec.seed);
  evaluate->add_option("--out-dir", out_dir, "Write dirty.csv, truth.jsonl, report.json and metrics.json");

  // ensemble
  std::string records_path;
  std::string val_path;
  double val_fraction = 0.5;
  std::size_t tr_range = kMaxEnsemblePrompts;
  std::size_t ens_parallel = 4;
  std::string configs_path;
  auto* ensemble = app.add_subcommand("ensemble", "Search prompt subsets and consensus thresholds");
  ensemble->add_option("records", records_path, "Evaluation records (JSON Lines)")->required();
  ensemble->add_option("--val", val_path, "Validation records; default splits the input");
  ensemble->add_option("--val-fraction", val_fraction, "Validation share when splitting")->check(CLI::Range(0.0, 1.0));
  ensemble->add_option("--seed", seed, "Split seed");
  ensemble->add_option("--tr-range", tr_range, "Largest consensus threshold searched");
  ensemble->add_option("--parallel", ens_parallel)->check(CLI::PositiveNumber);
  ensemble->add_option("--out", configs_path, "Write configs here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (classify->parsed()) {
      const Dataset d = normalize_missing(load_csv_file(csv_path));
      auto backend = open_backend(bflags);
      const DatasetClass c = classify_dataset(d.headers(), backend->get(), default_classify_ensemble());
      backend->finish();
      out << class_name(c) << "\n";
      return kExitOk;
    }

    if (build->parsed()) {
      const Dataset d = load_csv_file(csv_path);
      auto backend = open_backend(bflags);
      PipelineOptions options;
      std::unique_ptr<LocalFileSource> file_source;
      std::unique_ptr<LlmSource> llm_source;
      if (!sensors_path.empty()) {
        file_source = std::make_unique<LocalFileSource>(sensors_path);
        options.sources.push_back(file_source.get());
      }
      if (llm_sensors) {
        llm_source = std::make_unique<LlmSource>(backend->get());
        options.sources.push_back(llm_source.get());
      }
      for (const auto& f : forwards) options.forwards.push_back(split_pair(f, "--forwards"));
      options.synth.seed = seed;
      if (!force_class.empty()) options.force_class = force_class == "iot" ? DatasetClass::IoT : DatasetClass::NonIoT;
      const PipelineResult result = run_context_pipeline(d, backend->get(), options);
      backend->finish();
      write_pipeline_outputs(result, out_dir, ManifestInfo{csv_path, backend->base->describe(), seed});
      for (const auto& w : result.warnings) err << "warning: " << w << "\n";
      out << class_name(result.dataset_class) << ": " << result.graph.size() << " triples, " << result.rules.size()
          << " rules written to " << out_dir << "\n";
      return kExitOk;
    }

    if (detect->parsed()) {
      const Dataset d = normalize_missing(load_csv_file(csv_path));
      const LoadedRules loaded = load_rules(rsrc, d, err);
      const DetectionReport report = run_all(d, loaded.rules, run_options(rsrc, loaded));
      const std::string json = report_to_json(report);
      if (report_path.empty()) {
        out << json;
      } else {
        write_file(report_path, json);
      }
      for (const auto& s : report.skipped_rules) err << "skipped " << s.rule_id << ": " << s.reason << "\n";
      err << summary_line(report) << "\n";
      return kExitOk;
    }

    if (evaluate->parsed()) {
      const Dataset clean = load_csv_file(csv_path);
      espec.missing_columns = split_list(missing_columns);
      espec.outlier_columns = split_list(outlier_columns);
      for (const auto& p : fd_pairs) espec.fd_pairs.push_back(split_pair(p, "--fd-pair"));
      const Injection inj = inject_errors(clean, espec);
      const Dataset dirty = normalize_missing(inj.dirty);
      const LoadedRules loaded = load_rules(rsrc, dirty, err);
      const DetectionReport report = run_all(dirty, loaded.rules, run_options(rsrc, loaded));
      const Scores s = score_detection(report, inj.truth, dirty);

      ordered_json metrics = scores_json(s);
      std::map<std::string, std::size_t> injected;
      for (const auto& e : inj.truth.entries) ++injected[std::string(corruption_name(e.kind))];
      metrics["injected"] = injected;
      metrics["truth_cells"] = inj.truth.entries.size();
      metrics["flagged_cells"] = report.distinct_cells();
      metrics["findings"] = report.findings.size();
      metrics["rules"] = loaded.rules.size();
      metrics["skipped_rules"] = report.skipped_rules.size();
      metrics["seed"] = espec.seed;
      const std::string text = metrics.dump(2) + "\n";
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);
        write_file((dir / "dirty.csv").string(), to_csv_string(inj.dirty));
        write_file((dir / "truth.jsonl").string(), truth_to_jsonl(inj.truth));
        write_file((dir / "report.json").string(), report_to_json(report));
        write_file((dir / "metrics.json").string(), text);
      }
      out << text;
      err << summary_line(report) << "\n";
      return kExitOk;
    }

    if (ensemble->parsed()) {
      std::vector<EvalRecord> train = parse_eval_records(read_file(records_path));
      if (train.empty()) throw InputError("no evaluation records in " + records_path);
      std::vector<EvalRecord> val;
      if (!val_path.empty()) {
        val = parse_eval_records(read_file(val_path));
        if (val.empty()) throw InputError("no evaluation records in " + val_path);
      } else {
        auto [val_idx, train_idx] = split_indices(train.size(), val_fraction, seed);
        if (val_idx.empty() || train_idx.empty()) {
          throw InputError("too few records to split into training and validation parts");
        }
        std::vector<EvalRecord> t;
        for (std::size_t i : train_idx) t.push_back(train[i]);
        for (std::size_t i : val_idx) val.push_back(train[i]);
        train = std::move(t);
      }
      std::vector<std::string> prompts;
      for (const auto& [id, _] : train.front().answers) prompts.push_back(id);
      SearchSpec spec;
      spec.tr_range = std::min(tr_range, prompts.size());
      const auto configs = find_best_ensemble(train, val, prompts, spec, ens_parallel);
      const std::string json = configs_to_json(configs);
      if (configs_path.empty()) {
        out << json;
      } else {
        write_file(configs_path, json);
      }
      return kExitOk;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const BackendError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace llmclean
