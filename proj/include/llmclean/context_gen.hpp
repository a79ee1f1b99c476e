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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmclean/context_graph.hpp"
#include "llmclean/dataset.hpp"
#include "llmclean/llm.hpp"
#include "llmclean/rule.hpp"

namespace llmclean {

enum class DatasetClass { IoT, NonIoT };
std::string_view class_name(DatasetClass c);  // "IoT" / "NonIoT"

// Prompt templates voting together at a consensus threshold.
struct EnsembleSetup {
  std::vector<PromptTemplate> templates;
  std::size_t threshold = 1;
};

// The dataset-type prompt: few-shot column names, the question, yes/no.
PromptTemplate default_classify_template();
EnsembleSetup default_classify_ensemble();
// Column names bound to {iot_names}.
std::string default_iot_names();

// Renders every template with {col_names} and {iot_names}, counts yes votes
// and returns IoT when they reach the threshold.
DatasetClass classify_dataset(const std::vector<std::string>& headers, Backend& b, const EnsembleSetup& ensemble);

// Slots the column mapping asks about, in query order.
const std::vector<std::string>& mapping_slots();
// Canonical column name for a slot ("Sensor" -> "sensor").
std::string canonical_name(std::string_view slot);
PromptTemplate mapping_template(std::string_view slot);

struct ConceptMapping {
  std::map<std::string, std::string> assignments;  // slot -> column (not Value)
  std::vector<std::string> value_columns;          // Value slot
  std::vector<std::string> unmapped;               // columns without a slot
  std::vector<std::string> missing;                // slots without a column
  std::vector<std::string> warnings;
};

// One query per slot. Answers naming no header are dropped with a warning, as
// are columns already claimed by an earlier slot.
ConceptMapping map_columns(const std::vector<std::string>& headers, Backend& b);

// Wide-to-long: one output row per (input row, value column). Output columns
// are `sensor`, `value`, then the remaining input columns in order.
// Throws SchemaError when a value column is absent or a carried column is
// already called sensor or value.
Dataset split_sensors(const Dataset& d, const std::vector<std::pair<std::string, std::string>>& value_columns);

// Renames mapped columns to their canonical names. Throws SchemaError when two
// columns would share a name.
Dataset rename_columns(const Dataset& d, const ConceptMapping& m);

struct SynthConfig {
  std::string system_id = "system_1";
  bool device_per_location = true;
  std::optional<double> default_min;
  std::optional<double> default_max;
  // Reserved for randomized synthesis; the current generators derive every
  // value from the data and need no draws.
  std::uint64_t seed = 0;
};

struct GeneratedColumns {
  Dataset dataset;
  std::vector<std::string> added;     // canonical names, in append order
  std::vector<std::string> excluded;  // missing slots that cannot be synthesized
};

// Appends system, device, sensingdevice, sensor, MinValue and MaxValue when
// the renamed dataset lacks them. Existing columns are kept in place.
GeneratedColumns generate_columns(const Dataset& d, const ConceptMapping& m, const SynthConfig& cfg,
                                  const std::map<std::string, SensorSpec>& specs = {});

class KnowledgeSource {
 public:
  virtual ~KnowledgeSource() = default;
  virtual std::string name() const = 0;
  // nullopt when the source knows nothing; may throw on transport failure.
  virtual std::optional<SensorSpec> lookup(const std::string& model) = 0;
};

// JSON file {"<model>": {"min": x, "max": y, "unit": "..."}}.
class LocalFileSource : public KnowledgeSource {
 public:
  explicit LocalFileSource(const std::string& path);
  static LocalFileSource from_json(std::string_view json, std::string name = "inline");
  std::string name() const override { return name_; }
  std::optional<SensorSpec> lookup(const std::string& model) override;
  const std::map<std::string, SensorSpec>& specs() const { return specs_; }

 private:
  LocalFileSource() = default;
  std::string name_;
  std::map<std::string, SensorSpec> specs_;
};

// Parses {"<model>": {"min", "max", "unit"}}. Throws InputError.
std::map<std::string, SensorSpec> parse_sensor_specs(std::string_view json);
std::string sensor_specs_to_json(const std::map<std::string, SensorSpec>& specs);

// Asks the model for "min, max, unit".
class LlmSource : public KnowledgeSource {
 public:
  explicit LlmSource(Backend& b) : backend_(b) {}
  std::string name() const override { return "llm(" + backend_.describe() + ")"; }
  std::optional<SensorSpec> lookup(const std::string& model) override;
  static PromptTemplate prompt_template();

 private:
  Backend& backend_;
};

// Override first, then the first source with a usable answer. Source errors
// are appended to `warnings` (when given) and skipped.
std::optional<SensorSpec> extract_sensor_info(const std::string& sensor_model,
                                              const std::vector<KnowledgeSource*>& sources,
                                              const std::map<std::string, SensorSpec>& overrides,
                                              std::vector<std::string>* warnings = nullptr);

// Linear-interpolated quantile of sorted values (numpy's default method).
double quantile(const std::vector<double>& sorted, double q);

// Graph-construction copy: system/device/sensingdevice/location set to the
// per-sensor mode, and rows whose value lies outside 1.5 IQR of their
// sensor's values (sensors with at least four values) dropped.
Dataset sanitize_for_graph(const Dataset& d);

struct IotGraphOptions {
  std::vector<std::pair<std::string, std::string>> forwards;  // device -> device
};

struct IotGraph {
  ContextGraph graph;
  std::vector<std::string> warnings;
};

// Entities for every distinct system/device/sensingdevice/sensor/location,
// attachedTo/deployedAt/partOf edges from modal co-occurrence, capability
// metadata for sensors with a spec, forwardsTo edges from the options.
IotGraph build_iot_graph(const Dataset& d, const std::map<std::string, SensorSpec>& specs,
                         const IotGraphOptions& options = {});

enum class Hierarchy { AttributeOf_A, AttributeOf_B, Independent };

struct ColumnPairRelation {
  std::string column_a;
  std::string column_b;
  bool related = false;
  std::optional<std::string> concept_a;
  std::optional<std::string> concept_b;
  // AttributeOf_A: column_b describes column_a, so column_a determines it.
  std::optional<Hierarchy> hierarchy;
};

struct PairTemplates {
  PromptTemplate related;    // {col_a} {col_b} {col_names}, YesNo
  PromptTemplate concept_of;  // {col} {col_names}, SingleLabel
  PromptTemplate hierarchy;  // {col_a} {col_b} {col_names}, SingleLabel
};
PairTemplates default_pair_templates();

struct PairFailure {
  std::string column_a;
  std::string column_b;
  std::string message;
};

struct PairResult {
  std::vector<ColumnPairRelation> relations;  // header order of (a, b)
  std::vector<PairFailure> failures;
};

// All C(n, 2) unordered pairs get a relatedness query; related pairs get two
// concept queries and a hierarchy query. A failing pair is reported and the
// others are kept.
PairResult pair_relationships(const std::vector<std::string>& headers, Backend& b,
                              const PairTemplates& templates = default_pair_templates());

struct MatchingRelation {
  std::string column_a;
  std::string column_b;
  double threshold_a = kDefaultSimThreshold;
  double threshold_b = kDefaultSimThreshold;
};

// Attribute node per column; hierarchy edges as partOf (determinant ->
// dependent), other related pairs as relatedTo, matching relations as
// matches with per-column simThreshold. Throws ModelError for a partOf cycle.
ContextGraph build_relational_graph(const std::vector<ColumnPairRelation>& relations,
                                    const std::vector<MatchingRelation>& matching = {});

// `denial[not_null:<col>]: t1&EQ(t1.<col>,"")` for each column.
std::vector<OfdRule> not_null_rules(const std::vector<std::string>& columns);

struct PipelineOptions {
  EnsembleSetup classify = default_classify_ensemble();
  SynthConfig synth;
  std::vector<KnowledgeSource*> sources;
  std::map<std::string, SensorSpec> overrides;
  std::vector<std::pair<std::string, std::string>> forwards;
  std::optional<DatasetClass> force_class;
};

struct PipelineResult {
  DatasetClass dataset_class = DatasetClass::NonIoT;
  ConceptMapping mapping;
  Dataset transformed;
  ContextGraph graph;
  std::vector<OfdRule> rules;
  std::vector<std::string> warnings;
  std::vector<std::string> excluded;
  std::map<std::string, SensorSpec> specs;  // by sensor model
  std::vector<ColumnPairRelation> relations;
  std::vector<std::pair<std::string, double>> timing_ms;
};

// Classification, then the IoT transformation path or the relational pair
// path, then graph construction and rule extraction.
PipelineResult run_context_pipeline(const Dataset& raw, Backend& b, const PipelineOptions& options = {});

struct ManifestInfo {
  std::string input_path;
  std::string backend;
  std::uint64_t seed = 0;
};

// Writes transformed.csv, context.nt, rules.ofd and manifest.json into
// out_dir (created if needed); each file is written to a temporary name and
// renamed into place. Returns the manifest text.
std::string write_pipeline_outputs(const PipelineResult& r, const std::string& out_dir, const ManifestInfo& info);

}  // namespace llmclean
