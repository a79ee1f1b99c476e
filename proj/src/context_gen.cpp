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

#include "llmclean/context_gen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "llmclean/detection.hpp"
#include "llmclean/ensemble.hpp"
#include "llmclean/error.hpp"
#include "llmclean/util.hpp"

namespace llmclean {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

struct SlotInfo {
  std::string_view slot;
  std::string_view canonical;
  std::string_view description;
};

constexpr SlotInfo kSlots[] = {
    {"System", "system", "identifier of the overall IoT system"},
    {"Device", "device", "identifier of the IoT device through which sensor data is read"},
    {"SensingDevice", "sensingdevice", "identifier of the sensing device that hosts a sensor"},
    {"Sensor", "sensor", "identifier of the sensor"},
    {"Location", "location", "place where the sensor is deployed"},
    {"Value", "value", "measured sensor values"},
    {"Timestamp", "timestamp", "time of the measurement"},
    {"MinValue", "MinValue", "minimum value the sensor can measure"},
    {"MaxValue", "MaxValue", "maximum value the sensor can measure"},
};

const SlotInfo* slot_info(std::string_view slot) {
  for (const auto& s : kSlots) {
    if (s.slot == slot) return &s;
  }
  return nullptr;
}

// Exact header, else a unique case-insensitive match.
std::optional<std::string> resolve_header(const std::vector<std::string>& headers, std::string_view name) {
  for (const auto& h : headers) {
    if (h == name) return h;
  }
  std::optional<std::string> found;
  for (const auto& h : headers) {
    if (iequals(h, name)) {
      if (found) return std::nullopt;
      found = h;
    }
  }
  return found;
}

// Most frequent rendered value; ties go to the lexicographically smallest.
template <typename Map>
const std::string* mode_of(const Map& counts) {
  const std::string* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best = &value;
      best_count = count;
    }
  }
  return best;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
    if (!out) throw InputError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string hierarchy_name(Hierarchy h) {
  switch (h) {
    case Hierarchy::AttributeOf_A: return "attribute_of_a";
    case Hierarchy::AttributeOf_B: return "attribute_of_b";
    case Hierarchy::Independent: return "independent";
  }
  return {};
}

}  // namespace

std::string_view class_name(DatasetClass c) { return c == DatasetClass::IoT ? "IoT" : "NonIoT"; }

std::string default_iot_names() { return "System, Device, SensingDevice, Sensor, Value, Timestamp, Location"; }

PromptTemplate default_classify_template() {
  PromptTemplate t;
  t.id = "classify";
  t.task_text =
      "Here are column names from an IoT dataset: {iot_names}.\n"
      "Do these names {col_names} suggest an IoT dataset?";
  t.response_format = ResponseFormat::YesNo;
  return t;
}

EnsembleSetup default_classify_ensemble() { return EnsembleSetup{{default_classify_template()}, 1}; }

DatasetClass classify_dataset(const std::vector<std::string>& headers, Backend& b, const EnsembleSetup& ensemble) {
  if (headers.empty()) throw ArgumentError("cannot classify a dataset without columns");
  if (ensemble.templates.empty()) throw ArgumentError("classification ensemble has no prompts");
  const std::map<std::string, std::string> bindings = {{"col_names", join(headers, ", ")},
                                                       {"iot_names", default_iot_names()}};
  std::vector<std::string> prompts;
  for (const auto& t : ensemble.templates) {
    if (t.response_format != ResponseFormat::YesNo) throw ArgumentError("classification prompts must be yes/no");
    prompts.push_back(render_prompt(t, bindings));
  }
  std::vector<LabelSet> votes;
  for (const auto& c : complete_all(b, prompts, ResponseFormat::YesNo)) {
    votes.push_back(std::get<bool>(c.parsed) ? LabelSet{"yes"} : LabelSet{});
  }
  return find_consensus(votes, ensemble.threshold).count("yes") ? DatasetClass::IoT : DatasetClass::NonIoT;
}

const std::vector<std::string>& mapping_slots() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> v;
    for (const auto& s : kSlots) v.emplace_back(s.slot);
    return v;
  }();
  return kNames;
}

std::string canonical_name(std::string_view slot) {
  const SlotInfo* info = slot_info(slot);
  if (!info) throw ArgumentError("unknown mapping slot " + std::string(slot));
  return std::string(info->canonical);
}

PromptTemplate mapping_template(std::string_view slot) {
  const SlotInfo* info = slot_info(slot);
  if (!info) throw ArgumentError("unknown mapping slot " + std::string(slot));
  PromptTemplate t;
  t.id = "map_" + std::string(slot);
  if (slot == "Value") {
    t.task_text = "An IoT dataset has the columns {col_names}.\nWhich columns hold measured sensor values?";
    t.response_format = ResponseFormat::LabelList;
  } else {
    t.task_text = "An IoT dataset has the columns {col_names}.\nWhich column holds the " +
                  std::string(info->description) + "?";
    t.response_format = ResponseFormat::SingleLabel;
  }
  return t;
}

ConceptMapping map_columns(const std::vector<std::string>& headers, Backend& b) {
  const auto& slots = mapping_slots();
  const std::map<std::string, std::string> bindings = {{"col_names", join(headers, ", ")}};
  std::vector<std::string> prompts;
  for (const auto& slot : slots) prompts.push_back(render_prompt(mapping_template(slot), bindings));
  std::vector<std::string> answers(prompts.size());
  parallel_for(prompts.size(), b.parallelism(), [&](std::size_t i) { answers[i] = b.complete_text(prompts[i]); });

  ConceptMapping m;
  std::set<std::string> claimed;
  auto claim = [&](const std::string& slot, const std::string& answer) -> std::optional<std::string> {
    auto column = resolve_header(headers, answer);
    if (!column) {
      m.warnings.push_back("model named unknown column '" + answer + "' for " + slot);
      return std::nullopt;
    }
    if (!claimed.insert(*column).second) {
      m.warnings.push_back("column '" + *column + "' already mapped; ignored for " + slot);
      return std::nullopt;
    }
    return column;
  };
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::string& slot = slots[i];
    if (slot == "Value") {
      for (const auto& label : parse_label_list(answers[i])) {
        if (auto c = claim(slot, label)) m.value_columns.push_back(*c);
      }
      if (m.value_columns.empty()) m.missing.push_back(slot);
    } else {
      auto label = parse_single_label(answers[i]);
      std::optional<std::string> column;
      if (label) column = claim(slot, *label);
      if (column) {
        m.assignments[slot] = *column;
      } else {
        m.missing.push_back(slot);
      }
    }
  }
  for (const auto& h : headers) {
    if (!claimed.count(h)) m.unmapped.push_back(h);
  }
  return m;
}

Dataset split_sensors(const Dataset& d, const std::vector<std::pair<std::string, std::string>>& value_columns) {
  if (value_columns.empty()) throw ArgumentError("split_sensors needs at least one value column");
  std::vector<std::size_t> value_idx;
  for (const auto& [column, label] : value_columns) value_idx.push_back(d.column_index(column));
  std::vector<std::size_t> carried;
  for (std::size_t c = 0; c < d.column_count(); ++c) {
    if (std::find(value_idx.begin(), value_idx.end(), c) != value_idx.end()) continue;
    if (iequals(d.headers()[c], columns::kSensor) || iequals(d.headers()[c], columns::kValue)) {
      throw SchemaError("column " + d.headers()[c] + " collides with the split output");
    }
    carried.push_back(c);
  }
  std::vector<std::string> headers = {std::string(columns::kSensor), std::string(columns::kValue)};
  for (std::size_t c : carried) headers.push_back(d.headers()[c]);
  std::vector<Row> rows;
  rows.reserve(d.row_count() * value_columns.size());
  for (std::size_t r = 0; r < d.row_count(); ++r) {
    for (std::size_t k = 0; k < value_columns.size(); ++k) {
      Row row;
      row.reserve(headers.size());
      row.emplace_back(value_columns[k].second);
      row.push_back(d.at(r, value_idx[k]));
      for (std::size_t c : carried) row.push_back(d.at(r, c));
      rows.push_back(std::move(row));
    }
  }
  return Dataset(std::move(headers), std::move(rows));
}

Dataset rename_columns(const Dataset& d, const ConceptMapping& m) {
  std::vector<std::string> headers = d.headers();
  std::map<std::size_t, std::string> renames;
  auto rename = [&](const std::string& column, const std::string& slot) {
    const std::size_t idx = d.column_index(column);
    renames[idx] = canonical_name(slot);
  };
  for (const auto& [slot, column] : m.assignments) rename(column, slot);
  if (m.value_columns.size() > 1) {
    throw SchemaError("columns " + join(m.value_columns, ", ") + " would all be renamed to value");
  }
  if (m.value_columns.size() == 1) rename(m.value_columns.front(), "Value");
  for (const auto& [idx, name] : renames) headers[idx] = name;
  std::set<std::string> seen;
  for (const auto& h : headers) {
    if (!seen.insert(h).second) throw SchemaError("renaming produces duplicate column " + h);
  }
  return Dataset(std::move(headers), d.rows());
}

GeneratedColumns generate_columns(const Dataset& d, const ConceptMapping& m, const SynthConfig& cfg,
                                  const std::map<std::string, SensorSpec>& specs) {
  GeneratedColumns out;
  std::vector<std::string> headers = d.headers();
  std::vector<Row> rows = d.rows();
  auto has = [&](std::string_view name) { return resolve_header(headers, name).has_value(); };
  auto column_of = [&](std::string_view name) -> std::optional<std::size_t> {
    auto h = resolve_header(headers, name);
    if (!h) return std::nullopt;
    return static_cast<std::size_t>(std::find(headers.begin(), headers.end(), *h) - headers.begin());
  };
  auto append = [&](std::string name, const std::function<CellValue(const Row&)>& fn) {
    for (auto& row : rows) row.push_back(fn(row));
    headers.push_back(name);
    out.added.push_back(std::move(name));
  };
  auto per_location = [&](std::string prefix) {
    return [&, prefix](const Row& row) -> CellValue {
      auto loc = column_of(columns::kLocation);
      if (!loc || !cfg.device_per_location) return prefix + "1";
      const CellValue& v = row[*loc];
      if (is_missing(v)) return Missing{};
      return prefix + render_cell(v);
    };
  };

  if (!has(columns::kSystem)) append(std::string(columns::kSystem), [&](const Row&) { return cfg.system_id; });
  if (!has(columns::kDevice)) append(std::string(columns::kDevice), per_location("device_"));
  if (!has(columns::kSensingDevice)) append(std::string(columns::kSensingDevice), per_location("sensingdevice_"));
  if (!has(columns::kSensor)) append(std::string(columns::kSensor), per_location("sensor_"));
  const std::size_t sensor_col = *column_of(columns::kSensor);
  auto bound = [&](bool min) {
    return [&, min](const Row& row) -> CellValue {
      const CellValue& s = row[sensor_col];
      if (!is_missing(s)) {
        if (const SensorSpec* spec = find_spec(specs, render_cell(s))) return min ? spec->min_value : spec->max_value;
      }
      const auto& fallback = min ? cfg.default_min : cfg.default_max;
      if (fallback) return *fallback;
      return Missing{};
    };
  };
  if (!has(columns::kMinValue)) append(std::string(columns::kMinValue), bound(true));
  if (!has(columns::kMaxValue)) append(std::string(columns::kMaxValue), bound(false));

  for (const auto& slot : mapping_slots()) {
    if (slot == "Location" || slot == "Value" || slot == "Timestamp") {
      const bool present = has(canonical_name(slot)) ||
                           (slot == "Value" ? !m.value_columns.empty() : m.assignments.count(slot) > 0);
      if (!present) out.excluded.push_back(slot);
    }
  }
  out.dataset = Dataset(std::move(headers), std::move(rows));
  return out;
}

// --- Sensor knowledge --------------------------------------------------------

std::map<std::string, SensorSpec> parse_sensor_specs(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed sensor file: ") + e.what());
  }
  if (!j.is_object()) throw InputError("sensor file must be a JSON object");
  std::map<std::string, SensorSpec> out;
  for (const auto& [model, entry] : j.items()) {
    if (!entry.is_object() || !entry.contains("min") || !entry.contains("max") || !entry["min"].is_number() ||
        !entry["max"].is_number()) {
      throw InputError("sensor " + model + " needs numeric min and max");
    }
    SensorSpec s{model, entry["min"].get<double>(), entry["max"].get<double>(), entry.value("unit", "")};
    if (!(s.min_value <= s.max_value)) throw InputError("sensor " + model + " has min above max");
    out[model] = std::move(s);
  }
  return out;
}

std::string sensor_specs_to_json(const std::map<std::string, SensorSpec>& specs) {
  ordered_json j = ordered_json::object();
  for (const auto& [model, s] : specs) {
    j[model] = {{"min", s.min_value}, {"max", s.max_value}, {"unit", s.unit}};
  }
  return j.dump(2) + "\n";
}

LocalFileSource::LocalFileSource(const std::string& path) : name_("file(" + path + ")") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open sensor file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  specs_ = parse_sensor_specs(ss.str());
}

LocalFileSource LocalFileSource::from_json(std::string_view text, std::string name) {
  LocalFileSource s;
  s.name_ = std::move(name);
  s.specs_ = parse_sensor_specs(text);
  return s;
}

std::optional<SensorSpec> LocalFileSource::lookup(const std::string& model) {
  auto it = specs_.find(model);
  if (it == specs_.end()) return std::nullopt;
  return it->second;
}

PromptTemplate LlmSource::prompt_template() {
  PromptTemplate t;
  t.id = "sensor_info";
  t.task_text =
      "What are the minimum and maximum values the sensor model {model} can measure?\n"
      "List the minimum, the maximum and the unit.";
  t.response_format = ResponseFormat::LabelList;
  return t;
}

std::optional<SensorSpec> LlmSource::lookup(const std::string& model) {
  const std::string raw = backend_.complete_text(render_prompt(prompt_template(), {{"model", model}}));
  const auto items = parse_label_list(raw);
  if (items.empty()) return std::nullopt;
  std::vector<double> numbers;
  std::string unit;
  for (const auto& item : items) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used == item.size() && std::isfinite(v)) {
        numbers.push_back(v);
        continue;
      }
    } catch (const std::exception&) {
    }
    if (unit.empty()) unit = item;
  }
  if (numbers.size() < 2) throw FormatError("expected min and max for sensor " + model, raw);
  return SensorSpec{model, numbers[0], numbers[1], unit};
}

std::optional<SensorSpec> extract_sensor_info(const std::string& sensor_model,
                                              const std::vector<KnowledgeSource*>& sources,
                                              const std::map<std::string, SensorSpec>& overrides,
                                              std::vector<std::string>* warnings) {
  if (auto it = overrides.find(sensor_model); it != overrides.end()) {
    SensorSpec s = it->second;
    s.sensor_model = sensor_model;
    return s;
  }
  for (KnowledgeSource* source : sources) {
    try {
      auto spec = source->lookup(sensor_model);
      if (!spec) continue;
      if (!(spec->min_value <= spec->max_value)) {
        if (warnings) warnings->push_back(source->name() + ": min above max for " + sensor_model);
        continue;
      }
      spec->sensor_model = sensor_model;
      return spec;
    } catch (const std::exception& e) {
      if (warnings) warnings->push_back(source->name() + ": " + e.what());
    }
  }
  return std::nullopt;
}

// --- Sanitizing and graph construction ---------------------------------------

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ArgumentError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Dataset sanitize_for_graph(const Dataset& d) {
  auto sensor = d.find_column(columns::kSensor);
  if (!sensor) return d;
  std::vector<Row> rows = d.rows();

  std::map<std::string, std::vector<std::size_t>> by_sensor;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!is_missing(rows[r][*sensor])) by_sensor[render_cell(rows[r][*sensor])].push_back(r);
  }

  for (std::string_view name :
       {columns::kSystem, columns::kDevice, columns::kSensingDevice, columns::kLocation}) {
    auto col = d.find_column(name);
    if (!col || *col == *sensor) continue;
    for (const auto& [id, members] : by_sensor) {
      std::map<std::string, std::size_t> counts;
      std::map<std::string, std::size_t> sample;
      for (std::size_t r : members) {
        if (is_missing(rows[r][*col])) continue;
        const std::string v = render_cell(rows[r][*col]);
        ++counts[v];
        sample.emplace(v, r);
      }
      const std::string* mode = mode_of(counts);
      if (!mode) continue;
      const CellValue repaired = rows[sample[*mode]][*col];
      for (std::size_t r : members) rows[r][*col] = repaired;
    }
  }

  std::vector<bool> drop(rows.size(), false);
  if (auto value = d.find_column(columns::kValue)) {
    for (const auto& [id, members] : by_sensor) {
      std::vector<double> values;
      for (std::size_t r : members) {
        if (is_number(rows[r][*value])) values.push_back(std::get<double>(rows[r][*value]));
      }
      if (values.size() < 4) continue;
      std::sort(values.begin(), values.end());
      const double q1 = quantile(values, 0.25);
      const double q3 = quantile(values, 0.75);
      const double lo = q1 - 1.5 * (q3 - q1);
      const double hi = q3 + 1.5 * (q3 - q1);
      for (std::size_t r : members) {
        if (!is_number(rows[r][*value])) continue;
        const double v = std::get<double>(rows[r][*value]);
        if (v < lo || v > hi) drop[r] = true;
      }
    }
  }
  std::vector<Row> kept;
  kept.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!drop[r]) kept.push_back(std::move(rows[r]));
  }
  return Dataset(d.headers(), std::move(kept));
}

IotGraph build_iot_graph(const Dataset& d, const std::map<std::string, SensorSpec>& specs,
                         const IotGraphOptions& options) {
  IotGraph out;
  ContextGraph& g = out.graph;
  const auto system = d.find_column(columns::kSystem);
  const auto device = d.find_column(columns::kDevice);
  const auto sd = d.find_column(columns::kSensingDevice);
  const auto sensor = d.find_column(columns::kSensor);
  const auto location = d.find_column(columns::kLocation);

  auto add_entities = [&](std::optional<std::size_t> col, Concept kind) {
    if (!col) return;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < d.row_count(); ++r) {
      const CellValue& v = d.at(r, *col);
      if (is_missing(v)) continue;
      const std::string id = render_cell(v);
      if (seen.insert(id).second) add_entity_to(g, kind, id, {{"label", id}});
    }
  };
  add_entities(system, Concept::System);
  add_entities(device, Concept::Device);
  add_entities(sd, Concept::SensingDevice);
  add_entities(sensor, Concept::Sensor);
  add_entities(location, Concept::Location);

  // Modal partner of every key value; conflicts produce a warning.
  auto link = [&](std::optional<std::size_t> from, std::optional<std::size_t> to, std::string_view predicate,
                  std::string_view what) {
    if (!from || !to) return;
    std::map<std::string, std::map<std::string, std::size_t>> pairs;
    for (std::size_t r = 0; r < d.row_count(); ++r) {
      const CellValue& a = d.at(r, *from);
      const CellValue& b = d.at(r, *to);
      if (is_missing(a) || is_missing(b)) continue;
      ++pairs[render_cell(a)][render_cell(b)];
    }
    for (const auto& [key, counts] : pairs) {
      const std::string* mode = mode_of(counts);
      if (counts.size() > 1) {
        out.warnings.push_back(std::string(what) + " " + key + " co-occurs with " + std::to_string(counts.size()) +
                               " values; using " + *mode);
      }
      g.add({entity_iri(key), std::string(predicate), Iri{entity_iri(*mode)}});
    }
  };
  if (!sd && sensor && device) out.warnings.push_back("no sensingdevice column; device-link edges skipped");
  link(sensor, sd, pred::kAttachedTo, "sensor");
  link(sd, device, pred::kAttachedTo, "sensingdevice");
  link(sd, location, pred::kDeployedAt, "sensingdevice");
  link(device, system, pred::kPartOf, "device");

  if (sensor) {
    std::set<std::string> seen;
    for (std::size_t r = 0; r < d.row_count(); ++r) {
      const CellValue& v = d.at(r, *sensor);
      if (is_missing(v)) continue;
      const std::string id = render_cell(v);
      if (!seen.insert(id).second) continue;
      const SensorSpec* spec = find_spec(specs, id);
      if (!spec) continue;
      for (bool min : {true, false}) {
        const std::string meta = id + (min ? ".min" : ".max");
        add_entity_to(g, Concept::Metadata, meta,
                      {{"metaType", std::string(min ? columns::kMinValue : columns::kMaxValue)},
                       {"metaValue", min ? spec->min_value : spec->max_value}});
        g.add({entity_iri(id), std::string(pred::kHasMetadata), Iri{entity_iri(meta)}});
      }
    }
  }

  for (const auto& [from, to] : options.forwards) {
    add_entity_to(g, Concept::Device, from, {{"label", from}});
    add_entity_to(g, Concept::Device, to, {{"label", to}});
    g.add({entity_iri(from), std::string(pred::kForwardsTo), Iri{entity_iri(to)}});
  }
  check_graph(g);
  return out;
}

// --- Relational path ---------------------------------------------------------

PairTemplates default_pair_templates() {
  PairTemplates t;
  t.related.id = "pair_related";
  t.related.task_text = "A table has the columns {col_names}.\nAre the columns {col_a} and {col_b} related to each other?";
  t.related.response_format = ResponseFormat::YesNo;
  t.concept_of.id = "pair_concept";
  t.concept_of.task_text = "A table has the columns {col_names}.\nWhich general concept does the column {col} represent?";
  t.concept_of.response_format = ResponseFormat::SingleLabel;
  t.hierarchy.id = "pair_hierarchy";
  t.hierarchy.task_text =
      "A table has the columns {col_names}.\n"
      "If one of the columns {col_a} and {col_b} is an attribute of the other, name the column it describes. "
      "Otherwise answer INDEPENDENT.";
  t.hierarchy.response_format = ResponseFormat::SingleLabel;
  return t;
}

PairResult pair_relationships(const std::vector<std::string>& headers, Backend& b, const PairTemplates& templates) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < headers.size(); ++i) {
    for (std::size_t j = i + 1; j < headers.size(); ++j) pairs.emplace_back(i, j);
  }
  const std::string names = join(headers, ", ");
  std::vector<std::optional<ColumnPairRelation>> relations(pairs.size());
  std::vector<std::optional<std::string>> errors(pairs.size());

  parallel_for(pairs.size(), b.parallelism(), [&](std::size_t k) {
    const std::string& a = headers[pairs[k].first];
    const std::string& c = headers[pairs[k].second];
    try {
      ColumnPairRelation rel{a, c, false, std::nullopt, std::nullopt, std::nullopt};
      const std::map<std::string, std::string> both = {{"col_names", names}, {"col_a", a}, {"col_b", c}};
      rel.related = std::get<bool>(complete(b, render_prompt(templates.related, both), ResponseFormat::YesNo).parsed);
      if (rel.related) {
        auto concept_of = [&](const std::string& col) {
          return parse_single_label(b.complete_text(render_prompt(templates.concept_of, {{"col_names", names}, {"col", col}})));
        };
        rel.concept_a = concept_of(a);
        rel.concept_b = concept_of(c);
        auto answer = parse_single_label(b.complete_text(render_prompt(templates.hierarchy, both)));
        if (answer && iequals(*answer, a)) {
          rel.hierarchy = Hierarchy::AttributeOf_A;
        } else if (answer && iequals(*answer, c)) {
          rel.hierarchy = Hierarchy::AttributeOf_B;
        } else {
          rel.hierarchy = Hierarchy::Independent;
        }
      }
      relations[k] = std::move(rel);
    } catch (const Error& e) {
      errors[k] = e.what();
    }
  });

  PairResult out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (relations[k]) out.relations.push_back(std::move(*relations[k]));
    if (errors[k]) out.failures.push_back({headers[pairs[k].first], headers[pairs[k].second], *errors[k]});
  }
  return out;
}

ContextGraph build_relational_graph(const std::vector<ColumnPairRelation>& relations,
                                    const std::vector<MatchingRelation>& matching) {
  ContextGraph g;
  std::map<std::string, std::vector<std::string>> part_of;
  auto node = [&](const std::string& column) {
    add_entity_to(g, Concept::Attribute, column, {{"label", column}});
    return entity_iri(column);
  };
  for (const auto& rel : relations) {
    if (!rel.related) continue;
    const std::string a = node(rel.column_a);
    const std::string b = node(rel.column_b);
    const Hierarchy h = rel.hierarchy.value_or(Hierarchy::Independent);
    if (h == Hierarchy::AttributeOf_A) {
      g.add({a, std::string(pred::kPartOf), Iri{b}});
      part_of[rel.column_a].push_back(rel.column_b);
    } else if (h == Hierarchy::AttributeOf_B) {
      g.add({b, std::string(pred::kPartOf), Iri{a}});
      part_of[rel.column_b].push_back(rel.column_a);
    } else {
      g.add({a, std::string(pred::kRelatedTo), Iri{b}});
    }
  }

  // Cycle check over partOf (iterative colouring DFS).
  std::map<std::string, int> state;
  std::vector<std::string> path;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    state[n] = 1;
    path.push_back(n);
    for (const auto& next : part_of[n]) {
      if (state[next] == 1) {
        auto start = std::find(path.begin(), path.end(), next);
        std::vector<std::string> cycle(start, path.end());
        cycle.push_back(next);
        throw ModelError("partOf cycle: " + join(cycle, " -> "));
      }
      if (state[next] == 0) visit(next);
    }
    path.pop_back();
    state[n] = 2;
  };
  std::vector<std::string> roots;
  for (const auto& [n, _] : part_of) roots.push_back(n);
  for (const auto& n : roots) {
    if (state[n] == 0) visit(n);
  }

  std::map<std::string, double> thresholds;
  auto set_threshold = [&](const std::string& column, double t) {
    auto [it, inserted] = thresholds.emplace(column, t);
    if (!inserted && it->second != t) throw ModelError("conflicting similarity thresholds for column " + column);
    if (inserted) g.add({entity_iri(column), std::string(pred::kSimThreshold), t});
  };
  for (const auto& m : matching) {
    const std::string a = node(m.column_a);
    const std::string b = node(m.column_b);
    set_threshold(m.column_a, m.threshold_a);
    set_threshold(m.column_b, m.threshold_b);
    g.add({a, std::string(pred::kMatches), Iri{b}});
  }
  check_graph(g);
  return g;
}

std::vector<OfdRule> not_null_rules(const std::vector<std::string>& cols) {
  std::vector<OfdRule> out;
  for (const auto& c : cols) {
    OfdRule r;
    r.id = "not_null:" + c;
    r.kind = DependencyKind::Denial;
    r.aliases = {"t1"};
    r.predicates.push_back({PredicateOp::EQ, ColumnRef{"t1", c}, Literal{""}, std::nullopt});
    try {
      validate_rule(r);
    } catch (const ParseError&) {
      continue;  // column name cannot be written in the rule syntax
    }
    out.push_back(std::move(r));
  }
  return out;
}

// --- Pipeline ----------------------------------------------------------------

PipelineResult run_context_pipeline(const Dataset& raw, Backend& b, const PipelineOptions& options) {
  using clock = std::chrono::steady_clock;
  PipelineResult res;
  auto t = clock::now();
  const Dataset d = normalize_missing(raw);

  res.dataset_class = options.force_class ? *options.force_class : classify_dataset(d.headers(), b, options.classify);
  res.timing_ms.emplace_back("classify", elapsed_ms(t));

  std::vector<std::string> data_columns;
  if (res.dataset_class == DatasetClass::IoT) {
    t = clock::now();
    res.mapping = map_columns(d.headers(), b);
    res.warnings.insert(res.warnings.end(), res.mapping.warnings.begin(), res.mapping.warnings.end());
    res.timing_ms.emplace_back("map_columns", elapsed_ms(t));

    t = clock::now();
    Dataset work = d;
    ConceptMapping m = res.mapping;
    if (m.value_columns.size() >= 2) {
      std::vector<std::pair<std::string, std::string>> split;
      for (const auto& c : m.value_columns) split.emplace_back(c, c);
      if (auto it = m.assignments.find("Sensor"); it != m.assignments.end()) {
        res.warnings.push_back("sensor column " + it->second + " replaced by split sensor labels");
        std::vector<std::size_t> keep;
        std::vector<std::string> headers;
        for (std::size_t c = 0; c < work.column_count(); ++c) {
          if (work.headers()[c] == it->second) continue;
          keep.push_back(c);
          headers.push_back(work.headers()[c]);
        }
        std::vector<Row> rows;
        for (const auto& row : work.rows()) {
          Row nr;
          for (std::size_t c : keep) nr.push_back(row[c]);
          rows.push_back(std::move(nr));
        }
        work = Dataset(std::move(headers), std::move(rows));
      }
      work = split_sensors(work, split);
      m.assignments["Sensor"] = std::string(columns::kSensor);
      m.value_columns = {std::string(columns::kValue)};
    }
    const Dataset renamed = rename_columns(work, m);
    data_columns = renamed.headers();

    std::vector<std::string> sensors;
    if (auto sc = renamed.find_column(columns::kSensor)) {
      std::set<std::string> seen;
      for (std::size_t r = 0; r < renamed.row_count(); ++r) {
        const CellValue& v = renamed.at(r, *sc);
        if (!is_missing(v) && seen.insert(render_cell(v)).second) sensors.push_back(render_cell(v));
      }
    }
    for (const auto& s : sensors) {
      const std::string model = sensor_model_name(s);
      if (res.specs.count(model)) continue;
      if (auto spec = extract_sensor_info(model, options.sources, options.overrides, &res.warnings)) {
        res.specs[model] = *spec;
      }
    }
    GeneratedColumns gen = generate_columns(renamed, m, options.synth, res.specs);
    if (!renamed.find_column(columns::kSensor)) {
      // Sensors were synthesized; look their models up as well.
      const std::size_t sc = gen.dataset.column_index(columns::kSensor);
      std::set<std::string> seen;
      for (std::size_t r = 0; r < gen.dataset.row_count(); ++r) {
        const CellValue& v = gen.dataset.at(r, sc);
        if (is_missing(v) || !seen.insert(render_cell(v)).second) continue;
        const std::string model = sensor_model_name(render_cell(v));
        if (res.specs.count(model)) continue;
        if (auto spec = extract_sensor_info(model, options.sources, options.overrides, &res.warnings)) {
          res.specs[model] = *spec;
        }
      }
      gen = generate_columns(renamed, m, options.synth, res.specs);
    }
    res.excluded = gen.excluded;
    res.transformed = gen.dataset;
    res.timing_ms.emplace_back("transform", elapsed_ms(t));

    t = clock::now();
    IotGraphOptions graph_options;
    graph_options.forwards = options.forwards;
    IotGraph built = build_iot_graph(sanitize_for_graph(res.transformed), res.specs, graph_options);
    res.graph = std::move(built.graph);
    res.warnings.insert(res.warnings.end(), built.warnings.begin(), built.warnings.end());
    res.timing_ms.emplace_back("build_graph", elapsed_ms(t));
  } else {
    t = clock::now();
    PairResult pairs = pair_relationships(d.headers(), b);
    for (const auto& f : pairs.failures) {
      res.warnings.push_back("pair (" + f.column_a + ", " + f.column_b + ") failed: " + f.message);
    }
    res.relations = std::move(pairs.relations);
    res.graph = build_relational_graph(res.relations);
    res.transformed = d;
    data_columns = d.headers();
    res.timing_ms.emplace_back("pair_relationships", elapsed_ms(t));
  }

  t = clock::now();
  res.rules = extract_ofds(res.graph);
  auto nn = not_null_rules(data_columns);
  res.rules.insert(res.rules.end(), nn.begin(), nn.end());
  res.timing_ms.emplace_back("extract_rules", elapsed_ms(t));
  return res;
}

std::string write_pipeline_outputs(const PipelineResult& r, const std::string& out_dir, const ManifestInfo& info) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const fs::path csv = dir / "transformed.csv";
  const fs::path nt = dir / "context.nt";
  const fs::path rules = dir / "rules.ofd";
  const fs::path manifest_path = dir / "manifest.json";

  write_atomically(csv, to_csv_string(r.transformed));
  write_atomically(nt, serialize(r.graph));
  write_atomically(rules, render_rule_file(r.rules));

  ordered_json m;
  m["input"] = info.input_path;
  m["class"] = class_name(r.dataset_class);
  m["backend"] = info.backend;
  m["seed"] = info.seed;
  ordered_json mapping = ordered_json::object();
  for (const auto& slot : mapping_slots()) {
    if (auto it = r.mapping.assignments.find(slot); it != r.mapping.assignments.end()) mapping[slot] = it->second;
  }
  m["mapping"] = mapping;
  m["value_columns"] = r.mapping.value_columns;
  m["unmapped_columns"] = r.mapping.unmapped;
  m["missing_concepts"] = r.mapping.missing;
  m["excluded_concepts"] = r.excluded;
  ordered_json specs = ordered_json::object();
  for (const auto& [model, s] : r.specs) specs[model] = {{"min", s.min_value}, {"max", s.max_value}, {"unit", s.unit}};
  m["sensor_specs"] = specs;
  ordered_json relations = ordered_json::array();
  for (const auto& rel : r.relations) {
    if (!rel.related) continue;
    relations.push_back({{"column_a", rel.column_a},
                         {"column_b", rel.column_b},
                         {"concept_a", rel.concept_a.value_or("")},
                         {"concept_b", rel.concept_b.value_or("")},
                         {"hierarchy", hierarchy_name(rel.hierarchy.value_or(Hierarchy::Independent))}});
  }
  m["relations"] = relations;
  m["warnings"] = r.warnings;
  m["outputs"] = {{"transformed", csv.string()}, {"graph", nt.string()}, {"rules", rules.string()}};
  m["triple_count"] = r.graph.size();
  m["rule_count"] = r.rules.size();
  ordered_json timing = ordered_json::object();
  for (const auto& [stage, ms] : r.timing_ms) timing[stage] = ms;
  m["timing_ms"] = timing;
  const std::string text = m.dump(2) + "\n";
  write_atomically(manifest_path, text);
  return text;
}

}  // namespace llmclean
