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

#include "llmclean/context_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "llmclean/error.hpp"
#include "llmclean/util.hpp"

namespace llmclean {

namespace {

struct ConceptInfo {
  Concept kind;
  std::string_view name;
  std::string_view type_iri;
};

constexpr ConceptInfo kConcepts[] = {
    {Concept::System, "System", "ssn:System"},
    {Concept::Device, "Device", "ssn:Device"},
    {Concept::SensingDevice, "SensingDevice", "ssn:SensingDevice"},
    {Concept::Sensor, "Sensor", "ssn:Sensor"},
    {Concept::ActuatingDevice, "ActuatingDevice", "ssn:ActuatingDevice"},
    {Concept::Location, "Location", "iot-lite:Location"},
    {Concept::Attribute, "Attribute", "iot-lite:Attribute"},
    {Concept::Measurement, "Measurement", "iot-context:Measurement"},
    {Concept::Metadata, "Metadata", "iot-lite:Metadata"},
};

constexpr std::string_view kVocabulary[] = {
    pred::kType,     pred::kAttachedTo, pred::kDeployedAt, pred::kForwardsTo, pred::kHasMetadata,
    pred::kMetaType, pred::kMetaValue,  pred::kPartOf,     pred::kLabel,      pred::kMonitoredBy,
    pred::kRelatedTo, pred::kMatches,   pred::kSimThreshold,
};

constexpr std::string_view kXsdDouble = "http://www.w3.org/2001/XMLSchema#double";

bool unreserved(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == '~';
}

std::string expand(std::string_view compact) {
  const auto colon = compact.find(':');
  if (colon != std::string_view::npos) {
    const auto& prefixes = default_prefixes();
    auto it = prefixes.find(std::string(compact.substr(0, colon)));
    if (it != prefixes.end()) return it->second + std::string(compact.substr(colon + 1));
  }
  return std::string(compact);
}

std::string compact(std::string_view full) {
  std::string best_prefix;
  std::size_t best_len = 0;
  for (const auto& [prefix, ns] : default_prefixes()) {
    if (full.size() >= ns.size() && full.compare(0, ns.size(), ns) == 0 && ns.size() > best_len) {
      best_prefix = prefix;
      best_len = ns.size();
    }
  }
  if (best_len == 0) return std::string(full);
  return best_prefix + ":" + std::string(full.substr(best_len));
}

std::string escape_literal(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string serialize_triple(const Triple& t) {
  std::string line = "<" + expand(t.subject) + "> <" + expand(t.predicate) + "> ";
  if (const auto* iri = std::get_if<Iri>(&t.object)) {
    line += "<" + expand(iri->value) + ">";
  } else if (const auto* s = std::get_if<std::string>(&t.object)) {
    line += "\"" + escape_literal(*s) + "\"";
  } else {
    line += "\"" + format_number(std::get<double>(t.object)) + "\"^^<" + std::string(kXsdDouble) + ">";
  }
  line += " .";
  return line;
}

class LineReader {
 public:
  LineReader(std::string_view line, std::size_t line_no) : s_(line), line_no_(line_no) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_no_) + ": " + msg, line_no_);
  }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at(char c) const { return pos_ < s_.size() && s_[pos_] == c; }
  bool consume(char c) {
    if (!at(c)) return false;
    ++pos_;
    return true;
  }
  bool done() const { return pos_ >= s_.size(); }

  std::string iri() {
    skip_ws();
    if (!at('<')) fail("expected '<'");
    const auto close = s_.find('>', pos_);
    if (close == std::string_view::npos) fail("unterminated IRI");
    std::string value(s_.substr(pos_ + 1, close - pos_ - 1));
    if (value.empty()) fail("empty IRI");
    pos_ = close + 1;
    return value;
  }

  Object object() {
    skip_ws();
    if (at('<')) return Iri{compact(iri())};
    if (!at('"')) fail("expected IRI or literal");
    ++pos_;
    std::string value;
    while (true) {
      if (done()) fail("unterminated literal");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (done()) fail("unterminated literal");
        char e = s_[pos_++];
        switch (e) {
          case '\\': value.push_back('\\'); break;
          case '"': value.push_back('"'); break;
          case 'n': value.push_back('\n'); break;
          case 'r': value.push_back('\r'); break;
          case 't': value.push_back('\t'); break;
          default: fail("invalid escape in literal");
        }
      } else {
        value.push_back(c);
      }
    }
    if (at('^')) {
      if (pos_ + 1 >= s_.size() || s_[pos_ + 1] != '^') fail("expected '^^'");
      pos_ += 2;
      const std::string datatype = iri();
      if (datatype != kXsdDouble) fail("unsupported datatype " + datatype);
      double v = 0;
      auto res = std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(v)) {
        fail("invalid numeric literal \"" + value + "\"");
      }
      return v;
    }
    return value;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

}  // namespace

std::string_view concept_name(Concept c) { return kConcepts[static_cast<int>(c)].name; }

std::string concept_type_iri(Concept c) { return std::string(kConcepts[static_cast<int>(c)].type_iri); }

std::optional<Concept> concept_from_type_iri(std::string_view iri) {
  for (const auto& info : kConcepts) {
    if (info.type_iri == iri) return info.kind;
  }
  return std::nullopt;
}

bool is_known_predicate(std::string_view iri) {
  return std::find(std::begin(kVocabulary), std::end(kVocabulary), iri) != std::end(kVocabulary);
}

const std::map<std::string, std::string>& default_prefixes() {
  static const std::map<std::string, std::string> kPrefixes = {
      {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
      {"ssn", "http://purl.oclc.org/NET/ssnx/ssn#"},
      {"iot-lite", "http://purl.oclc.org/NET/UNIS/fiware/iot-lite#"},
      {"iot-context", "https://w3id.org/iot-context#"},
      {"llmc", "https://w3id.org/llmclean#"},
  };
  return kPrefixes;
}

std::string entity_iri(std::string_view id) {
  static const char* kHex = "0123456789ABCDEF";
  std::string out = "llmc:";
  for (unsigned char c : id) {
    if (unreserved(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string entity_id(std::string_view iri) {
  std::string_view local = iri;
  if (local.rfind("llmc:", 0) == 0) local.remove_prefix(5);
  std::string out;
  for (std::size_t i = 0; i < local.size(); ++i) {
    if (local[i] == '%' && i + 2 < local.size()) {
      unsigned v = 0;
      auto res = std::from_chars(local.data() + i + 1, local.data() + i + 3, v, 16);
      if (res.ec == std::errc() && res.ptr == local.data() + i + 3) {
        out.push_back(static_cast<char>(v));
        i += 2;
        continue;
      }
    }
    out.push_back(local[i]);
  }
  return out;
}

bool ContextGraph::add(Triple t) {
  if (t.subject.empty()) throw ModelError("triple with empty subject");
  if (t.predicate.empty()) throw ModelError("triple with empty predicate");
  if (!is_known_predicate(t.predicate)) throw ModelError("predicate outside vocabulary: " + t.predicate);
  if (const auto* d = std::get_if<double>(&t.object); d && !std::isfinite(*d)) {
    throw ModelError("non-finite numeric literal");
  }
  return triples_.insert(std::move(t)).second;
}

std::vector<Object> ContextGraph::objects(std::string_view subject, std::string_view predicate) const {
  std::vector<Object> out;
  auto it = triples_.lower_bound(Triple{std::string(subject), std::string(predicate), Iri{}});
  for (; it != triples_.end() && it->subject == subject && it->predicate == predicate; ++it) {
    out.push_back(it->object);
  }
  return out;
}

void add_entity_to(ContextGraph& g, Concept kind, std::string_view id,
                   const std::map<std::string, Object>& attrs) {
  if (id.empty()) throw ArgumentError("entity id must not be empty");
  const std::string subject = entity_iri(id);
  g.add({subject, std::string(pred::kType), Iri{concept_type_iri(kind)}});
  for (const auto& [name, value] : attrs) {
    g.add({subject, "llmc:" + name, value});
  }
}

ContextGraph add_entity(const ContextGraph& g, Concept kind, std::string_view id,
                        const std::map<std::string, Object>& attrs) {
  ContextGraph out = g;
  add_entity_to(out, kind, id, attrs);
  return out;
}

std::string serialize(const ContextGraph& g) {
  std::vector<std::string> lines;
  lines.reserve(g.size());
  for (const auto& t : g.triples()) lines.push_back(serialize_triple(t));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

ContextGraph deserialize(std::string_view text) {
  ContextGraph g;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    LineReader r(line, line_no);
    Triple t;
    t.subject = compact(r.iri());
    t.predicate = compact(r.iri());
    if (!is_known_predicate(t.predicate)) r.fail("predicate outside vocabulary: " + t.predicate);
    t.object = r.object();
    r.skip_ws();
    if (!r.consume('.')) r.fail("expected terminating ' .'");
    r.skip_ws();
    if (!r.done()) r.fail("trailing characters after '.'");
    try {
      g.add(std::move(t));
    } catch (const ModelError& e) {
      r.fail(e.what());
    }
  }
  return g;
}

std::optional<std::string_view> canonical_column(Concept c) {
  switch (c) {
    case Concept::System: return columns::kSystem;
    case Concept::Device: return columns::kDevice;
    case Concept::SensingDevice: return columns::kSensingDevice;
    case Concept::Sensor: return columns::kSensor;
    case Concept::Location: return columns::kLocation;
    default: return std::nullopt;
  }
}

namespace {

struct GraphIndex {
  std::map<std::string, std::set<Concept>> types;
  std::map<std::string, std::string> labels;

  bool has(const std::string& node, Concept c) const {
    auto it = types.find(node);
    return it != types.end() && it->second.count(c) > 0;
  }
  std::string label(const std::string& node) const {
    auto it = labels.find(node);
    return it != labels.end() ? it->second : entity_id(node);
  }
  // First structural concept of the node, in enum order.
  std::optional<Concept> structural(const std::string& node) const {
    auto it = types.find(node);
    if (it == types.end()) return std::nullopt;
    for (Concept c : it->second) {
      if (canonical_column(c)) return c;
    }
    return std::nullopt;
  }
};

[[noreturn]] void model_fail(const std::string& msg, const Triple& t) {
  throw ModelError(msg + ": " + serialize_triple(t));
}

GraphIndex index_graph(const ContextGraph& g) {
  GraphIndex idx;
  for (const auto& t : g.triples()) {
    if (t.predicate != pred::kType) continue;
    const auto* iri = std::get_if<Iri>(&t.object);
    if (!iri) model_fail("rdf:type object must be an IRI", t);
    auto c = concept_from_type_iri(iri->value);
    if (!c) model_fail("rdf:type names no meta-model concept", t);
    idx.types[t.subject].insert(*c);
  }
  for (const auto& t : g.triples()) {
    if (t.predicate == pred::kType) continue;
    if (!idx.types.count(t.subject)) model_fail("entity has no rdf:type", t);
    auto need_iri = [&](std::initializer_list<Concept> subj, std::initializer_list<Concept> obj) {
      const auto* o = std::get_if<Iri>(&t.object);
      if (!o) model_fail("edge object must be an IRI", t);
      if (!idx.types.count(o->value)) model_fail("edge target has no rdf:type", t);
      bool subj_ok = subj.size() == 0, obj_ok = obj.size() == 0;
      for (Concept c : subj) subj_ok = subj_ok || idx.has(t.subject, c);
      for (Concept c : obj) obj_ok = obj_ok || idx.has(o->value, c);
      return subj_ok && obj_ok;
    };
    const std::string& p = t.predicate;
    if (p == pred::kAttachedTo) {
      const auto* o = std::get_if<Iri>(&t.object);
      const bool ok = need_iri({}, {}) &&
                      ((idx.has(t.subject, Concept::Sensor) && idx.has(o->value, Concept::SensingDevice)) ||
                       (idx.has(t.subject, Concept::SensingDevice) && idx.has(o->value, Concept::Device)));
      if (!ok) model_fail("attachedTo must link Sensor->SensingDevice or SensingDevice->Device", t);
    } else if (p == pred::kDeployedAt) {
      if (!need_iri({Concept::SensingDevice}, {Concept::Location})) {
        model_fail("deployedAt must link SensingDevice->Location", t);
      }
    } else if (p == pred::kForwardsTo || p == pred::kMonitoredBy) {
      if (!need_iri({Concept::Device}, {Concept::Device})) model_fail(p + " must link Device->Device", t);
    } else if (p == pred::kHasMetadata) {
      if (!need_iri({Concept::Sensor}, {Concept::Metadata})) model_fail("hasMetadata must link Sensor->Metadata", t);
    } else if (p == pred::kPartOf) {
      need_iri({}, {});
    } else if (p == pred::kRelatedTo || p == pred::kMatches) {
      if (!need_iri({Concept::Attribute}, {Concept::Attribute})) model_fail(p + " must link Attribute->Attribute", t);
    } else if (p == pred::kMetaType) {
      if (!idx.has(t.subject, Concept::Metadata) || !std::holds_alternative<std::string>(t.object)) {
        model_fail("metaType needs a Metadata subject and a string literal", t);
      }
    } else if (p == pred::kMetaValue) {
      if (!idx.has(t.subject, Concept::Metadata) || !std::holds_alternative<double>(t.object)) {
        model_fail("metaValue needs a Metadata subject and a numeric literal", t);
      }
    } else if (p == pred::kLabel) {
      if (!std::holds_alternative<std::string>(t.object)) model_fail("label must be a string literal", t);
      idx.labels.emplace(t.subject, std::get<std::string>(t.object));
    } else if (p == pred::kSimThreshold) {
      const auto* d = std::get_if<double>(&t.object);
      if (!idx.has(t.subject, Concept::Attribute) || !d || *d < 0.0 || *d > 1.0) {
        model_fail("simThreshold needs an Attribute subject and a number in [0, 1]", t);
      }
      if (std::fabs(*d * 100.0 - std::round(*d * 100.0)) > 1e-9) {
        model_fail("simThreshold must be a whole percentage", t);
      }
    }
  }
  return idx;
}

ColumnRef col(std::string_view alias, std::string_view column) {
  return ColumnRef{std::string(alias), std::string(column)};
}

Predicate eq(Operand a, Operand b) { return Predicate{PredicateOp::EQ, std::move(a), std::move(b), std::nullopt}; }
Predicate iq(Operand a, Operand b) { return Predicate{PredicateOp::IQ, std::move(a), std::move(b), std::nullopt}; }

OfdRule fd_rule(DependencyKind kind, std::string id, std::string_view det, std::string_view dep,
                std::optional<std::string> det_value) {
  OfdRule r;
  r.id = std::move(id);
  r.kind = kind;
  r.aliases = {"t1", "t2"};
  if (det_value) r.predicates.push_back(eq(col("t1", det), Literal{*det_value}));
  r.predicates.push_back(eq(col("t1", det), col("t2", det)));
  r.predicates.push_back(iq(col("t1", dep), col("t2", dep)));
  return r;
}

std::optional<double> parse_number(std::string_view s) {
  const std::string t = trim(s);
  double v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

void check_graph(const ContextGraph& g) { index_graph(g); }

std::vector<OfdRule> extract_ofds(const ContextGraph& g) {
  const GraphIndex idx = index_graph(g);
  std::map<std::string, OfdRule> by_id;
  auto emit = [&](OfdRule r) { by_id.emplace(r.id, std::move(r)); };

  // Sensor -> SensingDevice -> Device chains.
  std::multimap<std::string, std::string> sd_to_device;
  for (const auto& t : g.triples()) {
    if (t.predicate != pred::kAttachedTo) continue;
    const auto& o = std::get<Iri>(t.object).value;
    if (idx.has(t.subject, Concept::SensingDevice) && idx.has(o, Concept::Device)) {
      sd_to_device.emplace(t.subject, o);
    }
  }
  std::set<std::pair<Concept, Concept>> hierarchy;
  std::map<std::string, std::map<std::string, std::set<double>>> metadata;  // sensor -> type -> values

  for (const auto& t : g.triples()) {
    const std::string& p = t.predicate;
    if (p == pred::kAttachedTo) {
      const auto& o = std::get<Iri>(t.object).value;
      if (idx.has(t.subject, Concept::Sensor) && idx.has(o, Concept::SensingDevice)) {
        auto [lo, hi] = sd_to_device.equal_range(o);
        for (auto it = lo; it != hi; ++it) {
          const std::string sensor = idx.label(t.subject);
          emit(fd_rule(DependencyKind::DeviceLink, "device_link:" + sensor + "->" + idx.label(it->second),
                       columns::kSensor, columns::kDevice, sensor));
        }
      }
      if (idx.has(t.subject, Concept::SensingDevice) && idx.has(o, Concept::Device)) {
        hierarchy.emplace(Concept::SensingDevice, Concept::Device);
      }
    } else if (p == pred::kDeployedAt) {
      const std::string sd = idx.label(t.subject);
      emit(fd_rule(DependencyKind::Locality,
                   "locality:" + sd + "->" + idx.label(std::get<Iri>(t.object).value),
                   columns::kSensingDevice, columns::kLocation, sd));
    } else if (p == pred::kPartOf) {
      const auto& o = std::get<Iri>(t.object).value;
      if (idx.has(t.subject, Concept::Attribute) || idx.has(o, Concept::Attribute)) {
        const std::string det = idx.label(t.subject);
        const std::string dep = idx.label(o);
        emit(fd_rule(DependencyKind::Denial, "denial:" + det + "->" + dep, det, dep, std::nullopt));
      } else {
        auto a = idx.structural(t.subject);
        auto b = idx.structural(o);
        if (a && b) hierarchy.emplace(*a, *b);
      }
    } else if (p == pred::kMatches) {
      const auto& o = std::get<Iri>(t.object).value;
      auto threshold = [&](const std::string& node) {
        auto vals = g.objects(node, pred::kSimThreshold);
        return vals.empty() ? kDefaultSimThreshold : std::get<double>(vals.front());
      };
      const std::string a = idx.label(t.subject);
      const std::string b = idx.label(o);
      OfdRule r;
      r.id = "matching:" + a + "->" + b;
      r.kind = DependencyKind::Matching;
      r.aliases = {"t1", "t2"};
      r.predicates.push_back({PredicateOp::SIM, col("t1", a), col("t2", a), threshold(t.subject)});
      r.predicates.push_back({PredicateOp::SIM, col("t1", b), col("t2", b), threshold(o)});
      emit(std::move(r));
    } else if (p == pred::kForwardsTo) {
      const std::string from = idx.label(t.subject);
      const std::string to = idx.label(std::get<Iri>(t.object).value);
      OfdRule r;
      r.id = "temporal:" + from + "->" + to;
      r.kind = DependencyKind::Temporal;
      r.aliases = {"t1", "t2"};
      r.predicates.push_back(eq(col("t1", columns::kDevice), Literal{from}));
      r.predicates.push_back(eq(col("t2", columns::kDevice), Literal{to}));
      emit(std::move(r));
    } else if (p == pred::kHasMetadata) {
      const auto& meta = std::get<Iri>(t.object).value;
      auto types = g.objects(meta, pred::kMetaType);
      auto values = g.objects(meta, pred::kMetaValue);
      if (types.size() != 1 || values.size() != 1) model_fail("metadata needs one metaType and one metaValue", t);
      metadata[t.subject][std::get<std::string>(types.front())].insert(std::get<double>(values.front()));
    }
  }

  for (const auto& [sensor_node, entries] : metadata) {
    auto min_it = entries.find(std::string(columns::kMinValue));
    auto max_it = entries.find(std::string(columns::kMaxValue));
    if (min_it == entries.end() || max_it == entries.end()) continue;
    if (min_it->second.size() != 1 || max_it->second.size() != 1) {
      throw ModelError("conflicting capability metadata for " + sensor_node);
    }
    SensorSpec spec{sensor_model_name(idx.label(sensor_node)), *min_it->second.begin(),
                    *max_it->second.begin(), ""};
    if (spec.min_value > spec.max_value) throw ModelError("MinValue exceeds MaxValue for " + sensor_node);
    emit(make_capability_rule(idx.label(sensor_node), spec));
  }

  for (const auto& [det, dep] : hierarchy) {
    emit(fd_rule(DependencyKind::Denial,
                 "denial:" + std::string(concept_name(det)) + "->" + std::string(concept_name(dep)),
                 *canonical_column(det), *canonical_column(dep), std::nullopt));
  }

  std::vector<OfdRule> rules;
  rules.reserve(by_id.size());
  for (auto& [id, r] : by_id) rules.push_back(std::move(r));
  std::stable_sort(rules.begin(), rules.end(), [](const OfdRule& a, const OfdRule& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.id < b.id;
  });
  return rules;
}

OfdRule make_capability_rule(std::string_view sensor, const SensorSpec& spec,
                             std::string_view sensor_column) {
  OfdRule r;
  r.id = "capability:" + std::string(sensor);
  r.kind = DependencyKind::Capability;
  r.aliases = {"t1"};
  r.predicates.push_back(eq(col("t1", sensor_column), Literal{std::string(sensor)}));
  r.predicates.push_back(eq(col("t1", columns::kMinValue), Literal{format_number(spec.min_value)}));
  r.predicates.push_back(eq(col("t1", columns::kMaxValue), Literal{format_number(spec.max_value)}));
  return r;
}

std::optional<CapabilityBinding> capability_binding(const OfdRule& rule) {
  if (rule.kind != DependencyKind::Capability || rule.aliases.size() != 1) return std::nullopt;
  CapabilityBinding b;
  bool have_sensor = false;
  for (const auto& p : rule.predicates) {
    const auto* c = std::get_if<ColumnRef>(&p.left);
    const auto* lit = std::get_if<Literal>(&p.right);
    if (p.op != PredicateOp::EQ || !c || !lit) return std::nullopt;
    if (iequals(c->column, columns::kMinValue) || iequals(c->column, columns::kMaxValue)) {
      auto v = parse_number(lit->value);
      if (!v) return std::nullopt;
      (iequals(c->column, columns::kMinValue) ? b.min_value : b.max_value) = *v;
    } else {
      if (have_sensor) return std::nullopt;
      have_sensor = true;
      b.sensor_column = c->column;
      b.sensor = lit->value;
    }
  }
  if (!have_sensor) return std::nullopt;
  return b;
}

}  // namespace llmclean
