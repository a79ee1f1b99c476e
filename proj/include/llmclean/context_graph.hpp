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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "llmclean/rule.hpp"

namespace llmclean {

enum class Concept {
  System,
  Device,
  SensingDevice,
  Sensor,
  ActuatingDevice,
  Location,
  Attribute,
  Measurement,
  Metadata
};

std::string_view concept_name(Concept c);
// Type IRI in compact form, e.g. "ssn:Sensor".
std::string concept_type_iri(Concept c);
std::optional<Concept> concept_from_type_iri(std::string_view iri);

// Fixed predicate vocabulary.
namespace pred {
inline constexpr std::string_view kType = "rdf:type";
inline constexpr std::string_view kAttachedTo = "llmc:attachedTo";
inline constexpr std::string_view kDeployedAt = "llmc:deployedAt";
inline constexpr std::string_view kForwardsTo = "llmc:forwardsTo";
inline constexpr std::string_view kHasMetadata = "llmc:hasMetadata";
inline constexpr std::string_view kMetaType = "llmc:metaType";
inline constexpr std::string_view kMetaValue = "llmc:metaValue";
inline constexpr std::string_view kPartOf = "llmc:partOf";
inline constexpr std::string_view kLabel = "llmc:label";
inline constexpr std::string_view kMonitoredBy = "llmc:monitoredBy";
inline constexpr std::string_view kRelatedTo = "llmc:relatedTo";
inline constexpr std::string_view kMatches = "llmc:matches";
inline constexpr std::string_view kSimThreshold = "llmc:simThreshold";
}  // namespace pred

bool is_known_predicate(std::string_view iri);

struct Iri {
  std::string value;
  auto operator<=>(const Iri&) const = default;
};

// IRI, string literal, or numeric literal.
using Object = std::variant<Iri, std::string, double>;

struct Triple {
  std::string subject;
  std::string predicate;
  Object object;
  auto operator<=>(const Triple&) const = default;
};

// Prefix -> namespace IRI used when writing and reading N-Triples.
const std::map<std::string, std::string>& default_prefixes();

// Compact IRI for an entity id: "llmc:" + percent-encoded id.
std::string entity_iri(std::string_view id);
// Inverse of entity_iri for llmc: IRIs.
std::string entity_id(std::string_view iri);

class ContextGraph {
 public:
  // Throws ModelError for an empty subject/predicate or a predicate outside
  // the vocabulary. Returns false when the triple was already present.
  bool add(Triple t);
  bool contains(const Triple& t) const { return triples_.count(t) > 0; }

  const std::set<Triple>& triples() const { return triples_; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  const std::map<std::string, std::string>& prefixes() const { return default_prefixes(); }

  // Objects of (subject, predicate, *).
  std::vector<Object> objects(std::string_view subject, std::string_view predicate) const;

  bool operator==(const ContextGraph& o) const { return triples_ == o.triples_; }

 private:
  std::set<Triple> triples_;
};

// Adds the rdf:type triple plus one triple per attribute (`llmc:<name>`).
ContextGraph add_entity(const ContextGraph& g, Concept kind, std::string_view id,
                        const std::map<std::string, Object>& attrs = {});
// In-place variant used by the graph builders.
void add_entity_to(ContextGraph& g, Concept kind, std::string_view id,
                   const std::map<std::string, Object>& attrs = {});

// One `<s> <p> <o> .` line per triple, lines sorted lexicographically.
std::string serialize(const ContextGraph& g);
// Throws ParseError carrying the 1-based line number.
ContextGraph deserialize(std::string_view text);

struct SensorSpec {
  std::string sensor_model;
  double min_value = 0.0;
  double max_value = 0.0;
  std::string unit;
  bool operator==(const SensorSpec&) const = default;
};

// Canonical column names the IoT workflow produces and the extracted rules
// reference.
namespace columns {
inline constexpr std::string_view kSystem = "system";
inline constexpr std::string_view kDevice = "device";
inline constexpr std::string_view kSensingDevice = "sensingdevice";
inline constexpr std::string_view kSensor = "sensor";
inline constexpr std::string_view kLocation = "location";
inline constexpr std::string_view kValue = "value";
inline constexpr std::string_view kTimestamp = "timestamp";
inline constexpr std::string_view kMinValue = "MinValue";
inline constexpr std::string_view kMaxValue = "MaxValue";
}  // namespace columns

// Canonical column for a structural IoT concept, if it has one.
std::optional<std::string_view> canonical_column(Concept c);

// Derives OFD rules from the graph. Rule order: kind (denial, matching,
// device_link, temporal, locality, capability), then id. Throws ModelError
// naming the first triple that violates the meta-model.
std::vector<OfdRule> extract_ofds(const ContextGraph& g);

// Validates meta-model invariants without extracting rules.
void check_graph(const ContextGraph& g);

// Capability rules carry their bounds as literal predicates on the MinValue
// and MaxValue pseudo-columns; this reads them back.
struct CapabilityBinding {
  std::string sensor_column;
  std::string sensor;
  std::optional<double> min_value;
  std::optional<double> max_value;
};
std::optional<CapabilityBinding> capability_binding(const OfdRule& rule);
OfdRule make_capability_rule(std::string_view sensor, const SensorSpec& spec,
                             std::string_view sensor_column = columns::kSensor);

}  // namespace llmclean
