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

#include "llmclean/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "llmclean/error.hpp"
#include "llmclean/util.hpp"

namespace llmclean {

using json = nlohmann::json;

namespace {

constexpr double kTieEpsilon = 1e-12;

double f1_from_counts(std::size_t tp, std::size_t predicted, std::size_t truth) {
  if (predicted == 0 && truth == 0) return 1.0;
  if (predicted == 0 || truth == 0 || tp == 0) return 0.0;
  const double p = static_cast<double>(tp) / static_cast<double>(predicted);
  const double r = static_cast<double>(tp) / static_cast<double>(truth);
  return 2.0 * p * r / (p + r);
}

// Per-record view: for every label, the bitmask of prompts that answered it.
struct CompactRecord {
  std::vector<std::uint32_t> label_masks;
  std::vector<bool> in_truth;
  std::size_t truth_size = 0;
};

std::vector<CompactRecord> compact(const std::vector<EvalRecord>& records, const std::vector<std::string>& prompts) {
  std::vector<CompactRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    std::map<std::string, std::uint32_t> masks;
    for (std::size_t p = 0; p < prompts.size(); ++p) {
      auto it = rec.answers.find(prompts[p]);
      if (it == rec.answers.end()) {
        throw ArgumentError("record " + rec.instance_id + " has no answer for prompt " + prompts[p]);
      }
      for (const auto& label : it->second) masks[label] |= std::uint32_t{1} << p;
    }
    CompactRecord c;
    c.truth_size = rec.truth.size();
    for (const auto& [label, mask] : masks) {
      c.label_masks.push_back(mask);
      c.in_truth.push_back(rec.truth.count(label) > 0);
    }
    out.push_back(std::move(c));
  }
  return out;
}

double mean_f1(const std::vector<CompactRecord>& records, std::uint32_t subset, std::size_t threshold) {
  double total = 0.0;
  for (const auto& rec : records) {
    std::size_t predicted = 0, tp = 0;
    for (std::size_t i = 0; i < rec.label_masks.size(); ++i) {
      const auto votes = static_cast<std::size_t>(std::popcount(rec.label_masks[i] & subset));
      // Labels only answered outside the subset never enter the consensus.
      if (votes > 0 && votes >= threshold) {
        ++predicted;
        if (rec.in_truth[i]) ++tp;
      }
    }
    total += f1_from_counts(tp, predicted, rec.truth_size);
  }
  return total / static_cast<double>(records.size());
}

std::vector<std::string> subset_ids(const std::vector<std::string>& prompts, std::uint32_t mask) {
  std::vector<std::string> out;
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    if (mask & (std::uint32_t{1} << p)) out.push_back(prompts[p]);
  }
  return out;
}

LabelSet labels_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + " must be an array of labels");
  LabelSet out;
  for (const auto& v : j) {
    if (!v.is_string()) throw InputError(what + " must contain only strings");
    out.insert(v.get<std::string>());
  }
  return out;
}

}  // namespace

LabelSet find_consensus(const std::vector<LabelSet>& results, std::size_t threshold) {
  std::map<std::string, std::size_t> counts;
  for (const auto& set : results) {
    for (const auto& label : set) ++counts[label];
  }
  LabelSet out;
  for (const auto& [label, count] : counts) {
    if (count >= threshold) out.insert(label);
  }
  return out;
}

Scores score_micro_f1(const LabelSet& predicted, const LabelSet& truth) {
  std::size_t tp = 0;
  for (const auto& l : predicted) tp += truth.count(l);
  Scores s;
  if (predicted.empty()) {
    s.precision = truth.empty() ? 1.0 : 0.0;
  } else {
    s.precision = static_cast<double>(tp) / static_cast<double>(predicted.size());
  }
  if (truth.empty()) {
    s.recall = predicted.empty() ? 1.0 : 0.0;
  } else {
    s.recall = static_cast<double>(tp) / static_cast<double>(truth.size());
  }
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

double ensemble_f1(const std::vector<EvalRecord>& records, const std::vector<std::string>& prompts,
                   std::size_t threshold) {
  if (records.empty()) return 0.0;
  double total = 0.0;
  for (const auto& rec : records) {
    std::vector<LabelSet> results;
    for (const auto& p : prompts) {
      auto it = rec.answers.find(p);
      if (it == rec.answers.end()) throw ArgumentError("record " + rec.instance_id + " has no answer for prompt " + p);
      results.push_back(it->second);
    }
    total += score_micro_f1(find_consensus(results, threshold), rec.truth).f1;
  }
  return total / static_cast<double>(records.size());
}

std::vector<EnsembleConfig> find_best_ensemble(const std::vector<EvalRecord>& train,
                                               const std::vector<EvalRecord>& val,
                                               const std::vector<std::string>& prompt_ids, const SearchSpec& spec,
                                               std::size_t parallel) {
  if (train.empty()) throw ArgumentError("training records are empty");
  if (val.empty()) throw ArgumentError("validation records are empty");
  std::vector<std::string> prompts = prompt_ids;
  std::sort(prompts.begin(), prompts.end());
  prompts.erase(std::unique(prompts.begin(), prompts.end()), prompts.end());
  if (prompts.empty()) throw ArgumentError("prompt universe is empty");
  if (prompts.size() > kMaxEnsemblePrompts) {
    throw ArgumentError("at most " + std::to_string(kMaxEnsemblePrompts) + " prompts can be searched");
  }

  const auto train_c = compact(train, prompts);
  const auto val_c = compact(val, prompts);

  struct Candidate {
    std::size_t threshold;
    std::uint32_t mask;
  };
  std::vector<Candidate> space;
  const std::uint32_t full = (std::uint32_t{1} << prompts.size()) - 1;
  for (std::size_t t = 0; t <= spec.tr_range; ++t) {
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      if (t <= static_cast<std::size_t>(std::popcount(mask))) space.push_back({t, mask});
    }
  }

  // Phase 1: score on train, track the running maximum, keep max achievers.
  std::vector<double> train_f1(space.size());
  parallel_for(space.size(), parallel,
               [&](std::size_t i) { train_f1[i] = mean_f1(train_c, space[i].mask, space[i].threshold); });
  double best_eval = 0.0;
  for (double f : train_f1) best_eval = std::max(best_eval, f);
  std::vector<std::size_t> retained;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (train_f1[i] >= best_eval - kTieEpsilon) retained.push_back(i);
  }

  // Phase 2: re-score the retained configs on validation.
  std::vector<double> val_f1(retained.size());
  parallel_for(retained.size(), parallel, [&](std::size_t i) {
    const auto& c = space[retained[i]];
    val_f1[i] = mean_f1(val_c, c.mask, c.threshold);
  });
  double best_val = 0.0;
  for (double f : val_f1) best_val = std::max(best_val, f);

  std::vector<EnsembleConfig> out;
  for (std::size_t i = 0; i < retained.size(); ++i) {
    if (val_f1[i] < best_val - kTieEpsilon) continue;
    const auto& c = space[retained[i]];
    out.push_back({c.threshold, subset_ids(prompts, c.mask), train_f1[retained[i]], val_f1[i]});
  }
  std::sort(out.begin(), out.end(), [](const EnsembleConfig& a, const EnsembleConfig& b) {
    if (a.threshold != b.threshold) return a.threshold < b.threshold;
    return a.prompts < b.prompts;
  });
  return out;
}

std::vector<EvalRecord> parse_eval_records(std::string_view jsonl) {
  std::vector<EvalRecord> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(jsonl, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("instance") || !j.contains("truth") || !j.contains("answers")) {
      throw InputError(where + ": expected an object with instance, truth and answers");
    }
    EvalRecord rec;
    const json& inst = j["instance"];
    rec.instance_id = inst.is_string() ? inst.get<std::string>() : inst.dump();
    rec.truth = labels_from_json(j["truth"], where + ": truth");
    if (!j["answers"].is_object()) throw InputError(where + ": answers must be an object");
    for (const auto& [prompt, labels] : j["answers"].items()) {
      rec.answers[prompt] = labels_from_json(labels, where + ": answers." + prompt);
    }
    if (!out.empty()) {
      auto same_keys = [](const EvalRecord& a, const EvalRecord& b) {
        if (a.answers.size() != b.answers.size()) return false;
        for (auto ia = a.answers.begin(), ib = b.answers.begin(); ia != a.answers.end(); ++ia, ++ib) {
          if (ia->first != ib->first) return false;
        }
        return true;
      };
      if (!same_keys(out.front(), rec)) throw InputError(where + ": prompt ids differ from the first record");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string render_eval_records(const std::vector<EvalRecord>& records) {
  std::string out;
  for (const auto& rec : records) {
    json answers = json::object();
    for (const auto& [p, labels] : rec.answers) answers[p] = labels;
    json j = {{"instance", rec.instance_id}, {"truth", rec.truth}, {"answers", answers}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string configs_to_json(const std::vector<EnsembleConfig>& configs) {
  json arr = json::array();
  for (const auto& c : configs) {
    arr.push_back({{"threshold", c.threshold}, {"prompts", c.prompts}, {"train_f1", c.train_f1}, {"val_f1", c.val_f1}});
  }
  return json{{"configs", arr}}.dump(2) + "\n";
}

}  // namespace llmclean
