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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace llmclean {

enum class ResponseFormat { YesNo, SingleLabel, LabelList };

struct FewShotExample {
  std::string input;
  std::string output;
  bool operator==(const FewShotExample&) const = default;
};

struct PromptTemplate {
  std::string id;
  std::vector<FewShotExample> few_shot;
  std::string task_text;  // `{name}` slots
  ResponseFormat response_format = ResponseFormat::YesNo;
  bool operator==(const PromptTemplate&) const = default;
};

// Instruction line appended after the task text.
std::string_view format_instruction(ResponseFormat f);

// Distinct `{identifier}` slots in order of first appearance.
std::vector<std::string> template_placeholders(std::string_view text);

// Few-shot block, task text with substitutions, then the format instruction.
// Throws TemplateError naming the first unbound placeholder.
std::string render_prompt(const PromptTemplate& t, const std::map<std::string, std::string>& bindings);

// bool for YesNo, optional label for SingleLabel (nullopt = NONE), label list
// for LabelList.
using Parsed = std::variant<bool, std::optional<std::string>, std::vector<std::string>>;

struct Completion {
  std::string raw_text;
  Parsed parsed;
};

// First token must be yes/no (case-insensitive). Throws FormatError.
bool parse_yes_no(std::string_view raw);
// First non-empty line with quotes and a trailing period stripped; "NONE" and
// empty answers yield nullopt.
std::optional<std::string> parse_single_label(std::string_view raw);
// Split on commas and newlines, trimmed, empties and NONE dropped, duplicates
// removed keeping the first occurrence.
std::vector<std::string> parse_label_list(std::string_view raw);
Completion parse_completion(std::string raw, ResponseFormat f);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

class Backend {
 public:
  virtual ~Backend() = default;
  // Raw completion text for a rendered prompt. Must be safe to call from
  // several threads at once.
  virtual std::string complete_text(const std::string& prompt) = 0;
  // Short human-readable description for run manifests (never a secret).
  virtual std::string describe() const = 0;
  // Number of concurrent calls worth issuing.
  virtual std::size_t parallelism() const { return 1; }
};

Completion complete(Backend& b, const std::string& prompt, ResponseFormat f);

// Completes every prompt, issuing up to b.parallelism() requests at a time.
// Results are in input order; the first error is rethrown.
std::vector<Completion> complete_all(Backend& b, const std::vector<std::string>& prompts, ResponseFormat f);

// prompt hash -> (prompt, response). Thread-safe.
class Cassette {
 public:
  Cassette() = default;
  Cassette(const Cassette& o);
  Cassette& operator=(const Cassette& o);

  // Throws InputError for unreadable files or malformed JSON.
  static Cassette load(const std::string& path);
  static Cassette from_json(std::string_view json);

  std::optional<std::string> lookup(const std::string& prompt) const;
  void insert(const std::string& prompt, const std::string& response);
  std::size_t size() const;

  // Keys sorted, two-space indentation.
  std::string to_json() const;
  void save(const std::string& path) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::pair<std::string, std::string>> entries_;
};

class ReplayBackend : public Backend {
 public:
  // A strict backend throws ReplayError on a miss; a lenient one answers "".
  ReplayBackend(Cassette cassette, bool strict = true);
  static std::unique_ptr<ReplayBackend> from_file(const std::string& path, bool strict = true);

  std::string complete_text(const std::string& prompt) override;
  std::string describe() const override;
  std::size_t parallelism() const override { return 4; }

  const Cassette& cassette() const { return cassette_; }

 private:
  Cassette cassette_;
  bool strict_;
  std::string source_;
};

// Answers through a callable. Used for scripted fixtures.
class FunctionBackend : public Backend {
 public:
  explicit FunctionBackend(std::function<std::string(const std::string&)> fn, std::string name = "function")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  std::string complete_text(const std::string& prompt) override { return fn_(prompt); }
  std::string describe() const override { return name_; }

 private:
  std::function<std::string(const std::string&)> fn_;
  std::string name_;
};

// Forwards to another backend and records every exchange into a cassette.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(Backend& inner, Cassette& sink) : inner_(inner), sink_(sink) {}
  std::string complete_text(const std::string& prompt) override;
  std::string describe() const override { return "recording(" + inner_.describe() + ")"; }
  std::size_t parallelism() const override { return inner_.parallelism(); }

 private:
  Backend& inner_;
  Cassette& sink_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal POST interface so the remote backend can be tested without a
// network. Implementations throw TransportError when no response arrives.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                            const std::string& body, std::chrono::milliseconds timeout) = 0;
};

// cpp-httplib transport (HTTP and HTTPS).
std::shared_ptr<HttpTransport> make_http_transport();

using LogSink = std::function<void(std::string_view)>;

inline constexpr const char* kApiKeyEnv = "LLMCLEAN_API_KEY";
inline constexpr const char* kEndpointEnv = "LLMCLEAN_ENDPOINT";
inline constexpr const char* kDefaultEndpoint = "https://api.openai.com/v1/chat/completions";

struct RemoteConfig {
  std::string endpoint;  // empty: $LLMCLEAN_ENDPOINT, else kDefaultEndpoint
  std::string model = "gpt-3.5-turbo";
  std::optional<std::string> token;  // unset: $LLMCLEAN_API_KEY
  std::size_t max_parallel = 4;
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  double temperature = 0.0;
};

// OpenAI-compatible chat-completions client. Throws AuthError at construction
// when no token is available and ArgumentError for a non-positive timeout.
// A single complete_text call never takes longer than timeout * max_attempts,
// including the wait for a free request slot.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig cfg, std::shared_ptr<HttpTransport> transport = nullptr,
                         LogSink log = {});

  std::string complete_text(const std::string& prompt) override;
  std::string describe() const override;
  std::size_t parallelism() const override { return cfg_.max_parallel; }

 private:
  void log(const std::string& line) const;

  RemoteConfig cfg_;
  std::string token_;
  std::shared_ptr<HttpTransport> transport_;
  LogSink log_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

// Picks k examples: the one with the most labels, the one with the fewest,
// then a seeded draw from the rest. Throws ArgumentError when k > |train|.
struct LabeledExample {
  std::string input;
  std::vector<std::string> labels;
  bool operator==(const LabeledExample&) const = default;
};
std::vector<LabeledExample> select_few_shot(const std::vector<LabeledExample>& train, std::size_t k,
                                            std::uint64_t seed);
// Output text is the comma-joined labels, or NONE.
FewShotExample to_few_shot(const LabeledExample& e);

// Asks the backend for n paraphrases of base.task_text. Each variant keeps
// base's few-shot examples and response format; ids are `<base id>_v<i>`.
// Paraphrases that change the placeholder set are dropped, as are
// duplicates. Throws FormatError when nothing usable comes back.
std::vector<PromptTemplate> generate_prompt_variants(Backend& b, const PromptTemplate& base, std::size_t n);
// The request sent by generate_prompt_variants.
std::string variant_request(const PromptTemplate& base, std::size_t n);

}  // namespace llmclean
