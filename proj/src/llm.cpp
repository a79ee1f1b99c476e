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

#include "llmclean/llm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "llmclean/error.hpp"
#include "llmclean/util.hpp"

namespace llmclean {

using json = nlohmann::json;

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Calls fn(name, begin, end) for every `{identifier}` slot in text.
template <typename Fn>
void scan_placeholders(std::string_view text, Fn fn) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' || i + 1 >= text.size() || !ident_start(text[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < text.size() && ident_char(text[j])) ++j;
    if (j < text.size() && text[j] == '}') {
      fn(std::string(text.substr(i + 1, j - i - 1)), i, j + 1);
      i = j;
    }
  }
}

std::string strip_quotes(std::string s) {
  s = trim(s);
  while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'') ||
                           (s.front() == '`' && s.back() == '`'))) {
    s = trim(std::string_view(s).substr(1, s.size() - 2));
  }
  return s;
}

bool is_none(std::string_view s) { return iequals(s, "NONE"); }

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(secret, pos)) != std::string::npos) {
    text.replace(pos, secret.size(), "[REDACTED]");
    pos += 10;
  }
  return text;
}

class HttplibTransport : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                    const std::string& body, std::chrono::milliseconds timeout) override {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw TransportError("endpoint is not an absolute URL: " + url, false);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()), true);
    return HttpResponse{res->status, res->body};
  }
};

}  // namespace

std::string_view format_instruction(ResponseFormat f) {
  switch (f) {
    case ResponseFormat::YesNo: return "Answer with only yes or no.";
    case ResponseFormat::SingleLabel: return "Answer with only the label, or NONE if no label applies.";
    case ResponseFormat::LabelList: return "Answer with a comma-separated list of labels, or NONE if the list is empty.";
  }
  return {};
}

std::vector<std::string> template_placeholders(std::string_view text) {
  std::vector<std::string> out;
  scan_placeholders(text, [&](std::string name, std::size_t, std::size_t) {
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
  });
  return out;
}

std::string render_prompt(const PromptTemplate& t, const std::map<std::string, std::string>& bindings) {
  std::string out;
  for (const auto& ex : t.few_shot) {
    out += "Example: " + ex.input + "\nAnswer: " + ex.output + "\n";
  }
  if (!t.few_shot.empty()) out += "\n";

  std::string task;
  std::size_t last = 0;
  scan_placeholders(t.task_text, [&](const std::string& name, std::size_t begin, std::size_t end) {
    auto it = bindings.find(name);
    if (it == bindings.end()) throw TemplateError("unbound placeholder {" + name + "} in template " + t.id);
    task.append(t.task_text, last, begin - last);
    task += it->second;
    last = end;
  });
  task.append(t.task_text, last, std::string::npos);

  out += task;
  out += "\n";
  out += format_instruction(t.response_format);
  return out;
}

bool parse_yes_no(std::string_view raw) {
  std::size_t i = 0;
  while (i < raw.size() && (std::isspace(static_cast<unsigned char>(raw[i])) || raw[i] == '"' ||
                            raw[i] == '\'' || raw[i] == '*')) {
    ++i;
  }
  std::size_t j = i;
  while (j < raw.size() && std::isalpha(static_cast<unsigned char>(raw[j]))) ++j;
  const std::string token = to_lower(raw.substr(i, j - i));
  if (token == "yes") return true;
  if (token == "no") return false;
  throw FormatError("expected a yes/no answer", std::string(raw));
}

std::optional<std::string> parse_single_label(std::string_view raw) {
  for (const auto& line : split(raw, '\n')) {
    std::string s = strip_quotes(line);
    while (!s.empty() && s.back() == '.') s.pop_back();
    s = strip_quotes(s);
    if (s.empty()) continue;
    if (is_none(s)) return std::nullopt;
    return s;
  }
  return std::nullopt;
}

std::vector<std::string> parse_label_list(std::string_view raw) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& line : split(raw, '\n')) {
    for (const auto& part : split(line, ',')) {
      std::string s = strip_quotes(part);
      if (s.empty() || is_none(s)) continue;
      if (seen.insert(s).second) out.push_back(std::move(s));
    }
  }
  return out;
}

Completion parse_completion(std::string raw, ResponseFormat f) {
  Completion c;
  switch (f) {
    case ResponseFormat::YesNo: c.parsed = parse_yes_no(raw); break;
    case ResponseFormat::SingleLabel: c.parsed = parse_single_label(raw); break;
    case ResponseFormat::LabelList: c.parsed = parse_label_list(raw); break;
  }
  c.raw_text = std::move(raw);
  return c;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

Completion complete(Backend& b, const std::string& prompt, ResponseFormat f) {
  return parse_completion(b.complete_text(prompt), f);
}

std::vector<Completion> complete_all(Backend& b, const std::vector<std::string>& prompts, ResponseFormat f) {
  std::vector<Completion> out(prompts.size());
  parallel_for(prompts.size(), b.parallelism(), [&](std::size_t i) { out[i] = complete(b, prompts[i], f); });
  return out;
}

// --- Cassette ---------------------------------------------------------------

Cassette::Cassette(const Cassette& o) {
  std::lock_guard lock(o.mu_);
  entries_ = o.entries_;
}

Cassette& Cassette::operator=(const Cassette& o) {
  if (this == &o) return *this;
  std::scoped_lock lock(mu_, o.mu_);
  entries_ = o.entries_;
  return *this;
}

Cassette Cassette::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed cassette: ") + e.what());
  }
  if (!j.is_object()) throw InputError("malformed cassette: top level must be an object");
  Cassette c;
  for (const auto& [key, entry] : j.items()) {
    if (!entry.is_object() || !entry.contains("response") || !entry["response"].is_string()) {
      throw InputError("malformed cassette entry " + key);
    }
    std::string prompt = entry.value("prompt", "");
    c.entries_[key] = {std::move(prompt), entry["response"].get<std::string>()};
  }
  return c;
}

Cassette Cassette::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open cassette " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::optional<std::string> Cassette::lookup(const std::string& prompt) const {
  const std::string key = sha256_hex(prompt);
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.second;
}

void Cassette::insert(const std::string& prompt, const std::string& response) {
  const std::string key = sha256_hex(prompt);
  std::lock_guard lock(mu_);
  entries_[key] = {prompt, response};
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::string Cassette::to_json() const {
  json j = json::object();
  {
    std::lock_guard lock(mu_);
    for (const auto& [key, entry] : entries_) {
      j[key] = {{"prompt", entry.first}, {"response", entry.second}};
    }
  }
  return j.dump(2) + "\n";
}

void Cassette::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write cassette " + path);
  out << to_json();
}

// --- Backends ---------------------------------------------------------------

ReplayBackend::ReplayBackend(Cassette cassette, bool strict)
    : cassette_(std::move(cassette)), strict_(strict), source_("memory") {}

std::unique_ptr<ReplayBackend> ReplayBackend::from_file(const std::string& path, bool strict) {
  auto b = std::make_unique<ReplayBackend>(Cassette::load(path), strict);
  b->source_ = path;
  return b;
}

std::string ReplayBackend::complete_text(const std::string& prompt) {
  if (auto hit = cassette_.lookup(prompt)) return *hit;
  if (strict_) throw ReplayError("cassette miss for prompt " + sha256_hex(prompt));
  return {};
}

std::string ReplayBackend::describe() const {
  return std::string("replay(") + source_ + (strict_ ? ", strict)" : ")");
}

std::string RecordingBackend::complete_text(const std::string& prompt) {
  std::string response = inner_.complete_text(prompt);
  sink_.insert(prompt, response);
  return response;
}

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

RemoteBackend::RemoteBackend(RemoteConfig cfg, std::shared_ptr<HttpTransport> transport, LogSink log)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), log_(std::move(log)) {
  if (cfg_.timeout.count() <= 0) throw ArgumentError("remote timeout must be positive");
  if (cfg_.max_attempts < 1) throw ArgumentError("max_attempts must be at least 1");
  if (cfg_.max_parallel < 1) throw ArgumentError("max_parallel must be at least 1");
  if (cfg_.token) {
    token_ = *cfg_.token;
  } else if (const char* env = std::getenv(kApiKeyEnv)) {
    token_ = env;
  }
  if (token_.empty()) throw AuthError(std::string("no API token: set ") + kApiKeyEnv);
  if (cfg_.endpoint.empty()) {
    const char* env = std::getenv(kEndpointEnv);
    cfg_.endpoint = env && *env ? env : kDefaultEndpoint;
  }
  if (!transport_) transport_ = make_http_transport();
  slots_ = std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(cfg_.max_parallel));
}

std::string RemoteBackend::describe() const { return "remote(" + cfg_.endpoint + ", " + cfg_.model + ")"; }

void RemoteBackend::log(const std::string& line) const {
  if (log_) log_(redact(line, token_));
}

std::string RemoteBackend::complete_text(const std::string& prompt) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + cfg_.timeout * cfg_.max_attempts;
  auto remaining = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
  };

  if (!slots_->try_acquire_until(deadline)) throw TransportError("timed out waiting for a request slot", true);
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{*slots_};

  const json request = {{"model", cfg_.model},
                        {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                        {"temperature", cfg_.temperature}};
  const std::string body = request.dump();
  const std::map<std::string, std::string> headers = {{"Authorization", "Bearer " + token_},
                                                      {"Content-Type", "application/json"}};

  auto backoff = cfg_.initial_backoff;
  std::string last_error = "no attempt made";
  for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
    const auto budget = std::min(cfg_.timeout, remaining());
    if (budget.count() <= 0) break;
    log("POST " + cfg_.endpoint + " attempt " + std::to_string(attempt) + " Authorization: Bearer " + token_ +
        " body=" + body);
    HttpResponse res;
    try {
      res = transport_->post(cfg_.endpoint, headers, body, budget);
    } catch (const TransportError& e) {
      last_error = redact(e.what(), token_);
      log("attempt " + std::to_string(attempt) + " failed: " + last_error);
      if (!e.retryable()) throw TransportError(last_error, false);
      res.status = -1;
    }
    if (res.status == 401 || res.status == 403) {
      throw AuthError("endpoint rejected the API token (HTTP " + std::to_string(res.status) + ")");
    }
    if (res.status >= 200 && res.status < 300) {
      json j;
      try {
        j = json::parse(res.body);
      } catch (const json::parse_error&) {
        throw FormatError("response is not JSON", res.body);
      }
      const json* content = nullptr;
      if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const json& choice = j["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string()) {
          content = &choice["message"]["content"];
        }
      }
      if (!content) throw FormatError("response has no choices[0].message.content", res.body);
      return content->get<std::string>();
    }
    if (res.status != -1) {
      last_error = "HTTP " + std::to_string(res.status);
      log("attempt " + std::to_string(attempt) + " failed: " + last_error);
      const bool retryable = res.status == 408 || res.status == 429 || res.status >= 500;
      if (!retryable) throw TransportError(last_error + ": " + redact(res.body, token_), false);
    }
    if (attempt < cfg_.max_attempts) {
      const auto pause = std::min(backoff, remaining());
      if (pause.count() > 0) std::this_thread::sleep_for(pause);
      backoff *= 2;
    }
  }
  throw TransportError("giving up after retries: " + last_error, true);
}

// --- Few-shot selection and variants ----------------------------------------

std::vector<LabeledExample> select_few_shot(const std::vector<LabeledExample>& train, std::size_t k,
                                            std::uint64_t seed) {
  if (k > train.size()) {
    throw ArgumentError("cannot select " + std::to_string(k) + " examples from " + std::to_string(train.size()));
  }
  std::vector<LabeledExample> out;
  if (k == 0) return out;
  std::size_t largest = 0, smallest = 0;
  for (std::size_t i = 1; i < train.size(); ++i) {
    if (train[i].labels.size() > train[largest].labels.size()) largest = i;
    if (train[i].labels.size() < train[smallest].labels.size()) smallest = i;
  }
  out.push_back(train[largest]);
  std::vector<std::size_t> rest;
  if (k >= 2) {
    if (smallest == largest) smallest = largest == 0 ? 1 : 0;
    out.push_back(train[smallest]);
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (i != largest && (k < 2 || i != smallest)) rest.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(rest);
  for (std::size_t i = 0; out.size() < k; ++i) out.push_back(train[rest[i]]);
  return out;
}

FewShotExample to_few_shot(const LabeledExample& e) {
  return {e.input, e.labels.empty() ? "NONE" : join(e.labels, ", ")};
}

std::string variant_request(const PromptTemplate& base, std::size_t n) {
  return "Rewrite the following instruction in " + std::to_string(n) +
         " different ways. Keep every placeholder in curly braces exactly as written. "
         "Return one rewrite per line and nothing else.\n\nInstruction: " +
         base.task_text;
}

std::vector<PromptTemplate> generate_prompt_variants(Backend& b, const PromptTemplate& base, std::size_t n) {
  if (n == 0) throw ArgumentError("variant count must be at least 1");
  const std::string raw = b.complete_text(variant_request(base, n));
  auto wanted = template_placeholders(base.task_text);
  std::sort(wanted.begin(), wanted.end());

  std::vector<PromptTemplate> out;
  std::set<std::string> seen;
  for (const auto& line : split(raw, '\n')) {
    std::string text = trim(line);
    // Drop list markers such as "1.", "2)", "-" or "*".
    std::size_t i = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i > 0 && i < text.size() && (text[i] == '.' || text[i] == ')')) {
      text = trim(std::string_view(text).substr(i + 1));
    } else if (!text.empty() && (text[0] == '-' || text[0] == '*')) {
      text = trim(std::string_view(text).substr(1));
    }
    if (text.rfind("Instruction:", 0) == 0) text = trim(std::string_view(text).substr(12));
    if (text.empty()) continue;
    auto slots = template_placeholders(text);
    std::sort(slots.begin(), slots.end());
    if (slots != wanted) continue;
    if (!seen.insert(text).second) continue;
    PromptTemplate t = base;
    t.id = base.id + "_v" + std::to_string(out.size() + 1);
    t.task_text = std::move(text);
    out.push_back(std::move(t));
    if (out.size() == n) break;
  }
  if (out.empty()) throw FormatError("no usable prompt variants in response", raw);
  return out;
}

}  // namespace llmclean
