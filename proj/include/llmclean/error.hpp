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
#include <stdexcept>
#include <string>

namespace llmclean {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input-side errors (bad files, bad arguments, bad rules). The CLI maps these
// to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

class StructuralError : public InputError {
 public:
  StructuralError(const std::string& what, std::size_t row)
      : InputError(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class ArgumentError : public InputError {
 public:
  using InputError::InputError;
};

// Raised by the rule DSL parser and by the N-Triples reader. `offset` is a
// byte offset for rule text and a 1-based line number for graph files.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : InputError(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// A rule that cannot be enforced against a particular dataset.
class RuleError : public InputError {
 public:
  using InputError::InputError;
};

class TemplateError : public InputError {
 public:
  using InputError::InputError;
};

// Context graph violates the meta-model.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Errors coming from the language-model backend. The CLI maps these to
// exit code 2.
class BackendError : public Error {
 public:
  using Error::Error;
};

class TransportError : public BackendError {
 public:
  TransportError(const std::string& what, bool retryable)
      : BackendError(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ReplayError : public BackendError {
 public:
  using BackendError::BackendError;
};

class FormatError : public BackendError {
 public:
  FormatError(const std::string& what, std::string raw_text)
      : BackendError(what), raw_text_(std::move(raw_text)) {}
  const std::string& raw_text() const { return raw_text_; }

 private:
  std::string raw_text_;
};

}  // namespace llmclean
