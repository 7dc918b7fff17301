// Copyright 2026 The KBQA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KBQA_ERROR_H_
#define KBQA_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kbqa {

// Base class for all data-level failures (bad input files, unknown symbols,
// inconsistent artifacts). The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. Line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(size_t line, const std::string &message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  size_t line() const { return line_; }

 private:
  size_t line_;
};

// Lookup of an entity, relation or word that is not registered.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch between model, dictionary and graph.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kbqa

#endif  // KBQA_ERROR_H_
