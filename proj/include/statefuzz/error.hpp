// Copyright 2026 The Statefuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
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

namespace statefuzz {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration (map size mismatch, unknown algorithm,
// zero iterations, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class CorpusFormatError : public Error {
 public:
  CorpusFormatError(std::string file, std::size_t offset, const std::string& what)
      : Error(file + ": offset " + std::to_string(offset) + ": " + what),
        file_(std::move(file)),
        offset_(offset) {}

  const std::string& file() const { return file_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string file_;
  std::size_t offset_;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

// A seed no longer reproduces the response prefix of the state it was
// selected for.
class StateMismatchError : public Error {
 public:
  using Error::Error;
};

// No state of the flat model holds a seed.
class EmptyModelError : public Error {
 public:
  using Error::Error;
};

// A tree node was asked for a seed but stores none.
class NoSeedError : public Error {
 public:
  using Error::Error;
};

// The tree violates one of its structural invariants.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class InsufficientSampleError : public Error {
 public:
  using Error::Error;
};

}  // namespace statefuzz
