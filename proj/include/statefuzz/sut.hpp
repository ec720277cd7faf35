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
#include <string>
#include <string_view>
#include <vector>

#include "statefuzz/protocol.hpp"

namespace statefuzz {

// An in-process server under test. Implementations are immutable after
// construction; `execute` starts from a freshly reset session every time, so
// one instance can be shared by concurrent trials.
class Sut {
 public:
  virtual ~Sut() = default;

  virtual std::string_view name() const = 0;
  // Denominator for percentage coverage. Every branch id is below this.
  virtual std::size_t total_branches() const = 0;
  virtual std::size_t map_size() const = 0;
  virtual std::size_t depth_cap() const = 0;

  // Overwrites `out`; reuses its buffers.
  virtual void execute_into(const RequestSequence& seq, ExecutionResult& out) const = 0;

  // Protocol keywords that help unstructured mutation.
  virtual std::vector<std::string> default_dictionary() const { return {}; }

  ExecutionResult execute(const RequestSequence& seq) const {
    ExecutionResult result(map_size());
    execute_into(seq, result);
    return result;
  }
};

}  // namespace statefuzz
