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
#include <cstdint>
#include <memory>
#include <unordered_set>
#include <vector>

#include "statefuzz/coverage.hpp"
#include "statefuzz/mutation.hpp"
#include "statefuzz/protocol.hpp"
#include "statefuzz/rng.hpp"
#include "statefuzz/sut.hpp"

namespace statefuzz {

// A retained request sequence with what is needed to split it into regions
// later without re-running it.
struct StoredSeed {
  RequestSequence sequence;
  ExecTrace trace;
  std::size_t branch_count = 0;
};

using SeedRef = std::shared_ptr<const StoredSeed>;

inline SeedRef make_seed(const RequestSequence& seq, const ExecutionResult& exec) {
  return std::make_shared<const StoredSeed>(StoredSeed{seq, exec.trace(), exec.coverage.count()});
}

// A seed as held by a state or tree node, with its own statistics.
struct SeedEntry {
  SeedRef seed;
  std::uint64_t selection_count = 0;
  std::uint64_t discovery_count = 0;
};

struct IterationOutcome {
  std::size_t mutants = 0;
  std::size_t new_branches = 0;
  std::size_t new_sequences = 0;
  std::size_t retained = 0;

  friend bool operator==(const IterationOutcome&, const IterationOutcome&) = default;
};

// Per-trial mutable state shared by every scheduler: the harness, the
// trial-wide coverage and response-sequence novelty sets, and the rng.
class FuzzContext {
 public:
  struct Evaluation {
    const ExecutionResult& exec;
    std::size_t new_branches;
    bool new_sequence;
    bool interesting() const { return new_branches > 0 || new_sequence; }
  };

  FuzzContext(const Sut& sut, MutationConfig mutation, std::uint64_t seed)
      : sut_(sut),
        virgin_(sut.total_branches(), sut.map_size()),
        mutation_(std::move(mutation)),
        rng_(seed),
        scratch_(sut.map_size()) {
    mutation_.validate();
  }

  Evaluation evaluate(const RequestSequence& seq) {
    sut_.execute_into(seq, scratch_);
    ++executions_;
    const std::size_t fresh = merge_and_classify(virgin_, scratch_.coverage);
    const bool new_seq = seen_sequences_.insert(hash_codes(scratch_.response_sequence.codes)).second;
    cases_ |= scratch_.glob_case_hits;
    return Evaluation{scratch_, fresh, new_seq};
  }

  const Sut& sut() const { return sut_; }
  const VirginMap& virgin() const { return virgin_; }
  const MutationConfig& mutation() const { return mutation_; }
  Rng& rng() { return rng_; }
  std::uint64_t executions() const { return executions_; }
  std::size_t sequences_seen() const { return seen_sequences_.size(); }
  CaseSet cases() const { return cases_; }

 private:
  const Sut& sut_;
  VirginMap virgin_;
  MutationConfig mutation_;
  Rng rng_;
  ExecutionResult scratch_;
  std::unordered_set<std::uint64_t> seen_sequences_;
  CaseSet cases_;
  std::uint64_t executions_ = 0;
};

}  // namespace statefuzz
