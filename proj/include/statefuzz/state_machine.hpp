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

// Flat response-code state machine: a state is identified by a single
// response code, regardless of the codes that led to it. Baseline scheduler
// with RANDOM, ROUND-ROBIN and FAVOR state and seed selection.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "statefuzz/error.hpp"
#include "statefuzz/mutation.hpp"
#include "statefuzz/protocol.hpp"
#include "statefuzz/rng.hpp"
#include "statefuzz/seed.hpp"

namespace statefuzz {

enum class FlatAlgorithm : std::uint8_t { kRandom, kRoundRobin, kFavor };

struct StateRecord {
  ResponseCode code;
  std::uint64_t fuzz_count = 0;
  std::uint64_t discovery_count = 0;
  // Indices into the model's seed pool.
  std::vector<std::size_t> seeds;
  std::size_t rr_cursor = 0;
  // Index into `seeds` of the FAVOR-preferred seed.
  std::size_t favored = 0;
};

// "Less often targeted" weighted by productivity.
inline double favor_score(const StateRecord& s) {
  return static_cast<double>(1 + s.discovery_count) / static_cast<double>(1 + s.fuzz_count);
}

// Small, high-coverage seeds first. Message count stands in for execution
// time in the in-process harness.
inline double seed_favor_score(const StoredSeed& s) {
  return static_cast<double>(s.branch_count) /
         static_cast<double>(std::max<std::size_t>(1, s.sequence.size()));
}

// Index of the first maximum.
inline std::size_t argmax_first(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

class StateMachineModel {
 public:
  StateMachineModel() { state_for(kRootCode); }

  // Adds every code of `exec` as a state. An interesting sequence becomes a
  // seed of every state it visits.
  void observe(const RequestSequence& seq, const ExecutionResult& exec, bool interesting) {
    const auto& codes = exec.response_sequence.codes;
    for (const auto& c : codes) state_for(c);
    if (!interesting) return;

    bool fresh = false;
    const std::size_t idx = pool_index(seq, exec, fresh);
    for (const auto& c : codes) {
      StateRecord& st = states_[index_.at(c)];
      if (!st.seeds.empty() && st.seeds.back() == idx) continue;
      if (!fresh && std::find(st.seeds.begin(), st.seeds.end(), idx) != st.seeds.end()) continue;
      st.seeds.push_back(idx);
      const std::size_t pos = st.seeds.size() - 1;
      if (pos > 0 && better_seed(idx, st.seeds[st.favored])) st.favored = pos;
    }
  }

  ResponseCode select_state(FlatAlgorithm algorithm, Rng& rng) {
    eligible_.clear();
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (!states_[i].seeds.empty()) eligible_.push_back(i);
    }
    if (eligible_.empty()) throw EmptyModelError("no state holds a seed");
    switch (algorithm) {
      case FlatAlgorithm::kRandom:
        return states_[eligible_[rng.below(eligible_.size())]].code;
      case FlatAlgorithm::kRoundRobin:
        for (std::size_t k = 0; k < states_.size(); ++k) {
          const std::size_t i = (rr_state_cursor_ + k) % states_.size();
          if (!states_[i].seeds.empty()) {
            rr_state_cursor_ = (i + 1) % states_.size();
            return states_[i].code;
          }
        }
        break;
      case FlatAlgorithm::kFavor: {
        scores_.clear();
        for (std::size_t i : eligible_) scores_.push_back(favor_score(states_[i]));
        return states_[eligible_[argmax_first(scores_)]].code;
      }
    }
    throw EmptyModelError("no state holds a seed");
  }

  // Returns a seed-pool index.
  std::size_t select_seed(const ResponseCode& code, FlatAlgorithm algorithm, Rng& rng) {
    StateRecord& st = state(code);
    if (st.seeds.empty()) throw NoSeedError("state " + code + " holds no seed");
    switch (algorithm) {
      case FlatAlgorithm::kRandom:
        return st.seeds[rng.below(st.seeds.size())];
      case FlatAlgorithm::kRoundRobin: {
        const std::size_t idx = st.seeds[st.rr_cursor % st.seeds.size()];
        st.rr_cursor = (st.rr_cursor + 1) % st.seeds.size();
        return idx;
      }
      case FlatAlgorithm::kFavor:
        return st.seeds[st.favored];
    }
    return st.seeds.front();
  }

  // Drops a seed from one state, e.g. when it no longer reproduces it.
  void drop_seed(const ResponseCode& code, std::size_t pool_idx) {
    StateRecord& st = state(code);
    std::erase(st.seeds, pool_idx);
    st.rr_cursor = st.seeds.empty() ? 0 : st.rr_cursor % st.seeds.size();
    st.favored = 0;
    for (std::size_t i = 1; i < st.seeds.size(); ++i) {
      if (better_seed(st.seeds[i], st.seeds[st.favored])) st.favored = i;
    }
  }

  // Response-code prefix through the end of the first burst that reaches
  // `code` in the seed's execution.
  std::vector<ResponseCode> target_prefix(const StoredSeed& seed, const ResponseCode& code) const {
    const auto& codes = seed.trace.response_sequence.codes;
    const auto it = std::find(codes.begin(), codes.end(), code);
    if (it == codes.end()) throw StateMismatchError("seed never reaches state " + code);
    const auto pos = static_cast<std::size_t>(it - codes.begin());
    std::size_t k = 0;
    while (seed.trace.visible_after(k) <= pos) ++k;
    return {codes.begin(), codes.begin() + static_cast<std::ptrdiff_t>(seed.trace.visible_after(k))};
  }

  bool has_state(const ResponseCode& code) const { return index_.count(code) != 0; }
  const StateRecord& state(const ResponseCode& code) const { return states_.at(lookup(code)); }
  StateRecord& state(const ResponseCode& code) { return states_.at(lookup(code)); }

  // Insertion order.
  const std::vector<StateRecord>& states() const { return states_; }
  std::vector<ResponseCode> state_order() const {
    std::vector<ResponseCode> out;
    for (const auto& s : states_) out.push_back(s.code);
    return out;
  }

  const SeedEntry& seed(std::size_t pool_idx) const { return pool_.at(pool_idx); }
  SeedEntry& seed(std::size_t pool_idx) { return pool_.at(pool_idx); }
  std::size_t pool_size() const { return pool_.size(); }

 private:
  std::size_t lookup(const ResponseCode& code) const {
    auto it = index_.find(code);
    if (it == index_.end()) throw Error("unknown state " + code);
    return it->second;
  }

  StateRecord& state_for(const ResponseCode& code) {
    auto [it, inserted] = index_.try_emplace(code, states_.size());
    if (inserted) {
      StateRecord rec;
      rec.code = code;
      states_.push_back(std::move(rec));
    }
    return states_[it->second];
  }

  std::size_t pool_index(const RequestSequence& seq, const ExecutionResult& exec, bool& fresh) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& m : seq.messages) {
      for (unsigned char c : m.payload) h = (h ^ c) * 0x100000001b3ULL;
      h = (h ^ 0x1ff) * 0x100000001b3ULL;
    }
    auto& bucket = by_hash_[h];
    for (std::size_t idx : bucket) {
      if (pool_[idx].seed->sequence == seq) {
        fresh = false;
        return idx;
      }
    }
    fresh = true;
    pool_.push_back(SeedEntry{make_seed(seq, exec)});
    bucket.push_back(pool_.size() - 1);
    return pool_.size() - 1;
  }

  // Strictly better under seed_favor_score, compared exactly.
  bool better_seed(std::size_t a, std::size_t b) const {
    const StoredSeed& x = *pool_[a].seed;
    const StoredSeed& y = *pool_[b].seed;
    return static_cast<unsigned __int128>(x.branch_count) * y.sequence.size() >
           static_cast<unsigned __int128>(y.branch_count) * x.sequence.size();
  }

  std::vector<StateRecord> states_;
  std::unordered_map<ResponseCode, std::size_t> index_;
  std::size_t rr_state_cursor_ = 0;
  std::vector<SeedEntry> pool_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_hash_;
  std::vector<std::size_t> eligible_;
  std::vector<double> scores_;
};

// The flat-model fuzzing loop: pick a state and a seed, replay M1 and
// mutate M2 only.
class FlatScheduler {
 public:
  FlatScheduler(FuzzContext& ctx, FlatAlgorithm algorithm, std::size_t mutants_per_iteration)
      : ctx_(ctx), algorithm_(algorithm), mutants_(mutants_per_iteration) {}

  void seed_corpus(const std::vector<RequestSequence>& corpus) {
    for (const auto& seq : corpus) {
      const auto ev = ctx_.evaluate(seq);
      model_.observe(seq, ev.exec, true);
    }
  }

  IterationOutcome run_iteration() {
    IterationOutcome out;
    Rng& rng = ctx_.rng();
    const ResponseCode code = model_.select_state(algorithm_, rng);
    const std::size_t pool_idx = model_.select_seed(code, algorithm_, rng);
    const SeedRef seed = model_.seed(pool_idx).seed;

    RegionSplit split;
    try {
      split = split_regions(seed->sequence, seed->trace, model_.target_prefix(*seed, code));
    } catch (const StateMismatchError&) {
      model_.drop_seed(code, pool_idx);
      return out;
    }

    std::size_t discoveries = 0;
    for (std::size_t i = 0; i < mutants_; ++i) {
      const MutationResult mutant =
          mutate(seed->sequence, split, MutationScope::kM2Only, ctx_.mutation(), rng);
      const auto ev = ctx_.evaluate(mutant.sequence);
      ++out.mutants;
      out.new_branches += ev.new_branches;
      if (ev.new_sequence) ++out.new_sequences;
      const bool interesting = ev.interesting();
      if (interesting) {
        ++discoveries;
        ++out.retained;
      }
      model_.observe(mutant.sequence, ev.exec, interesting);
    }

    StateRecord& st = model_.state(code);
    st.fuzz_count += 1;
    st.discovery_count += discoveries;
    SeedEntry& entry = model_.seed(pool_idx);
    entry.selection_count += 1;
    entry.discovery_count += discoveries;
    return out;
  }

  const StateMachineModel& model() const { return model_; }

 private:
  FuzzContext& ctx_;
  FlatAlgorithm algorithm_;
  std::size_t mutants_;
  StateMachineModel model_;
};

}  // namespace statefuzz
