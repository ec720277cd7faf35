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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statefuzz/coverage.hpp"
#include "statefuzz/error.hpp"

namespace statefuzz {

inline constexpr std::size_t kDefaultDepthCap = 200;

// Raw request bytes. Any byte value is allowed, newlines included.
struct Message {
  std::string payload;

  Message() = default;
  explicit Message(std::string bytes) : payload(std::move(bytes)) {}

  std::size_t size() const { return payload.size(); }
  friend auto operator<=>(const Message&, const Message&) = default;
};

enum class Origin : std::uint8_t { kCorpus, kMutant };

struct RequestSequence {
  std::vector<Message> messages;
  Origin origin = Origin::kCorpus;

  RequestSequence() = default;
  explicit RequestSequence(std::vector<Message> msgs, Origin o = Origin::kCorpus)
      : messages(std::move(msgs)), origin(o) {}

  // Convenience for tests and fixtures.
  static RequestSequence of(std::initializer_list<std::string_view> lines,
                            Origin o = Origin::kCorpus) {
    RequestSequence seq;
    seq.origin = o;
    for (auto l : lines) seq.messages.emplace_back(std::string(l));
    return seq;
  }

  std::size_t size() const { return messages.size(); }
  bool empty() const { return messages.empty(); }

  // Identity ignores provenance.
  friend bool operator==(const RequestSequence& a, const RequestSequence& b) {
    return a.messages == b.messages;
  }
};

// Numeric status token of a response, e.g. "250". "0" is the dummy code of
// the initial state.
using ResponseCode = std::string;

inline const ResponseCode kRootCode = "0";

inline bool is_valid_response_code(std::string_view code) {
  if (code.empty()) return false;
  for (char c : code) {
    if (c == ',' || c == '\n' || c == '\r') return false;
  }
  return true;
}

struct ResponseSequence {
  std::vector<ResponseCode> codes{kRootCode};
  bool truncated = false;

  std::size_t size() const { return codes.size(); }
  bool is_prefix_of(const ResponseSequence& other) const {
    if (codes.size() > other.codes.size()) return false;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (codes[i] != other.codes[i]) return false;
    }
    return true;
  }
  std::string join(char sep = '.') const {
    std::string out;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (i) out.push_back(sep);
      out += codes[i];
    }
    return out;
  }

  friend bool operator==(const ResponseSequence&, const ResponseSequence&) = default;
};

// FNV-1a over the codes, used for response-sequence novelty sets.
inline std::uint64_t hash_codes(std::span<const ResponseCode> codes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& c : codes) {
    for (unsigned char ch : c) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Glob cases 1..10 reached during one execution.
class CaseSet {
 public:
  static constexpr int kMaxCase = 10;

  void set(int id) { mask_ |= bit(id); }
  bool test(int id) const { return (mask_ & bit(id)) != 0; }
  bool empty() const { return mask_ == 0; }
  CaseSet& operator|=(CaseSet o) {
    mask_ |= o.mask_;
    return *this;
  }
  std::vector<int> ids() const {
    std::vector<int> out;
    for (int i = 1; i <= kMaxCase; ++i) {
      if (test(i)) out.push_back(i);
    }
    return out;
  }
  friend bool operator==(CaseSet, CaseSet) = default;

 private:
  static std::uint16_t bit(int id) {
    if (id < 1 || id > kMaxCase) throw ConfigError("glob case id out of range");
    return static_cast<std::uint16_t>(1U << id);
  }
  std::uint16_t mask_ = 0;
};

// The part of an execution needed to locate states inside a request
// sequence: the (capped) response sequence and, per message, the cumulative
// number of codes received once that message has been answered.
struct ExecTrace {
  ResponseSequence response_sequence;
  std::vector<std::uint32_t> burst_ends;

  std::size_t message_count() const { return burst_ends.size(); }

  // Length of the visible response sequence once `k` messages are answered.
  std::size_t visible_after(std::size_t k) const {
    const std::size_t full = k == 0 ? 1 : 1 + burst_ends[k - 1];
    return std::min(full, response_sequence.size());
  }

  friend bool operator==(const ExecTrace&, const ExecTrace&) = default;
};

struct ExecutionResult : ExecTrace {
  // Every code received, uncapped, without the dummy root code.
  std::vector<ResponseCode> codes;
  CoverageMap coverage;
  CaseSet glob_case_hits;

  explicit ExecutionResult(std::size_t map_size = kDefaultMapSize) : coverage(map_size) {}

  std::span<const ResponseCode> burst(std::size_t i) const {
    const std::size_t begin = i == 0 ? 0 : burst_ends[i - 1];
    return std::span<const ResponseCode>(codes).subspan(begin, burst_ends[i] - begin);
  }

  const ExecTrace& trace() const { return *this; }
};

// Collects bursts while a harness answers a sequence, then caps the response
// sequence at `depth_cap` codes below the root. The cap only ever cuts at a
// burst boundary: a burst that would cross it is dropped with everything
// after it.
class ExecutionRecorder {
 public:
  explicit ExecutionRecorder(ExecutionResult& out) : out_(out) {
    out_.codes.clear();
    out_.burst_ends.clear();
    out_.coverage.clear();
    out_.glob_case_hits = CaseSet{};
  }

  void respond(std::initializer_list<std::string_view> burst) {
    for (auto c : burst) out_.codes.emplace_back(c);
    out_.burst_ends.push_back(static_cast<std::uint32_t>(out_.codes.size()));
  }

  void finish(std::size_t depth_cap) {
    auto& rs = out_.response_sequence;
    rs.codes.clear();
    rs.codes.push_back(kRootCode);
    rs.truncated = false;
    std::size_t kept = 0;
    for (std::uint32_t end : out_.burst_ends) {
      if (end > depth_cap) {
        rs.truncated = true;
        break;
      }
      kept = end;
    }
    rs.codes.insert(rs.codes.end(), out_.codes.begin(),
                    out_.codes.begin() + static_cast<std::ptrdiff_t>(kept));
  }

 private:
  ExecutionResult& out_;
};

// Message index ranges of a seed relative to a selected state:
// M1 = [0, m1_end) restores the state, M2 = [m1_end, m2_end) is sent while
// the server is still in it, M3 = [m2_end, size) is the rest.
struct RegionSplit {
  std::size_t m1_end = 0;
  std::size_t m2_end = 0;

  friend bool operator==(const RegionSplit&, const RegionSplit&) = default;
};

inline RegionSplit split_regions(const RequestSequence& seq, const ExecTrace& exec,
                                 std::span<const ResponseCode> target_prefix) {
  if (exec.message_count() != seq.size()) {
    throw StateMismatchError("execution trace has " +
                             std::to_string(exec.message_count()) +
                             " bursts for a sequence of " +
                             std::to_string(seq.size()) + " messages");
  }
  const auto& codes = exec.response_sequence.codes;
  if (target_prefix.empty() || target_prefix.size() > codes.size() ||
      !std::equal(target_prefix.begin(), target_prefix.end(), codes.begin())) {
    throw StateMismatchError("seed does not reproduce the selected state");
  }
  const std::size_t want = target_prefix.size();
  const std::size_t n = seq.size();

  RegionSplit split;
  std::size_t k = 0;
  while (k <= n && exec.visible_after(k) < want) ++k;
  if (k > n || exec.visible_after(k) != want) {
    throw StateMismatchError("selected state ends inside a multi-code burst");
  }
  split.m1_end = k;
  split.m2_end = n;
  for (std::size_t j = k + 1; j <= n; ++j) {
    if (exec.visible_after(j) > want) {
      split.m2_end = j;
      break;
    }
  }
  return split;
}

inline RegionSplit split_regions(const RequestSequence& seq, const ExecTrace& exec,
                                 const ResponseSequence& target_prefix) {
  return split_regions(seq, exec, std::span<const ResponseCode>(target_prefix.codes));
}

}  // namespace statefuzz
