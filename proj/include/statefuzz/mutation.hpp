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
#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "statefuzz/error.hpp"
#include "statefuzz/protocol.hpp"
#include "statefuzz/rng.hpp"

namespace statefuzz {

enum class MutationOp : std::uint8_t {
  kBitFlip,
  kByteRandom,
  kByteDelete,
  kByteInsert,
  kDictInsert,
  kDictOverwrite,
  kMessageDuplicate,
  kMessageDelete,
  kMessageSwap,
  kDictMessageInsert,
};
inline constexpr std::size_t kMutationOpCount = 10;

inline constexpr std::array<std::string_view, kMutationOpCount> kMutationOpNames = {
    "bit-flip",       "byte-random",       "byte-delete",    "byte-insert",
    "dict-insert",    "dict-overwrite",    "msg-duplicate",  "msg-delete",
    "msg-swap",       "dict-msg-insert"};

// Which messages after M1 may change. The flat-model baselines touch M2
// only; the tree scheduler mutates M2 and M3.
enum class MutationScope : std::uint8_t { kM2Only, kM2AndM3 };

struct MutationConfig {
  std::size_t max_stacked_ops = 4;
  std::array<double, kMutationOpCount> weights = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  std::vector<std::string> dictionary;
  // Growth limits for insert-style operators.
  std::size_t max_messages = 32;
  std::size_t max_message_size = 128;

  void set_only(MutationOp op) {
    weights.fill(0);
    weights[static_cast<std::size_t>(op)] = 1;
  }

  void validate() const {
    if (max_stacked_ops < 1) throw ConfigError("max_stacked_ops must be at least 1");
    if (max_messages < 1 || max_message_size < 1) throw ConfigError("mutation size limits must be positive");
    double total = 0;
    for (double w : weights) {
      if (!(w >= 0)) throw ConfigError("mutation weights must be non-negative");
      total += w;
    }
    if (!(total > 0)) throw ConfigError("at least one mutation weight must be positive");
  }
};

struct MutationResult {
  RequestSequence sequence;
  // Set when nothing was mutable; `sequence` is then the input.
  bool noop = false;
};

namespace detail {

class Mutator {
 public:
  Mutator(RequestSequence& seq, std::size_t lo, std::size_t hi, const MutationConfig& cfg, Rng& rng)
      : msgs_(seq.messages), lo_(lo), hi_(hi), cfg_(cfg), rng_(rng) {}

  void apply(MutationOp op) {
    switch (op) {
      case MutationOp::kBitFlip:
        if (auto* m = pick()) {
          const auto pos = rng_.below(m->size());
          m->payload[pos] = static_cast<char>(m->payload[pos] ^ (1U << rng_.below(8)));
        }
        break;
      case MutationOp::kByteRandom:
        if (auto* m = pick()) m->payload[rng_.below(m->size())] = static_cast<char>(rng_.below(256));
        break;
      case MutationOp::kByteDelete:
        if (auto* m = pick(); m && m->size() >= 2) {
          const std::size_t len = rng_.between(1, std::min<std::size_t>(4, m->size() - 1));
          m->payload.erase(rng_.below(m->size() - len + 1), len);
        }
        break;
      case MutationOp::kByteInsert:
        if (auto* m = pick(); m && m->size() < cfg_.max_message_size) {
          const std::size_t len =
              rng_.between(1, std::min<std::size_t>(4, cfg_.max_message_size - m->size()));
          std::string bytes(len, '\0');
          for (auto& b : bytes) b = static_cast<char>(rng_.below(256));
          m->payload.insert(rng_.below(m->size() + 1), bytes);
        }
        break;
      case MutationOp::kDictInsert:
        if (auto* m = pick(); m && !cfg_.dictionary.empty()) {
          const auto& tok = token();
          if (m->size() + tok.size() <= cfg_.max_message_size) {
            m->payload.insert(rng_.below(m->size() + 1), tok);
          }
        }
        break;
      case MutationOp::kDictOverwrite:
        if (auto* m = pick(); m && !cfg_.dictionary.empty()) {
          const auto& tok = token();
          if (!tok.empty() && tok.size() <= m->size()) {
            m->payload.replace(rng_.below(m->size() - tok.size() + 1), tok.size(), tok);
          }
        }
        break;
      case MutationOp::kMessageDuplicate:
        if (hi_ > lo_ && msgs_.size() < cfg_.max_messages) {
          const auto i = lo_ + rng_.below(hi_ - lo_);
          Message copy = msgs_[i];
          msgs_.insert(msgs_.begin() + static_cast<std::ptrdiff_t>(i + 1), std::move(copy));
          ++hi_;
        }
        break;
      case MutationOp::kMessageDelete:
        if (hi_ > lo_ && msgs_.size() > 1) {
          const auto i = lo_ + rng_.below(hi_ - lo_);
          msgs_.erase(msgs_.begin() + static_cast<std::ptrdiff_t>(i));
          --hi_;
        }
        break;
      case MutationOp::kMessageSwap:
        if (hi_ - lo_ >= 2) {
          const auto i = lo_ + rng_.below(hi_ - lo_);
          auto j = lo_ + rng_.below(hi_ - lo_ - 1);
          if (j >= i) ++j;
          std::swap(msgs_[i], msgs_[j]);
        }
        break;
      case MutationOp::kDictMessageInsert:
        if (msgs_.size() < cfg_.max_messages && !cfg_.dictionary.empty()) {
          const auto& tok = token();
          if (!tok.empty()) {
            const auto at = lo_ + rng_.below(hi_ - lo_ + 1);
            msgs_.insert(msgs_.begin() + static_cast<std::ptrdiff_t>(at), Message(tok));
            ++hi_;
          }
        }
        break;
    }
  }

 private:
  Message* pick() {
    if (hi_ == lo_) return nullptr;
    return &msgs_[lo_ + rng_.below(hi_ - lo_)];
  }
  const std::string& token() { return cfg_.dictionary[rng_.below(cfg_.dictionary.size())]; }

  std::vector<Message>& msgs_;
  std::size_t lo_;
  std::size_t hi_;
  const MutationConfig& cfg_;
  Rng& rng_;
};

inline MutationOp draw_op(const MutationConfig& cfg, Rng& rng) {
  double total = 0;
  for (double w : cfg.weights) total += w;
  double x = rng.uniform01() * total;
  for (std::size_t i = 0; i < kMutationOpCount; ++i) {
    if (cfg.weights[i] <= 0) continue;
    if (x < cfg.weights[i]) return static_cast<MutationOp>(i);
    x -= cfg.weights[i];
  }
  for (std::size_t i = kMutationOpCount; i-- > 0;) {
    if (cfg.weights[i] > 0) return static_cast<MutationOp>(i);
  }
  return MutationOp::kBitFlip;
}

}  // namespace detail

// Applies 1..max_stacked_ops weighted operators inside the allowed region.
// Messages before m1_end are never touched; with kM2Only the messages from
// m2_end on are carried over unchanged (they may shift position).
inline MutationResult mutate(const RequestSequence& seq, const RegionSplit& split,
                             MutationScope scope, const MutationConfig& cfg, Rng& rng) {
  MutationResult result{seq, false};
  result.sequence.origin = Origin::kMutant;
  const std::size_t lo = split.m1_end;
  const std::size_t hi = scope == MutationScope::kM2Only ? split.m2_end : seq.size();
  if (lo > hi || hi > seq.size()) throw ConfigError("region split does not fit the sequence");
  if (lo == hi) {
    result.sequence.origin = seq.origin;
    result.noop = true;
    return result;
  }
  detail::Mutator mutator(result.sequence, lo, hi, cfg, rng);
  const std::size_t stacked = rng.between(1, cfg.max_stacked_ops);
  for (std::size_t i = 0; i < stacked; ++i) mutator.apply(detail::draw_op(cfg, rng));
  return result;
}

}  // namespace statefuzz
