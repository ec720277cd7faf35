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
#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "statefuzz/error.hpp"

namespace statefuzz {

inline constexpr std::size_t kDefaultMapSize = 4096;

using BranchId = std::uint32_t;

// One bit per branch. Hit counts are deliberately not tracked.
class CoverageMap {
 public:
  explicit CoverageMap(std::size_t map_size = kDefaultMapSize)
      : map_size_(map_size), words_((map_size + 63) / 64, 0) {}

  std::size_t map_size() const { return map_size_; }

  void hit(BranchId id) {
    if (id >= map_size_) {
      throw ConfigError("branch id " + std::to_string(id) +
                        " outside coverage map of size " +
                        std::to_string(map_size_));
    }
    words_[id / 64] |= std::uint64_t{1} << (id % 64);
  }

  bool test(BranchId id) const {
    return id < map_size_ && (words_[id / 64] >> (id % 64)) & 1U;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  void clear() { std::fill(words_.begin(), words_.end(), 0); }

  std::vector<BranchId> ids() const {
    std::vector<BranchId> out;
    for (std::size_t i = 0; i < map_size_; ++i) {
      if (test(static_cast<BranchId>(i))) out.push_back(static_cast<BranchId>(i));
    }
    return out;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

  friend bool operator==(const CoverageMap&, const CoverageMap&) = default;

 private:
  std::size_t map_size_;
  std::vector<std::uint64_t> words_;
};

// Branches seen at least once during a trial. `total_branches` is the
// denominator the harness declares for percentage coverage.
class VirginMap {
 public:
  VirginMap(std::size_t total_branches, std::size_t map_size = kDefaultMapSize)
      : seen_(map_size), total_branches_(total_branches) {}

  const CoverageMap& seen() const { return seen_; }
  std::size_t total_branches() const { return total_branches_; }
  std::size_t count() const { return seen_.count(); }

 private:
  friend std::size_t merge_and_classify(VirginMap&, const CoverageMap&);
  CoverageMap seen_;
  std::size_t total_branches_;
};

// Folds one execution's bits into the trial-wide map and returns how many
// were new.
inline std::size_t merge_and_classify(VirginMap& virgin, const CoverageMap& exec_map) {
  if (virgin.seen_.map_size() != exec_map.map_size()) {
    throw ConfigError("coverage map size mismatch: " +
                      std::to_string(virgin.seen_.map_size()) + " vs " +
                      std::to_string(exec_map.map_size()));
  }
  std::size_t fresh = 0;
  auto& seen = virgin.seen_.words();
  const auto& hit = exec_map.words();
  for (std::size_t i = 0; i < seen.size(); ++i) {
    const std::uint64_t added = hit[i] & ~seen[i];
    if (added != 0) {
      fresh += static_cast<std::size_t>(std::popcount(added));
      seen[i] |= added;
    }
  }
  return fresh;
}

// Fraction of declared branches seen so far, in [0, 1].
inline double coverage_percent(const VirginMap& virgin) {
  if (virgin.total_branches() == 0) {
    throw ConfigError("harness declared zero total branches");
  }
  return static_cast<double>(virgin.count()) /
         static_cast<double>(virgin.total_branches());
}

}  // namespace statefuzz
