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

#include <gtest/gtest.h>

#include "statefuzz/coverage.hpp"
#include "statefuzz/rng.hpp"

namespace statefuzz {
namespace {

CoverageMap map_of(std::initializer_list<BranchId> ids, std::size_t size = kDefaultMapSize) {
  CoverageMap m(size);
  for (BranchId id : ids) m.hit(id);
  return m;
}

TEST(CoverageMapTest, HitTestCount) {
  CoverageMap m;
  EXPECT_EQ(m.count(), 0U);
  m.hit(0);
  m.hit(63);
  m.hit(64);
  m.hit(4095);
  m.hit(63);
  EXPECT_EQ(m.count(), 4U);
  EXPECT_TRUE(m.test(64));
  EXPECT_FALSE(m.test(65));
  EXPECT_EQ(m.ids(), (std::vector<BranchId>{0, 63, 64, 4095}));
  m.clear();
  EXPECT_EQ(m.count(), 0U);
}

TEST(CoverageMapTest, OutOfRangeIdIsConfigError) {
  CoverageMap m(100);
  EXPECT_THROW(m.hit(100), ConfigError);
  EXPECT_FALSE(m.test(100));
}

TEST(MergeTest, DisjointUnion) {
  VirginMap v(50);
  EXPECT_EQ(merge_and_classify(v, map_of({3, 7})), 2U);
}

TEST(MergeTest, Idempotent) {
  VirginMap v(50);
  merge_and_classify(v, map_of({3, 7}));
  EXPECT_EQ(merge_and_classify(v, map_of({3, 7})), 0U);
}

TEST(MergeTest, SetDifference) {
  VirginMap v(50);
  merge_and_classify(v, map_of({3}));
  EXPECT_EQ(merge_and_classify(v, map_of({3, 9})), 1U);
  EXPECT_EQ(v.count(), 2U);
}

TEST(MergeTest, SizeMismatchIsConfigError) {
  VirginMap v(50, 128);
  EXPECT_THROW(merge_and_classify(v, map_of({1}, 256)), ConfigError);
}

TEST(MergeTest, SeenNeverShrinksAndCountsAddUp) {
  Rng rng(11);
  VirginMap v(512, 512);
  std::size_t total_new = 0;
  std::size_t prev = 0;
  for (int i = 0; i < 500; ++i) {
    CoverageMap m(512);
    for (int k = 0; k < 5; ++k) m.hit(static_cast<BranchId>(rng.below(512)));
    total_new += merge_and_classify(v, m);
    ASSERT_GE(v.count(), prev);
    prev = v.count();
    for (BranchId id : m.ids()) ASSERT_TRUE(v.seen().test(id));
  }
  EXPECT_EQ(total_new, v.count());
}

TEST(CoveragePercentTest, Examples) {
  VirginMap empty(50);
  EXPECT_DOUBLE_EQ(coverage_percent(empty), 0.0);

  VirginMap full(50);
  CoverageMap all;
  for (BranchId i = 0; i < 50; ++i) all.hit(i);
  merge_and_classify(full, all);
  EXPECT_DOUBLE_EQ(coverage_percent(full), 1.0);

  VirginMap quarter(40);
  CoverageMap ten;
  for (BranchId i = 0; i < 10; ++i) ten.hit(i * 3);
  merge_and_classify(quarter, ten);
  EXPECT_DOUBLE_EQ(coverage_percent(quarter), 0.25);
}

TEST(CoveragePercentTest, ZeroTotalIsConfigError) {
  VirginMap v(0);
  EXPECT_THROW(coverage_percent(v), ConfigError);
}

}  // namespace
}  // namespace statefuzz
