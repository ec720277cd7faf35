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

#include <map>
#include <set>

#include <gtest/gtest.h>

#include "statefuzz/ftp_server.hpp"
#include "statefuzz/rng.hpp"
#include "statefuzz/state_machine.hpp"

namespace statefuzz {
namespace {

const RequestSequence kListThenCreate = RequestSequence::of({"USER u", "PASS p", "NLST *", "MKD d", "STOR d/f"});
const RequestSequence kCreateThenList = RequestSequence::of({"USER u", "PASS p", "MKD d", "STOR d/f", "NLST *"});

class StateMachineTest : public ::testing::Test {
 protected:
  void observe(StateMachineModel& m, const RequestSequence& seq, bool interesting = true) {
    const auto exec = server_.execute(seq);
    m.observe(seq, exec, interesting);
  }
  ftp::FtpGlobServer server_;
};

// Model whose states are exactly `codes` (after "0"), each seeded.
StateMachineModel seeded_chain(const std::vector<std::string>& codes) {
  StateMachineModel m;
  ExecutionResult exec;
  ExecutionRecorder rec(exec);
  RequestSequence seq;
  for (const auto& c : codes) {
    rec.respond({c});
    seq.messages.emplace_back("m" + c);
  }
  rec.finish(kDefaultDepthCap);
  m.observe(seq, exec, true);
  return m;
}

TEST_F(StateMachineTest, MotivatingExampleStates) {
  StateMachineModel m;
  observe(m, kListThenCreate);
  EXPECT_EQ(m.state_order(), (std::vector<ResponseCode>{"0", "331", "230", "250", "257"}));
  observe(m, kCreateThenList);
  EXPECT_EQ(m.state_order(), (std::vector<ResponseCode>{"0", "331", "230", "250", "257"}));
  EXPECT_EQ(m.state("250").seeds.size(), 2U);
  EXPECT_EQ(m.pool_size(), 2U);
}

TEST_F(StateMachineTest, RepeatObservationIsIdempotent) {
  StateMachineModel m;
  observe(m, kListThenCreate);
  const auto before = m.state("250").seeds;
  observe(m, kListThenCreate);
  observe(m, kListThenCreate, false);
  EXPECT_EQ(m.state("250").seeds, before);
  EXPECT_EQ(m.pool_size(), 1U);
}

TEST_F(StateMachineTest, UninterestingAddsStatesButNoSeeds) {
  StateMachineModel m;
  observe(m, RequestSequence::of({"QUIT"}), false);
  EXPECT_TRUE(m.has_state("221"));
  EXPECT_TRUE(m.state("221").seeds.empty());
  Rng rng(1);
  EXPECT_THROW(m.select_state(FlatAlgorithm::kRandom, rng), EmptyModelError);
}

TEST_F(StateMachineTest, SingleStateAnyAlgorithm) {
  StateMachineModel m;
  ExecutionResult exec;
  ExecutionRecorder rec(exec);
  rec.finish(kDefaultDepthCap);
  // A zero-message execution only visits the root.
  m.observe(RequestSequence::of({"x"}), exec, true);
  Rng rng(2);
  for (auto a : {FlatAlgorithm::kRandom, FlatAlgorithm::kRoundRobin, FlatAlgorithm::kFavor}) {
    EXPECT_EQ(m.select_state(a, rng), "0");
    EXPECT_EQ(m.select_seed("0", a, rng), 0U);
  }
}

TEST(StateSelectionTest, RoundRobinCyclesInInsertionOrder) {
  auto m = seeded_chain({"331", "230"});
  Rng rng(1);
  std::vector<ResponseCode> got;
  for (int i = 0; i < 4; ++i) got.push_back(m.select_state(FlatAlgorithm::kRoundRobin, rng));
  EXPECT_EQ(got, (std::vector<ResponseCode>{"0", "331", "230", "0"}));
}

TEST(StateSelectionTest, RoundRobinSkipsUnseededStates) {
  StateMachineModel m;
  auto observe = [&m](const char* code, bool interesting) {
    ExecutionResult exec;
    ExecutionRecorder rec(exec);
    rec.respond({code});
    rec.finish(kDefaultDepthCap);
    m.observe(RequestSequence::of({"x"}), exec, interesting);
  };
  observe("500", false);
  observe("331", true);
  ASSERT_TRUE(m.has_state("500"));
  Rng rng(1);
  std::vector<ResponseCode> got;
  for (int i = 0; i < 4; ++i) got.push_back(m.select_state(FlatAlgorithm::kRoundRobin, rng));
  EXPECT_EQ(got, (std::vector<ResponseCode>{"0", "331", "0", "331"}));
}

TEST(StateSelectionTest, FavorPrefersLessFuzzed) {
  auto m = seeded_chain({"A", "B"});
  m.state("0").fuzz_count = 100;
  m.state("A").fuzz_count = 10;
  m.state("A").discovery_count = 1;
  m.state("B").fuzz_count = 1;
  m.state("B").discovery_count = 1;
  Rng rng(1);
  EXPECT_EQ(m.select_state(FlatAlgorithm::kFavor, rng), "B");
  EXPECT_DOUBLE_EQ(favor_score(m.state("A")), 2.0 / 11.0);
  EXPECT_DOUBLE_EQ(favor_score(m.state("B")), 1.0);
}

TEST(StateSelectionTest, FavorTieGoesToEarliest) {
  auto m = seeded_chain({"A", "B"});
  Rng rng(1);
  EXPECT_EQ(m.select_state(FlatAlgorithm::kFavor, rng), "0");
}

TEST(StateSelectionTest, RandomCoversSeededStates) {
  auto m = seeded_chain({"A", "B", "C"});
  Rng rng(4);
  std::map<ResponseCode, int> counts;
  for (int i = 0; i < 4000; ++i) ++counts[m.select_state(FlatAlgorithm::kRandom, rng)];
  ASSERT_EQ(counts.size(), 4U);
  for (const auto& [code, n] : counts) EXPECT_NEAR(n, 1000, 150) << code;
}

TEST(ArgmaxTest, InvariantUnderPositiveRescaling) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> s(rng.between(1, 12));
    for (auto& x : s) x = static_cast<double>(rng.below(5)) / static_cast<double>(rng.between(1, 5));
    const double k = 0.001 + rng.uniform01() * 1000;
    std::vector<double> scaled = s;
    for (auto& x : scaled) x *= k;
    ASSERT_EQ(argmax_first(s), argmax_first(scaled));
  }
}

TEST(SeedSelectionTest, FavorPrefersFewerMessagesPerBranch) {
  StoredSeed s1{RequestSequence(std::vector<Message>(5, Message("a"))), {}, 10};
  StoredSeed s2{RequestSequence(std::vector<Message>(50, Message("a"))), {}, 10};
  EXPECT_GT(seed_favor_score(s1), seed_favor_score(s2));
}

TEST_F(StateMachineTest, SeedRoundRobinAndFavor) {
  StateMachineModel m;
  // Both reach 250; the shorter one covers the same branches with fewer messages.
  const auto longer = RequestSequence::of({"USER u", "PASS p", "NLST", "NLST", "NLST"});
  const auto shorter = RequestSequence::of({"USER u", "PASS p", "NLST"});
  observe(m, longer);
  observe(m, shorter);
  Rng rng(1);
  std::vector<std::size_t> rr;
  for (int i = 0; i < 4; ++i) rr.push_back(m.select_seed("250", FlatAlgorithm::kRoundRobin, rng));
  EXPECT_EQ(rr, (std::vector<std::size_t>{0, 1, 0, 1}));
  EXPECT_EQ(m.select_seed("250", FlatAlgorithm::kFavor, rng), 1U);
}

TEST_F(StateMachineTest, TargetPrefixEndsAtFirstBurstReachingState) {
  StateMachineModel m;
  observe(m, kCreateThenList);
  const auto& seed = *m.seed(0).seed;
  EXPECT_EQ(m.target_prefix(seed, "250"), (std::vector<ResponseCode>{"0", "331", "230", "257", "250"}));
  EXPECT_EQ(m.target_prefix(seed, "0"), (std::vector<ResponseCode>{"0"}));
  EXPECT_THROW(m.target_prefix(seed, "999"), StateMismatchError);
  const auto split = split_regions(seed.sequence, seed.trace, m.target_prefix(seed, "250"));
  EXPECT_EQ(split.m1_end, 4U);
  EXPECT_EQ(split.m2_end, 5U);
}

TEST_F(StateMachineTest, DropSeedRecomputesFavorite) {
  StateMachineModel m;
  observe(m, RequestSequence::of({"USER u", "PASS p", "NLST", "NLST", "NLST"}));
  observe(m, RequestSequence::of({"USER u", "PASS p", "NLST"}));
  EXPECT_EQ(m.state("250").favored, 1U);
  m.drop_seed("250", 1);
  EXPECT_EQ(m.state("250").seeds, (std::vector<std::size_t>{0}));
  EXPECT_EQ(m.state("250").favored, 0U);
}

TEST(FlatSchedulerTest, CountsAndDeterminism) {
  ftp::FtpGlobServer server;
  auto run = [&](FlatAlgorithm a) {
    MutationConfig cfg;
    cfg.dictionary = server.default_dictionary();
    FuzzContext ctx(server, cfg, 77);
    FlatScheduler sched(ctx, a, 5);
    sched.seed_corpus({kListThenCreate, kCreateThenList});
    std::vector<IterationOutcome> outs;
    for (int i = 0; i < 200; ++i) outs.push_back(sched.run_iteration());
    std::uint64_t fuzz = 0;
    for (const auto& s : sched.model().states()) fuzz += s.fuzz_count;
    EXPECT_EQ(fuzz, 200U);
    EXPECT_EQ(ctx.executions(), 2U + 200U * 5U);
    return outs;
  };
  for (auto a : {FlatAlgorithm::kRandom, FlatAlgorithm::kRoundRobin, FlatAlgorithm::kFavor}) {
    EXPECT_EQ(run(a), run(a));
  }
}

}  // namespace
}  // namespace statefuzz
