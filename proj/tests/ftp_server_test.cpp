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

#include "statefuzz/ftp_server.hpp"
#include "statefuzz/harness.hpp"
#include "statefuzz/rng.hpp"

namespace statefuzz::ftp {
namespace {

std::vector<std::vector<ResponseCode>> bursts_of(const ExecutionResult& r) {
  std::vector<std::vector<ResponseCode>> out;
  for (std::size_t i = 0; i < r.message_count(); ++i) {
    const auto b = r.burst(i);
    out.emplace_back(b.begin(), b.end());
  }
  return out;
}

using Bursts = std::vector<std::vector<ResponseCode>>;

class FtpServerTest : public ::testing::Test {
 protected:
  ExecutionResult run(std::initializer_list<std::string_view> lines) const {
    return server_.execute(RequestSequence::of(lines));
  }
  FtpGlobServer server_;
};

TEST_F(FtpServerTest, CreateThenList) {
  const auto r = run({"USER u", "PASS p", "MKD d", "STOR d/f", "NLST *"});
  EXPECT_EQ(bursts_of(r), (Bursts{{"331"}, {"230"}, {"257"}, {"250"}, {"250"}}));
  EXPECT_TRUE(r.glob_case_hits.test(5));
  EXPECT_TRUE(r.glob_case_hits.test(10));
}

TEST_F(FtpServerTest, ListBeforeCreating) {
  const auto r = run({"USER u", "PASS p", "NLST *"});
  EXPECT_EQ(bursts_of(r), (Bursts{{"331"}, {"230"}, {"250"}}));
  EXPECT_FALSE(r.glob_case_hits.test(10));
}

TEST_F(FtpServerTest, QuitAlone) {
  const auto r = run({"QUIT"});
  EXPECT_EQ(bursts_of(r), (Bursts{{"221"}}));
  EXPECT_EQ(r.response_sequence.join(), "0.221");
}

TEST_F(FtpServerTest, MergedStateFixture) {
  const auto a = run({"USER u", "PASS p", "NLST *", "MKD d", "STOR d/f"});
  const auto b = run({"USER u", "PASS p", "MKD d", "STOR d/f", "NLST *"});
  EXPECT_EQ(a.response_sequence.codes.back(), "250");
  EXPECT_EQ(b.response_sequence.codes.back(), "250");
  EXPECT_NE(a.response_sequence, b.response_sequence);
}

TEST_F(FtpServerTest, CommandTable) {
  EXPECT_EQ(bursts_of(run({"PASS p"})), (Bursts{{"503"}}));
  EXPECT_EQ(bursts_of(run({"FOO"})), (Bursts{{"500"}}));
  EXPECT_EQ(bursts_of(run({""})), (Bursts{{"500"}}));
  EXPECT_EQ(bursts_of(run({"MKD d"})), (Bursts{{"530"}}));
  EXPECT_EQ(bursts_of(run({"INFO"})), (Bursts{{"150", "226"}}));
  EXPECT_EQ(bursts_of(run({"QUIT", "USER u"})), (Bursts{{"221"}, {"421"}}));
  EXPECT_EQ(bursts_of(run({"USER u", "PASS p", "MKD d", "MKD d", "MKD x/y", "MKD"})),
            (Bursts{{"331"}, {"230"}, {"257"}, {"550"}, {"550"}, {"501"}}));
  EXPECT_EQ(bursts_of(run({"USER u", "PASS p", "STOR x/f", "STOR f", "STOR f", "MKD d", "STOR d"})),
            (Bursts{{"331"}, {"230"}, {"550"}, {"250"}, {"250"}, {"257"}, {"550"}}));
  EXPECT_EQ(bursts_of(run({"USER u", "PASS p", "CWD d", "MKD d", "CWD d", "CWD .."})),
            (Bursts{{"331"}, {"230"}, {"550"}, {"257"}, {"250"}, {"250"}}));
  EXPECT_EQ(bursts_of(run({"USER u", "PASS p", "NLST", "NLST a\\"})),
            (Bursts{{"331"}, {"230"}, {"250"}, {"550"}}));
}

TEST_F(FtpServerTest, VerbsAreCaseInsensitiveAndCrlfIsStripped) {
  EXPECT_EQ(bursts_of(run({"user u\r\n", "pAsS p\r"})), (Bursts{{"331"}, {"230"}}));
}

TEST_F(FtpServerTest, DeepPrerequisiteCase) {
  const auto before = run({"USER u", "PASS p", "NLST */f"});
  EXPECT_FALSE(before.glob_case_hits.test(8));
  const auto after = run({"USER u", "PASS p", "MKD d", "STOR d/f", "NLST */f"});
  EXPECT_TRUE(after.glob_case_hits.test(8));
  EXPECT_TRUE(after.glob_case_hits.test(3));
}

TEST_F(FtpServerTest, AllocationBudgetCase) {
  FtpOptions opts;
  opts.match_budget = 2;
  FtpGlobServer small(opts);
  const auto r = small.execute(RequestSequence::of({"USER u", "PASS p", "STOR a", "STOR b", "STOR c", "NLST *"}));
  EXPECT_EQ(r.burst(5)[0], "550");
  EXPECT_TRUE(r.glob_case_hits.test(1));
}

TEST_F(FtpServerTest, DeterministicAndProperties) {
  Rng rng(12);
  const std::vector<std::string> pool = {"USER u", "PASS p", "MKD d", "MKD d/e", "STOR d/f", "NLST *",
                                         "NLST */*", "NLST [a-z]", "NLST \\*", "INFO", "CWD d", "QUIT",
                                         "garbage", "NLST ?"};
  for (int trial = 0; trial < 500; ++trial) {
    RequestSequence seq;
    const auto n = rng.between(1, 20);
    for (std::uint64_t i = 0; i < n; ++i) seq.messages.emplace_back(pool[rng.below(pool.size())]);
    const auto a = server_.execute(seq);
    const auto b = server_.execute(seq);
    ASSERT_EQ(a.codes, b.codes);
    ASSERT_EQ(a.coverage, b.coverage);
    ASSERT_EQ(a.glob_case_hits, b.glob_case_hits);
    ASSERT_EQ(a.message_count(), seq.size());
    std::vector<ResponseCode> flat{kRootCode};
    for (std::size_t i = 0; i < a.message_count(); ++i) {
      ASSERT_GE(a.burst(i).size(), 1U);
      flat.insert(flat.end(), a.burst(i).begin(), a.burst(i).end());
    }
    ASSERT_EQ(flat, a.response_sequence.codes);
    for (int id : a.glob_case_hits.ids()) ASSERT_TRUE(a.coverage.test(case_branch(id)));
    for (BranchId id : a.coverage.ids()) ASSERT_LT(id, server_.total_branches());
  }
}

TEST_F(FtpServerTest, DepthCapTruncates) {
  FtpOptions opts;
  opts.depth_cap = 3;
  FtpGlobServer capped(opts);
  const auto r = capped.execute(RequestSequence::of({"USER u", "INFO", "INFO", "QUIT"}));
  EXPECT_TRUE(r.response_sequence.truncated);
  EXPECT_EQ(r.response_sequence.join(), "0.331.150.226");
}

TEST(HarnessTest, Registry) {
  EXPECT_EQ(sut_names(), (std::vector<std::string>{"ftp-glob"}));
  const auto sut = make_sut("ftp-glob", {});
  EXPECT_EQ(sut->name(), "ftp-glob");
  EXPECT_GT(sut->total_branches(), 0U);
  EXPECT_LE(sut->total_branches(), sut->map_size());
  EXPECT_THROW(make_sut("smtp", {}), ConfigError);
}

}  // namespace
}  // namespace statefuzz::ftp
