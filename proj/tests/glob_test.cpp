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

#include "statefuzz/glob.hpp"

namespace statefuzz::ftp {
namespace {

struct GlobRun {
  GlobResult result;
  CaseSet cases;
  CoverageMap coverage;
};

GlobRun run_glob(std::string_view pattern, const VirtualFs& fs, std::string_view cwd = "/",
                 std::size_t budget = 8) {
  GlobRun run;
  GlobProbe probe(run.coverage, run.cases);
  run.result = glob(pattern, cwd, fs, budget, probe);
  return run;
}

bool matches(std::string_view pat, std::string_view name) {
  CoverageMap cov;
  CaseSet cases;
  GlobProbe probe(cov, cases);
  return match_component(pat, name, probe);
}

VirtualFs sample_fs() {
  VirtualFs fs;
  fs.add("/d", EntryKind::kDir);
  fs.add("/d/f", EntryKind::kFile);
  fs.add("/d/g.txt", EntryKind::kFile);
  fs.add("/e", EntryKind::kDir);
  fs.add("/top", EntryKind::kFile);
  fs.add("/.hidden", EntryKind::kFile);
  return fs;
}

TEST(GlobCasesTest, TableMirrorsCaseList) {
  const auto cases = list_glob_cases();
  ASSERT_EQ(cases.size(), 10U);
  EXPECT_EQ(cases[0].description, "Failing to allocate more memory");
  EXPECT_EQ(cases[5].description, "Globbing with metacharacter \"[]\"");
  EXPECT_EQ(cases[7].description, "Successfully expanding a directory with a metacharacter");
  EXPECT_EQ(cases[9].description, "Successfully finding at least 1 match");
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(cases[static_cast<std::size_t>(i)].case_id, i + 1);
    ASSERT_EQ(cases[static_cast<std::size_t>(i)].branch_ids.size(), 1U);
    EXPECT_EQ(cases[static_cast<std::size_t>(i)].branch_ids[0], case_branch(i + 1));
  }
}

TEST(ResolvePathTest, Normalizes) {
  EXPECT_EQ(resolve_path("/", "d"), "/d");
  EXPECT_EQ(resolve_path("/d", "f"), "/d/f");
  EXPECT_EQ(resolve_path("/d", "/e"), "/e");
  EXPECT_EQ(resolve_path("/d", ".."), "/");
  EXPECT_EQ(resolve_path("/", "../../x/./y/"), "/x/y");
  EXPECT_EQ(resolve_path("/", ""), "/");
}

TEST(VirtualFsTest, ListsDirectChildrenOnly) {
  const auto fs = sample_fs();
  std::vector<std::string> names;
  fs.list("/", [&](std::string_view n, EntryKind) { names.emplace_back(n); });
  EXPECT_EQ(names, (std::vector<std::string>{".hidden", "d", "e", "top"}));
  EXPECT_TRUE(fs.is_dir("/"));
  EXPECT_TRUE(fs.is_file("/d/f"));
  EXPECT_FALSE(fs.is_dir("/d/f"));
}

TEST(MatchComponentTest, Wildcards) {
  EXPECT_TRUE(matches("*", "abc"));
  EXPECT_TRUE(matches("a*c", "abbbc"));
  EXPECT_FALSE(matches("a*c", "abd"));
  EXPECT_TRUE(matches("?b?", "abc"));
  EXPECT_FALSE(matches("?", "ab"));
  EXPECT_TRUE(matches("*.txt", "g.txt"));
  EXPECT_TRUE(matches("**", ""));
}

TEST(MatchComponentTest, Classes) {
  EXPECT_TRUE(matches("[a-c]", "b"));
  EXPECT_FALSE(matches("[a-c]", "d"));
  EXPECT_TRUE(matches("[!a-c]", "d"));
  EXPECT_TRUE(matches("[^x]", "y"));
  EXPECT_TRUE(matches("[]]", "]"));
  EXPECT_TRUE(matches("[ab]x", "bx"));
  // Unterminated '[' is literal.
  EXPECT_TRUE(matches("[ab", "[ab"));
}

TEST(MatchComponentTest, Escapes) {
  EXPECT_TRUE(matches("\\*", "*"));
  EXPECT_FALSE(matches("\\*", "a"));
  EXPECT_TRUE(matches("a\\?", "a?"));
}

TEST(GlobTest, MetacharacterMatchesFilesWithoutPrefix) {
  const auto run = run_glob("t*", sample_fs());
  EXPECT_EQ(run.result.matches, (std::vector<std::string>{"/top"}));
  EXPECT_TRUE(run.cases.test(5));
  EXPECT_TRUE(run.cases.test(2));
  EXPECT_FALSE(run.cases.test(3));
  EXPECT_TRUE(run.cases.test(10));
}

TEST(GlobTest, FileWithPathPrefix) {
  const auto run = run_glob("d/f", sample_fs());
  EXPECT_EQ(run.result.matches, (std::vector<std::string>{"/d/f"}));
  EXPECT_TRUE(run.cases.test(3));
  EXPECT_FALSE(run.cases.test(2));
  EXPECT_FALSE(run.cases.test(5));
}

TEST(GlobTest, WildcardDirectoryExpandsExistingDirectory) {
  const auto run = run_glob("*/f", sample_fs());
  EXPECT_EQ(run.result.matches, (std::vector<std::string>{"/d/f"}));
  EXPECT_TRUE(run.cases.test(4));
  EXPECT_TRUE(run.cases.test(8));
  EXPECT_TRUE(run.cases.test(3));
}

TEST(GlobTest, WildcardDirectoryWithoutDirectories) {
  VirtualFs fs;
  fs.add("/top", EntryKind::kFile);
  const auto run = run_glob("*/f", fs);
  EXPECT_TRUE(run.cases.test(4));
  EXPECT_FALSE(run.cases.test(8));
  EXPECT_FALSE(run.cases.test(10));
  EXPECT_TRUE(run.result.matches.empty());
}

TEST(GlobTest, BracketAndEscapeCases) {
  const auto bracket = run_glob("[d-e]", sample_fs());
  EXPECT_TRUE(bracket.cases.test(6));
  EXPECT_EQ(bracket.result.matches.size(), 2U);
  EXPECT_FALSE(bracket.cases.test(2));  // directories only

  const auto escaped = run_glob("\\*", sample_fs());
  EXPECT_TRUE(escaped.cases.test(7));
  EXPECT_FALSE(escaped.cases.test(5));
  EXPECT_FALSE(escaped.cases.test(10));
}

TEST(GlobTest, DirectoryContainingBackslash) {
  VirtualFs fs;
  fs.add("/a\\b", EntryKind::kDir);
  fs.add("/a\\b/x", EntryKind::kFile);
  const auto run = run_glob("a\\\\b/*", fs);
  EXPECT_TRUE(run.cases.test(9));
  EXPECT_EQ(run.result.matches, (std::vector<std::string>{"/a\\b/x"}));
}

TEST(GlobTest, BudgetExhaustionFailsWholeExpansion) {
  VirtualFs fs;
  for (char c = 'a'; c <= 'j'; ++c) fs.add(std::string("/") + c, EntryKind::kFile);
  const auto small = run_glob("*", fs, "/", 4);
  EXPECT_EQ(small.result.status, GlobStatus::kNoSpace);
  EXPECT_TRUE(small.cases.test(1));
  EXPECT_TRUE(small.result.matches.empty());
  EXPECT_FALSE(small.cases.test(10));

  const auto enough = run_glob("*", fs, "/", 10);
  EXPECT_EQ(enough.result.status, GlobStatus::kOk);
  EXPECT_EQ(enough.result.matches.size(), 10U);
  EXPECT_FALSE(enough.cases.test(1));
}

TEST(GlobTest, HiddenEntriesNeedLeadingDot) {
  const auto plain = run_glob("*", sample_fs());
  for (const auto& m : plain.result.matches) EXPECT_NE(m, "/.hidden");
  const auto dotted = run_glob(".h*", sample_fs());
  EXPECT_EQ(dotted.result.matches, (std::vector<std::string>{"/.hidden"}));
}

TEST(GlobTest, DanglingEscapeIsBadPattern) {
  const auto run = run_glob("abc\\", sample_fs());
  EXPECT_EQ(run.result.status, GlobStatus::kBadPattern);
}

TEST(GlobTest, RelativeToWorkingDirectory) {
  const auto run = run_glob("*", sample_fs(), "/d");
  EXPECT_EQ(run.result.matches, (std::vector<std::string>{"/d/f", "/d/g.txt"}));
}

TEST(GlobTest, EveryCaseHitSetsItsBranch) {
  const std::vector<std::string> patterns = {"*", "d/*", "*/f", "[a-z]*", "\\*", "*/*", "?", "d/[fg]*", "/d/f"};
  for (const auto& p : patterns) {
    const auto run = run_glob(p, sample_fs(), "/", 2);
    for (int id : run.cases.ids()) EXPECT_TRUE(run.coverage.test(case_branch(id))) << p;
  }
}

}  // namespace
}  // namespace statefuzz::ftp
