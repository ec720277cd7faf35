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

// A minimal FTP-like server. Command table:
//
//   USER x   331                       PASS x   230 after USER, else 503
//   MKD p    257 | 550 | 501           STOR p   250 | 550 | 501
//   NLST p   250 (glob) | 550          CWD p    250 | 550 | 501
//   INFO     150 226 (two-code burst)  QUIT     221, then 421 for the rest
//   other    500                       MKD/STOR/NLST/CWD before login: 530

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "statefuzz/glob.hpp"
#include "statefuzz/sut.hpp"

namespace statefuzz::ftp {

enum FtpBranch : BranchId {
  kFtpFirst = kGlobBranchCount,
  kFtpStripCrlf = kFtpFirst,
  kFtpLowercaseVerb,
  kFtpEmptyLine,
  kFtpUnknown,
  kFtpClosed,
  kFtpNotLoggedIn,
  kFtpMissingArg,
  kFtpUser,
  kFtpUserRelogin,
  kFtpPassOk,
  kFtpPassBadSequence,
  kFtpMkdOk,
  kFtpMkdExists,
  kFtpMkdNoParent,
  kFtpMkdNested,
  kFtpStorOk,
  kFtpStorOverwrite,
  kFtpStorNoParent,
  kFtpStorIsDir,
  kFtpStorNested,
  kFtpNlstPlain,
  kFtpNlstGlob,
  kFtpNlstGlobError,
  kFtpNlstNoSpace,
  kFtpCwdOk,
  kFtpCwdMissing,
  kFtpCwdRoot,
  kFtpInfo,
  kFtpQuit,
  kFtpDotDot,
  kFtpBranchCount
};

struct FtpOptions {
  // Matches a single NLST expansion may hold before failing with case 1.
  std::size_t match_budget = 8;
  std::size_t depth_cap = kDefaultDepthCap;
  std::size_t map_size = kDefaultMapSize;
};

class FtpGlobServer final : public Sut {
 public:
  explicit FtpGlobServer(FtpOptions options = {}) : options_(options) {
    if (options_.map_size < kFtpBranchCount) throw ConfigError("coverage map too small for ftp-glob");
    if (options_.depth_cap < 1) throw ConfigError("depth cap must be at least 1");
  }

  std::string_view name() const override { return "ftp-glob"; }
  std::size_t total_branches() const override { return kFtpBranchCount; }
  std::size_t map_size() const override { return options_.map_size; }
  std::size_t depth_cap() const override { return options_.depth_cap; }
  const FtpOptions& options() const { return options_; }

  // FTP verbs and glob metacharacters. corpus/ftp.dict adds whole commands
  // and bracket forms.
  std::vector<std::string> default_dictionary() const override {
    return {"USER", "PASS", "MKD", "STOR", "NLST", "CWD", "INFO", "QUIT",
            "*",    "?",    "[",   "]",    "\\",   "/"};
  }

  void execute_into(const RequestSequence& seq, ExecutionResult& out) const override {
    if (out.coverage.map_size() != options_.map_size) out.coverage = CoverageMap(options_.map_size);
    ExecutionRecorder rec(out);
    Session s;
    GlobProbe probe(out.coverage, out.glob_case_hits);
    for (const auto& msg : seq.messages) handle(s, msg.payload, rec, probe);
    rec.finish(options_.depth_cap);
  }

 private:
  enum class Auth { kStart, kUserGiven, kLoggedIn };

  struct Session {
    Auth auth = Auth::kStart;
    bool closed = false;
    std::string cwd = "/";
    VirtualFs fs;
  };

  static bool verb_is(std::string_view verb, std::string_view want) {
    if (verb.size() != want.size()) return false;
    for (std::size_t i = 0; i < verb.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(verb[i])) != want[i]) return false;
    }
    return true;
  }

  void handle(Session& s, std::string_view line, ExecutionRecorder& rec, GlobProbe& probe) const {
    if (s.closed) {
      probe.hit(kFtpClosed);
      rec.respond({"421"});
      return;
    }
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') {
      probe.hit(kFtpStripCrlf);
      line.remove_suffix(1);
    }
    if (line.empty()) {
      probe.hit(kFtpEmptyLine);
      rec.respond({"500"});
      return;
    }
    const auto space = line.find(' ');
    const std::string_view verb = line.substr(0, space);
    const std::string_view arg =
        space == std::string_view::npos ? std::string_view{} : line.substr(space + 1);
    for (char c : verb) {
      if (std::islower(static_cast<unsigned char>(c))) {
        probe.hit(kFtpLowercaseVerb);
        break;
      }
    }

    if (verb_is(verb, "USER")) {
      probe.hit(s.auth == Auth::kLoggedIn ? kFtpUserRelogin : kFtpUser);
      s.auth = Auth::kUserGiven;
      rec.respond({"331"});
    } else if (verb_is(verb, "PASS")) {
      if (s.auth == Auth::kUserGiven) {
        probe.hit(kFtpPassOk);
        s.auth = Auth::kLoggedIn;
        rec.respond({"230"});
      } else {
        probe.hit(kFtpPassBadSequence);
        rec.respond({"503"});
      }
    } else if (verb_is(verb, "INFO")) {
      probe.hit(kFtpInfo);
      rec.respond({"150", "226"});
    } else if (verb_is(verb, "QUIT")) {
      probe.hit(kFtpQuit);
      s.closed = true;
      rec.respond({"221"});
    } else if (verb_is(verb, "MKD") || verb_is(verb, "STOR") || verb_is(verb, "NLST") ||
               verb_is(verb, "CWD")) {
      if (s.auth != Auth::kLoggedIn) {
        probe.hit(kFtpNotLoggedIn);
        rec.respond({"530"});
        return;
      }
      if (verb_is(verb, "NLST")) {
        nlst(s, arg, rec, probe);
        return;
      }
      if (arg.empty()) {
        probe.hit(kFtpMissingArg);
        rec.respond({"501"});
        return;
      }
      if (arg.find("..") != std::string_view::npos) probe.hit(kFtpDotDot);
      if (verb_is(verb, "MKD")) {
        mkd(s, arg, rec, probe);
      } else if (verb_is(verb, "STOR")) {
        stor(s, arg, rec, probe);
      } else {
        cwd(s, arg, rec, probe);
      }
    } else {
      probe.hit(kFtpUnknown);
      rec.respond({"500"});
    }
  }

  void mkd(Session& s, std::string_view arg, ExecutionRecorder& rec, GlobProbe& probe) const {
    std::string path = resolve_path(s.cwd, arg);
    if (s.fs.exists(path)) {
      probe.hit(kFtpMkdExists);
      rec.respond({"550"});
      return;
    }
    const std::string parent = VirtualFs::parent(path);
    if (!s.fs.is_dir(parent)) {
      probe.hit(kFtpMkdNoParent);
      rec.respond({"550"});
      return;
    }
    probe.hit(parent == "/" ? kFtpMkdOk : kFtpMkdNested);
    s.fs.add(std::move(path), EntryKind::kDir);
    rec.respond({"257"});
  }

  void stor(Session& s, std::string_view arg, ExecutionRecorder& rec, GlobProbe& probe) const {
    std::string path = resolve_path(s.cwd, arg);
    if (s.fs.is_dir(path)) {
      probe.hit(kFtpStorIsDir);
      rec.respond({"550"});
      return;
    }
    const std::string parent = VirtualFs::parent(path);
    if (!s.fs.is_dir(parent)) {
      probe.hit(kFtpStorNoParent);
      rec.respond({"550"});
      return;
    }
    if (s.fs.is_file(path)) {
      probe.hit(kFtpStorOverwrite);
    } else {
      probe.hit(parent == "/" ? kFtpStorOk : kFtpStorNested);
      s.fs.add(std::move(path), EntryKind::kFile);
    }
    rec.respond({"250"});
  }

  void cwd(Session& s, std::string_view arg, ExecutionRecorder& rec, GlobProbe& probe) const {
    std::string path = resolve_path(s.cwd, arg);
    if (!s.fs.is_dir(path)) {
      probe.hit(kFtpCwdMissing);
      rec.respond({"550"});
      return;
    }
    probe.hit(path == "/" ? kFtpCwdRoot : kFtpCwdOk);
    s.cwd = std::move(path);
    rec.respond({"250"});
  }

  void nlst(Session& s, std::string_view arg, ExecutionRecorder& rec, GlobProbe& probe) const {
    if (arg.empty()) {
      probe.hit(kFtpNlstPlain);
      rec.respond({"250"});
      return;
    }
    probe.hit(kFtpNlstGlob);
    const GlobResult r = glob(arg, s.cwd, s.fs, options_.match_budget, probe);
    switch (r.status) {
      case GlobStatus::kOk:
        rec.respond({"250"});
        break;
      case GlobStatus::kNoSpace:
        probe.hit(kFtpNlstNoSpace);
        rec.respond({"550"});
        break;
      case GlobStatus::kBadPattern:
        probe.hit(kFtpNlstGlobError);
        rec.respond({"550"});
        break;
    }
  }

  FtpOptions options_;
};

}  // namespace statefuzz::ftp
