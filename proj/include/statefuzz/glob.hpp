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

// The FTP harness's in-memory filesystem and its instrumented glob engine.
// Glob cases 1-10 each own a dedicated branch id; the remaining branch ids
// mark internal matcher paths.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "statefuzz/coverage.hpp"
#include "statefuzz/protocol.hpp"

namespace statefuzz::ftp {

enum class EntryKind : std::uint8_t { kFile, kDir };

// Flat map of absolute normalized paths ("/a/b"). The root "/" always exists
// and is not stored.
class VirtualFs {
 public:
  static std::string join(std::string_view dir, std::string_view name) {
    std::string out(dir);
    if (out.empty() || out.back() != '/') out.push_back('/');
    out += name;
    return out;
  }

  static std::string parent(std::string_view path) {
    const auto slash = path.rfind('/');
    if (slash == 0 || slash == std::string_view::npos) return "/";
    return std::string(path.substr(0, slash));
  }

  static std::string_view basename(std::string_view path) {
    const auto slash = path.rfind('/');
    return slash == std::string_view::npos ? path : path.substr(slash + 1);
  }

  bool exists(std::string_view path) const {
    return path == "/" || entries_.find(std::string(path)) != entries_.end();
  }

  bool is_dir(std::string_view path) const {
    if (path == "/") return true;
    auto it = entries_.find(std::string(path));
    return it != entries_.end() && it->second == EntryKind::kDir;
  }

  bool is_file(std::string_view path) const {
    auto it = entries_.find(std::string(path));
    return it != entries_.end() && it->second == EntryKind::kFile;
  }

  void add(std::string path, EntryKind kind) { entries_[std::move(path)] = kind; }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // Calls fn(name, kind) for each direct child of `dir`, in byte order.
  template <typename Fn>
  void list(std::string_view dir, Fn&& fn) const {
    std::string prefix(dir);
    if (prefix.back() != '/') prefix.push_back('/');
    for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
      const std::string& key = it->first;
      if (key.compare(0, prefix.size(), prefix) != 0) break;
      const std::string_view name = std::string_view(key).substr(prefix.size());
      if (name.find('/') != std::string_view::npos) continue;
      fn(name, it->second);
    }
  }

 private:
  std::map<std::string, EntryKind> entries_;
};

// Resolves `arg` against `cwd`. "." is dropped and ".." climbs, never above
// the root.
inline std::string resolve_path(std::string_view cwd, std::string_view arg) {
  std::vector<std::string_view> parts;
  auto push_all = [&](std::string_view path) {
    std::size_t pos = 0;
    while (pos <= path.size()) {
      std::size_t slash = path.find('/', pos);
      if (slash == std::string_view::npos) slash = path.size();
      const auto part = path.substr(pos, slash - pos);
      if (part == "..") {
        if (!parts.empty()) parts.pop_back();
      } else if (!part.empty() && part != ".") {
        parts.push_back(part);
      }
      pos = slash + 1;
    }
  };
  if (arg.empty() || arg.front() != '/') push_all(cwd);
  push_all(arg);
  std::string out;
  for (auto p : parts) {
    out.push_back('/');
    out += p;
  }
  return out.empty() ? "/" : out;
}

enum GlobBranch : BranchId {
  kGlobCase1 = 0,  // cases occupy ids 0..9
  kGlobCase10 = 9,
  kGlobEnter,
  kGlobBadPattern,
  kGlobAbsolute,
  kGlobNoComponents,
  kGlobLiteralDir,
  kGlobLiteralDirMissing,
  kGlobLiteralFinal,
  kGlobLiteralFinalMissing,
  kGlobListDir,
  kGlobHiddenSkipped,
  kGlobNoMatch,
  kMatchStar,
  kMatchStarBacktrack,
  kMatchQuestion,
  kMatchClass,
  kMatchClassNegated,
  kMatchClassRange,
  kMatchClassMalformed,
  kMatchEscape,
  kMatchMismatch,
  kGlobBranchCount
};

inline constexpr BranchId case_branch(int case_id) {
  return static_cast<BranchId>(kGlobCase1 + case_id - 1);
}

struct GlobCase {
  int case_id;
  std::string_view description;
  std::vector<BranchId> branch_ids;
};

inline std::vector<GlobCase> list_glob_cases() {
  static constexpr std::array<std::string_view, 10> kDescriptions = {
      "Failing to allocate more memory",
      "Globbing a file without path prefix",
      "Globbing a file with a path prefix",
      "Having a wildcard in a directory name",
      R"(Globbing with metacharacter "*" or "?")",
      R"(Globbing with metacharacter "[]")",
      "Escaping a wildcard metacharacter",
      "Successfully expanding a directory with a metacharacter",
      R"(Globbing a directory that contains "\\")",
      "Successfully finding at least 1 match",
  };
  std::vector<GlobCase> out;
  for (int i = 1; i <= 10; ++i) {
    out.push_back({i, kDescriptions[static_cast<std::size_t>(i - 1)], {case_branch(i)}});
  }
  return out;
}

// Branch and case sink for one execution.
class GlobProbe {
 public:
  GlobProbe(CoverageMap& cov, CaseSet& cases) : cov_(cov), cases_(cases) {}
  void hit(BranchId id) { cov_.hit(id); }
  void reach_case(int id) {
    cov_.hit(case_branch(id));
    cases_.set(id);
  }

 private:
  CoverageMap& cov_;
  CaseSet& cases_;
};

namespace detail {

enum class ClassResult { kMatch, kNoMatch, kMalformed };

// `pat[open]` is '['. On success `end` is one past the closing ']'.
inline ClassResult match_class(std::string_view pat, std::size_t open, unsigned char ch,
                               std::size_t& end, GlobProbe* probe) {
  std::size_t i = open + 1;
  bool negate = false;
  if (i < pat.size() && (pat[i] == '!' || pat[i] == '^')) {
    negate = true;
    ++i;
  }
  bool matched = false;
  bool first = true;
  while (i < pat.size()) {
    unsigned char lo = static_cast<unsigned char>(pat[i]);
    if (lo == ']' && !first) {
      end = i + 1;
      if (probe) {
        probe->hit(kMatchClass);
        if (negate) probe->hit(kMatchClassNegated);
      }
      return matched != negate ? ClassResult::kMatch : ClassResult::kNoMatch;
    }
    first = false;
    if (lo == '\\' && i + 1 < pat.size()) lo = static_cast<unsigned char>(pat[++i]);
    if (i + 2 < pat.size() && pat[i + 1] == '-' && pat[i + 2] != ']') {
      const auto hi = static_cast<unsigned char>(pat[i + 2]);
      if (lo <= ch && ch <= hi) {
        matched = true;
        if (probe) probe->hit(kMatchClassRange);
      }
      i += 3;
      continue;
    }
    if (lo == ch) matched = true;
    ++i;
  }
  return ClassResult::kMalformed;
}

struct ComponentInfo {
  bool wildcard = false;      // unescaped '*' or '?'
  bool bracket = false;       // well-formed '[...]'
  bool escaped_meta = false;  // '\' before one of * ? [ ]
  bool dangling_escape = false;
  bool has_meta() const { return wildcard || bracket; }
};

inline ComponentInfo scan_component(std::string_view comp) {
  ComponentInfo info;
  for (std::size_t i = 0; i < comp.size(); ++i) {
    const char c = comp[i];
    if (c == '\\') {
      if (i + 1 == comp.size()) {
        info.dangling_escape = true;
        break;
      }
      const char e = comp[++i];
      if (e == '*' || e == '?' || e == '[' || e == ']') info.escaped_meta = true;
    } else if (c == '*' || c == '?') {
      info.wildcard = true;
    } else if (c == '[') {
      std::size_t end = 0;
      if (match_class(comp, i, 0, end, nullptr) != ClassResult::kMalformed) {
        info.bracket = true;
        i = end - 1;
      }
    }
  }
  return info;
}

inline std::string unescape_component(std::string_view comp) {
  std::string out;
  for (std::size_t i = 0; i < comp.size(); ++i) {
    if (comp[i] == '\\' && i + 1 < comp.size()) ++i;
    out.push_back(comp[i]);
  }
  return out;
}

}  // namespace detail

// fnmatch-style match of one path component: '*', '?', bracket classes with
// '!'/'^' negation and ranges, and backslash escapes. A malformed '[' is an
// ordinary character.
inline bool match_component(std::string_view pat, std::string_view name, GlobProbe& probe) {
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t star_p = std::string_view::npos;
  std::size_t star_n = 0;
  while (n < name.size()) {
    bool advanced = false;
    if (p < pat.size()) {
      const char c = pat[p];
      const auto ch = static_cast<unsigned char>(name[n]);
      if (c == '*') {
        probe.hit(kMatchStar);
        star_p = ++p;
        star_n = n;
        continue;
      }
      if (c == '?') {
        probe.hit(kMatchQuestion);
        ++p;
        ++n;
        continue;
      }
      if (c == '[') {
        std::size_t end = 0;
        switch (detail::match_class(pat, p, ch, end, &probe)) {
          case detail::ClassResult::kMatch:
            p = end;
            ++n;
            advanced = true;
            break;
          case detail::ClassResult::kNoMatch:
            break;
          case detail::ClassResult::kMalformed:
            probe.hit(kMatchClassMalformed);
            if (ch == '[') {
              ++p;
              ++n;
              advanced = true;
            }
            break;
        }
      } else if (c == '\\' && p + 1 < pat.size()) {
        probe.hit(kMatchEscape);
        if (static_cast<unsigned char>(pat[p + 1]) == ch) {
          p += 2;
          ++n;
          advanced = true;
        }
      } else if (static_cast<unsigned char>(c) == ch) {
        ++p;
        ++n;
        advanced = true;
      }
    }
    if (advanced) continue;
    if (star_p != std::string_view::npos) {
      probe.hit(kMatchStarBacktrack);
      p = star_p;
      n = ++star_n;
      continue;
    }
    probe.hit(kMatchMismatch);
    return false;
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

enum class GlobStatus { kOk, kNoSpace, kBadPattern };

struct GlobResult {
  GlobStatus status = GlobStatus::kOk;
  std::vector<std::string> matches;
};

// Expands `pattern` relative to `cwd`. At most `match_budget` matches can be
// held; one more exhausts the budget and fails the whole expansion.
inline GlobResult glob(std::string_view pattern, std::string_view cwd, const VirtualFs& fs,
                       std::size_t match_budget, GlobProbe& probe) {
  probe.hit(kGlobEnter);
  GlobResult result;

  std::vector<std::string_view> comps;
  {
    std::size_t pos = 0;
    while (pos <= pattern.size()) {
      std::size_t slash = pattern.find('/', pos);
      if (slash == std::string_view::npos) slash = pattern.size();
      if (slash > pos) comps.push_back(pattern.substr(pos, slash - pos));
      pos = slash + 1;
    }
  }
  std::vector<detail::ComponentInfo> infos;
  infos.reserve(comps.size());
  for (auto c : comps) {
    infos.push_back(detail::scan_component(c));
    if (infos.back().dangling_escape) {
      probe.hit(kGlobBadPattern);
      result.status = GlobStatus::kBadPattern;
      return result;
    }
  }
  if (comps.empty()) {
    probe.hit(kGlobNoComponents);
    return result;
  }

  const bool absolute = !pattern.empty() && pattern.front() == '/';
  if (absolute) probe.hit(kGlobAbsolute);
  const bool has_prefix = absolute || comps.size() > 1;
  for (const auto& info : infos) {
    if (info.wildcard) probe.reach_case(5);
    if (info.bracket) probe.reach_case(6);
    if (info.escaped_meta) probe.reach_case(7);
  }

  auto open_dir = [&](std::string_view dir) {
    probe.hit(kGlobListDir);
    if (dir.find('\\') != std::string_view::npos) probe.reach_case(9);
  };
  auto hidden = [&](std::string_view comp, std::string_view name) {
    if (!name.empty() && name.front() == '.' && (comp.empty() || comp.front() != '.')) {
      probe.hit(kGlobHiddenSkipped);
      return true;
    }
    return false;
  };

  std::vector<std::string> dirs{absolute ? std::string("/") : std::string(cwd)};
  for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
    std::vector<std::string> next;
    if (infos[i].has_meta()) {
      probe.reach_case(4);
      for (const auto& d : dirs) {
        open_dir(d);
        fs.list(d, [&](std::string_view name, EntryKind kind) {
          if (kind != EntryKind::kDir || hidden(comps[i], name)) return;
          if (match_component(comps[i], name, probe)) next.push_back(VirtualFs::join(d, name));
        });
      }
      if (!next.empty()) probe.reach_case(8);
    } else {
      const std::string name = detail::unescape_component(comps[i]);
      for (const auto& d : dirs) {
        std::string path = VirtualFs::join(d, name);
        if (fs.is_dir(path)) {
          probe.hit(kGlobLiteralDir);
          next.push_back(std::move(path));
        } else {
          probe.hit(kGlobLiteralDirMissing);
        }
      }
    }
    dirs = std::move(next);
    if (dirs.empty()) break;
  }

  const std::string_view last = comps.back();
  const auto& last_info = infos.back();
  bool out_of_space = false;
  auto add_match = [&](std::string path) {
    if (result.matches.size() == match_budget) {
      out_of_space = true;
      return;
    }
    result.matches.push_back(std::move(path));
  };
  for (const auto& d : dirs) {
    if (out_of_space) break;
    if (last_info.has_meta()) {
      open_dir(d);
      fs.list(d, [&](std::string_view name, EntryKind) {
        if (out_of_space || hidden(last, name)) return;
        if (match_component(last, name, probe)) add_match(VirtualFs::join(d, name));
      });
    } else {
      std::string path = VirtualFs::join(d, detail::unescape_component(last));
      if (fs.exists(path)) {
        probe.hit(kGlobLiteralFinal);
        add_match(std::move(path));
      } else {
        probe.hit(kGlobLiteralFinalMissing);
      }
    }
  }
  if (out_of_space) {
    probe.reach_case(1);
    result.status = GlobStatus::kNoSpace;
    result.matches.clear();
    return result;
  }

  for (const auto& m : result.matches) {
    if (fs.is_file(m)) probe.reach_case(has_prefix ? 3 : 2);
  }
  if (result.matches.empty()) {
    probe.hit(kGlobNoMatch);
  } else {
    probe.reach_case(10);
  }
  return result;
}

}  // namespace statefuzz::ftp
