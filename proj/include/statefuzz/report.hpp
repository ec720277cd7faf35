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

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "statefuzz/corpus.hpp"
#include "statefuzz/error.hpp"
#include "statefuzz/glob.hpp"
#include "statefuzz/mcts_tree.hpp"
#include "statefuzz/protocol.hpp"
#include "statefuzz/state_machine.hpp"
#include "statefuzz/stats.hpp"

namespace statefuzz {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kTrialFormat = "statefuzz-trial/1";
inline constexpr std::string_view kComparisonFormat = "statefuzz-comparison/1";
inline constexpr int kCaseCount = 10;

inline double round_to(double v, int decimals) {
  if (!std::isfinite(v)) return v;
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

struct SeriesPoint {
  std::uint64_t iteration = 0;
  std::size_t branches = 0;
  double coverage_pct = 0;
  std::size_t sequences = 0;
};

struct TrialReport {
  std::string algorithm;
  std::string sut;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;
  std::uint64_t executions = 0;
  std::size_t total_branches = 0;
  std::vector<SeriesPoint> series;
  CaseSet glob_case_hits;
  Json model = Json::object();

  const SeriesPoint& final_point() const {
    if (series.empty()) throw CorpusFormatError("report", 0, "empty series");
    return series.back();
  }
};

inline Json to_json(const TrialReport& r) {
  Json j;
  j["format"] = kTrialFormat;
  j["algorithm"] = r.algorithm;
  j["sut"] = r.sut;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["iterations"] = r.iterations;
  j["executions"] = r.executions;
  j["total_branches"] = r.total_branches;
  if (!r.series.empty()) {
    const auto& f = r.series.back();
    j["final"] = {{"branches", f.branches}, {"coverage_pct", round_to(f.coverage_pct, 4)},
                  {"sequences", f.sequences}};
  }
  j["glob_case_hits"] = r.glob_case_hits.ids();
  Json series = Json::array();
  for (const auto& p : r.series) {
    series.push_back(Json::array({p.iteration, p.branches, round_to(p.coverage_pct, 4), p.sequences}));
  }
  j["series_columns"] = {"iteration", "branches", "coverage_pct", "sequences"};
  j["series"] = std::move(series);
  j["model"] = r.model;
  return j;
}

inline TrialReport trial_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kTrialFormat) {
      throw CorpusFormatError("report", 0, "unknown report format");
    }
    TrialReport r;
    r.algorithm = j.at("algorithm").get<std::string>();
    r.sut = j.at("sut").get<std::string>();
    r.trial = j.at("trial").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.iterations = j.at("iterations").get<std::uint64_t>();
    r.executions = j.at("executions").get<std::uint64_t>();
    r.total_branches = j.at("total_branches").get<std::size_t>();
    for (int id : j.at("glob_case_hits").get<std::vector<int>>()) r.glob_case_hits.set(id);
    for (const auto& row : j.at("series")) {
      r.series.push_back(SeriesPoint{row.at(0).get<std::uint64_t>(), row.at(1).get<std::size_t>(),
                                     row.at(2).get<double>(), row.at(3).get<std::size_t>()});
    }
    r.model = j.at("model");
    return r;
  } catch (const Json::exception& e) {
    throw CorpusFormatError("report", 0, e.what());
  }
}

inline TrialReport load_trial_report(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw CorpusFormatError(path.string(), 0, "invalid json");
  return trial_from_json(j);
}

inline std::string to_csv(const TrialReport& r) {
  std::string out = "iteration,branches,coverage_pct,sequences\n";
  for (const auto& p : r.series) {
    out += std::to_string(p.iteration) + ',' + std::to_string(p.branches) + ',' +
           fixed(p.coverage_pct, 4) + ',' + std::to_string(p.sequences) + '\n';
  }
  return out;
}

inline Json summarize(const Tree& tree, std::size_t stale_seeds) {
  std::size_t hollow = 0, redundant = 0, seeds = 0;
  std::uint32_t max_depth = 0;
  for (NodeId id = 1; id < tree.size(); ++id) {
    const TreeNode& n = tree.node(id);
    (n.kind == NodeKind::kRedundant ? redundant : hollow) += 1;
    seeds += n.seeds.size();
    max_depth = std::max(max_depth, n.depth);
  }
  seeds += tree.root().seeds.size();
  Json j;
  j["kind"] = "tree";
  j["nodes"] = tree.non_root_count();
  j["hollow"] = hollow;
  j["redundant"] = redundant;
  j["max_depth"] = max_depth;
  j["seeds"] = seeds;
  j["stale_seeds"] = stale_seeds;
  j["root_selections"] = tree.root().selection_count;
  Json children = Json::array();
  for (const auto& [code, id] : tree.root().children) {
    const TreeNode& c = tree.node(id);
    children.push_back({{"code", code}, {"selections", c.selection_count}, {"discoveries", c.discovery_count}});
  }
  j["root_children"] = std::move(children);
  return j;
}

inline Json summarize(const StateMachineModel& model) {
  Json states = Json::array();
  for (const auto& code : model.state_order()) {
    const StateRecord& s = model.state(code);
    states.push_back({{"code", s.code},
                      {"fuzz_count", s.fuzz_count},
                      {"discovery_count", s.discovery_count},
                      {"seeds", s.seeds.size()}});
  }
  Json j;
  j["kind"] = "state-machine";
  j["state_count"] = model.states().size();
  j["seed_pool"] = model.pool_size();
  j["states"] = std::move(states);
  return j;
}

struct AlgorithmSummary {
  std::string algorithm;
  std::size_t trials = 0;
  double mean_branches = 0;
  double mean_coverage_pct = 0;
  // Half-width of the 95% interval on final branch counts; absent below two trials.
  std::optional<double> ci_half_width;
  std::array<double, kCaseCount> case_probability{};
  std::vector<double> final_branches;
  std::array<std::vector<double>, kCaseCount> case_hits;
};

struct PairComparison {
  std::string a;
  std::string b;
  stats::WelchResult branches;
  std::array<stats::WelchResult, kCaseCount> cases;
};

struct ComparisonReport {
  std::vector<AlgorithmSummary> algorithms;
  std::vector<PairComparison> pairs;

  const AlgorithmSummary& algorithm(std::string_view name) const {
    for (const auto& a : algorithms) {
      if (a.algorithm == name) return a;
    }
    throw ConfigError("no reports for algorithm " + std::string(name));
  }
  const PairComparison& pair(std::string_view a, std::string_view b) const {
    for (const auto& p : pairs) {
      if (p.a == a && p.b == b) return p;
    }
    throw ConfigError("no comparison for " + std::string(a) + " vs " + std::string(b));
  }
};

// Groups reports by algorithm (first-seen order) and runs Welch tests on
// every ordered pair with at least two trials each.
inline ComparisonReport compare_reports(const std::vector<TrialReport>& reports) {
  ComparisonReport out;
  std::map<std::string, std::size_t> index;
  for (const auto& r : reports) {
    auto [it, fresh] = index.emplace(r.algorithm, out.algorithms.size());
    if (fresh) {
      AlgorithmSummary summary;
      summary.algorithm = r.algorithm;
      out.algorithms.push_back(std::move(summary));
    }
    AlgorithmSummary& s = out.algorithms[it->second];
    const SeriesPoint& f = r.final_point();
    s.trials += 1;
    s.final_branches.push_back(static_cast<double>(f.branches));
    s.mean_coverage_pct += f.coverage_pct;
    for (int c = 1; c <= kCaseCount; ++c) {
      s.case_hits[static_cast<std::size_t>(c - 1)].push_back(r.glob_case_hits.test(c) ? 1.0 : 0.0);
    }
  }
  for (auto& s : out.algorithms) {
    const double n = static_cast<double>(s.trials);
    s.mean_branches = stats::mean(s.final_branches);
    s.mean_coverage_pct /= n;
    if (s.trials >= 2) s.ci_half_width = stats::confidence_interval_95(s.final_branches).half_width;
    for (std::size_t c = 0; c < kCaseCount; ++c) {
      double hits = 0;
      for (double h : s.case_hits[c]) hits += h;
      s.case_probability[c] = hits / n;
    }
  }
  for (const auto& a : out.algorithms) {
    for (const auto& b : out.algorithms) {
      if (&a == &b || a.trials < 2 || b.trials < 2) continue;
      PairComparison p{a.algorithm, b.algorithm, stats::welch_t_test(a.final_branches, b.final_branches), {}};
      for (std::size_t c = 0; c < kCaseCount; ++c) p.cases[c] = stats::welch_t_test(a.case_hits[c], b.case_hits[c]);
      out.pairs.push_back(std::move(p));
    }
  }
  return out;
}

inline Json welch_json(const stats::WelchResult& w) {
  Json j;
  // Infinite t (zero-variance samples with different means) has no JSON number.
  if (std::isfinite(w.t)) {
    j["t"] = round_to(w.t, 6);
  } else {
    j["t"] = w.t > 0 ? "inf" : "-inf";
  }
  j["df"] = round_to(w.df, 6);
  j["p"] = round_to(w.p, 6);
  j["p_greater"] = round_to(w.p_greater, 6);
  j["degenerate"] = w.degenerate;
  return j;
}

inline Json to_json(const ComparisonReport& r) {
  Json j;
  j["format"] = kComparisonFormat;
  j["test"] = "welch";
  Json algos = Json::array();
  for (const auto& s : r.algorithms) {
    Json a;
    a["algorithm"] = s.algorithm;
    a["trials"] = s.trials;
    a["mean_final_branches"] = round_to(s.mean_branches, 4);
    a["mean_final_coverage_pct"] = round_to(s.mean_coverage_pct, 4);
    a["ci95_half_width"] = s.ci_half_width ? Json(round_to(*s.ci_half_width, 4)) : Json(nullptr);
    Json probs = Json::array();
    for (double p : s.case_probability) probs.push_back(round_to(p, 4));
    a["case_probability"] = std::move(probs);
    algos.push_back(std::move(a));
  }
  j["algorithms"] = std::move(algos);
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    Json cases = Json::array();
    for (const auto& c : p.cases) cases.push_back(welch_json(c));
    pairs.push_back({{"a", p.a}, {"b", p.b}, {"final_branches", welch_json(p.branches)}, {"cases", std::move(cases)}});
  }
  j["pairs"] = std::move(pairs);
  return j;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string cases_csv(const ComparisonReport& r) {
  std::string out = "case_id,description";
  for (const auto& s : r.algorithms) out += ',' + csv_field(s.algorithm);
  out += '\n';
  const auto cases = ftp::list_glob_cases();
  for (std::size_t c = 0; c < kCaseCount; ++c) {
    out += std::to_string(c + 1) + ',' + csv_field(cases[c].description);
    for (const auto& s : r.algorithms) out += ',' + fixed(s.case_probability[c], 4);
    out += '\n';
  }
  return out;
}

// Loads every trial_*.json under each directory, in path order.
inline std::vector<TrialReport> load_reports(const std::vector<std::filesystem::path>& dirs) {
  std::vector<TrialReport> out;
  for (const auto& dir : dirs) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && name.rfind("trial_", 0) == 0 && e.path().extension() == ".json") {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(load_trial_report(f));
  }
  if (out.empty()) throw ConfigError("no trial reports found");
  return out;
}

}  // namespace statefuzz
