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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "statefuzz/campaign.hpp"
#include "statefuzz/corpus.hpp"
#include "statefuzz/harness.hpp"
#include "statefuzz/report.hpp"

namespace {

using namespace statefuzz;

int run_command(const CampaignConfig& cfg) {
  const auto reports = run_campaign(cfg);
  for (const auto& r : reports) {
    const auto& f = r.final_point();
    std::printf("trial %llu: branches=%zu coverage=%s%% sequences=%zu executions=%llu\n",
                static_cast<unsigned long long>(r.trial), f.branches, fixed(f.coverage_pct, 4).c_str(),
                f.sequences, static_cast<unsigned long long>(r.executions));
  }
  return 0;
}

int compare_command(const std::vector<std::filesystem::path>& dirs, std::filesystem::path out) {
  const ComparisonReport cmp = compare_reports(load_reports(dirs));
  if (out.empty()) out = dirs.front();
  std::filesystem::create_directories(out);
  write_file(out / "comparison.json", to_json(cmp).dump(2) + "\n");
  write_file(out / "cases.csv", cases_csv(cmp));
  std::fputs(cases_csv(cmp).c_str(), stdout);
  return 0;
}

int replay_command(const std::string& sut_name, const std::filesystem::path& file) {
  const auto sut = make_sut(sut_name, {});
  const RequestSequence seq = load_sequence_file(file);
  const ExecutionResult exec = sut->execute(seq);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::string codes;
    for (const auto& c : exec.burst(i)) codes += (codes.empty() ? "" : " ") + c;
    std::printf("%-40s -> %s\n", escape_line(seq.messages[i].payload).c_str(), codes.c_str());
  }
  std::printf("response sequence: %s%s\n", exec.response_sequence.join().c_str(),
              exec.response_sequence.truncated ? " (truncated)" : "");
  std::printf("branches: %zu\n", exec.coverage.count());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stateful protocol fuzzing campaigns"};
  app.require_subcommand(1);

  CampaignConfig cfg;
  std::string algorithm = "legion-uu";
  std::string dict;
  auto* run = app.add_subcommand("run", "Run a multi-trial campaign");
  run->add_option("--algorithm", algorithm, "aflnet-random|aflnet-rr|aflnet-favor|legion-uu|legion-ur|legion-rr")
      ->required();
  run->add_option("--sut", cfg.sut, "Target harness")->required();
  run->add_option("--corpus", cfg.corpus, "Seed corpus directory")->required();
  run->add_option("--iterations", cfg.iterations, "Iterations per trial")->required();
  run->add_option("--trials", cfg.trials, "Number of trials")->required();
  run->add_option("--seed", cfg.seed, "Master rng seed")->required();
  run->add_option("--out", cfg.out, "Report directory")->required();
  run->add_option("--rho", cfg.uct.rho, "UCT exploration constant");
  run->add_option("--depth-cap", cfg.uct.depth_cap, "Maximum tree depth");
  run->add_option("--dict", dict, "Dictionary file, one escaped token per line");
  run->add_option("--mutants-per-iter", cfg.mutants_per_iteration, "Mutants per iteration");
  run->add_option("--jobs", cfg.jobs, "Parallel trials (0 = hardware threads)");
  run->add_option("--sample-every", cfg.sample_every, "Series sampling period (0 = auto)");

  std::vector<std::filesystem::path> report_dirs;
  std::filesystem::path compare_out;
  auto* compare = app.add_subcommand("compare", "Compare trial reports across algorithms");
  compare->add_option("--reports", report_dirs, "Report directories")->required()->expected(1, -1);
  compare->add_option("--out", compare_out, "Output directory (default: first report directory)");

  std::string replay_sut = "ftp-glob";
  std::filesystem::path replay_file;
  auto* replay = app.add_subcommand("replay", "Execute one sequence file and print its responses");
  replay->add_option("--sut", replay_sut, "Target harness");
  replay->add_option("file", replay_file, "Sequence file (.txt or .rseq)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cfg.algorithm = parse_algorithm(algorithm);
      if (!dict.empty()) cfg.dictionary = dict;
      return run_command(cfg);
    }
    if (*compare) return compare_command(report_dirs, compare_out);
    if (*replay) return replay_command(replay_sut, replay_file);
  } catch (const CorpusFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
