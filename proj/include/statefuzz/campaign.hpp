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
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "statefuzz/corpus.hpp"
#include "statefuzz/error.hpp"
#include "statefuzz/harness.hpp"
#include "statefuzz/mcts_tree.hpp"
#include "statefuzz/mutation.hpp"
#include "statefuzz/report.hpp"
#include "statefuzz/rng.hpp"
#include "statefuzz/seed.hpp"
#include "statefuzz/state_machine.hpp"

namespace statefuzz {

enum class Algorithm : std::uint8_t {
  kAflnetRandom,
  kAflnetRoundRobin,
  kAflnetFavor,
  kLegionUU,
  kLegionUR,
  kLegionRR,
};

struct AlgorithmInfo {
  Algorithm id;
  std::string_view name;
};

inline constexpr std::array<AlgorithmInfo, 6> kAlgorithms = {{
    {Algorithm::kAflnetRandom, "aflnet-random"},
    {Algorithm::kAflnetRoundRobin, "aflnet-rr"},
    {Algorithm::kAflnetFavor, "aflnet-favor"},
    {Algorithm::kLegionUU, "legion-uu"},
    {Algorithm::kLegionUR, "legion-ur"},
    {Algorithm::kLegionRR, "legion-rr"},
}};

inline std::string_view algorithm_name(Algorithm a) {
  for (const auto& info : kAlgorithms) {
    if (info.id == a) return info.name;
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (const auto& info : kAlgorithms) {
    if (info.name == name) return info.id;
  }
  throw ConfigError("unknown algorithm: " + std::string(name));
}

inline bool is_tree_algorithm(Algorithm a) {
  return a == Algorithm::kLegionUU || a == Algorithm::kLegionUR || a == Algorithm::kLegionRR;
}

inline FlatAlgorithm flat_algorithm(Algorithm a) {
  switch (a) {
    case Algorithm::kAflnetRandom:
      return FlatAlgorithm::kRandom;
    case Algorithm::kAflnetRoundRobin:
      return FlatAlgorithm::kRoundRobin;
    default:
      return FlatAlgorithm::kFavor;
  }
}

inline PolicyPair tree_policies(Algorithm a) {
  switch (a) {
    case Algorithm::kLegionUR:
      return {SelectionPolicy::kUct, SelectionPolicy::kRandom};
    case Algorithm::kLegionRR:
      return {SelectionPolicy::kRandom, SelectionPolicy::kRandom};
    default:
      return {SelectionPolicy::kUct, SelectionPolicy::kUct};
  }
}

struct CampaignConfig {
  Algorithm algorithm = Algorithm::kLegionUU;
  std::string sut = "ftp-glob";
  std::filesystem::path corpus;
  std::uint64_t iterations = 1000;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  UctParams uct;
  MutationConfig mutation;
  // Dictionary file; when unset the harness's built-in tokens are used.
  std::optional<std::filesystem::path> dictionary;
  std::size_t mutants_per_iteration = 20;
  std::filesystem::path out;
  // Worker threads; 0 means one per hardware thread.
  std::size_t jobs = 0;
  // Series sampling period; 0 picks about 100 points per trial.
  std::uint64_t sample_every = 0;

  void validate() const {
    if (iterations < 1) throw ConfigError("iterations must be at least 1");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    uct.validate();
    mutation.validate();
  }

  std::uint64_t sampling_period() const {
    return sample_every > 0 ? sample_every : std::max<std::uint64_t>(1, iterations / 100);
  }
};

// One trial: its own rng stream, model, coverage and novelty sets.
class Trial {
 public:
  Trial(const CampaignConfig& cfg, const Sut& sut, MutationConfig mutation, std::uint64_t index)
      : cfg_(cfg),
        index_(index),
        seed_(trial_seed(cfg.seed, index)),
        ctx_(std::make_unique<FuzzContext>(sut, std::move(mutation), seed_)) {
    if (is_tree_algorithm(cfg.algorithm)) {
      scheduler_.emplace<TreeScheduler>(*ctx_, tree_policies(cfg.algorithm), cfg.uct,
                                        cfg.mutants_per_iteration);
    } else {
      scheduler_.emplace<FlatScheduler>(*ctx_, flat_algorithm(cfg.algorithm), cfg.mutants_per_iteration);
    }
  }

  void seed_corpus(const std::vector<RequestSequence>& corpus) {
    std::visit(
        [&](auto& s) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(s)>, std::monostate>) s.seed_corpus(corpus);
        },
        scheduler_);
    record(0);
  }

  IterationOutcome step() {
    ++iteration_;
    IterationOutcome out = std::visit(
        [](auto& s) -> IterationOutcome {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, std::monostate>) {
            return {};
          } else {
            return s.run_iteration();
          }
        },
        scheduler_);
    if (iteration_ % cfg_.sampling_period() == 0 || iteration_ == cfg_.iterations) record(iteration_);
    return out;
  }

  void run(const std::vector<RequestSequence>& corpus) {
    seed_corpus(corpus);
    while (iteration_ < cfg_.iterations) step();
  }

  TrialReport report() const {
    TrialReport r;
    r.algorithm = std::string(algorithm_name(cfg_.algorithm));
    r.sut = std::string(ctx_->sut().name());
    r.trial = index_;
    r.seed = seed_;
    r.iterations = iteration_;
    r.executions = ctx_->executions();
    r.total_branches = ctx_->virgin().total_branches();
    r.series = series_;
    r.glob_case_hits = ctx_->cases();
    if (const auto* t = tree_scheduler()) {
      r.model = summarize(t->tree(), t->stale_seeds());
    } else if (const auto* f = flat_scheduler()) {
      r.model = summarize(f->model());
    }
    return r;
  }

  const TreeScheduler* tree_scheduler() const { return std::get_if<TreeScheduler>(&scheduler_); }
  const FlatScheduler* flat_scheduler() const { return std::get_if<FlatScheduler>(&scheduler_); }
  const FuzzContext& context() const { return *ctx_; }
  std::uint64_t iteration() const { return iteration_; }

 private:
  void record(std::uint64_t it) {
    if (!series_.empty() && series_.back().iteration == it) return;
    series_.push_back(SeriesPoint{it, ctx_->virgin().count(),
                                  round_to(coverage_percent(ctx_->virgin()) * 100, 4),
                                  ctx_->sequences_seen()});
  }

  const CampaignConfig& cfg_;
  std::uint64_t index_;
  std::uint64_t seed_;
  std::unique_ptr<FuzzContext> ctx_;
  std::variant<std::monostate, FlatScheduler, TreeScheduler> scheduler_;
  std::uint64_t iteration_ = 0;
  std::vector<SeriesPoint> series_;
};

// Resolves the effective mutation config: an explicit dictionary file wins,
// then tokens already in the config, then the harness defaults.
inline MutationConfig effective_mutation(const CampaignConfig& cfg, const Sut& sut) {
  MutationConfig m = cfg.mutation;
  if (cfg.dictionary) {
    m.dictionary = load_dictionary(*cfg.dictionary);
  } else if (m.dictionary.empty()) {
    m.dictionary = sut.default_dictionary();
  }
  return m;
}

// Serializes report files written by concurrent trials.
class ReportSink {
 public:
  explicit ReportSink(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  void write(const TrialReport& r) {
    if (dir_.empty()) return;
    std::lock_guard<std::mutex> lock(mu_);
    const std::string stem = "trial_" + std::to_string(r.trial);
    write_file(dir_ / (stem + ".csv"), to_csv(r));
    write_file(dir_ / (stem + ".json"), to_json(r).dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  std::mutex mu_;
};

// Runs every trial of `cfg` and writes their reports to cfg.out (when set)
// as they finish. Identical configs give identical reports.
inline std::vector<TrialReport> run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  SutOptions sut_options;
  sut_options.depth_cap = cfg.uct.depth_cap;
  const std::unique_ptr<Sut> sut = make_sut(cfg.sut, sut_options);
  const std::vector<RequestSequence> corpus = load_corpus(cfg.corpus);
  const MutationConfig mutation = effective_mutation(cfg, *sut);
  mutation.validate();

  ReportSink sink(cfg.out);
  std::vector<std::optional<TrialReport>> reports(cfg.trials);
  std::atomic<std::uint64_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      try {
        Trial trial(cfg, *sut, mutation, t);
        trial.run(corpus);
        TrialReport r = trial.report();
        sink.write(r);
        reports[t] = std::move(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(cfg.trials);
      }
    }
  };

  std::size_t jobs = cfg.jobs > 0 ? cfg.jobs : std::max(1U, std::thread::hardware_concurrency());
  jobs = std::min<std::size_t>(jobs, cfg.trials);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<TrialReport> out;
  out.reserve(reports.size());
  for (auto& r : reports) out.push_back(std::move(*r));
  return out;
}

}  // namespace statefuzz
