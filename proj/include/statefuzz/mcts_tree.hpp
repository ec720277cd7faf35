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

// Response-sequence tree and its Monte Carlo tree search loop.
//
// Every node is identified by the full code path from the root. Hollow
// nodes are states fuzzing can launch from and carry a simulation child
// ("fuzz from here now"); redundant nodes are burst-internal codes that can
// only be passed through. Each iteration runs selection, simulation,
// expansion and back-propagation.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "statefuzz/error.hpp"
#include "statefuzz/mutation.hpp"
#include "statefuzz/protocol.hpp"
#include "statefuzz/rng.hpp"
#include "statefuzz/seed.hpp"

namespace statefuzz {

inline constexpr double kDefaultRho = 0.0025;

struct UctParams {
  double rho = kDefaultRho;
  std::size_t depth_cap = kDefaultDepthCap;

  void validate() const {
    if (!(rho >= 0) || !std::isfinite(rho)) throw ConfigError("rho must be a finite non-negative number");
    if (depth_cap < 1) throw ConfigError("depth cap must be at least 1");
  }
};

// Upper confidence bound for trees: D/S + rho * sqrt(2 ln(P_S) / S), and
// +inf for an unvisited candidate. `parent_selections` is the selection
// count of whatever the candidate is chosen under.
inline double uct(std::uint64_t discoveries, std::uint64_t selections,
                  std::uint64_t parent_selections, double rho) {
  if (selections == 0) return std::numeric_limits<double>::infinity();
  if (parent_selections < 1) throw ConfigError("uct: parent selection count below 1");
  const double s = static_cast<double>(selections);
  return static_cast<double>(discoveries) / s +
         rho * std::sqrt(2.0 * std::log(static_cast<double>(parent_selections)) / s);
}

enum class SelectionPolicy : std::uint8_t { kUct, kRandom };

enum class NodeKind : std::uint8_t { kRoot, kHollow, kRedundant };

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr NodeId kRootNode = 0;

struct SimulationNode {
  std::uint64_t selection_count = 0;
  // New response sequences found by mutants launched from here. Scores the
  // simulation child against its siblings.
  std::uint64_t discovery_count = 0;
};

struct TreeNode {
  ResponseCode code;
  NodeKind kind = NodeKind::kHollow;
  NodeId parent = kNoNode;
  std::uint32_t depth = 0;
  // Insertion order doubles as the selection tie-break order.
  std::vector<std::pair<ResponseCode, NodeId>> children;
  std::optional<SimulationNode> sim;
  std::uint64_t selection_count = 0;
  std::uint64_t discovery_count = 0;
  std::vector<SeedEntry> seeds;
  // Seeds before this index have all been selected at least once.
  std::size_t unvisited_seed = 0;

  NodeId child(const ResponseCode& code) const {
    for (const auto& [c, id] : children) {
      if (c == code) return id;
    }
    return kNoNode;
  }
  bool can_launch() const { return sim.has_value(); }
};

class Tree {
 public:
  Tree() {
    TreeNode root;
    root.code = kRootCode;
    root.kind = NodeKind::kRoot;
    root.sim.emplace();
    nodes_.push_back(std::move(root));
  }

  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  TreeNode& node(NodeId id) { return nodes_.at(id); }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t size() const { return nodes_.size(); }
  std::size_t non_root_count() const { return nodes_.size() - 1; }

  // Node reached by `codes` (which start with the root code), or kNoNode.
  NodeId find(std::span<const ResponseCode> codes) const {
    if (codes.empty() || codes.front() != kRootCode) return kNoNode;
    NodeId cur = kRootNode;
    for (std::size_t i = 1; i < codes.size() && cur != kNoNode; ++i) cur = nodes_[cur].child(codes[i]);
    return cur;
  }

  std::vector<ResponseCode> path_codes(NodeId id) const {
    std::vector<ResponseCode> out;
    for (NodeId cur = id; cur != kNoNode; cur = nodes_[cur].parent) out.push_back(nodes_[cur].code);
    return {out.rbegin(), out.rend()};
  }

  NodeId add_child(NodeId parent, const ResponseCode& code, NodeKind kind) {
    const auto id = static_cast<NodeId>(nodes_.size());
    TreeNode n;
    n.code = code;
    n.kind = kind;
    n.parent = parent;
    n.depth = nodes_[parent].depth + 1;
    if (kind != NodeKind::kRedundant) n.sim.emplace();
    nodes_.push_back(std::move(n));
    nodes_[parent].children.emplace_back(code, id);
    return id;
  }

  void promote(NodeId id) {
    TreeNode& n = nodes_.at(id);
    if (n.kind != NodeKind::kRedundant) return;
    n.kind = NodeKind::kHollow;
    n.sim.emplace();
  }

 private:
  std::vector<TreeNode> nodes_;
};

// Nodes from the root to the hollow node whose simulation child was chosen.
struct SelectionPath {
  std::vector<NodeId> nodes;
  NodeId launch() const { return nodes.back(); }
};

// Candidates barred from the current selection: simulation children whose
// node turned out to have no usable seed, and nodes with nothing left
// below them.
class SelectionExclusions {
 public:
  void exclude_sim(NodeId id) { mark(id, kSim); }
  void exclude_node(NodeId id) { mark(id, kNode); }
  bool sim_excluded(NodeId id) const { return id < flags_.size() && (flags_[id] & kSim); }
  bool node_excluded(NodeId id) const { return id < flags_.size() && (flags_[id] & kNode); }
  bool empty() const { return count_ == 0; }

 private:
  static constexpr std::uint8_t kSim = 1;
  static constexpr std::uint8_t kNode = 2;
  void mark(NodeId id, std::uint8_t f) {
    if (id >= flags_.size()) flags_.resize(id + 1, 0);
    flags_[id] |= f;
    ++count_;
  }
  std::vector<std::uint8_t> flags_;
  std::size_t count_ = 0;
};

// Descends from the root, scoring the current node's simulation child and
// its children, until a simulation child wins. Ties go to the simulation
// child, then to children in insertion order.
inline SelectionPath select_path(const Tree& tree, SelectionPolicy policy, double rho, Rng& rng,
                                 SelectionExclusions* excluded = nullptr) {
  SelectionPath path;
  std::vector<NodeId> candidates;  // kNoNode stands for the simulation child
  for (;;) {
    path.nodes.clear();
    NodeId cur = kRootNode;
    bool dead_end = false;
    while (true) {
      path.nodes.push_back(cur);
      const TreeNode& n = tree.node(cur);
      candidates.clear();
      if (n.sim && !(excluded && excluded->sim_excluded(cur))) candidates.push_back(kNoNode);
      for (const auto& [code, id] : n.children) {
        if (!(excluded && excluded->node_excluded(id))) candidates.push_back(id);
      }
      if (candidates.empty()) {
        if (!n.sim && n.children.empty()) {
          throw StructuralError("redundant node " + tree.node(cur).code + " at depth " +
                                std::to_string(n.depth) + " has no children");
        }
        if (cur == kRootNode || excluded == nullptr) throw NoSeedError("no node left to fuzz from");
        excluded->exclude_node(cur);
        dead_end = true;
        break;
      }
      std::size_t pick = 0;
      if (policy == SelectionPolicy::kRandom) {
        pick = rng.below(candidates.size());
      } else {
        double best = -1;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          const NodeId c = candidates[i];
          const double score =
              c == kNoNode ? uct(n.sim->discovery_count, n.sim->selection_count, n.selection_count, rho)
                           : uct(tree.node(c).discovery_count, tree.node(c).selection_count,
                                 n.selection_count, rho);
          if (score > best) {
            best = score;
            pick = i;
          }
          if (std::isinf(score)) break;
        }
      }
      if (candidates[pick] == kNoNode) return path;
      cur = candidates[pick];
    }
    if (!dead_end) return path;
  }
}

// Picks one of the node's seeds; returns its index. Under UCT the parent
// count is the node's simulation-child selection count.
inline std::size_t select_seed(TreeNode& node, SelectionPolicy policy, double rho, Rng& rng) {
  if (node.seeds.empty()) throw NoSeedError("node " + node.code + " holds no seed");
  if (policy == SelectionPolicy::kRandom) return rng.below(node.seeds.size());
  while (node.unvisited_seed < node.seeds.size() &&
         node.seeds[node.unvisited_seed].selection_count > 0) {
    ++node.unvisited_seed;
  }
  if (node.unvisited_seed < node.seeds.size()) return node.unvisited_seed;
  const std::uint64_t parent = node.sim ? node.sim->selection_count : 0;
  std::size_t best_i = 0;
  double best = -1;
  for (std::size_t i = 0; i < node.seeds.size(); ++i) {
    const auto& s = node.seeds[i];
    const double score = uct(s.discovery_count, s.selection_count, parent, rho);
    if (score > best) {
      best = score;
      best_i = i;
    }
  }
  return best_i;
}

// Read-only scoring variant used by tests and reports.
inline std::size_t select_seed(const TreeNode& node, SelectionPolicy policy, double rho, Rng& rng) {
  TreeNode copy = node;
  return select_seed(copy, policy, rho, rng);
}

struct ExpansionResult {
  std::size_t new_node_count = 0;
  NodeId first_new_parent = kNoNode;
  std::vector<NodeId> new_nodes;
  std::vector<NodeId> promoted;

  bool new_sequence() const { return new_node_count > 0; }
};

// Adds the execution's response sequence to the tree. Within one request's
// burst all codes but the last become redundant nodes and the last becomes
// hollow; a redundant node that ends a burst here is promoted to hollow.
// The sequence is stored as a seed on the parent of the first new node, on
// every new hollow node and on every promoted node, but only where its
// execution sits on a request boundary so the seed can reproduce the state.
inline ExpansionResult expand(Tree& tree, const RequestSequence& seq, const ExecTrace& exec,
                              std::size_t branch_count = 0) {
  ExpansionResult result;
  const auto& codes = exec.response_sequence.codes;
  std::vector<NodeId> store_at;

  NodeId cur = kRootNode;
  std::size_t burst = 0;  // index of the burst containing position j
  bool prev_boundary = true;
  for (std::size_t j = 1; j < codes.size(); ++j) {
    while (burst < exec.burst_ends.size() && exec.burst_ends[burst] < j) ++burst;
    const bool burst_final = burst < exec.burst_ends.size() && exec.burst_ends[burst] == j;
    NodeId next = tree.node(cur).child(codes[j]);
    if (next == kNoNode) {
      if (result.first_new_parent == kNoNode) {
        result.first_new_parent = cur;
        if (prev_boundary && tree.node(cur).can_launch()) store_at.push_back(cur);
      }
      next = tree.add_child(cur, codes[j], burst_final ? NodeKind::kHollow : NodeKind::kRedundant);
      result.new_nodes.push_back(next);
      if (burst_final) store_at.push_back(next);
    } else if (burst_final && tree.node(next).kind == NodeKind::kRedundant) {
      tree.promote(next);
      result.promoted.push_back(next);
      store_at.push_back(next);
    }
    cur = next;
    prev_boundary = burst_final;
  }
  result.new_node_count = result.new_nodes.size();

  if (!store_at.empty()) {
    auto seed = std::make_shared<const StoredSeed>(StoredSeed{seq, exec, branch_count});
    for (NodeId id : store_at) tree.node(id).seeds.push_back(SeedEntry{seed});
  }
  return result;
}

inline ExpansionResult expand(Tree& tree, const RequestSequence& seq, const ExecutionResult& exec) {
  return expand(tree, seq, exec.trace(), exec.coverage.count());
}

// Credits `mutants` selections to every node on the path, its simulation
// child and the chosen seed, and one discovery per new response sequence to
// the parent of its first new node and every new node.
inline void backpropagate(Tree& tree, const SelectionPath& path, std::optional<std::size_t> seed_index,
                          std::uint64_t mutants, std::span<const ExpansionResult> expansions) {
  for (NodeId id : path.nodes) tree.node(id).selection_count += mutants;
  TreeNode& launch = tree.node(path.launch());
  if (!launch.sim) throw StructuralError("selection path does not end at a simulation child");
  launch.sim->selection_count += mutants;

  std::uint64_t discoveries = 0;
  for (const auto& e : expansions) {
    if (!e.new_sequence()) continue;
    ++discoveries;
    tree.node(e.first_new_parent).discovery_count += 1;
    for (NodeId id : e.new_nodes) tree.node(id).discovery_count += 1;
  }
  TreeNode& launch_after = tree.node(path.launch());
  launch_after.sim->discovery_count += discoveries;
  if (seed_index && *seed_index < launch_after.seeds.size()) {
    SeedEntry& s = launch_after.seeds[*seed_index];
    s.selection_count += mutants;
    s.discovery_count += discoveries;
  }
}

struct PolicyPair {
  SelectionPolicy node = SelectionPolicy::kUct;
  SelectionPolicy seed = SelectionPolicy::kUct;
};

struct TreeAudit {
  std::size_t violations = 0;
  std::vector<std::string> messages;
  void fail(std::string m) {
    ++violations;
    if (messages.size() < 20) messages.push_back(std::move(m));
  }
};

// Checks the structural and statistical invariants of the whole tree.
inline TreeAudit audit_tree(const Tree& tree, std::size_t depth_cap) {
  TreeAudit a;
  for (NodeId id = 0; id < tree.size(); ++id) {
    const TreeNode& n = tree.node(id);
    const std::string where = "node " + std::to_string(id) + " (" + n.code + ")";
    if (id == kRootNode) {
      if (n.kind != NodeKind::kRoot || n.code != kRootCode || !n.sim) a.fail(where + ": bad root");
    } else if (n.kind == NodeKind::kRoot) {
      a.fail(where + ": second root");
    }
    if (n.kind == NodeKind::kHollow && !n.sim) a.fail(where + ": hollow without simulation child");
    if (n.kind == NodeKind::kRedundant) {
      if (n.sim) a.fail(where + ": redundant with simulation child");
      if (!n.seeds.empty()) a.fail(where + ": redundant with seeds");
      if (n.children.empty()) a.fail(where + ": redundant leaf");
    }
    if (n.depth > depth_cap) a.fail(where + ": deeper than cap");
    std::uint64_t below = n.sim ? n.sim->selection_count : 0;
    if (n.sim && n.sim->selection_count > n.selection_count) a.fail(where + ": simulation S above parent S");
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      const auto& [code, cid] = n.children[i];
      const TreeNode& c = tree.node(cid);
      if (c.parent != id || c.code != code || c.depth != n.depth + 1) a.fail(where + ": bad child link");
      for (std::size_t k = i + 1; k < n.children.size(); ++k) {
        if (n.children[k].first == code) a.fail(where + ": duplicate child code " + code);
      }
      below += c.selection_count;
    }
    if ((n.sim || !n.children.empty()) && below != n.selection_count) {
      a.fail(where + ": S=" + std::to_string(n.selection_count) + " but children+sim sum to " +
             std::to_string(below));
    }
  }
  return a;
}

// The tree-model fuzzing loop.
class TreeScheduler {
 public:
  TreeScheduler(FuzzContext& ctx, PolicyPair policies, UctParams params, std::size_t mutants_per_iteration)
      : ctx_(ctx), policies_(policies), params_(params), mutants_(mutants_per_iteration) {
    params_.validate();
  }

  void seed_corpus(const std::vector<RequestSequence>& corpus) {
    for (const auto& seq : corpus) {
      const auto ev = ctx_.evaluate(seq);
      expand(tree_, seq, ev.exec);
    }
  }

  IterationOutcome run_iteration() {
    IterationOutcome out;
    Rng& rng = ctx_.rng();
    SelectionExclusions excluded;

    SelectionPath path;
    std::size_t seed_idx = 0;
    RegionSplit split;
    for (;;) {
      path = select_path(tree_, policies_.node, params_.rho, rng, &excluded);
      TreeNode& node = tree_.node(path.launch());
      const auto prefix = tree_.path_codes(path.launch());
      bool found = false;
      for (int attempt = 0; attempt < 2 && !node.seeds.empty(); ++attempt) {
        seed_idx = select_seed(node, policies_.seed, params_.rho, rng);
        const StoredSeed& s = *node.seeds[seed_idx].seed;
        try {
          split = split_regions(s.sequence, s.trace, prefix);
          found = true;
          break;
        } catch (const StateMismatchError&) {
          node.seeds.erase(node.seeds.begin() + static_cast<std::ptrdiff_t>(seed_idx));
          node.unvisited_seed = 0;
          ++stale_seeds_;
        }
      }
      if (found) break;
      excluded.exclude_sim(path.launch());
    }

    const SeedRef seed = tree_.node(path.launch()).seeds[seed_idx].seed;
    expansions_.clear();
    for (std::size_t i = 0; i < mutants_; ++i) {
      const MutationResult mutant =
          mutate(seed->sequence, split, MutationScope::kM2AndM3, ctx_.mutation(), rng);
      const auto ev = ctx_.evaluate(mutant.sequence);
      ++out.mutants;
      out.new_branches += ev.new_branches;
      if (ev.new_sequence) ++out.new_sequences;
      ExpansionResult e = expand(tree_, mutant.sequence, ev.exec);
      if (e.new_sequence() || !e.promoted.empty()) {
        ++out.retained;
      } else if (ev.new_branches > 0) {
        // Coverage-only novelty: keep it on the node it was launched from.
        tree_.node(path.launch()).seeds.push_back(SeedEntry{make_seed(mutant.sequence, ev.exec)});
        ++out.retained;
      }
      expansions_.push_back(std::move(e));
    }
    backpropagate(tree_, path, seed_idx, out.mutants, expansions_);
    return out;
  }

  const Tree& tree() const { return tree_; }
  Tree& tree() { return tree_; }
  std::size_t stale_seeds() const { return stale_seeds_; }

 private:
  FuzzContext& ctx_;
  PolicyPair policies_;
  UctParams params_;
  std::size_t mutants_;
  Tree tree_;
  std::vector<ExpansionResult> expansions_;
  std::size_t stale_seeds_ = 0;
};

}  // namespace statefuzz
