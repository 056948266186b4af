#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treeline/binary_tree.hpp"
#include "treeline/error.hpp"
#include "treeline/pc_solver.hpp"

namespace treeline {

/// Upper bound on the support size accepted by the exhaustive solver.
inline constexpr std::size_t kExhaustiveSupportLimit = 63;

/// Every nonempty downward chain attached to `start` inside `supp`, i.e.
/// every admissible tree-line path. Exponential in depth; intended for tiny
/// supports only.
inline std::vector<std::vector<NodeIndex>> enumerate_attached_paths(
    const BinaryTree& supp, const BinaryTree& start) {
  std::vector<std::vector<NodeIndex>> out;
  std::vector<NodeIndex> chain;

  auto extend = [&](auto&& self, NodeIndex v) -> void {
    chain.push_back(v);
    out.push_back(chain);
    for (NodeIndex c : {left_child(v), right_child(v)}) {
      if (supp.contains(c)) self(self, c);
    }
    chain.pop_back();
  };

  if (start.empty()) {
    if (supp.contains(kRootIndex)) extend(extend, kRootIndex);
    return out;
  }
  for (NodeIndex v : supp) {
    if (v == kRootIndex || start.contains(v)) continue;
    if (start.contains(v / 2)) extend(extend, v);
  }
  return out;
}

/// Sum over the data trees of the distance to the nearest member of the
/// union of the given tree-line paths (all attached to `start`), evaluated
/// by explicitly enumerating every combination of per-path prefixes. This is
/// the definition-level objective, computed without any of the projection
/// shortcuts used by the solver.
inline std::uint64_t exhaustive_union_objective(
    const TreeDataset& data, const BinaryTree& start,
    std::span<const std::vector<NodeIndex>> paths) {
  std::vector<std::size_t> prefix(paths.size(), 0);
  std::uint64_t total = 0;
  for (const BinaryTree& t : data.trees()) {
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    std::fill(prefix.begin(), prefix.end(), 0);
    for (;;) {
      std::vector<NodeIndex> member = start.indices();
      for (std::size_t p = 0; p < paths.size(); ++p) {
        member.insert(member.end(), paths[p].begin(),
                      paths[p].begin() + static_cast<std::ptrdiff_t>(prefix[p]));
      }
      std::sort(member.begin(), member.end());
      member.erase(std::unique(member.begin(), member.end()), member.end());
      const std::uint64_t d =
          distance(t, BinaryTree::from_sorted_unchecked(std::move(member)));
      if (d < best) best = d;

      // odometer over prefix lengths
      std::size_t p = 0;
      while (p < paths.size()) {
        if (++prefix[p] <= paths[p].size()) break;
        prefix[p] = 0;
        ++p;
      }
      if (p == paths.size()) break;
    }
    total += best;
  }
  return total;
}

/// Exhaustive PC extraction: at each step, evaluates the union objective of
/// every candidate tree-line by direct enumeration and keeps the minimizer
/// (ties: shorter path, then lexicographically smaller). Guarded by
/// kExhaustiveSupportLimit; meant as an independent cross-check for
/// pc_treelines, not for production use.
inline PcResult exhaustive_pc_treelines(const TreeDataset& data, const BinaryTree& start,
                                        std::size_t k_max) {
  if (k_max == 0) fail("invalid-argument", "component count must be at least 1");
  const BinaryTree supp = support(data);
  if (supp.size() > kExhaustiveSupportLimit) {
    fail("oracle-capacity", "support tree has " + std::to_string(supp.size()) +
                                " nodes; exhaustive search is capped at " +
                                std::to_string(kExhaustiveSupportLimit));
  }
  for (NodeIndex v : start) {
    if (!supp.contains(v)) {
      fail("start-not-in-support",
           "starting-tree node " + std::to_string(v) + " is outside the support tree");
    }
  }

  const std::vector<std::vector<NodeIndex>> candidates =
      enumerate_attached_paths(supp, start);

  PcResult result;
  result.start = start;
  std::vector<std::vector<NodeIndex>> chosen;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const std::uint64_t base = exhaustive_union_objective(data, start, chosen);

    const std::vector<NodeIndex>* best_path = nullptr;  // null = the empty line
    std::uint64_t best_objective = base;
    auto better = [&](const std::vector<NodeIndex>& cand, std::uint64_t obj) {
      if (obj != best_objective) return obj < best_objective;
      const std::size_t cur_len = best_path ? best_path->size() : 0;
      if (cand.size() != cur_len) return cand.size() < cur_len;
      return best_path && cand < *best_path;
    };
    std::vector<std::vector<NodeIndex>> trial = chosen;
    trial.emplace_back();
    for (const auto& cand : candidates) {
      trial.back() = cand;
      const std::uint64_t obj = exhaustive_union_objective(data, start, trial);
      if (better(cand, obj)) {
        best_path = &cand;
        best_objective = obj;
      }
    }
    if (best_path == nullptr) {
      result.exhausted_at = k;
      break;
    }
    result.gains.push_back(base - best_objective);
    result.lines.emplace_back(start, *best_path);
    chosen.push_back(*best_path);
  }
  return result;
}

}  // namespace treeline
