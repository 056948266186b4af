#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "treeline/binary_tree.hpp"
#include "treeline/error.hpp"
#include "treeline/tree_line.hpp"

namespace treeline {

/// Nonnegative integer node weights over the support tree of a dataset.
/// In the PC iteration, weight(v) is the number of data trees containing v,
/// forced to zero on nodes already claimed by earlier components.
struct WeightedSupport {
  BinaryTree support;
  std::vector<std::uint64_t> weights;  // parallel to support.indices()

  std::uint64_t weight_of(NodeIndex v) const noexcept {
    const auto& idx = support.indices();
    const auto it = std::lower_bound(idx.begin(), idx.end(), v);
    if (it == idx.end() || *it != v) return 0;
    return weights[static_cast<std::size_t>(it - idx.begin())];
  }
};

/// Containment weights over a precomputed support tree: weight(v) counts the
/// data trees containing v, except that nodes listed in `zeroed` get 0.
/// Entries of `zeroed` outside the support are ignored.
inline WeightedSupport compute_weights(const TreeDataset& data, BinaryTree supp,
                                       std::span<const NodeIndex> zeroed = {}) {
  const auto& idx = supp.indices();
  std::unordered_map<NodeIndex, std::size_t> slot;
  slot.reserve(idx.size() * 2);
  for (std::size_t i = 0; i < idx.size(); ++i) slot.emplace(idx[i], i);

  std::vector<std::uint64_t> weights(idx.size(), 0);
  for (const BinaryTree& t : data.trees()) {
    for (NodeIndex v : t) {
      const auto it = slot.find(v);
      if (it != slot.end()) ++weights[it->second];
    }
  }
  for (NodeIndex z : zeroed) {
    const auto it = slot.find(z);
    if (it != slot.end()) weights[it->second] = 0;
  }
  return WeightedSupport{std::move(supp), std::move(weights)};
}

inline WeightedSupport compute_weights(const TreeDataset& data,
                                       std::span<const NodeIndex> zeroed = {}) {
  return compute_weights(data, support(data), zeroed);
}

/// Maximum-weight downward path attached to `start` inside the weighted
/// support. One bottom-up pass computes, per node, the best chain starting
/// there; since a child index always exceeds its parent's, walking the
/// sorted index list backwards visits children first, so the whole search is
/// linear in the support size.
///
/// Ties are broken toward the smaller total length, then the
/// lexicographically smaller index sequence. A maximal weight of zero yields
/// the empty path (so do a start equal to the support and an empty support).
inline std::vector<NodeIndex> max_weight_path(const WeightedSupport& w,
                                              const BinaryTree& start) {
  const BinaryTree& supp = w.support;
  for (NodeIndex v : start) {
    if (!supp.contains(v)) {
      fail("start-not-in-support",
           "starting-tree node " + std::to_string(v) + " is outside the support tree");
    }
  }

  const auto& idx = supp.indices();
  const std::size_t n = idx.size();
  std::unordered_map<NodeIndex, std::size_t> slot;
  slot.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) slot.emplace(idx[i], i);

  enum : std::uint8_t { kStop = 0, kLeft = 1, kRight = 2 };
  std::vector<std::uint64_t> best(n, 0);
  std::vector<std::uint32_t> len(n, 1);
  std::vector<std::uint8_t> step(n, kStop);

  for (std::size_t i = n; i-- > 0;) {
    const NodeIndex v = idx[i];
    best[i] = w.weights[i];
    len[i] = 1;
    step[i] = kStop;
    const NodeIndex children[2] = {left_child(v), right_child(v)};
    for (int c = 0; c < 2; ++c) {
      const auto it = slot.find(children[c]);
      if (it == slot.end()) continue;
      const std::size_t j = it->second;
      const std::uint64_t value = w.weights[i] + best[j];
      const std::uint32_t chain_len = 1 + len[j];
      if (value > best[i] || (value == best[i] && chain_len < len[i])) {
        best[i] = value;
        len[i] = chain_len;
        step[i] = (c == 0) ? kLeft : kRight;
      }
    }
  }

  // Pick the best attachable node; ascending order plus strict improvement
  // gives the lexicographically smallest sequence among equal candidates.
  // The empty path (value 0, length 0) is the baseline, so an all-zero
  // search comes back empty.
  std::uint64_t best_value = 0;
  std::uint32_t best_len = 0;
  std::size_t best_slot = n;
  auto consider = [&](std::size_t j) {
    if (best[j] > best_value || (best[j] == best_value && len[j] < best_len)) {
      best_value = best[j];
      best_len = len[j];
      best_slot = j;
    }
  };
  if (start.empty()) {
    if (n > 0) consider(0);  // idx[0] == 1 for any nonempty support
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const NodeIndex v = idx[i];
      if (v == kRootIndex || start.contains(v)) continue;
      if (start.contains(v / 2)) consider(i);
    }
  }

  std::vector<NodeIndex> path;
  if (best_slot == n || best_value == 0) return path;
  std::size_t cur = best_slot;
  for (;;) {
    const NodeIndex v = idx[cur];
    path.push_back(v);
    if (step[cur] == kStop) break;
    const NodeIndex next = (step[cur] == kLeft) ? left_child(v) : right_child(v);
    cur = slot.at(next);
  }
  return path;
}

/// Result of the iterative PC extraction: the component tree-lines in order,
/// the weight gain captured by each, and (when the search ran dry before K
/// components) the first k whose maximal gain was zero.
struct PcResult {
  BinaryTree start;
  std::vector<TreeLine> lines;
  std::vector<std::uint64_t> gains;
  std::optional<std::size_t> exhausted_at;
};

/// Principal-component tree-lines of a dataset. For k = 1..k_max, counts the
/// containment weights with all previously chosen path nodes zeroed, extracts
/// the maximum-weight attached path, and stops early once the maximal gain is
/// zero. Gains are nonincreasing in k.
inline PcResult pc_treelines(const TreeDataset& data, const BinaryTree& start,
                             std::size_t k_max) {
  if (k_max == 0) fail("invalid-argument", "component count must be at least 1");
  BinaryTree supp = support(data);
  for (NodeIndex v : start) {
    if (!supp.contains(v)) {
      fail("start-not-in-support",
           "starting-tree node " + std::to_string(v) + " is outside the support tree");
    }
  }

  PcResult result;
  result.start = start;
  std::vector<NodeIndex> zeroed;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const WeightedSupport w = compute_weights(data, supp, zeroed);
    std::vector<NodeIndex> path = max_weight_path(w, start);
    if (path.empty()) {
      result.exhausted_at = k;
      break;
    }
    std::uint64_t gain = 0;
    for (NodeIndex v : path) gain += w.weight_of(v);
    zeroed.insert(zeroed.end(), path.begin(), path.end());
    result.lines.emplace_back(start, std::move(path));
    result.gains.push_back(gain);
  }
  return result;
}

/// Total size of the union projections of every data tree onto the first
/// `upto` component lines; counts starting-tree nodes as well. Consecutive
/// increments equal the solver's gains.
inline std::uint64_t explained_variation(const TreeDataset& data,
                                         std::span<const TreeLine> lines,
                                         std::size_t upto) {
  if (upto < 1 || upto > lines.size()) {
    fail("invalid-argument", "explained-variation prefix length out of range");
  }
  std::uint64_t total = 0;
  for (const BinaryTree& t : data.trees()) {
    total += project_union(t, lines.subspan(0, upto)).size();
  }
  return total;
}

}  // namespace treeline
