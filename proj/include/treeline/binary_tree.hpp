#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treeline/error.hpp"

namespace treeline {

/// Level-order index of a node. The root is 1; the children of node w are
/// 2w (left) and 2w+1 (right). A finite, ancestor-closed set of such indices
/// encodes a rooted binary tree topology.
using NodeIndex = std::uint64_t;

inline constexpr NodeIndex kRootIndex = 1;

/// Largest admissible index; keeps 2w+1 well inside the 64-bit range
/// (equivalently: at most 62 levels).
inline constexpr NodeIndex kMaxNodeIndex = (NodeIndex{1} << 62) - 1;

constexpr NodeIndex left_child(NodeIndex omega) noexcept { return 2 * omega; }
constexpr NodeIndex right_child(NodeIndex omega) noexcept { return 2 * omega + 1; }

/// Parent of a non-root node.
inline NodeIndex parent(NodeIndex omega) {
  if (omega <= kRootIndex) {
    fail("root-has-no-parent", "node 1 is the root and has no parent");
  }
  return omega / 2;
}

/// 1-based level: the root is on level 1, its children on level 2, ...
constexpr unsigned level_of(NodeIndex omega) noexcept {
  return static_cast<unsigned>(std::bit_width(omega));
}

/// A binary tree as an immutable, ascending set of level-order indices.
/// Validity (every non-root node accompanied by its parent) is checked once
/// at construction; all operations may assume it afterwards. The empty set
/// is a valid (empty) tree.
class BinaryTree {
 public:
  BinaryTree() = default;

  /// Validating constructor; accepts indices in any order.
  static BinaryTree from_indices(std::vector<NodeIndex> nodes) {
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const NodeIndex v = nodes[i];
      if (v < kRootIndex) {
        fail("invalid-tree", "node indices must be positive");
      }
      if (v > kMaxNodeIndex) {
        fail("invalid-tree",
             "node index " + std::to_string(v) + " exceeds the supported depth");
      }
      if (i > 0 && nodes[i - 1] == v) {
        fail("invalid-tree", "duplicate node index " + std::to_string(v));
      }
      if (v > kRootIndex &&
          !std::binary_search(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(i), v / 2)) {
        fail("invalid-tree", "node " + std::to_string(v) + " lacks its parent " +
                                 std::to_string(v / 2) + " (set is not ancestor-closed)");
      }
    }
    return BinaryTree(std::move(nodes));
  }

  /// Trusted constructor for results that are valid by construction
  /// (unions, intersections, projections). `sorted` must be strictly
  /// increasing and ancestor-closed.
  static BinaryTree from_sorted_unchecked(std::vector<NodeIndex> sorted) {
    return BinaryTree(std::move(sorted));
  }

  bool empty() const noexcept { return nodes_.empty(); }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool contains(NodeIndex v) const noexcept {
    return std::binary_search(nodes_.begin(), nodes_.end(), v);
  }

  /// Strictly increasing index list; also the canonical serialized form.
  const std::vector<NodeIndex>& indices() const noexcept { return nodes_; }

  auto begin() const noexcept { return nodes_.begin(); }
  auto end() const noexcept { return nodes_.end(); }

  friend bool operator==(const BinaryTree&, const BinaryTree&) = default;

 private:
  explicit BinaryTree(std::vector<NodeIndex> sorted) : nodes_(std::move(sorted)) {}

  std::vector<NodeIndex> nodes_;
};

/// Symmetric-difference (Hamming) distance |t1\t2| + |t2\t1|.
inline std::uint64_t distance(const BinaryTree& t1, const BinaryTree& t2) noexcept {
  const auto& a = t1.indices();
  const auto& b = t2.indices();
  std::size_t i = 0, j = 0;
  std::uint64_t diff = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++diff;
      ++i;
    } else {
      ++diff;
      ++j;
    }
  }
  return diff + (a.size() - i) + (b.size() - j);
}

inline BinaryTree tree_union(const BinaryTree& t1, const BinaryTree& t2) {
  std::vector<NodeIndex> out;
  out.reserve(t1.size() + t2.size());
  std::set_union(t1.begin(), t1.end(), t2.begin(), t2.end(), std::back_inserter(out));
  return BinaryTree::from_sorted_unchecked(std::move(out));
}

inline BinaryTree tree_intersection(const BinaryTree& t1, const BinaryTree& t2) {
  std::vector<NodeIndex> out;
  std::set_intersection(t1.begin(), t1.end(), t2.begin(), t2.end(), std::back_inserter(out));
  return BinaryTree::from_sorted_unchecked(std::move(out));
}

/// Per-tree metadata carried alongside a dataset. `sex` is an opaque label;
/// an empty string means missing.
struct SubjectInfo {
  std::string subject_id;
  std::optional<double> age;
  std::string sex;
};

/// An ordered, nonempty collection of binary trees, optionally with one
/// SubjectInfo record per tree. Order is stable and preserved everywhere.
class TreeDataset {
 public:
  explicit TreeDataset(std::vector<BinaryTree> trees) : trees_(std::move(trees)) {
    if (trees_.empty()) fail("empty-dataset", "a dataset needs at least one tree");
  }

  TreeDataset(std::vector<BinaryTree> trees, std::vector<SubjectInfo> info)
      : trees_(std::move(trees)), info_(std::move(info)) {
    if (trees_.empty()) fail("empty-dataset", "a dataset needs at least one tree");
    if (!info_.empty() && info_.size() != trees_.size()) {
      fail("invalid-argument", "per-tree info must match the number of trees");
    }
  }

  std::size_t size() const noexcept { return trees_.size(); }
  const BinaryTree& tree(std::size_t i) const { return trees_.at(i); }
  const std::vector<BinaryTree>& trees() const noexcept { return trees_; }

  bool has_info() const noexcept { return !info_.empty(); }
  const std::vector<SubjectInfo>& info() const noexcept { return info_; }

 private:
  std::vector<BinaryTree> trees_;
  std::vector<SubjectInfo> info_;
};

/// Union of all trees in the dataset.
inline BinaryTree support(const TreeDataset& data) {
  BinaryTree acc = data.tree(0);
  for (std::size_t i = 1; i < data.size(); ++i) {
    acc = tree_union(acc, data.tree(i));
  }
  return acc;
}

/// Intersection of all trees in the dataset.
inline BinaryTree intersection(const TreeDataset& data) {
  BinaryTree acc = data.tree(0);
  for (std::size_t i = 1; i < data.size() && !acc.empty(); ++i) {
    acc = tree_intersection(acc, data.tree(i));
  }
  return acc;
}

}  // namespace treeline
