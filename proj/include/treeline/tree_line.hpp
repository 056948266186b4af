#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treeline/binary_tree.hpp"
#include "treeline/error.hpp"

namespace treeline {

/// A tree-line: a starting tree l0 plus an ordered chain of added nodes
/// v_1..v_m where v_1 attaches below the starting tree and each v_{i+1} is a
/// child of v_i. Its members are the trees l_j = l0 + {v_1..v_j}; they form
/// the one-dimensional sets that tree PCA fits to a population.
class TreeLine {
 public:
  /// Validates the chain; throws invalid-tree-line on a broken chain, a path
  /// node already inside the start, or a first node not attached to it.
  TreeLine(BinaryTree start, std::vector<NodeIndex> path)
      : start_(std::move(start)), path_(std::move(path)) {
    for (NodeIndex v : path_) {
      if (v < kRootIndex || v > kMaxNodeIndex) {
        fail("invalid-tree-line", "path index " + std::to_string(v) + " out of range");
      }
      if (start_.contains(v)) {
        fail("invalid-tree-line",
             "path node " + std::to_string(v) + " already belongs to the starting tree");
      }
    }
    if (!path_.empty()) {
      const NodeIndex first = path_.front();
      if (start_.empty()) {
        if (first != kRootIndex) {
          fail("invalid-tree-line",
               "with an empty starting tree the path must begin at the root (index 1)");
        }
      } else if (!start_.contains(first / 2)) {
        fail("invalid-tree-line", "path node " + std::to_string(first) +
                                      " is not a child of any starting-tree node");
      }
      for (std::size_t i = 0; i + 1 < path_.size(); ++i) {
        const NodeIndex v = path_[i];
        const NodeIndex next = path_[i + 1];
        if (next != left_child(v) && next != right_child(v)) {
          fail("invalid-tree-line", "chain broken: node " + std::to_string(next) +
                                        " is not a child of " + std::to_string(v));
        }
      }
    }
  }

  const BinaryTree& start() const noexcept { return start_; }

  /// The added-node chain v_1..v_m, in chain (and hence ascending) order.
  const std::vector<NodeIndex>& path() const noexcept { return path_; }

  /// m, the number of members beyond the starting tree.
  std::size_t length() const noexcept { return path_.size(); }

  /// Member l_j for j in [0, length()].
  BinaryTree member(std::size_t j) const {
    if (j > path_.size()) {
      fail("invalid-argument", "tree-line member index out of range");
    }
    std::vector<NodeIndex> out;
    out.reserve(start_.size() + j);
    std::merge(start_.begin(), start_.end(), path_.begin(),
               path_.begin() + static_cast<std::ptrdiff_t>(j), std::back_inserter(out));
    return BinaryTree::from_sorted_unchecked(std::move(out));
  }

  friend bool operator==(const TreeLine&, const TreeLine&) = default;

 private:
  BinaryTree start_;
  std::vector<NodeIndex> path_;
};

/// The member of a tree-line closest to a data tree: index r and the member
/// tree l_r itself. The minimizer is unique.
struct Projection {
  std::size_t index = 0;
  BinaryTree tree;

  friend bool operator==(const Projection&, const Projection&) = default;
};

namespace detail {

// Length of the prefix of the path contained in t. Ancestor-closedness makes
// the intersection of t with a chain a prefix of the chain, so this equals
// |t n V_L|.
inline std::size_t captured_prefix(const BinaryTree& t, const TreeLine& line) noexcept {
  std::size_t r = 0;
  for (NodeIndex v : line.path()) {
    if (!t.contains(v)) break;
    ++r;
  }
  return r;
}

}  // namespace detail

/// Distance-minimizing member of the line: l0 + (t n V_L).
inline Projection project(const BinaryTree& t, const TreeLine& line) {
  const std::size_t r = detail::captured_prefix(t, line);
  return Projection{r, line.member(r)};
}

/// Projection of t onto the union of several tree-lines sharing one starting
/// tree: the union of the per-line projections.
inline BinaryTree project_union(const BinaryTree& t, std::span<const TreeLine> lines) {
  if (lines.empty()) {
    fail("common-start-required", "projection onto a union needs at least one tree-line");
  }
  const BinaryTree& start = lines.front().start();
  std::vector<NodeIndex> covered;
  for (const TreeLine& line : lines) {
    if (line.start() != start) {
      fail("common-start-required", "all tree-lines in a union must share one starting tree");
    }
    const std::size_t r = detail::captured_prefix(t, line);
    covered.insert(covered.end(), line.path().begin(),
                   line.path().begin() + static_cast<std::ptrdiff_t>(r));
  }
  std::sort(covered.begin(), covered.end());
  covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
  std::vector<NodeIndex> out;
  out.reserve(start.size() + covered.size());
  std::merge(start.begin(), start.end(), covered.begin(), covered.end(),
             std::back_inserter(out));
  return BinaryTree::from_sorted_unchecked(std::move(out));
}

/// Score of t on a line: the projection index r = |t n V_L|, i.e. how many
/// path nodes beyond the starting tree the data tree captures.
inline std::size_t score(const BinaryTree& t, const TreeLine& line) noexcept {
  return detail::captured_prefix(t, line);
}

/// Cumulative score over a union of lines with a common starting tree:
/// nodes of the union projection beyond the starting tree.
inline std::size_t union_score(const BinaryTree& t, std::span<const TreeLine> lines) {
  const BinaryTree proj = project_union(t, lines);
  return proj.size() - lines.front().start().size();
}

}  // namespace treeline
