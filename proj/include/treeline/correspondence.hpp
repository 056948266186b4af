#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "treeline/binary_tree.hpp"
#include "treeline/error.hpp"

namespace treeline {

/// Rule deciding which child of a branching node becomes the left child
/// (index 2w) in the canonical encoding: the thicker branch or the one with
/// more descendants.
enum class CorrespondenceMode { thickness, descendant };

inline CorrespondenceMode correspondence_from_name(const std::string& name) {
  if (name == "thickness") return CorrespondenceMode::thickness;
  if (name == "descendant") return CorrespondenceMode::descendant;
  fail("invalid-argument", "unknown correspondence '" + name +
                               "' (expected 'thickness' or 'descendant')");
}

inline const char* to_name(CorrespondenceMode mode) noexcept {
  return mode == CorrespondenceMode::thickness ? "thickness" : "descendant";
}

/// Raw ingested branch record: arbitrary string ids, a parent link (absent
/// exactly for the root), and the per-branch median radius in mm.
struct AttributedNode {
  std::string id;
  std::optional<std::string> parent_id;
  double median_radius = 0.0;
};

/// A raw binary tree with per-branch radii, prior to canonical indexing.
/// Construction validates the shape: unique ids, exactly one root, resolvable
/// parent links, at most two children per node, positive radii, and full
/// reachability from the root.
class AttributedTree {
 public:
  explicit AttributedTree(std::vector<AttributedNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) {
      fail("invalid-attributed-tree", "a raw tree needs at least one node");
    }
    by_id_.reserve(nodes_.size() * 2);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].median_radius <= 0.0) {
        fail("invalid-attributed-tree",
             "node '" + nodes_[i].id + "' has a non-positive median radius");
      }
      if (!by_id_.emplace(nodes_[i].id, i).second) {
        fail("invalid-attributed-tree", "duplicate node id '" + nodes_[i].id + "'");
      }
    }

    children_.resize(nodes_.size());
    std::size_t root_count = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& node = nodes_[i];
      if (!node.parent_id.has_value()) {
        root_ = i;
        ++root_count;
        continue;
      }
      const auto it = by_id_.find(*node.parent_id);
      if (it == by_id_.end()) {
        fail("invalid-attributed-tree", "node '" + node.id + "' references unknown parent '" +
                                            *node.parent_id + "'");
      }
      children_[it->second].push_back(i);
      if (children_[it->second].size() > 2) {
        fail("non-binary-input",
             "node '" + nodes_[it->second].id + "' has more than two children");
      }
    }
    if (root_count != 1) {
      fail("invalid-attributed-tree",
           "expected exactly one root, found " + std::to_string(root_count));
    }

    // Post-order over the children lists; doubles as the reachability check
    // (parent links with a cycle leave nodes unvisited).
    descendants_.assign(nodes_.size(), 0);
    std::vector<std::size_t> order;
    order.reserve(nodes_.size());
    std::vector<std::size_t> stack{root_};
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      order.push_back(cur);
      for (std::size_t c : children_[cur]) stack.push_back(c);
    }
    if (order.size() != nodes_.size()) {
      fail("invalid-attributed-tree", "parent links contain a cycle or detached subtree");
    }
    for (std::size_t i = order.size(); i-- > 0;) {
      const std::size_t cur = order[i];
      for (std::size_t c : children_[cur]) descendants_[cur] += 1 + descendants_[c];
    }
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<AttributedNode>& nodes() const noexcept { return nodes_; }
  std::size_t root() const noexcept { return root_; }

  /// Children of the node at `pos`, in input order.
  const std::vector<std::size_t>& children_of(std::size_t pos) const { return children_.at(pos); }

  std::size_t position_of(const std::string& id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) fail("unknown-node-id", "no node with id '" + id + "'");
    return it->second;
  }

  /// Number of proper descendants of a node.
  std::size_t descendant_count(const std::string& id) const {
    return descendants_[position_of(id)];
  }

  std::size_t descendant_count_at(std::size_t pos) const { return descendants_.at(pos); }

 private:
  std::vector<AttributedNode> nodes_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> descendants_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::size_t root_ = 0;
};

/// Canonical level-order indexing of a raw tree. The root gets index 1; at
/// each two-child node the dominant child per `mode` goes left (2w), the
/// other right (2w+1); a single child always goes left.
///
/// Tie rules: thickness mode breaks radius ties by descendant count, then by
/// input order; descendant mode breaks count ties by radius, then by input
/// order.
inline BinaryTree apply_correspondence(const AttributedTree& tree, CorrespondenceMode mode) {
  auto dominant_first = [&](std::size_t a, std::size_t b) {
    const auto& na = tree.nodes()[a];
    const auto& nb = tree.nodes()[b];
    const std::size_t da = tree.descendant_count_at(a);
    const std::size_t db = tree.descendant_count_at(b);
    if (mode == CorrespondenceMode::thickness) {
      if (na.median_radius != nb.median_radius) return na.median_radius > nb.median_radius;
      if (da != db) return da > db;
    } else {
      if (da != db) return da > db;
      if (na.median_radius != nb.median_radius) return na.median_radius > nb.median_radius;
    }
    return true;  // full tie: keep input order
  };

  std::vector<NodeIndex> indices;
  indices.reserve(tree.size());
  std::vector<std::pair<std::size_t, NodeIndex>> stack{{tree.root(), kRootIndex}};
  while (!stack.empty()) {
    const auto [pos, index] = stack.back();
    stack.pop_back();
    indices.push_back(index);
    const auto& kids = tree.children_of(pos);
    if (kids.empty()) continue;
    if (index > kMaxNodeIndex / 2) {
      fail("tree-too-deep", "canonical index for a child of node '" + tree.nodes()[pos].id +
                                "' would exceed the supported depth");
    }
    if (kids.size() == 1) {
      stack.emplace_back(kids[0], left_child(index));
    } else {
      const bool first_dominates = dominant_first(kids[0], kids[1]);
      const std::size_t left = first_dominates ? kids[0] : kids[1];
      const std::size_t right = first_dominates ? kids[1] : kids[0];
      stack.emplace_back(left, left_child(index));
      stack.emplace_back(right, right_child(index));
    }
  }
  std::sort(indices.begin(), indices.end());
  return BinaryTree::from_sorted_unchecked(std::move(indices));
}

}  // namespace treeline
