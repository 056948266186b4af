#pragma once

// Shared generators and enumeration-based reference checks for the tests.
// The reference routines deliberately avoid the library's projection and
// solver shortcuts: they enumerate members explicitly and compare distances.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "treeline/binary_tree.hpp"
#include "treeline/tree_line.hpp"

namespace testutil {

using treeline::BinaryTree;
using treeline::NodeIndex;
using treeline::TreeLine;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t bound) { return eng_() % bound; }

  bool chance(double p) { return u01() < p; }

 private:
  std::mt19937_64 eng_;
};

// Random ancestor-closed tree inside the complete tree with `levels` levels.
inline BinaryTree random_tree(Rng& rng, unsigned levels, double keep_prob,
                              bool allow_empty = true) {
  std::vector<NodeIndex> nodes;
  if (!allow_empty || rng.chance(0.9)) {
    nodes.push_back(1);
    std::vector<NodeIndex> frontier{1};
    for (unsigned level = 2; level <= levels && !frontier.empty(); ++level) {
      std::vector<NodeIndex> next;
      for (NodeIndex p : frontier) {
        for (NodeIndex c : {2 * p, 2 * p + 1}) {
          if (rng.chance(keep_prob)) {
            nodes.push_back(c);
            next.push_back(c);
          }
        }
      }
      frontier = std::move(next);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  return BinaryTree::from_sorted_unchecked(std::move(nodes));
}

// Random chain attached to `start` (possibly empty), staying within `levels`.
inline std::vector<NodeIndex> random_path(Rng& rng, const BinaryTree& start, unsigned levels,
                                          std::size_t max_len) {
  std::vector<NodeIndex> path;
  if (max_len == 0) return path;
  NodeIndex cur;
  if (start.empty()) {
    cur = 1;
  } else {
    // collect free child slots below the start
    std::vector<NodeIndex> slots;
    for (NodeIndex v : start) {
      for (NodeIndex c : {2 * v, 2 * v + 1}) {
        if (!start.contains(c) && treeline::level_of(c) <= levels) slots.push_back(c);
      }
    }
    if (slots.empty()) return path;
    cur = slots[rng.below(slots.size())];
  }
  path.push_back(cur);
  while (path.size() < max_len && treeline::level_of(cur) < levels && rng.chance(0.7)) {
    cur = rng.chance(0.5) ? 2 * cur : 2 * cur + 1;
    path.push_back(cur);
  }
  return path;
}

inline TreeLine random_line(Rng& rng, unsigned levels, std::size_t max_len) {
  const BinaryTree start = random_tree(rng, levels > 2 ? levels - 2 : 1, 0.5);
  return TreeLine(start, random_path(rng, start, levels, max_len));
}

// Reference projection: enumerate the members of the line, take the unique
// distance minimizer. Returns (index, tree); asserts uniqueness via flag.
struct EnumProjection {
  std::size_t index = 0;
  BinaryTree tree;
  bool unique = true;
  std::vector<std::uint64_t> profile;  // d(t, l_j) for j = 0..m
};

inline EnumProjection enumerate_projection(const BinaryTree& t, const TreeLine& line) {
  EnumProjection out;
  std::uint64_t best = UINT64_MAX;
  for (std::size_t j = 0; j <= line.length(); ++j) {
    const std::uint64_t d = treeline::distance(t, line.member(j));
    out.profile.push_back(d);
    if (d < best) {
      best = d;
      out.index = j;
      out.unique = true;
    } else if (d == best) {
      out.unique = false;
    }
  }
  out.tree = line.member(out.index);
  return out;
}

// Reference union projection: enumerate every union of one member per line,
// take the distance minimizer; `unique_as_set` reports whether all minimizing
// combinations produce the same node set.
struct EnumUnionProjection {
  BinaryTree tree;
  std::uint64_t dist = 0;
  bool unique_as_set = true;
};

inline EnumUnionProjection enumerate_union_projection(const BinaryTree& t,
                                                      const std::vector<TreeLine>& lines) {
  EnumUnionProjection out;
  std::vector<std::size_t> pick(lines.size(), 0);
  std::uint64_t best = UINT64_MAX;
  for (;;) {
    std::vector<NodeIndex> member = lines.front().start().indices();
    for (std::size_t q = 0; q < lines.size(); ++q) {
      const auto& path = lines[q].path();
      member.insert(member.end(), path.begin(),
                    path.begin() + static_cast<std::ptrdiff_t>(pick[q]));
    }
    std::sort(member.begin(), member.end());
    member.erase(std::unique(member.begin(), member.end()), member.end());
    BinaryTree candidate = BinaryTree::from_sorted_unchecked(std::move(member));
    const std::uint64_t d = treeline::distance(t, candidate);
    if (d < best) {
      best = d;
      out.tree = std::move(candidate);
      out.unique_as_set = true;
    } else if (d == best && candidate != out.tree) {
      out.unique_as_set = false;
    }

    std::size_t q = 0;
    while (q < lines.size()) {
      if (++pick[q] <= lines[q].length()) break;
      pick[q] = 0;
      ++q;
    }
    if (q == lines.size()) break;
  }
  out.dist = best;
  return out;
}

}  // namespace testutil
