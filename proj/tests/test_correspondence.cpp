#include <doctest.h>

#include <map>
#include <vector>

#include "test_util.hpp"
#include "treeline/correspondence.hpp"

using namespace treeline;

namespace {

AttributedNode node(std::string id, std::optional<std::string> parent, double radius) {
  return AttributedNode{std::move(id), std::move(parent), radius};
}

// root with children A (radius 2.0, 1 descendant) and B (radius 1.0, 3 descendants)
AttributedTree lopsided_tree() {
  return AttributedTree({
      node("r", std::nullopt, 3.0),
      node("A", "r", 2.0),
      node("A1", "A", 1.0),
      node("B", "r", 1.0),
      node("B1", "B", 0.8),
      node("B2", "B", 0.7),
      node("B1a", "B1", 0.5),
  });
}

std::map<unsigned, std::size_t> per_level_counts(const BinaryTree& t) {
  std::map<unsigned, std::size_t> counts;
  for (NodeIndex v : t) ++counts[level_of(v)];
  return counts;
}

}  // namespace

TEST_CASE("descendant counts") {
  const AttributedTree t = lopsided_tree();
  CHECK(t.descendant_count("r") == 6);
  CHECK(t.descendant_count("A") == 1);
  CHECK(t.descendant_count("B") == 3);
  CHECK(t.descendant_count("A1") == 0);  // leaf
  CHECK(t.descendant_count("B1") == 1);  // middle of a chain
  CHECK_THROWS_AS(t.descendant_count("nope"), Error);
  try {
    t.descendant_count("nope");
  } catch (const Error& e) {
    CHECK(e.code() == "unknown-node-id");
  }

  const AttributedTree chain({node("a", std::nullopt, 1.0), node("b", "a", 1.0),
                              node("c", "b", 1.0)});
  CHECK(chain.descendant_count("a") == 2);
  CHECK(chain.descendant_count("b") == 1);
}

TEST_CASE("correspondence modes place the dominant child left") {
  const AttributedTree t = lopsided_tree();
  const BinaryTree thick = apply_correspondence(t, CorrespondenceMode::thickness);
  // A (thicker) on the left: A -> 2, A1 -> 4, B -> 3, B1 -> 6, B2 -> 7, B1a -> 12
  CHECK(thick == BinaryTree::from_indices({1, 2, 3, 4, 6, 7, 12}));

  const BinaryTree desc = apply_correspondence(t, CorrespondenceMode::descendant);
  // B (more descendants) on the left: B -> 2, B1 -> 4, B2 -> 5, B1a -> 8, A -> 3, A1 -> 6
  CHECK(desc == BinaryTree::from_indices({1, 2, 3, 4, 5, 6, 8}));
}

TEST_CASE("single children go left") {
  const AttributedTree chain({node("a", std::nullopt, 1.0), node("b", "a", 2.0),
                              node("c", "b", 3.0)});
  CHECK(apply_correspondence(chain, CorrespondenceMode::thickness) ==
        BinaryTree::from_indices({1, 2, 4}));
  CHECK(apply_correspondence(chain, CorrespondenceMode::descendant) ==
        BinaryTree::from_indices({1, 2, 4}));
}

TEST_CASE("tie rules") {
  // equal radii: thickness falls back to descendant counts
  const AttributedTree radius_tie({node("r", std::nullopt, 1.0), node("a", "r", 1.0),
                                   node("b", "r", 1.0), node("b1", "b", 1.0)});
  CHECK(apply_correspondence(radius_tie, CorrespondenceMode::thickness) ==
        BinaryTree::from_indices({1, 2, 3, 4}));  // b (1 descendant) left

  // equal descendant counts: descendant mode falls back to radius
  // a and b carry one child each; b is thicker, so b goes left (b1 at 4)
  const AttributedTree count_tie({node("r", std::nullopt, 1.0), node("a", "r", 1.0),
                                  node("b", "r", 2.0), node("a1", "a", 1.0),
                                  node("b1", "b", 1.0)});
  CHECK(apply_correspondence(count_tie, CorrespondenceMode::descendant) ==
        BinaryTree::from_indices({1, 2, 3, 4, 6}));
  // same shape through thickness mode: radius decides directly, same answer
  CHECK(apply_correspondence(count_tie, CorrespondenceMode::thickness) ==
        BinaryTree::from_indices({1, 2, 3, 4, 6}));

  // full tie (equal radii, equal descendant counts) keeps input order:
  // a comes first, so a and its two leaves go left (indices 2, 4, 5) while
  // b's chain lands at 3, 6, 12
  const AttributedTree full_tie({node("r", std::nullopt, 1.0), node("a", "r", 1.0),
                                 node("b", "r", 1.0), node("a1", "a", 1.0),
                                 node("a2", "a", 1.0), node("b1", "b", 1.0),
                                 node("b1a", "b1", 1.0)});
  const BinaryTree expected = BinaryTree::from_indices({1, 2, 3, 4, 5, 6, 12});
  CHECK(apply_correspondence(full_tie, CorrespondenceMode::thickness) == expected);
  CHECK(apply_correspondence(full_tie, CorrespondenceMode::descendant) == expected);
}

TEST_CASE("shape validation") {
  CHECK_THROWS_AS(AttributedTree({}), Error);
  // more than two children
  try {
    AttributedTree({node("r", std::nullopt, 1.0), node("a", "r", 1.0), node("b", "r", 1.0),
                    node("c", "r", 1.0)});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "non-binary-input");
  }
  // duplicate id
  CHECK_THROWS_AS(AttributedTree({node("r", std::nullopt, 1.0), node("r", "r", 1.0)}), Error);
  // unknown parent
  CHECK_THROWS_AS(AttributedTree({node("r", std::nullopt, 1.0), node("a", "ghost", 1.0)}),
                  Error);
  // two roots
  CHECK_THROWS_AS(AttributedTree({node("r", std::nullopt, 1.0), node("s", std::nullopt, 1.0)}),
                  Error);
  // nonpositive radius
  CHECK_THROWS_AS(AttributedTree({node("r", std::nullopt, 0.0)}), Error);
  // cycle (no root at all)
  CHECK_THROWS_AS(AttributedTree({node("a", "b", 1.0), node("b", "a", 1.0)}), Error);
}

TEST_CASE("mode changes placement but never the per-level counts") {
  testutil::Rng rng(4242);
  for (int trial = 0; trial < 120; ++trial) {
    // random attributed tree: grow under a random binary shape
    std::vector<AttributedNode> nodes{node("n1", std::nullopt, 1.0 + rng.u01())};
    std::vector<std::string> frontier{"n1"};
    int next_id = 2;
    for (int growth = 0; growth < 12 && !frontier.empty(); ++growth) {
      std::vector<std::string> fresh;
      for (const std::string& parent_id : frontier) {
        const std::uint64_t kids = rng.below(3);
        for (std::uint64_t k = 0; k < kids; ++k) {
          std::string id = "n" + std::to_string(next_id++);
          nodes.push_back(node(id, parent_id, 0.5 + 2.0 * rng.u01()));
          fresh.push_back(std::move(id));
        }
      }
      frontier = std::move(fresh);
      if (nodes.size() > 40) break;
    }
    const AttributedTree t(nodes);
    const BinaryTree thick = apply_correspondence(t, CorrespondenceMode::thickness);
    const BinaryTree desc = apply_correspondence(t, CorrespondenceMode::descendant);
    CAPTURE(trial);
    CHECK(thick.size() == t.size());
    CHECK(desc.size() == t.size());
    CHECK(per_level_counts(thick) == per_level_counts(desc));
    CHECK_NOTHROW(BinaryTree::from_indices(thick.indices()));
    CHECK_NOTHROW(BinaryTree::from_indices(desc.indices()));
  }
}

TEST_CASE("canonical form is a fixed point of the correspondence") {
  testutil::Rng rng(5150);
  for (int trial = 0; trial < 60; ++trial) {
    const BinaryTree shape = testutil::random_tree(rng, 5, 0.6, /*allow_empty=*/false);

    // radii decreasing in the index make placement consistent for thickness;
    // one application canonicalizes (single children move left), after which
    // the transformation is a fixed point
    auto attributed_by_radius = [](const BinaryTree& t) {
      std::vector<AttributedNode> nodes;
      for (NodeIndex v : t) {
        nodes.push_back(node("n" + std::to_string(v),
                             v == 1 ? std::optional<std::string>{}
                                    : std::optional<std::string>{"n" + std::to_string(v / 2)},
                             1000.0 - static_cast<double>(v)));
      }
      return AttributedTree(nodes);
    };
    const BinaryTree canon =
        apply_correspondence(attributed_by_radius(shape), CorrespondenceMode::thickness);
    CHECK(apply_correspondence(attributed_by_radius(canon), CorrespondenceMode::thickness) ==
          canon);

    // a canonical tree produced by descendant mode reproduces itself
    std::vector<AttributedNode> flat;
    for (NodeIndex v : shape) {
      flat.push_back(node("n" + std::to_string(v),
                          v == 1 ? std::optional<std::string>{}
                                 : std::optional<std::string>{"n" + std::to_string(v / 2)},
                          1.0));
    }
    const BinaryTree once = apply_correspondence(AttributedTree(flat), CorrespondenceMode::descendant);
    std::vector<AttributedNode> again;
    for (NodeIndex v : once) {
      again.push_back(node("n" + std::to_string(v),
                           v == 1 ? std::optional<std::string>{}
                                  : std::optional<std::string>{"n" + std::to_string(v / 2)},
                           1.0));
    }
    CHECK(apply_correspondence(AttributedTree(again), CorrespondenceMode::descendant) == once);
  }
}
