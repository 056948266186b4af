#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "treeline/binary_tree.hpp"
#include "treeline/correspondence.hpp"
#include "treeline/error.hpp"

namespace treeline {

/// Parameters for the depth-decay Bernoulli tree generator. A node on level
/// L (root = level 1) is kept with probability inclusion_decay^(L-1),
/// conditional on its parent being kept; the root is always kept. Output is
/// a deterministic function of the config.
struct SynthConfig {
  std::size_t n = 73;
  unsigned max_depth = 10;
  double inclusion_decay = 0.5;
  std::uint64_t seed = 1;
  std::string population = "synthetic";
};

namespace detail {

// Hand-rolled draws so generated bytes do not depend on the standard
// library's distribution implementations.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : eng_(seed) {}

  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t bound) { return eng_() % bound; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace detail

inline void validate(const SynthConfig& config) {
  if (config.n < 1) fail("invalid-config", "tree count must be at least 1");
  if (config.max_depth < 1 || config.max_depth > 62) {
    fail("invalid-config", "max depth must be between 1 and 62");
  }
  if (!(config.inclusion_decay > 0.0) || config.inclusion_decay > 1.0) {
    fail("invalid-config", "inclusion decay must lie in (0, 1]");
  }
}

/// One random ancestor-closed tree inside the complete depth-max_depth tree.
inline BinaryTree synth_tree(const SynthConfig& config, detail::SynthRng& rng) {
  std::vector<NodeIndex> nodes{kRootIndex};
  std::vector<NodeIndex> frontier{kRootIndex};
  double level_prob = 1.0;
  for (unsigned level = 2; level <= config.max_depth && !frontier.empty(); ++level) {
    level_prob *= config.inclusion_decay;
    std::vector<NodeIndex> next;
    for (NodeIndex p : frontier) {
      for (NodeIndex c : {left_child(p), right_child(p)}) {
        if (rng.u01() < level_prob) {
          nodes.push_back(c);
          next.push_back(c);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(nodes.begin(), nodes.end());
  return BinaryTree::from_sorted_unchecked(std::move(nodes));
}

/// Raw attributed record for a synthetic subject.
struct SynthSubject {
  SubjectInfo info;
  std::vector<AttributedNode> nodes;  // ids n<index>, radii in (0.5, 3.0]
};

/// Deterministic synthetic population in raw (attributed) form, ready for
/// the correspondence step.
inline std::vector<SynthSubject> synth_population(const SynthConfig& config) {
  validate(config);
  detail::SynthRng rng(config.seed);
  std::vector<SynthSubject> out;
  out.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    SynthSubject subject;
    subject.info.subject_id = "s" + std::to_string(i + 1);
    subject.info.age = static_cast<double>(18 + rng.below(55));  // 18..72
    subject.info.sex = rng.u01() < 0.5 ? "F" : "M";
    const BinaryTree tree = synth_tree(config, rng);
    for (NodeIndex v : tree) {
      AttributedNode node;
      node.id = "n" + std::to_string(v);
      if (v != kRootIndex) node.parent_id = "n" + std::to_string(v / 2);
      // keep radii on a coarse grid so serialized output stays tidy
      node.median_radius = 0.5 + static_cast<double>(rng.below(2500) + 1) * 0.001;
      subject.nodes.push_back(std::move(node));
    }
    out.push_back(std::move(subject));
  }
  return out;
}

}  // namespace treeline
