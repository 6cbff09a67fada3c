#pragma once

#include <random>
#include <string>

#include "glcc/graph.hpp"

namespace glcc {

enum class AugmentStrategy {
  kNodeDrop,
  kEdgePerturb,
  kSubgraph,
  kAttrMask,
  kRandomChoice,
};

AugmentStrategy parse_strategy(const std::string& s);
std::string strategy_name(AugmentStrategy s);

struct AugmentationSpec {
  AugmentStrategy strategy = AugmentStrategy::kRandomChoice;
  double ratio = 0.1;  // perturbation ratio, in [0, 1)
};

/// Applies one stochastic augmentation. ratio = 0 returns the input
/// unchanged; any strategy that would empty the graph does the same.
/// Labels are preserved and the result satisfies the Graph invariants.
Graph augment(const Graph& g, const AugmentationSpec& spec,
              std::mt19937_64& rng);

}  // namespace glcc
