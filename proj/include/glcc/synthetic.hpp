#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "glcc/graph.hpp"

namespace glcc {

/// One family of an Erdos-Renyi style labeled mixture. Node features are
/// feature_mean plus Gaussian noise with stddev noise_sigma.
struct FamilySpec {
  int count = 0;
  int nodes_min = 0;
  int nodes_max = 0;
  double density = 0.0;  // edge probability, in (0, 1]
  Eigen::VectorXd feature_mean;
  double noise_sigma = 0.1;
};

/// Deterministic under seed; graph label = family index; all families must
/// share the feature dimension. Connectivity is not enforced.
GraphDataset generate_synthetic_mixture(const std::vector<FamilySpec>& families,
                                        std::uint64_t seed);

}  // namespace glcc
