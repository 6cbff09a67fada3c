#pragma once

#include <Eigen/Dense>
#include <vector>

#include "glcc/affinity.hpp"

namespace glcc {

struct PseudoLabelSet {
  std::vector<int> indices;     // selected samples, entropies non-decreasing
  std::vector<int> labels;      // hard labels, in [0, K)
  Eigen::MatrixXd p_ave;        // |indices| x K, row-stochastic
  std::vector<double> entropies;
  double ratio = 0.0;

  bool empty() const { return indices.empty(); }
};

/// Averaged assignment distribution of sample i: its own row plus the
/// weighted neighbor rows (weights from normalized_weights), renormalized
/// to sum 1. Falls back to the sample's own row when i is isolated.
Eigen::VectorXd neighbor_average(int i, const Eigen::MatrixXd& z_full,
                                 const AffinityGraph& ag);

/// Selects the floor(r*N) samples whose averaged distributions have the
/// smallest Shannon entropies (ties by ascending index); hard label =
/// argmax with ties to the lowest class. Empty set when floor(r*N) == 0.
PseudoLabelSet select_confident(const Eigen::MatrixXd& z_full,
                                const AffinityGraph& ag, double r);

}  // namespace glcc
