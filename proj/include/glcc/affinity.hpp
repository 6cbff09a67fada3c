#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <map>
#include <random>

namespace glcc {

/// Sparse symmetric kNN affinity over the N training graphs. Weights are
/// exp(cos/tau); every node counts itself among its k neighbors, so the
/// diagonal is exp(1/tau) and all degrees are positive.
struct AffinityGraph {
  Eigen::SparseMatrix<double> a;  // N x N, exactly symmetric
  int k = 0;
  double tau = 0.0;
  Eigen::VectorXd degree;         // row sums
  int epoch_built = -1;

  int size() const { return static_cast<int>(a.rows()); }
};

struct LaplacianView {
  Eigen::SparseMatrix<double> l;  // I - D^{-1/2} A D^{-1/2}
};

/// features: N x m with unit-norm rows. For each i the k most similar
/// columns (self always included, remaining ties broken by lower index)
/// get weight exp(sim/tau); the result is symmetrized by elementwise max.
AffinityGraph build_affinity(const Eigen::MatrixXd& features, int k, double tau);

LaplacianView laplacian(const AffinityGraph& ag);

/// Dense Laplacian block restricted to `idx` x `idx`, for batch losses.
Eigen::MatrixXd laplacian_block(const AffinityGraph& ag,
                                const std::vector<int>& idx);

/// Draws j != i with probability proportional to A_ij over off-diagonal
/// positives; returns i itself if the row has none.
int sample_neighbor(const AffinityGraph& ag, int i, std::mt19937_64& rng);

/// Off-diagonal row weights normalized to sum 1; empty if i has no
/// off-diagonal neighbors.
std::map<int, double> normalized_weights(const AffinityGraph& ag, int i);

/// Coordinate-list text export (i j weight per line), for inspection.
void export_affinity(const AffinityGraph& ag, std::ostream& os);

}  // namespace glcc
