#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace glcc {

struct MetricsReport {
  double nmi = 0.0;
  double acc = 0.0;
  double ari = 0.0;
  int n = 0;
  int k_pred = 0;
  int k_true = 0;

  std::string to_json() const;
  std::string to_csv_row() const;  // nmi,acc,ari,n,k_pred,k_true
};

/// Normalized mutual information, normalized by the geometric mean of the
/// two partition entropies.
double nmi(const std::vector<int>& pred, const std::vector<int>& truth);

/// Clustering accuracy under the optimal injective cluster-to-class map,
/// computed exactly via linear assignment on the contingency matrix.
double acc(const std::vector<int>& pred, const std::vector<int>& truth);

/// Adjusted Rand index.
double ari(const std::vector<int>& pred, const std::vector<int>& truth);

MetricsReport evaluate_clustering(const std::vector<int>& pred,
                                  const std::vector<int>& truth);

/// Lloyd k-means with greedy distance-weighted (k-means++) seeding.
/// Runs to an assignment fixpoint or 300 iterations; empty clusters are
/// re-seeded to the point farthest from its centroid.
std::vector<int> kmeans(const Eigen::MatrixXd& points, int k,
                        std::uint64_t seed);

/// Minimum-cost solution of the square assignment problem. Returns for each
/// row the assigned column. Exact (Kuhn-Munkres with potentials).
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace glcc
