#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "glcc/autodiff.hpp"
#include "glcc/graph.hpp"

namespace glcc {

struct EncoderConfig {
  int num_layers = 3;
  int hidden_dim = 64;
  int feature_dim = 1;
  int num_clusters = 2;        // K
  int instance_head_dim = 64;

  bool operator==(const EncoderConfig&) const = default;
};

/// All trainable tensors. Layout (row-major samples, y = x*W + b):
///   per GIN layer l: W1 (in x hid), b1, W2 (hid x hid), b2
///   readout projection: Wp (L*hid x hid), bp
///   instance head: Wi1, bi1, Wi2 (hid x inst), bi2
///   cluster head: Wc1, bc1, Wc2 (hid x K), bc2
struct EncoderParams {
  EncoderConfig config;
  std::vector<Eigen::MatrixXd> tensors;

  std::size_t count() const { return tensors.size(); }
  /// Uniform fan-in-scaled init, deterministic under seed.
  static EncoderParams init(const EncoderConfig& cfg, std::uint64_t seed);
};

/// Graph-level outputs for one batch.
struct EmbeddingSet {
  Eigen::MatrixXd h;                  // N x hidden_dim
  Eigen::MatrixXd instance_features;  // N x instance_head_dim, unit-norm rows
  Eigen::MatrixXd assignments;        // N x K, row-stochastic
};

/// Batched node-level view of a list of graphs: stacked features, a
/// block-diagonal self-plus-adjacency operator, and a 0/1 pooling matrix
/// summing nodes per graph.
struct GraphBatch {
  Eigen::MatrixXd x;                    // total_nodes x d
  Eigen::SparseMatrix<double> agg;      // total_nodes x total_nodes, A + I
  Eigen::SparseMatrix<double> pool;     // N x total_nodes
  int size = 0;

  static GraphBatch from_graphs(const std::vector<const Graph*>& graphs,
                                int feature_dim);
};

/// Tape-land forward pass; inputs/outputs live on the autodiff graph.
struct ForwardOut {
  ad::Var h;
  ad::Var instance_features;
  ad::Var assignments;
};

/// Lifts params into tape leaves (shared across forward calls of one step).
std::vector<ad::Var> lift_params(const EncoderParams& params);

ForwardOut forward(const GraphBatch& batch, const EncoderConfig& cfg,
                   const std::vector<ad::Var>& params);

/// Value-only convenience wrapper.
EmbeddingSet encode(const std::vector<const Graph*>& batch,
                    const EncoderParams& params);
EmbeddingSet encode(const GraphDataset& ds, const EncoderParams& params);

/// Runs backward() on a scalar tape node and collects per-tensor gradients
/// in the same order as EncoderParams::tensors. Throws NumericalError if
/// the loss is non-finite.
std::vector<Eigen::MatrixXd> gradients(const ad::Var& loss,
                                       const std::vector<ad::Var>& params,
                                       const char* loss_name = "loss");

void save_params(const EncoderParams& p, std::ostream& os);
EncoderParams load_params(std::istream& is);

}  // namespace glcc
