#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace glcc {

/// An attributed undirected graph. Edges are stored canonically as
/// (min, max) pairs, sorted and deduplicated. Node indices are 0-based.
struct Graph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  Eigen::MatrixXd node_features;  // node_count x d
  int label = -1;                 // -1 = unlabeled

  int feature_dim() const { return static_cast<int>(node_features.cols()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// A set of graphs sharing a feature dimension, drawn from K categories.
struct GraphDataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  std::string name;

  int size() const { return static_cast<int>(graphs.size()); }
  int feature_dim() const {
    return graphs.empty() ? 0 : graphs.front().feature_dim();
  }
  bool has_labels() const;
  std::vector<int> labels() const;
};

/// Sorts each edge as (min,max), drops self-loops and duplicates, sorts the
/// edge list. Idempotent.
void canonicalize_edges(Graph& g);

struct Violation {
  int graph_index;  // -1 for dataset-level rules
  std::string rule;
};

/// Reports every Graph/GraphDataset invariant violation; empty means valid.
std::vector<Violation> validate_dataset(const GraphDataset& ds);

/// Plain-text dataset snapshot, loadable by load_snapshot. Exact round-trip
/// for features written with full precision.
void save_snapshot(const GraphDataset& ds, std::ostream& os);
void save_snapshot(const GraphDataset& ds, const std::string& path);
GraphDataset load_snapshot(std::istream& is);
GraphDataset load_snapshot(const std::string& path);

/// FNV-1a hash of the snapshot serialization; used as the dataset
/// fingerprint in run manifests.
std::uint64_t dataset_fingerprint(const GraphDataset& ds);

}  // namespace glcc
