#pragma once

#include <string>

#include "glcc/graph.hpp"

namespace glcc {

/// Loads a dataset in the public TU flat-file convention from `directory`:
///   {name}_A.txt              comma-separated 1-indexed edge pairs
///   {name}_graph_indicator.txt  one 1-indexed graph id per node
///   {name}_graph_labels.txt   one integer label per graph
///   {name}_node_labels.txt    (optional) integer node label, one-hot encoded
///   {name}_node_attributes.txt (optional) comma-separated real attributes
///
/// Indices are rebased to 0, graph labels remapped to contiguous [0, K).
/// Without node labels or attributes the single feature is the node degree
/// divided by the dataset-wide maximum degree. Self-loops are dropped.
GraphDataset load_tu_dataset(const std::string& directory,
                             const std::string& name);

}  // namespace glcc
