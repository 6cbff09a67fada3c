#include "glcc/synthetic.hpp"

#include <random>

#include "glcc/errors.hpp"

namespace glcc {

GraphDataset generate_synthetic_mixture(const std::vector<FamilySpec>& families,
                                        std::uint64_t seed) {
  if (families.empty()) throw ParameterError("at least one family required");
  const int d = static_cast<int>(families.front().feature_mean.size());
  for (const auto& f : families) {
    if (f.density <= 0.0 || f.density > 1.0)
      throw ParameterError("edge density must lie in (0, 1]");
    if (f.count < 1) throw ParameterError("family count must be >= 1");
    if (f.nodes_min < 1 || f.nodes_max < f.nodes_min)
      throw ParameterError("invalid node-count range");
    if (static_cast<int>(f.feature_mean.size()) != d)
      throw ParameterError("all families must share the feature dimension");
  }

  std::mt19937_64 rng(seed);
  GraphDataset ds;
  ds.name = "synthetic";
  ds.num_classes = static_cast<int>(families.size());
  for (int fi = 0; fi < static_cast<int>(families.size()); ++fi) {
    const FamilySpec& f = families[fi];
    std::uniform_int_distribution<int> node_dist(f.nodes_min, f.nodes_max);
    for (int c = 0; c < f.count; ++c) {
      Graph g;
      g.node_count = node_dist(rng);
      g.label = fi;
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      for (int u = 0; u < g.node_count; ++u)
        for (int v = u + 1; v < g.node_count; ++v)
          if (coin(rng) < f.density) g.edges.emplace_back(u, v);
      canonicalize_edges(g);
      g.node_features.resize(g.node_count, d);
      std::normal_distribution<double> noise(0.0, f.noise_sigma);
      for (int u = 0; u < g.node_count; ++u)
        for (int j = 0; j < d; ++j)
          g.node_features(u, j) = f.feature_mean(j) + noise(rng);
      ds.graphs.push_back(std::move(g));
    }
  }
  return ds;
}

}  // namespace glcc
