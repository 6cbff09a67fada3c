#include "glcc/augment.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "glcc/errors.hpp"

namespace glcc {

AugmentStrategy parse_strategy(const std::string& s) {
  if (s == "node_drop") return AugmentStrategy::kNodeDrop;
  if (s == "edge_perturb") return AugmentStrategy::kEdgePerturb;
  if (s == "subgraph") return AugmentStrategy::kSubgraph;
  if (s == "attr_mask") return AugmentStrategy::kAttrMask;
  if (s == "random_choice") return AugmentStrategy::kRandomChoice;
  throw ParameterError("unknown augmentation strategy: " + s);
}

std::string strategy_name(AugmentStrategy s) {
  switch (s) {
    case AugmentStrategy::kNodeDrop: return "node_drop";
    case AugmentStrategy::kEdgePerturb: return "edge_perturb";
    case AugmentStrategy::kSubgraph: return "subgraph";
    case AugmentStrategy::kAttrMask: return "attr_mask";
    case AugmentStrategy::kRandomChoice: return "random_choice";
  }
  return "?";
}

namespace {

/// Induced subgraph on `keep` (sorted node list), with reindexing.
Graph induced(const Graph& g, const std::vector<int>& keep) {
  std::vector<int> remap(g.node_count, -1);
  for (int i = 0; i < static_cast<int>(keep.size()); ++i) remap[keep[i]] = i;
  Graph out;
  out.node_count = static_cast<int>(keep.size());
  out.label = g.label;
  out.node_features.resize(out.node_count, g.node_features.cols());
  for (int i = 0; i < out.node_count; ++i)
    out.node_features.row(i) = g.node_features.row(keep[i]);
  for (auto [u, v] : g.edges)
    if (remap[u] >= 0 && remap[v] >= 0) out.edges.emplace_back(remap[u], remap[v]);
  canonicalize_edges(out);
  return out;
}

Graph node_drop(const Graph& g, double ratio, std::mt19937_64& rng) {
  const int drop = static_cast<int>(ratio * g.node_count);
  if (drop <= 0) return g;
  if (drop >= g.node_count) return g;
  std::vector<int> perm(g.node_count);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> keep(perm.begin(), perm.end() - drop);
  std::sort(keep.begin(), keep.end());
  return induced(g, keep);
}

Graph edge_perturb(const Graph& g, double ratio, std::mt19937_64& rng) {
  const int m = static_cast<int>(ratio * g.edges.size());
  if (m <= 0) return g;
  Graph out = g;
  std::vector<int> perm(g.edges.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::set<std::pair<int, int>> existing(g.edges.begin(), g.edges.end());
  std::set<std::pair<int, int>> removed;
  for (int i = 0; i < m; ++i) removed.insert(g.edges[perm[i]]);
  // non-edges drawn against the original edge set, so a removed edge
  // cannot come straight back
  std::set<std::pair<int, int>> added;
  std::uniform_int_distribution<int> node(0, g.node_count - 1);
  const long long pairs =
      static_cast<long long>(g.node_count) * (g.node_count - 1) / 2;
  const long long available = pairs - static_cast<long long>(existing.size());
  const int target = static_cast<int>(std::min<long long>(m, available));
  int attempts = 0;
  const int max_attempts = 200 * (target + 1);
  while (static_cast<int>(added.size()) < target && attempts++ < max_attempts) {
    int u = node(rng), v = node(rng);
    if (u == v) continue;
    auto e = std::minmax(u, v);
    std::pair<int, int> p{e.first, e.second};
    if (existing.count(p) || added.count(p)) continue;
    added.insert(p);
  }
  out.edges.clear();
  for (const auto& e : g.edges)
    if (!removed.count(e)) out.edges.push_back(e);
  out.edges.insert(out.edges.end(), added.begin(), added.end());
  canonicalize_edges(out);
  return out;
}

Graph subgraph(const Graph& g, double ratio, std::mt19937_64& rng) {
  const int target = static_cast<int>(std::ceil((1.0 - ratio) * g.node_count));
  if (target >= g.node_count || target < 1) return g;
  std::vector<std::vector<int>> adj(g.node_count);
  for (auto [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::uniform_int_distribution<int> node(0, g.node_count - 1);
  const int seed_node = node(rng);
  std::vector<char> visited(g.node_count, 0);
  std::vector<int> keep{seed_node};
  visited[seed_node] = 1;
  int current = seed_node;
  int steps = 0;
  const int max_steps = 20 * g.node_count + 20;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  while (static_cast<int>(keep.size()) < target) {
    if (steps++ > max_steps) break;
    if (coin(rng) < 0.15) current = seed_node;  // restart
    const auto& nb = adj[current];
    if (nb.empty()) {
      current = seed_node;
      if (adj[current].empty()) break;
      continue;
    }
    std::uniform_int_distribution<int> pick(0, static_cast<int>(nb.size()) - 1);
    current = nb[pick(rng)];
    if (!visited[current]) {
      visited[current] = 1;
      keep.push_back(current);
    }
  }
  // disconnected leftovers: fill with uniformly chosen unvisited nodes
  if (static_cast<int>(keep.size()) < target) {
    std::vector<int> rest;
    for (int i = 0; i < g.node_count; ++i)
      if (!visited[i]) rest.push_back(i);
    std::shuffle(rest.begin(), rest.end(), rng);
    for (int i : rest) {
      if (static_cast<int>(keep.size()) >= target) break;
      keep.push_back(i);
    }
  }
  std::sort(keep.begin(), keep.end());
  return induced(g, keep);
}

Graph attr_mask(const Graph& g, double ratio, std::mt19937_64& rng) {
  const int mask = static_cast<int>(ratio * g.node_count);
  if (mask <= 0) return g;
  Graph out = g;
  std::vector<int> perm(g.node_count);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int i = 0; i < mask; ++i) out.node_features.row(perm[i]).setZero();
  return out;
}

}  // namespace

Graph augment(const Graph& g, const AugmentationSpec& spec,
              std::mt19937_64& rng) {
  if (spec.ratio < 0.0 || spec.ratio >= 1.0)
    throw ParameterError("augmentation ratio must lie in [0, 1)");
  if (g.node_count < 1) throw ParameterError("cannot augment an empty graph");
  if (spec.ratio == 0.0) return g;
  AugmentStrategy s = spec.strategy;
  if (s == AugmentStrategy::kRandomChoice) {
    std::uniform_int_distribution<int> pick(0, 3);
    s = static_cast<AugmentStrategy>(pick(rng));
  }
  switch (s) {
    case AugmentStrategy::kNodeDrop: return node_drop(g, spec.ratio, rng);
    case AugmentStrategy::kEdgePerturb: return edge_perturb(g, spec.ratio, rng);
    case AugmentStrategy::kSubgraph: return subgraph(g, spec.ratio, rng);
    case AugmentStrategy::kAttrMask: return attr_mask(g, spec.ratio, rng);
    default: return g;
  }
}

}  // namespace glcc
