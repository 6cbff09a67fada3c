#include "glcc/tu_loader.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "glcc/errors.hpp"

namespace glcc {
namespace {

std::vector<std::string> read_lines(const std::string& path, bool required) {
  std::ifstream is(path);
  if (!is) {
    if (required) throw FormatError("missing required TU file: " + path);
    return {};
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // trailing blank lines are common in the published archives
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

std::vector<double> split_csv(const std::string& line, const std::string& path,
                              std::size_t lineno) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": cannot parse value '" + tok + "'");
    }
  }
  return vals;
}

}  // namespace

GraphDataset load_tu_dataset(const std::string& directory,
                             const std::string& name) {
  const std::string base = directory + "/" + name + "_";
  const auto a_lines = read_lines(base + "A.txt", true);
  const auto ind_lines = read_lines(base + "graph_indicator.txt", true);
  const auto glab_lines = read_lines(base + "graph_labels.txt", true);
  const auto nlab_lines = read_lines(base + "node_labels.txt", false);
  const auto nattr_lines = read_lines(base + "node_attributes.txt", false);

  const int total_nodes = static_cast<int>(ind_lines.size());
  std::vector<int> graph_of(total_nodes);  // 0-based graph id per global node
  int num_graphs = 0;
  for (int i = 0; i < total_nodes; ++i) {
    int gid = std::stoi(ind_lines[i]);
    if (gid < 1)
      throw FormatError(base + "graph_indicator.txt:" + std::to_string(i + 1) +
                        ": graph id must be >= 1");
    graph_of[i] = gid - 1;
    num_graphs = std::max(num_graphs, gid);
  }
  if (static_cast<int>(glab_lines.size()) != num_graphs)
    throw FormatError(base + "graph_labels.txt: expected " +
                      std::to_string(num_graphs) + " labels, found " +
                      std::to_string(glab_lines.size()));

  // local index of each global node within its graph
  std::vector<int> local_of(total_nodes);
  std::vector<int> node_counts(num_graphs, 0);
  for (int i = 0; i < total_nodes; ++i) local_of[i] = node_counts[graph_of[i]]++;

  GraphDataset ds;
  ds.name = name;
  ds.graphs.resize(num_graphs);
  for (int g = 0; g < num_graphs; ++g) ds.graphs[g].node_count = node_counts[g];

  int dropped_self_loops = 0;
  for (std::size_t li = 0; li < a_lines.size(); ++li) {
    const auto vals = split_csv(a_lines[li], base + "A.txt", li + 1);
    if (vals.size() != 2)
      throw FormatError(base + "A.txt:" + std::to_string(li + 1) +
                        ": expected two comma-separated node ids");
    const int u = static_cast<int>(vals[0]) - 1;
    const int v = static_cast<int>(vals[1]) - 1;
    if (u < 0 || v < 0 || u >= total_nodes || v >= total_nodes)
      throw IntegrityError(base + "A.txt:" + std::to_string(li + 1) +
                           ": node id out of range");
    if (graph_of[u] != graph_of[v])
      throw IntegrityError(base + "A.txt:" + std::to_string(li + 1) +
                           ": edge crosses graph boundary per graph_indicator");
    if (u == v) {
      ++dropped_self_loops;
      continue;
    }
    ds.graphs[graph_of[u]].edges.emplace_back(local_of[u], local_of[v]);
  }
  if (dropped_self_loops > 0)
    std::cerr << "warning: dropped " << dropped_self_loops
              << " self-loop(s) in " << name << "\n";
  for (auto& g : ds.graphs) canonicalize_edges(g);

  // graph labels remapped to contiguous [0, K)
  std::map<int, int> label_map;
  for (const auto& l : glab_lines) label_map.emplace(std::stoi(l), 0);
  int next = 0;
  for (auto& [raw, mapped] : label_map) mapped = next++;
  for (int g = 0; g < num_graphs; ++g)
    ds.graphs[g].label = label_map.at(std::stoi(glab_lines[g]));
  ds.num_classes = next;

  // node features: attributes > one-hot labels > normalized degree
  if (!nattr_lines.empty()) {
    if (static_cast<int>(nattr_lines.size()) != total_nodes)
      throw FormatError(base + "node_attributes.txt: expected " +
                        std::to_string(total_nodes) + " rows");
    const auto first = split_csv(nattr_lines[0], base + "node_attributes.txt", 1);
    const int d = static_cast<int>(first.size());
    for (auto& g : ds.graphs) g.node_features.resize(g.node_count, d);
    for (int i = 0; i < total_nodes; ++i) {
      const auto vals = split_csv(nattr_lines[i], base + "node_attributes.txt", i + 1);
      if (static_cast<int>(vals.size()) != d)
        throw FormatError(base + "node_attributes.txt:" + std::to_string(i + 1) +
                          ": inconsistent attribute count");
      for (int j = 0; j < d; ++j)
        ds.graphs[graph_of[i]].node_features(local_of[i], j) = vals[j];
    }
  } else if (!nlab_lines.empty()) {
    if (static_cast<int>(nlab_lines.size()) != total_nodes)
      throw FormatError(base + "node_labels.txt: expected " +
                        std::to_string(total_nodes) + " rows");
    std::map<int, int> nl_map;
    std::vector<int> nl(total_nodes);
    for (int i = 0; i < total_nodes; ++i) {
      nl[i] = std::stoi(nlab_lines[i]);
      nl_map.emplace(nl[i], 0);
    }
    int nn = 0;
    for (auto& [raw, mapped] : nl_map) mapped = nn++;
    for (auto& g : ds.graphs) {
      g.node_features.resize(g.node_count, nn);
      g.node_features.setZero();
    }
    for (int i = 0; i < total_nodes; ++i)
      ds.graphs[graph_of[i]].node_features(local_of[i], nl_map.at(nl[i])) = 1.0;
  } else {
    int max_degree = 1;
    std::vector<std::vector<int>> degs(num_graphs);
    for (int g = 0; g < num_graphs; ++g) degs[g].assign(node_counts[g], 0);
    for (int g = 0; g < num_graphs; ++g)
      for (auto [u, v] : ds.graphs[g].edges) {
        ++degs[g][u];
        ++degs[g][v];
      }
    for (const auto& dg : degs)
      for (int d : dg) max_degree = std::max(max_degree, d);
    for (int g = 0; g < num_graphs; ++g) {
      ds.graphs[g].node_features.resize(node_counts[g], 1);
      for (int i = 0; i < node_counts[g]; ++i)
        ds.graphs[g].node_features(i, 0) =
            static_cast<double>(degs[g][i]) / max_degree;
    }
  }
  return ds;
}

}  // namespace glcc
