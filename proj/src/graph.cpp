#include "glcc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "glcc/errors.hpp"

namespace glcc {

bool GraphDataset::has_labels() const {
  return !graphs.empty() &&
         std::all_of(graphs.begin(), graphs.end(),
                     [](const Graph& g) { return g.label >= 0; });
}

std::vector<int> GraphDataset::labels() const {
  std::vector<int> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.label);
  return out;
}

void canonicalize_edges(Graph& g) {
  std::vector<std::pair<int, int>> canon;
  canon.reserve(g.edges.size());
  for (auto [u, v] : g.edges) {
    if (u == v) continue;
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
  g.edges = std::move(canon);
}

std::vector<Violation> validate_dataset(const GraphDataset& ds) {
  std::vector<Violation> out;
  const int d = ds.feature_dim();
  for (int gi = 0; gi < ds.size(); ++gi) {
    const Graph& g = ds.graphs[gi];
    if (g.node_count <= 0)
      out.push_back({gi, "node_count must be positive"});
    if (g.node_features.rows() != g.node_count)
      out.push_back({gi, "node_features row count does not match node_count"});
    if (g.node_features.cols() < 1)
      out.push_back({gi, "feature dimension must be at least 1"});
    if (g.feature_dim() != d)
      out.push_back({gi, "feature dimension differs from the rest of the dataset"});
    bool bad_endpoint = false;
    for (auto [u, v] : g.edges) {
      if (u < 0 || v < 0 || u >= g.node_count || v >= g.node_count) {
        bad_endpoint = true;
        break;
      }
    }
    if (bad_endpoint) out.push_back({gi, "edge endpoint out of range"});
    Graph copy = g;
    canonicalize_edges(copy);
    if (copy.edges != g.edges)
      out.push_back({gi, "edges are not canonical (self-loop, duplicate, or unsorted)"});
    if (g.label >= 0 && ds.num_classes > 0 && g.label >= ds.num_classes)
      out.push_back({gi, "label outside [0, num_classes)"});
  }
  if (ds.num_classes < 1 && !ds.graphs.empty())
    out.push_back({-1, "num_classes must be positive"});
  return out;
}

void save_snapshot(const GraphDataset& ds, std::ostream& os) {
  os << "GLCC_DATASET v1\n";
  os << "name " << (ds.name.empty() ? "-" : ds.name) << "\n";
  os << "num_classes " << ds.num_classes << "\n";
  os << "num_graphs " << ds.size() << "\n";
  os << "feature_dim " << ds.feature_dim() << "\n";
  os << std::setprecision(17);
  for (const Graph& g : ds.graphs) {
    os << "graph " << g.node_count << " " << g.edges.size() << " " << g.label
       << "\n";
    for (auto [u, v] : g.edges) os << u << " " << v << "\n";
    for (int i = 0; i < g.node_count; ++i) {
      for (int j = 0; j < g.node_features.cols(); ++j) {
        if (j) os << " ";
        os << g.node_features(i, j);
      }
      os << "\n";
    }
  }
}

void save_snapshot(const GraphDataset& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open snapshot for writing: " + path);
  save_snapshot(ds, os);
}

GraphDataset load_snapshot(std::istream& is) {
  std::string magic, version;
  is >> magic >> version;
  if (magic != "GLCC_DATASET" || version != "v1")
    throw FormatError("not a GLCC dataset snapshot");
  GraphDataset ds;
  std::string key;
  int n = 0, d = 0;
  is >> key >> ds.name;
  if (ds.name == "-") ds.name.clear();
  is >> key >> ds.num_classes;
  is >> key >> n;
  is >> key >> d;
  if (!is) throw FormatError("truncated snapshot header");
  ds.graphs.resize(n);
  for (int gi = 0; gi < n; ++gi) {
    Graph& g = ds.graphs[gi];
    std::size_t ne = 0;
    is >> key >> g.node_count >> ne >> g.label;
    if (!is || key != "graph")
      throw FormatError("malformed graph record at index " + std::to_string(gi));
    g.edges.resize(ne);
    for (auto& [u, v] : g.edges) is >> u >> v;
    g.node_features.resize(g.node_count, d);
    for (int i = 0; i < g.node_count; ++i)
      for (int j = 0; j < d; ++j) is >> g.node_features(i, j);
    if (!is)
      throw FormatError("truncated snapshot in graph " + std::to_string(gi));
  }
  return ds;
}

GraphDataset load_snapshot(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open snapshot: " + path);
  return load_snapshot(is);
}

std::uint64_t dataset_fingerprint(const GraphDataset& ds) {
  std::ostringstream os;
  save_snapshot(ds, os);
  const std::string s = os.str();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace glcc
