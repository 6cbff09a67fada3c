#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "glcc/errors.hpp"
#include "glcc/graph.hpp"
#include "glcc/synthetic.hpp"
#include "glcc/tu_loader.hpp"

using namespace glcc;
namespace fs = std::filesystem;

namespace {

Graph make_graph(int n, std::vector<std::pair<int, int>> edges, int label = 0) {
  Graph g;
  g.node_count = n;
  g.edges = std::move(edges);
  canonicalize_edges(g);
  g.node_features = Eigen::MatrixXd::Ones(n, 2);
  g.label = label;
  return g;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("glcc_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& name, const std::string& content) const {
    std::ofstream os(path / name);
    os << content;
  }
};

}  // namespace

TEST_CASE("edge canonicalization is idempotent and drops duplicates") {
  Graph g;
  g.node_count = 4;
  g.edges = {{2, 1}, {1, 2}, {3, 3}, {0, 1}, {1, 0}};
  canonicalize_edges(g);
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
  Graph again = g;
  canonicalize_edges(again);
  CHECK(again.edges == g.edges);
}

TEST_CASE("validate_dataset") {
  GraphDataset ds;
  ds.num_classes = 1;
  ds.graphs = {make_graph(3, {{0, 1}, {1, 2}})};

  SUBCASE("valid dataset reports nothing") {
    CHECK(validate_dataset(ds).empty());
  }
  SUBCASE("edge endpoint at node_count is one violation") {
    ds.graphs[0].edges.push_back({1, 3});
    const auto v = validate_dataset(ds);
    REQUIRE(v.size() == 1);
    CHECK(v[0].graph_index == 0);
    CHECK(v[0].rule.find("endpoint") != std::string::npos);
  }
  SUBCASE("mismatched feature dims across graphs") {
    Graph g2 = make_graph(2, {{0, 1}});
    g2.node_features = Eigen::MatrixXd::Ones(2, 5);
    ds.graphs.push_back(g2);
    const auto v = validate_dataset(ds);
    REQUIRE(v.size() == 1);
    CHECK(v[0].graph_index == 1);
  }
  SUBCASE("label outside class range") {
    ds.graphs[0].label = 7;
    CHECK(validate_dataset(ds).size() == 1);
  }
}

TEST_CASE("snapshot round-trip preserves everything") {
  std::vector<FamilySpec> fams(2);
  fams[0] = {5, 3, 6, 0.5, Eigen::Vector2d(1.0, 0.0), 0.1};
  fams[1] = {4, 2, 4, 0.8, Eigen::Vector2d(0.0, 1.0), 0.1};
  const auto ds = generate_synthetic_mixture(fams, 42);
  std::stringstream ss;
  save_snapshot(ds, ss);
  const auto back = load_snapshot(ss);
  REQUIRE(back.size() == ds.size());
  CHECK(back.num_classes == ds.num_classes);
  for (int i = 0; i < ds.size(); ++i) {
    CHECK(back.graphs[i].edges == ds.graphs[i].edges);
    CHECK(back.graphs[i].label == ds.graphs[i].label);
    CHECK(back.graphs[i].node_features == ds.graphs[i].node_features);
  }
  CHECK(dataset_fingerprint(back) == dataset_fingerprint(ds));
}

TEST_CASE("synthetic mixture") {
  SUBCASE("3 families x 100 graphs -> 300 labeled graphs, K=3") {
    std::vector<FamilySpec> fams(3);
    fams[0] = {100, 10, 20, 0.1, Eigen::Vector3d(1, 0, 0), 0.1};
    fams[1] = {100, 10, 20, 0.3, Eigen::Vector3d(0, 1, 0), 0.1};
    fams[2] = {100, 10, 20, 0.6, Eigen::Vector3d(0, 0, 1), 0.1};
    const auto ds = generate_synthetic_mixture(fams, 7);
    CHECK(ds.size() == 300);
    CHECK(ds.num_classes == 3);
    CHECK(ds.has_labels());
    CHECK(validate_dataset(ds).empty());
    for (int i = 0; i < 100; ++i) CHECK(ds.graphs[i].label == 0);
  }
  SUBCASE("single family, count 1") {
    std::vector<FamilySpec> fams{{1, 3, 3, 1.0, Eigen::Vector2d(1, 1), 0.1}};
    const auto ds = generate_synthetic_mixture(fams, 0);
    CHECK(ds.size() == 1);
    CHECK(ds.num_classes == 1);
    CHECK(ds.graphs[0].edge_count() == 3);  // density 1 on 3 nodes
  }
  SUBCASE("same spec and seed is byte-identical") {
    std::vector<FamilySpec> fams{{10, 5, 15, 0.4, Eigen::Vector2d(1, 2), 0.2}};
    std::stringstream a, b;
    save_snapshot(generate_synthetic_mixture(fams, 99), a);
    save_snapshot(generate_synthetic_mixture(fams, 99), b);
    CHECK(a.str() == b.str());
  }
  SUBCASE("density outside (0,1] is a parameter error") {
    std::vector<FamilySpec> fams{{1, 3, 3, 0.0, Eigen::Vector2d(1, 1), 0.1}};
    CHECK_THROWS_AS(generate_synthetic_mixture(fams, 0), ParameterError);
    fams[0].density = 1.5;
    CHECK_THROWS_AS(generate_synthetic_mixture(fams, 0), ParameterError);
  }
}

TEST_CASE("TU loader") {
  SUBCASE("1-graph toy directory") {
    TempDir dir;
    dir.write("toy_A.txt", "1, 2\n2, 1\n");
    dir.write("toy_graph_indicator.txt", "1\n1\n");
    dir.write("toy_graph_labels.txt", "1\n");
    const auto ds = load_tu_dataset(dir.path.string(), "toy");
    REQUIRE(ds.size() == 1);
    CHECK(ds.num_classes == 1);
    CHECK(ds.graphs[0].node_count == 2);
    CHECK(ds.graphs[0].edges == std::vector<std::pair<int, int>>{{0, 1}});
    CHECK(ds.graphs[0].label == 0);  // remapped to [0, K)
    CHECK(ds.graphs[0].feature_dim() == 1);  // degree featurization
    CHECK(validate_dataset(ds).empty());
  }
  SUBCASE("node labels become one-hot features") {
    TempDir dir;
    dir.write("toy_A.txt", "1, 2\n");
    dir.write("toy_graph_indicator.txt", "1\n1\n2\n");
    dir.write("toy_graph_labels.txt", "5\n-3\n");
    dir.write("toy_node_labels.txt", "0\n1\n0\n");
    const auto ds = load_tu_dataset(dir.path.string(), "toy");
    REQUIRE(ds.size() == 2);
    CHECK(ds.num_classes == 2);
    CHECK(ds.graphs[0].label == 1);  // labels remapped in sorted order
    CHECK(ds.graphs[1].label == 0);
    CHECK(ds.graphs[0].feature_dim() == 2);
    CHECK(ds.graphs[0].node_features(0, 0) == 1.0);
    CHECK(ds.graphs[0].node_features(1, 1) == 1.0);
    CHECK(validate_dataset(ds).empty());
  }
  SUBCASE("missing mandatory file names the file") {
    TempDir dir;
    dir.write("toy_A.txt", "1, 2\n");
    dir.write("toy_graph_indicator.txt", "1\n1\n");
    CHECK_THROWS_WITH_AS(load_tu_dataset(dir.path.string(), "toy"),
                         doctest::Contains("graph_labels.txt"), FormatError);
  }
  SUBCASE("cross-graph edge is an integrity error with line number") {
    TempDir dir;
    dir.write("toy_A.txt", "1, 2\n1, 3\n");
    dir.write("toy_graph_indicator.txt", "1\n1\n2\n");
    dir.write("toy_graph_labels.txt", "1\n1\n");
    CHECK_THROWS_WITH_AS(load_tu_dataset(dir.path.string(), "toy"),
                         doctest::Contains("A.txt:2"), IntegrityError);
  }
  SUBCASE("out-of-range node id") {
    TempDir dir;
    dir.write("toy_A.txt", "1, 9\n");
    dir.write("toy_graph_indicator.txt", "1\n1\n");
    dir.write("toy_graph_labels.txt", "1\n");
    CHECK_THROWS_AS(load_tu_dataset(dir.path.string(), "toy"), IntegrityError);
  }
  SUBCASE("self-loops are dropped") {
    TempDir dir;
    dir.write("toy_A.txt", "1, 1\n1, 2\n");
    dir.write("toy_graph_indicator.txt", "1\n1\n");
    dir.write("toy_graph_labels.txt", "1\n");
    const auto ds = load_tu_dataset(dir.path.string(), "toy");
    CHECK(ds.graphs[0].edge_count() == 1);
    CHECK(validate_dataset(ds).empty());
  }
}
