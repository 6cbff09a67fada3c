// glcc: graph-level clustering pipeline driver.
//
// Subcommands: generate (synthetic mixture), train, ablate (M1..M5 table),
// eval (checkpoint + data -> metrics), sweep (neighbor-count sensitivity).
// Exit codes: 0 success, 2 usage/input error, 3 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "glcc/errors.hpp"
#include "glcc/graph.hpp"
#include "glcc/metrics.hpp"
#include "glcc/synthetic.hpp"
#include "glcc/trainer.hpp"
#include "glcc/tu_loader.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string default_out_root() {
  const char* env = std::getenv("GLCC_OUT_ROOT");
  return env ? env : "runs";
}

glcc::GraphDataset load_data(const std::string& path) {
  if (fs::is_directory(path)) {
    const std::string name = fs::path(path).filename().string();
    return glcc::load_tu_dataset(path, name);
  }
  return glcc::load_snapshot(path);
}

void write_manifest(const fs::path& out_dir, const glcc::TrainConfig& cfg,
                    const glcc::GraphDataset& ds, const std::string& command) {
  json j;
  j["command"] = command;
  j["config"] = json::parse(cfg.to_json());
  std::ostringstream fp;
  fp << std::hex << glcc::dataset_fingerprint(ds);
  j["dataset_fingerprint"] = fp.str();
  j["dataset_name"] = ds.name;
  j["seed"] = cfg.seed;
  j["out_dir"] = out_dir.string();
  // run id: content hash of config + data fingerprint + seed
  std::uint64_t h = glcc::dataset_fingerprint(ds);
  for (unsigned char c : cfg.to_json()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream rid;
  rid << std::hex << h;
  j["run_id"] = rid.str();
  std::ofstream os(out_dir / "manifest.json");
  os << j.dump(2) << "\n";
}

void write_assignments(const fs::path& path, const std::vector<int>& a) {
  std::ofstream os(path);
  os << "graph_index,cluster_id\n";
  for (std::size_t i = 0; i < a.size(); ++i) os << i << "," << a[i] << "\n";
}

int cmd_generate(const std::string& spec_file, const std::string& out_dir) {
  std::ifstream is(spec_file);
  if (!is) {
    std::cerr << "error: cannot open spec file: " << spec_file << "\n";
    return 2;
  }
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    std::cerr << "error: spec parse failure: " << e.what() << "\n";
    return 2;
  }
  std::vector<glcc::FamilySpec> families;
  for (const auto& f : j.value("families", json::array())) {
    glcc::FamilySpec fam;
    fam.count = f.at("count").get<int>();
    fam.nodes_min = f.at("nodes_min").get<int>();
    fam.nodes_max = f.at("nodes_max").get<int>();
    fam.density = f.at("density").get<double>();
    const auto mean = f.at("feature_mean").get<std::vector<double>>();
    fam.feature_mean =
        Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
    fam.noise_sigma = f.value("noise_sigma", 0.1);
    families.push_back(std::move(fam));
  }
  const std::uint64_t seed = j.value("seed", 0ull);
  glcc::GraphDataset ds;
  try {
    ds = glcc::generate_synthetic_mixture(families, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (j.contains("name")) ds.name = j["name"].get<std::string>();
  fs::create_directories(out_dir);
  glcc::save_snapshot(ds, (fs::path(out_dir) / "dataset.snapshot").string());
  glcc::TrainConfig cfg;
  cfg.seed = seed;
  write_manifest(out_dir, cfg, ds, "generate");
  std::cout << "wrote " << ds.size() << " graphs (K=" << ds.num_classes
            << ") to " << out_dir << "\n";
  return 0;
}

int run_training(const glcc::GraphDataset& ds, const glcc::TrainConfig& cfg,
                 const fs::path& out_dir, const std::string& command) {
  fs::create_directories(out_dir);
  write_manifest(out_dir, cfg, ds, command);
  glcc::TrainResult res;
  try {
    res = glcc::train(ds, cfg);
  } catch (const glcc::NumericalError& e) {
    std::cerr << "error: training aborted: " << e.what() << "\n";
    return 3;
  }
  glcc::save_checkpoint(res.state, (out_dir / "checkpoint.bin").string());
  {
    std::ofstream os(out_dir / "loss.csv");
    glcc::write_loss_csv(res.state.history, os);
  }
  write_assignments(out_dir / "assignments.csv", res.assignments);
  if (ds.has_labels()) {
    const auto report = glcc::evaluate(res.state, ds);
    std::ofstream os(out_dir / "metrics.json");
    os << report.to_json() << "\n";
    std::cout << report.to_json() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GLCC graph-level clustering"};
  app.require_subcommand(1);

  std::string config_file, data_path, out_dir, spec_file, variant, checkpoint;
  std::int64_t seed = -1;
  int epochs = -1, k_neighbors = -1;
  double ratio = -1.0;
  std::vector<int> sweep_ks{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  auto* gen = app.add_subcommand("generate", "generate a synthetic mixture");
  gen->add_option("--spec,--config", spec_file, "family spec JSON")->required();
  gen->add_option("--out", out_dir, "output directory");

  auto add_train_opts = [&](CLI::App* c) {
    c->add_option("--config", config_file, "training config JSON");
    c->add_option("--data", data_path, "dataset snapshot or TU directory")->required();
    c->add_option("--out", out_dir, "output directory");
    c->add_option("--seed", seed, "override seed");
    c->add_option("--epochs", epochs, "override epoch count");
    c->add_option("--k", k_neighbors, "override neighbor count");
    c->add_option("--ratio", ratio, "override pseudo-label ratio");
  };
  auto* train = app.add_subcommand("train", "train GLCC on a dataset");
  add_train_opts(train);
  train->add_option("--variant", variant, "ablation variant M1..M5");

  auto* ablate = app.add_subcommand("ablate", "run the M1..M5 ablation table");
  add_train_opts(ablate);
  ablate->add_option("--variant", variant, "restrict to one variant");

  auto* sweep = app.add_subcommand("sweep", "neighbor-count sensitivity sweep");
  add_train_opts(sweep);
  sweep->add_option("--values", sweep_ks, "k values to sweep");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--data", data_path, "dataset snapshot or TU directory")->required();
  eval->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // normalize CLI11's exit codes: 0 for --help, 2 for any usage error
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      if (out_dir.empty()) out_dir = default_out_root() + "/generate";
      return cmd_generate(spec_file, out_dir);
    }

    glcc::GraphDataset ds;
    try {
      ds = load_data(data_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    glcc::TrainConfig cfg;
    if (!config_file.empty()) cfg = glcc::TrainConfig::from_json_file(config_file);
    if (ds.num_classes >= 2) cfg.num_clusters = ds.num_classes;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (epochs >= 0) cfg.epochs = epochs;
    if (k_neighbors >= 0) cfg.k_neighbors = k_neighbors;
    if (ratio >= 0) cfg.pseudo_ratio = ratio;

    if (train->parsed()) {
      if (!variant.empty()) cfg = cfg.with_variant(variant);
      if (out_dir.empty()) out_dir = default_out_root() + "/train";
      return run_training(ds, cfg, out_dir, "train");
    }
    if (ablate->parsed()) {
      if (out_dir.empty()) out_dir = default_out_root() + "/ablate";
      fs::create_directories(out_dir);
      std::vector<std::string> variants{"M1", "M2", "M3", "M4", "M5"};
      if (!variant.empty()) variants = {variant};
      std::ofstream table(fs::path(out_dir) / "ablation.csv");
      table << "variant,nmi,acc,ari\n";
      for (const auto& v : variants) {
        const int rc = run_training(ds, cfg.with_variant(v),
                                    fs::path(out_dir) / v, "ablate:" + v);
        if (rc != 0) return rc;
        const auto state =
            glcc::load_checkpoint((fs::path(out_dir) / v / "checkpoint.bin").string());
        const auto r = glcc::evaluate(state, ds);
        table << v << "," << r.nmi << "," << r.acc << "," << r.ari << "\n";
      }
      std::cout << "wrote " << (fs::path(out_dir) / "ablation.csv").string() << "\n";
      return 0;
    }
    if (sweep->parsed()) {
      if (out_dir.empty()) out_dir = default_out_root() + "/sweep";
      fs::create_directories(out_dir);
      std::ofstream table(fs::path(out_dir) / "sweep_k.csv");
      table << "k,nmi,acc,ari\n";
      for (int k : sweep_ks) {
        glcc::TrainConfig ck = cfg;
        ck.k_neighbors = k;
        const auto sub = fs::path(out_dir) / ("k" + std::to_string(k));
        const int rc = run_training(ds, ck, sub, "sweep:k=" + std::to_string(k));
        if (rc != 0) return rc;
        const auto state = glcc::load_checkpoint((sub / "checkpoint.bin").string());
        const auto r = glcc::evaluate(state, ds);
        table << k << "," << r.nmi << "," << r.acc << "," << r.ari << "\n";
      }
      return 0;
    }
    if (eval->parsed()) {
      glcc::TrainState state;
      try {
        state = glcc::load_checkpoint(checkpoint);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      if (ds.num_classes >= 2 &&
          state.params.config.num_clusters != ds.num_classes) {
        std::cerr << "error: checkpoint K=" << state.params.config.num_clusters
                  << " incompatible with dataset K=" << ds.num_classes << "\n";
        return 2;
      }
      const auto assignments = glcc::assign_clusters(state, ds);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_assignments(fs::path(out_dir) / "assignments.csv", assignments);
      }
      if (ds.has_labels()) {
        const auto r = glcc::evaluate_clustering(assignments, ds.labels());
        std::cout << r.to_json() << "\n";
      } else if (out_dir.empty()) {
        for (std::size_t i = 0; i < assignments.size(); ++i)
          std::cout << i << "," << assignments[i] << "\n";
      }
      return 0;
    }
  } catch (const glcc::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const glcc::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
