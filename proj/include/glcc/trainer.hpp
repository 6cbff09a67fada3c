#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "glcc/affinity.hpp"
#include "glcc/augment.hpp"
#include "glcc/encoder.hpp"
#include "glcc/graph.hpp"
#include "glcc/losses.hpp"
#include "glcc/metrics.hpp"

namespace glcc {

struct TrainConfig {
  int num_clusters = 2;  // K
  int epochs = 100;
  int batch_size = 64;
  int k_neighbors = 5;
  double tau_inst = 0.1;
  double tau_clu = 1.0;
  double pseudo_ratio = 0.1;  // r
  AugmentationSpec aug{AugmentStrategy::kRandomChoice, 0.1};
  double learning_rate = 1e-3;
  int warmup_epochs = 20;
  bool use_igc = true;
  bool use_cgc = true;
  bool use_affinity = true;
  bool use_pseudo = true;
  std::uint64_t seed = 0;
  int num_layers = 3;
  int hidden_dim = 64;
  int instance_head_dim = 64;

  /// Ablation variants M1..M5 toggle {igc, cgc, affinity, pseudo}:
  /// M1=(1,0,0,0) M2=(0,1,0,0) M3=(1,1,0,0) M4=(1,1,1,0) M5=(1,1,1,1).
  TrainConfig with_variant(const std::string& name) const;

  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
  static TrainConfig from_json_file(const std::string& path);
};

struct LossHistoryRow {
  int epoch = 0;
  int step = 0;
  double igc = 0.0;
  double cgc = 0.0;
  double entropy = 0.0;
  double sup = 0.0;
  double total = 0.0;
};

struct TrainState {
  TrainConfig config;
  EncoderParams params;
  std::vector<Eigen::MatrixXd> adam_m, adam_v;
  long long adam_t = 0;
  AffinityGraph affinity;
  bool has_affinity = false;
  int epoch = 0;
  std::mt19937_64 rng;
  std::vector<LossHistoryRow> history;
};

TrainState init_state(const GraphDataset& ds, const TrainConfig& cfg);

/// Runs epochs [state.epoch, until_epoch). Resuming from a checkpoint
/// continues bit-identically to an uninterrupted run.
void train_epochs(TrainState& state, const GraphDataset& ds, int until_epoch);

struct TrainResult {
  TrainState state;
  std::vector<int> assignments;
};

/// Algorithm: per epoch, Step 1 mini-batch contrastive updates; Step 2
/// supervised-contrastive updates on the confident pseudo-labeled subset
/// (after warmup); then an affinity rebuild from fresh full-dataset
/// instance features.
TrainResult train(const GraphDataset& ds, const TrainConfig& cfg);

/// Argmax of the cluster head on un-augmented graphs.
std::vector<int> assign_clusters(const TrainState& state, const GraphDataset& ds);

MetricsReport evaluate(const TrainState& state, const GraphDataset& ds);

void save_checkpoint(const TrainState& state, const std::string& path);
TrainState load_checkpoint(const std::string& path);

void write_loss_csv(const std::vector<LossHistoryRow>& history, std::ostream& os);

}  // namespace glcc
