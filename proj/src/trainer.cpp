#include "glcc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "glcc/errors.hpp"
#include "glcc/pseudo_label.hpp"

namespace glcc {

using json = nlohmann::json;

TrainConfig TrainConfig::with_variant(const std::string& name) const {
  TrainConfig c = *this;
  if (name == "M1") {
    c.use_igc = true;  c.use_cgc = false; c.use_affinity = false; c.use_pseudo = false;
  } else if (name == "M2") {
    c.use_igc = false; c.use_cgc = true;  c.use_affinity = false; c.use_pseudo = false;
  } else if (name == "M3") {
    c.use_igc = true;  c.use_cgc = true;  c.use_affinity = false; c.use_pseudo = false;
  } else if (name == "M4") {
    c.use_igc = true;  c.use_cgc = true;  c.use_affinity = true;  c.use_pseudo = false;
  } else if (name == "M5") {
    c.use_igc = true;  c.use_cgc = true;  c.use_affinity = true;  c.use_pseudo = true;
  } else {
    throw ParameterError("unknown variant: " + name + " (expected M1..M5)");
  }
  return c;
}

std::string TrainConfig::to_json() const {
  json j;
  j["num_clusters"] = num_clusters;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["k_neighbors"] = k_neighbors;
  j["tau_inst"] = tau_inst;
  j["tau_clu"] = tau_clu;
  j["pseudo_ratio"] = pseudo_ratio;
  j["aug_strategy"] = strategy_name(aug.strategy);
  j["aug_ratio"] = aug.ratio;
  j["learning_rate"] = learning_rate;
  j["warmup_epochs"] = warmup_epochs;
  j["use_igc"] = use_igc;
  j["use_cgc"] = use_cgc;
  j["use_affinity"] = use_affinity;
  j["use_pseudo"] = use_pseudo;
  j["seed"] = seed;
  j["num_layers"] = num_layers;
  j["hidden_dim"] = hidden_dim;
  j["instance_head_dim"] = instance_head_dim;
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config parse error: ") + e.what());
  }
  TrainConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("num_clusters", c.num_clusters);
  get("epochs", c.epochs);
  get("batch_size", c.batch_size);
  get("k_neighbors", c.k_neighbors);
  get("tau_inst", c.tau_inst);
  get("tau_clu", c.tau_clu);
  get("pseudo_ratio", c.pseudo_ratio);
  if (j.contains("aug_strategy"))
    c.aug.strategy = parse_strategy(j.at("aug_strategy").get<std::string>());
  get("aug_ratio", c.aug.ratio);
  get("learning_rate", c.learning_rate);
  get("warmup_epochs", c.warmup_epochs);
  get("use_igc", c.use_igc);
  get("use_cgc", c.use_cgc);
  get("use_affinity", c.use_affinity);
  get("use_pseudo", c.use_pseudo);
  get("seed", c.seed);
  get("num_layers", c.num_layers);
  get("hidden_dim", c.hidden_dim);
  get("instance_head_dim", c.instance_head_dim);
  return c;
}

TrainConfig TrainConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

namespace {

void adam_step(TrainState& st, const std::vector<Eigen::MatrixXd>& grads) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++st.adam_t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.adam_t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.adam_t));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    st.adam_m[i] = beta1 * st.adam_m[i] + (1.0 - beta1) * grads[i];
    st.adam_v[i] = beta2 * st.adam_v[i].array().matrix() +
                   (1.0 - beta2) * grads[i].cwiseProduct(grads[i]);
    const Eigen::ArrayXXd mhat = st.adam_m[i].array() / bc1;
    const Eigen::ArrayXXd vhat = st.adam_v[i].array() / bc2;
    st.params.tensors[i].array() -=
        st.config.learning_rate * mhat / (vhat.sqrt() + eps);
  }
}

std::vector<const Graph*> pick(const GraphDataset& ds, const std::vector<int>& idx) {
  std::vector<const Graph*> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(&ds.graphs[i]);
  return out;
}

AugmentationSpec resolve_strategy(const AugmentationSpec& spec,
                                  std::mt19937_64& rng) {
  AugmentationSpec s = spec;
  if (s.strategy == AugmentStrategy::kRandomChoice) {
    std::uniform_int_distribution<int> pick4(0, 3);
    s.strategy = static_cast<AugmentStrategy>(pick4(rng));
  }
  return s;
}

void rebuild_affinity(TrainState& st, const GraphDataset& ds) {
  // evaluation-mode full-dataset forward; instance head rows are unit norm
  const EmbeddingSet full = encode(ds, st.params);
  st.affinity =
      build_affinity(full.instance_features, st.config.k_neighbors,
                     st.config.tau_inst);
  st.affinity.epoch_built = st.epoch;
  st.has_affinity = true;
}

}  // namespace

TrainState init_state(const GraphDataset& ds, const TrainConfig& cfg) {
  if (ds.graphs.empty()) throw ParameterError("dataset is empty");
  if (cfg.num_clusters < 2) throw ParameterError("K must be >= 2 for training");
  if (cfg.use_affinity && cfg.k_neighbors >= ds.size())
    throw ParameterError("k_neighbors must be < dataset size");
  TrainState st;
  st.config = cfg;
  EncoderConfig ec;
  ec.num_layers = cfg.num_layers;
  ec.hidden_dim = cfg.hidden_dim;
  ec.feature_dim = ds.feature_dim();
  ec.num_clusters = cfg.num_clusters;
  ec.instance_head_dim = cfg.instance_head_dim;
  st.params = EncoderParams::init(ec, cfg.seed);
  st.adam_m.assign(st.params.count(), Eigen::MatrixXd());
  st.adam_v.assign(st.params.count(), Eigen::MatrixXd());
  for (std::size_t i = 0; i < st.params.count(); ++i) {
    st.adam_m[i] = Eigen::MatrixXd::Zero(st.params.tensors[i].rows(),
                                         st.params.tensors[i].cols());
    st.adam_v[i] = st.adam_m[i];
  }
  st.rng.seed(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  if (cfg.use_affinity) rebuild_affinity(st, ds);  // from the untrained encoder
  return st;
}

void train_epochs(TrainState& st, const GraphDataset& ds, int until_epoch) {
  const TrainConfig& cfg = st.config;
  const int n = ds.size();
  for (; st.epoch < until_epoch; ++st.epoch) {
    // ---- Step 1: joint instance- and cluster-level contrast ----
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), st.rng);
    int step = 0;
    for (int start = 0; start < n; start += cfg.batch_size, ++step) {
      const int bsz = std::min(cfg.batch_size, n - start);
      std::vector<int> idx(perm.begin() + start, perm.begin() + start + bsz);

      const AugmentationSpec spec = resolve_strategy(cfg.aug, st.rng);
      std::vector<Graph> aug_self;
      aug_self.reserve(bsz);
      for (int i : idx) aug_self.push_back(augment(ds.graphs[i], spec, st.rng));

      // neighbor view for the cluster loss; without an affinity graph the
      // neighbor is the sample itself and the self view is reused
      std::vector<Graph> aug_nbr;
      const bool with_nbrs = cfg.use_affinity && st.has_affinity && cfg.use_cgc;
      if (with_nbrs) {
        aug_nbr.reserve(bsz);
        for (int i : idx) {
          const int j = sample_neighbor(st.affinity, i, st.rng);
          aug_nbr.push_back(augment(ds.graphs[j], spec, st.rng));
        }
      }

      auto as_ptrs = [](const std::vector<Graph>& gs) {
        std::vector<const Graph*> p;
        p.reserve(gs.size());
        for (const auto& g : gs) p.push_back(&g);
        return p;
      };
      const auto lifted = lift_params(st.params);
      const auto orig_batch =
          GraphBatch::from_graphs(pick(ds, idx), st.params.config.feature_dim);
      const auto self_batch =
          GraphBatch::from_graphs(as_ptrs(aug_self), st.params.config.feature_dim);
      const ForwardOut orig = forward(orig_batch, st.params.config, lifted);
      const ForwardOut self_view = forward(self_batch, st.params.config, lifted);
      ForwardOut nbr_view = self_view;
      if (with_nbrs) {
        const auto nbr_batch = GraphBatch::from_graphs(
            as_ptrs(aug_nbr), st.params.config.feature_dim);
        nbr_view = forward(nbr_batch, st.params.config, lifted);
      }

      LossHistoryRow row;
      row.epoch = st.epoch;
      row.step = step;
      ad::Var total;
      if (cfg.use_igc) {
        const Eigen::MatrixXd lap =
            (cfg.use_affinity && st.has_affinity)
                ? laplacian_block(st.affinity, idx)
                : Eigen::MatrixXd::Zero(bsz, bsz);
        int skipped = 0;
        ad::Var igc = igc_loss(orig.instance_features,
                               self_view.instance_features, lap,
                               cfg.tau_inst, &skipped);
        row.igc = ad::value_of(igc);
        total = igc;
      }
      if (cfg.use_cgc) {
        CgcOut cgc = cgc_loss(orig.assignments, nbr_view.assignments, cfg.tau_clu);
        row.cgc = ad::value_of(cgc.contrast);
        row.entropy = ad::value_of(cgc.entropy);
        ad::Var contribution = ad::sub(cgc.contrast, cgc.entropy);
        total = total ? ad::add(total, contribution) : contribution;
      }
      if (!total) throw ParameterError("no loss term enabled");
      row.total = ad::value_of(total);
      if (!std::isfinite(row.total))
        throw NumericalError("non-finite training loss at epoch " +
                             std::to_string(st.epoch));
      adam_step(st, gradients(total, lifted, "step-1 loss"));
      st.history.push_back(row);
    }

    // ---- Step 2: supervised contrast on confident pseudo-labels ----
    if (cfg.use_pseudo && st.has_affinity && st.epoch >= cfg.warmup_epochs) {
      const EmbeddingSet full = encode(ds, st.params);
      const PseudoLabelSet pls =
          select_confident(full.assignments, st.affinity, cfg.pseudo_ratio);
      for (std::size_t start = 0; start < pls.indices.size();
           start += cfg.batch_size, ++step) {
        const std::size_t bsz =
            std::min<std::size_t>(cfg.batch_size, pls.indices.size() - start);
        if (bsz < 2 && pls.indices.size() > 1) continue;  // degenerate tail
        if (pls.indices.size() < 2) break;
        std::vector<int> idx(pls.indices.begin() + start,
                             pls.indices.begin() + start + bsz);
        std::vector<int> lab(pls.labels.begin() + start,
                             pls.labels.begin() + start + bsz);
        const AugmentationSpec spec = resolve_strategy(cfg.aug, st.rng);
        std::vector<Graph> both;
        both.reserve(2 * bsz);
        for (int i : idx) both.push_back(ds.graphs[i]);
        for (int i : idx) both.push_back(augment(ds.graphs[i], spec, st.rng));
        std::vector<const Graph*> ptrs;
        for (const auto& g : both) ptrs.push_back(&g);
        const auto lifted = lift_params(st.params);
        const auto batch =
            GraphBatch::from_graphs(ptrs, st.params.config.feature_dim);
        const ForwardOut out = forward(batch, st.params.config, lifted);
        std::vector<int> labels2(lab);
        labels2.insert(labels2.end(), lab.begin(), lab.end());
        try {
          ad::Var sup = supcon_loss(out.instance_features, labels2, cfg.tau_inst);
          LossHistoryRow row;
          row.epoch = st.epoch;
          row.step = step;
          row.sup = ad::value_of(sup);
          row.total = row.sup;
          if (!std::isfinite(row.total))
            throw NumericalError("non-finite supervised loss at epoch " +
                                 std::to_string(st.epoch));
          adam_step(st, gradients(sup, lifted, "step-2 loss"));
          st.history.push_back(row);
        } catch (const DegenerateBatchError&) {
          continue;  // skip with no update
        }
      }
    }

    // ---- refine the affinity graph ----
    if (cfg.use_affinity) rebuild_affinity(st, ds);
  }
}

TrainResult train(const GraphDataset& ds, const TrainConfig& cfg) {
  TrainResult res;
  res.state = init_state(ds, cfg);
  train_epochs(res.state, ds, cfg.epochs);
  res.assignments = assign_clusters(res.state, ds);
  return res;
}

std::vector<int> assign_clusters(const TrainState& state, const GraphDataset& ds) {
  const EmbeddingSet full = encode(ds, state.params);
  std::vector<int> out(ds.size());
  for (int i = 0; i < ds.size(); ++i) {
    Eigen::Index arg = 0;
    full.assignments.row(i).maxCoeff(&arg);
    out[i] = static_cast<int>(arg);
  }
  return out;
}

MetricsReport evaluate(const TrainState& state, const GraphDataset& ds) {
  if (!ds.has_labels())
    throw ParameterError("evaluate requires ground-truth labels");
  return evaluate_clustering(assign_clusters(state, ds), ds.labels());
}

void write_loss_csv(const std::vector<LossHistoryRow>& history,
                    std::ostream& os) {
  os << "epoch,step,igc,cgc,entropy,sup,total\n";
  os.precision(17);
  for (const auto& r : history)
    os << r.epoch << "," << r.step << "," << r.igc << "," << r.cgc << ","
       << r.entropy << "," << r.sup << "," << r.total << "\n";
}

// ---- checkpointing ----

namespace {
constexpr char kMagic[9] = "GLCCCKPT";
constexpr std::uint32_t kVersion = 1;

void write_string(std::ostream& os, const std::string& s) {
  const std::uint64_t len = s.size();
  os.write(reinterpret_cast<const char*>(&len), 8);
  os.write(s.data(), static_cast<std::streamsize>(len));
}

std::string read_string(std::istream& is) {
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), 8);
  if (!is || len > (1ull << 32)) throw FormatError("corrupt checkpoint string");
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (!is) throw FormatError("truncated checkpoint");
  return s;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  const std::int64_t r = m.rows(), c = m.cols();
  os.write(reinterpret_cast<const char*>(&r), 8);
  os.write(reinterpret_cast<const char*>(&c), 8);
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Eigen::MatrixXd read_matrix(std::istream& is) {
  std::int64_t r = 0, c = 0;
  is.read(reinterpret_cast<char*>(&r), 8);
  is.read(reinterpret_cast<char*>(&c), 8);
  if (!is || r < 0 || c < 0 || r * c > (1ll << 28))
    throw FormatError("corrupt checkpoint matrix header");
  Eigen::MatrixXd m(r, c);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!is) throw FormatError("truncated checkpoint");
  return m;
}
}  // namespace

void save_checkpoint(const TrainState& st, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 8);
  os.write(reinterpret_cast<const char*>(&kVersion), 4);
  write_string(os, st.config.to_json());
  {
    std::ostringstream ps;
    save_params(st.params, ps);
    write_string(os, ps.str());
  }
  const std::uint64_t nt = st.adam_m.size();
  os.write(reinterpret_cast<const char*>(&nt), 8);
  for (const auto& m : st.adam_m) write_matrix(os, m);
  for (const auto& m : st.adam_v) write_matrix(os, m);
  os.write(reinterpret_cast<const char*>(&st.adam_t), 8);
  const std::int32_t epoch = st.epoch;
  os.write(reinterpret_cast<const char*>(&epoch), 4);
  const std::uint8_t has_aff = st.has_affinity ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&has_aff), 1);
  if (st.has_affinity) {
    const std::int64_t n = st.affinity.size();
    const std::int64_t nnz = st.affinity.a.nonZeros();
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(reinterpret_cast<const char*>(&nnz), 8);
    os.write(reinterpret_cast<const char*>(&st.affinity.k), 4);
    os.write(reinterpret_cast<const char*>(&st.affinity.tau), 8);
    os.write(reinterpret_cast<const char*>(&st.affinity.epoch_built), 4);
    for (int col = 0; col < st.affinity.a.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(st.affinity.a, col);
           it; ++it) {
        const std::int32_t i = static_cast<std::int32_t>(it.row());
        const std::int32_t j = static_cast<std::int32_t>(it.col());
        const double v = it.value();
        os.write(reinterpret_cast<const char*>(&i), 4);
        os.write(reinterpret_cast<const char*>(&j), 4);
        os.write(reinterpret_cast<const char*>(&v), 8);
      }
  }
  {
    std::ostringstream rs;
    rs << st.rng;
    write_string(os, rs.str());
  }
  const std::uint64_t nh = st.history.size();
  os.write(reinterpret_cast<const char*>(&nh), 8);
  for (const auto& r : st.history)
    os.write(reinterpret_cast<const char*>(&r), sizeof(LossHistoryRow));
}

TrainState load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint: " + path);
  char magic[9] = {0};
  is.read(magic, 8);
  if (!is || std::string(magic) != kMagic)
    throw FormatError("not a GLCC checkpoint: " + path);
  std::uint32_t version = 0;
  is.read(reinterpret_cast<char*>(&version), 4);
  if (version != kVersion)
    throw FormatError("checkpoint version mismatch: " + std::to_string(version));
  TrainState st;
  st.config = TrainConfig::from_json(read_string(is));
  {
    std::istringstream ps(read_string(is));
    st.params = load_params(ps);
  }
  std::uint64_t nt = 0;
  is.read(reinterpret_cast<char*>(&nt), 8);
  if (!is || nt != st.params.count()) throw FormatError("corrupt checkpoint");
  st.adam_m.resize(nt);
  st.adam_v.resize(nt);
  for (auto& m : st.adam_m) m = read_matrix(is);
  for (auto& m : st.adam_v) m = read_matrix(is);
  is.read(reinterpret_cast<char*>(&st.adam_t), 8);
  std::int32_t epoch = 0;
  is.read(reinterpret_cast<char*>(&epoch), 4);
  st.epoch = epoch;
  std::uint8_t has_aff = 0;
  is.read(reinterpret_cast<char*>(&has_aff), 1);
  st.has_affinity = has_aff != 0;
  if (st.has_affinity) {
    std::int64_t n = 0, nnz = 0;
    is.read(reinterpret_cast<char*>(&n), 8);
    is.read(reinterpret_cast<char*>(&nnz), 8);
    is.read(reinterpret_cast<char*>(&st.affinity.k), 4);
    is.read(reinterpret_cast<char*>(&st.affinity.tau), 8);
    is.read(reinterpret_cast<char*>(&st.affinity.epoch_built), 4);
    if (!is || n < 0 || nnz < 0 || nnz > (1ll << 28))
      throw FormatError("corrupt checkpoint affinity header");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(nnz);
    for (std::int64_t t = 0; t < nnz; ++t) {
      std::int32_t i = 0, j = 0;
      double v = 0;
      is.read(reinterpret_cast<char*>(&i), 4);
      is.read(reinterpret_cast<char*>(&j), 4);
      is.read(reinterpret_cast<char*>(&v), 8);
      trips.emplace_back(i, j, v);
    }
    if (!is) throw FormatError("truncated checkpoint affinity");
    st.affinity.a.resize(n, n);
    st.affinity.a.setFromTriplets(trips.begin(), trips.end());
    st.affinity.degree = st.affinity.a * Eigen::VectorXd::Ones(n);
  }
  {
    std::istringstream rs(read_string(is));
    rs >> st.rng;
  }
  std::uint64_t nh = 0;
  is.read(reinterpret_cast<char*>(&nh), 8);
  if (!is || nh > (1ull << 28)) throw FormatError("corrupt checkpoint history");
  st.history.resize(nh);
  for (auto& r : st.history)
    is.read(reinterpret_cast<char*>(&r), sizeof(LossHistoryRow));
  if (!is) throw FormatError("truncated checkpoint");
  return st;
}

}  // namespace glcc
