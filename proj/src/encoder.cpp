#include "glcc/encoder.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "glcc/errors.hpp"

namespace glcc {
namespace {

// tensor layout offsets past the GIN layers
enum Tail { kWp = 0, kBp, kWi1, kBi1, kWi2, kBi2, kWc1, kBc1, kWc2, kBc2, kTailCount };

Eigen::MatrixXd uniform_init(int rows, int cols, int fan_in,
                             std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
  std::uniform_real_distribution<double> u(-bound, bound);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

EncoderParams EncoderParams::init(const EncoderConfig& cfg, std::uint64_t seed) {
  if (cfg.num_layers < 1) throw ParameterError("num_layers must be >= 1");
  if (cfg.hidden_dim < 1) throw ParameterError("hidden_dim must be >= 1");
  std::mt19937_64 rng(seed);
  EncoderParams p;
  p.config = cfg;
  int in = cfg.feature_dim;
  for (int l = 0; l < cfg.num_layers; ++l) {
    p.tensors.push_back(uniform_init(in, cfg.hidden_dim, in, rng));
    p.tensors.push_back(uniform_init(1, cfg.hidden_dim, in, rng));
    p.tensors.push_back(uniform_init(cfg.hidden_dim, cfg.hidden_dim, cfg.hidden_dim, rng));
    p.tensors.push_back(uniform_init(1, cfg.hidden_dim, cfg.hidden_dim, rng));
    in = cfg.hidden_dim;
  }
  const int cat = cfg.num_layers * cfg.hidden_dim;
  p.tensors.push_back(uniform_init(cat, cfg.hidden_dim, cat, rng));          // Wp
  p.tensors.push_back(uniform_init(1, cfg.hidden_dim, cat, rng));            // bp
  p.tensors.push_back(uniform_init(cfg.hidden_dim, cfg.hidden_dim, cfg.hidden_dim, rng));
  p.tensors.push_back(uniform_init(1, cfg.hidden_dim, cfg.hidden_dim, rng));
  p.tensors.push_back(uniform_init(cfg.hidden_dim, cfg.instance_head_dim, cfg.hidden_dim, rng));
  p.tensors.push_back(uniform_init(1, cfg.instance_head_dim, cfg.hidden_dim, rng));
  p.tensors.push_back(uniform_init(cfg.hidden_dim, cfg.hidden_dim, cfg.hidden_dim, rng));
  p.tensors.push_back(uniform_init(1, cfg.hidden_dim, cfg.hidden_dim, rng));
  p.tensors.push_back(uniform_init(cfg.hidden_dim, cfg.num_clusters, cfg.hidden_dim, rng));
  p.tensors.push_back(uniform_init(1, cfg.num_clusters, cfg.hidden_dim, rng));
  return p;
}

GraphBatch GraphBatch::from_graphs(const std::vector<const Graph*>& graphs,
                                   int feature_dim) {
  GraphBatch b;
  b.size = static_cast<int>(graphs.size());
  int total = 0;
  for (int gi = 0; gi < b.size; ++gi) {
    const Graph& g = *graphs[gi];
    if (g.feature_dim() != feature_dim)
      throw ShapeError("graph " + std::to_string(gi) + " has feature dim " +
                       std::to_string(g.feature_dim()) + ", expected " +
                       std::to_string(feature_dim));
    total += g.node_count;
  }
  b.x.resize(total, feature_dim);
  std::vector<Eigen::Triplet<double>> agg_t, pool_t;
  int off = 0;
  for (int gi = 0; gi < b.size; ++gi) {
    const Graph& g = *graphs[gi];
    b.x.middleRows(off, g.node_count) = g.node_features;
    for (int v = 0; v < g.node_count; ++v) {
      agg_t.emplace_back(off + v, off + v, 1.0);  // (1+eps) self term, eps=0
      pool_t.emplace_back(gi, off + v, 1.0);
    }
    for (auto [u, v] : g.edges) {
      agg_t.emplace_back(off + u, off + v, 1.0);
      agg_t.emplace_back(off + v, off + u, 1.0);
    }
    off += g.node_count;
  }
  b.agg.resize(total, total);
  b.agg.setFromTriplets(agg_t.begin(), agg_t.end());
  b.pool.resize(b.size, total);
  b.pool.setFromTriplets(pool_t.begin(), pool_t.end());
  return b;
}

std::vector<ad::Var> lift_params(const EncoderParams& params) {
  std::vector<ad::Var> out;
  out.reserve(params.tensors.size());
  for (const auto& t : params.tensors) out.push_back(ad::leaf(t));
  return out;
}

ForwardOut forward(const GraphBatch& batch, const EncoderConfig& cfg,
                   const std::vector<ad::Var>& params) {
  auto linear = [&](ad::Var x, const ad::Var& w, const ad::Var& b) {
    return ad::add_rowvec(ad::matmul(std::move(x), w), b);
  };
  ad::Var h = ad::constant(batch.x);
  std::vector<ad::Var> readouts;
  for (int l = 0; l < cfg.num_layers; ++l) {
    ad::Var a = ad::sparse_premul(batch.agg, h);
    ad::Var t = ad::relu(linear(a, params[l * 4 + 0], params[l * 4 + 1]));
    h = ad::relu(linear(t, params[l * 4 + 2], params[l * 4 + 3]));
    readouts.push_back(ad::sparse_premul(batch.pool, h));
  }
  const int base = cfg.num_layers * 4;
  ad::Var cat = readouts.size() == 1 ? readouts[0] : ad::concat_cols(readouts);
  ForwardOut out;
  out.h = linear(cat, params[base + kWp], params[base + kBp]);
  ad::Var ih = ad::relu(linear(out.h, params[base + kWi1], params[base + kBi1]));
  out.instance_features =
      ad::row_l2_normalize(linear(ih, params[base + kWi2], params[base + kBi2]));
  ad::Var ch = ad::relu(linear(out.h, params[base + kWc1], params[base + kBc1]));
  out.assignments =
      ad::row_softmax(linear(ch, params[base + kWc2], params[base + kBc2]));
  return out;
}

EmbeddingSet encode(const std::vector<const Graph*>& batch,
                    const EncoderParams& params) {
  const auto b = GraphBatch::from_graphs(batch, params.config.feature_dim);
  const auto lifted = lift_params(params);
  const auto out = forward(b, params.config, lifted);
  return {out.h->value, out.instance_features->value, out.assignments->value};
}

EmbeddingSet encode(const GraphDataset& ds, const EncoderParams& params) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(ds.graphs.size());
  for (const auto& g : ds.graphs) ptrs.push_back(&g);
  return encode(ptrs, params);
}

std::vector<Eigen::MatrixXd> gradients(const ad::Var& loss,
                                       const std::vector<ad::Var>& params,
                                       const char* loss_name) {
  if (!std::isfinite(ad::value_of(loss)))
    throw NumericalError(std::string("non-finite value in ") + loss_name);
  ad::backward(loss);
  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(params.size());
  for (const auto& p : params) {
    p->ensure_grad();
    grads.push_back(p->grad);
  }
  return grads;
}

void save_params(const EncoderParams& p, std::ostream& os) {
  auto w32 = [&](int v) { os.write(reinterpret_cast<const char*>(&v), 4); };
  w32(p.config.num_layers);
  w32(p.config.hidden_dim);
  w32(p.config.feature_dim);
  w32(p.config.num_clusters);
  w32(p.config.instance_head_dim);
  w32(static_cast<int>(p.tensors.size()));
  for (const auto& t : p.tensors) {
    w32(static_cast<int>(t.rows()));
    w32(static_cast<int>(t.cols()));
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(sizeof(double) * t.size()));
  }
}

EncoderParams load_params(std::istream& is) {
  auto r32 = [&]() {
    int v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  EncoderParams p;
  p.config.num_layers = r32();
  p.config.hidden_dim = r32();
  p.config.feature_dim = r32();
  p.config.num_clusters = r32();
  p.config.instance_head_dim = r32();
  const int count = r32();
  if (!is || count < 0 || count > 1 << 20)
    throw FormatError("corrupt encoder parameter block");
  p.tensors.resize(count);
  for (auto& t : p.tensors) {
    const int rows = r32(), cols = r32();
    if (!is || rows < 0 || cols < 0 || rows * cols > 1 << 26)
      throw FormatError("corrupt encoder tensor header");
    t.resize(rows, cols);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(sizeof(double) * t.size()));
    if (!is) throw FormatError("truncated encoder tensor data");
  }
  return p;
}

}  // namespace glcc
