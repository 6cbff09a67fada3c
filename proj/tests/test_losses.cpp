#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "glcc/affinity.hpp"
#include "glcc/augment.hpp"
#include "glcc/encoder.hpp"
#include "glcc/errors.hpp"
#include "glcc/losses.hpp"
#include "glcc/synthetic.hpp"

using namespace glcc;

namespace {

Eigen::MatrixXd angles_to_unit(const std::vector<double>& degrees) {
  Eigen::MatrixXd m(degrees.size(), 2);
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    const double r = degrees[i] * M_PI / 180.0;
    m(i, 0) = std::cos(r);
    m(i, 1) = std::sin(r);
  }
  return m;
}

/// Independent scalar-loop evaluation of the instance-level loss contract:
/// positives are off-diagonal L_ij < 0 entries (weight -L_ij) plus the
/// self pair with weight 1 - L_ii; denominator adds the L_ij = 0 terms;
/// result is the mean of -log(num/den) over anchors with positives.
double igc_reference(const Eigen::MatrixXd& h, const Eigen::MatrixXd& hp,
                     const Eigen::MatrixXd& lap, double tau) {
  const int b = static_cast<int>(h.rows());
  double total = 0.0;
  int active = 0;
  for (int i = 0; i < b; ++i) {
    double num = 0.0, inter = 0.0, wsum = 0.0;
    for (int j = 0; j < b; ++j) {
      const double e = std::exp(h.row(i).dot(hp.row(j)) / tau);
      if (i == j) {
        const double w = 1.0 - lap(i, i);
        if (w > 0) {
          num += w * e;
          wsum += w;
        }
      } else if (lap(i, j) < 0) {
        num += -lap(i, j) * e;
        wsum += -lap(i, j);
      } else if (lap(i, j) == 0) {
        inter += e;
      }
    }
    if (wsum <= 0) continue;
    ++active;
    total += -std::log(num / (num + inter));
  }
  return total / active;
}

GraphDataset four_graphs(std::uint64_t seed) {
  std::vector<FamilySpec> fams{{2, 4, 6, 0.5, Eigen::Vector3d(1, 0, 0), 0.3},
                               {2, 4, 6, 0.5, Eigen::Vector3d(0, 1, 0), 0.3}};
  return generate_synthetic_mixture(fams, seed);
}

EncoderConfig tiny_config() {
  EncoderConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_dim = 6;
  cfg.feature_dim = 3;
  cfg.num_clusters = 2;
  cfg.instance_head_dim = 5;
  return cfg;
}

/// Max relative error between analytic parameter gradients of `loss_fn`
/// and central finite differences with step 1e-5, float64 throughout.
double param_gradcheck(
    const std::function<ad::Var(const std::vector<ad::Var>&)>& loss_fn,
    EncoderParams params) {
  auto lifted = lift_params(params);
  ad::Var loss = loss_fn(lifted);
  const auto grads = gradients(loss, lifted);
  const double step = 1e-5;
  double max_rel = 0.0;
  for (std::size_t t = 0; t < params.count(); ++t) {
    for (Eigen::Index i = 0; i < params.tensors[t].rows(); ++i)
      for (Eigen::Index j = 0; j < params.tensors[t].cols(); ++j) {
        auto eval_at = [&](double delta) {
          EncoderParams p2 = params;
          p2.tensors[t](i, j) += delta;
          return ad::value_of(loss_fn(lift_params(p2)));
        };
        const double fd = (eval_at(step) - eval_at(-step)) / (2.0 * step);
        const double an = grads[t](i, j);
        const double rel = std::abs(an - fd) /
                           std::max({1.0, std::abs(an), std::abs(fd)});
        max_rel = std::max(max_rel, rel);
      }
  }
  return max_rel;
}

}  // namespace

TEST_CASE("igc_loss matches the scalar reference on a hand-set Laplacian") {
  Eigen::MatrixXd lap(3, 3);
  lap << 0.5, -0.5, 0.0, -0.5, 0.5, 0.0, 0.0, 0.0, 1.0;
  const Eigen::MatrixXd h = angles_to_unit({0.0, 0.0, 90.0});
  int skipped = 0;
  ad::Var loss = igc_loss(ad::leaf(h), ad::leaf(h), lap, 1.0, &skipped);
  CHECK(skipped == 1);  // third anchor has no positive (1 - L_33 = 0)
  CHECK(ad::value_of(loss) ==
        doctest::Approx(igc_reference(h, h, lap, 1.0)).epsilon(1e-12));
}

TEST_CASE("identical features with every pair an equal-weight positive -> 0") {
  const int b = 4;
  const Eigen::MatrixXd h = angles_to_unit({30.0, 30.0, 30.0, 30.0});
  // L with all off-diagonal entries negative and equal; no inter terms
  Eigen::MatrixXd lap = Eigen::MatrixXd::Constant(b, b, -0.25);
  lap.diagonal().setConstant(0.25);
  ad::Var loss = igc_loss(ad::leaf(h), ad::leaf(h), lap, 1.0);
  CHECK(ad::value_of(loss) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("igc_loss invariant under a consistent batch permutation") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd h = angles_to_unit({10, 80, 200, 340});
  const Eigen::MatrixXd hp = angles_to_unit({15, 75, 190, 350});
  Eigen::MatrixXd feats = angles_to_unit({0, 45, 120, 300});
  const auto ag = build_affinity(feats, 2, 0.5);
  const Eigen::MatrixXd lap = laplacian_block(ag, {0, 1, 2, 3});

  const double base = ad::value_of(igc_loss(ad::leaf(h), ad::leaf(hp), lap, 0.5));
  const std::vector<int> perm{2, 0, 3, 1};
  Eigen::MatrixXd h2(4, 2), hp2(4, 2), lap2(4, 4);
  for (int i = 0; i < 4; ++i) {
    h2.row(i) = h.row(perm[i]);
    hp2.row(i) = hp.row(perm[i]);
    for (int j = 0; j < 4; ++j) lap2(i, j) = lap(perm[i], perm[j]);
  }
  const double permuted =
      ad::value_of(igc_loss(ad::leaf(h2), ad::leaf(hp2), lap2, 0.5));
  CHECK(permuted == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("igc_loss error paths") {
  const Eigen::MatrixXd h = angles_to_unit({0, 90});
  CHECK_THROWS_AS(
      igc_loss(ad::leaf(h), ad::leaf(h), Eigen::MatrixXd::Zero(2, 2), 0.0),
      ParameterError);
  // every anchor skipped: diagonal L_ii = 1 and no negative entries
  CHECK_THROWS_AS(
      igc_loss(ad::leaf(h), ad::leaf(h), Eigen::MatrixXd::Identity(2, 2), 1.0),
      DegenerateBatchError);
}

TEST_CASE("cgc_loss hand example: one-hot balanced assignments") {
  Eigen::MatrixXd z(2, 2);
  z << 1, 0, 0, 1;
  const CgcOut out = cgc_loss(ad::leaf(z), ad::leaf(z), 1.0);
  CHECK(ad::value_of(out.contrast) ==
        doctest::Approx(-std::log(std::exp(1.0) / (std::exp(1.0) + 1.0)))
            .epsilon(1e-10));
  CHECK(ad::value_of(out.entropy) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const double contribution =
      ad::value_of(combined_loss(ad::scalar(0.0), out.contrast, out.entropy));
  CHECK(contribution == doctest::Approx(0.3133 - 0.6931).epsilon(1e-3));
}

TEST_CASE("cgc entropy edge cases") {
  SUBCASE("all mass in one cluster -> entropy 0") {
    Eigen::MatrixXd z(3, 2);
    z << 1, 0, 1, 0, 1, 0;
    const CgcOut out = cgc_loss(ad::leaf(z), ad::leaf(z), 1.0);
    CHECK(ad::value_of(out.entropy) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("uniform assignments -> entropy = ln K") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Constant(5, 4, 0.25);
    const CgcOut out = cgc_loss(ad::leaf(z), ad::leaf(z), 1.0);
    CHECK(ad::value_of(out.entropy) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  SUBCASE("K < 2 rejected") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Ones(3, 1);
    CHECK_THROWS_AS(cgc_loss(ad::leaf(z), ad::leaf(z), 1.0), ParameterError);
  }
}

TEST_CASE("cgc contrast is non-negative on random assignments") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXd z(6, 3), zp(6, 3);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 3; ++j) {
        z(i, j) = u(rng);
        zp(i, j) = u(rng);
      }
      z.row(i) /= z.row(i).sum();
      zp.row(i) /= zp.row(i).sum();
    }
    const CgcOut out = cgc_loss(ad::leaf(z), ad::leaf(zp), 1.0);
    CHECK(ad::value_of(out.contrast) >= 0.0);
    CHECK(ad::value_of(out.entropy) >= 0.0);
    CHECK(ad::value_of(out.entropy) <= std::log(3.0) + 1e-12);
  }
}

TEST_CASE("combined_loss is plain arithmetic") {
  CHECK(ad::value_of(combined_loss(ad::scalar(0), ad::scalar(0), ad::scalar(0))) ==
        0.0);
  CHECK(ad::value_of(combined_loss(ad::scalar(1.0), ad::scalar(0.3133),
                                   ad::scalar(0.6931))) ==
        doctest::Approx(0.6202).epsilon(1e-12));
}

TEST_CASE("supcon hand examples") {
  SUBCASE("four identical rows, one label -> log 3 per anchor") {
    Eigen::MatrixXd f = angles_to_unit({45, 45, 45, 45});
    ad::Var loss = supcon_loss(ad::leaf(f), {0, 0, 0, 0}, 1.0);
    CHECK(ad::value_of(loss) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  }
  SUBCASE("two samples, distinct labels: InfoNCE on pairs, brute force") {
    const double tau = 0.5;
    const Eigen::MatrixXd f = angles_to_unit({0, 90, 10, 100});
    const std::vector<int> labels{0, 1, 0, 1};  // rows 2,3 are the augmentations
    ad::Var loss = supcon_loss(ad::leaf(f), labels, tau);
    double expect = 0.0;
    for (int i = 0; i < 4; ++i) {
      const int pos = (i + 2) % 4;  // the only same-label row
      double den = 0.0;
      for (int a = 0; a < 4; ++a)
        if (a != i) den += std::exp(f.row(i).dot(f.row(a)) / tau);
      expect += -std::log(std::exp(f.row(i).dot(f.row(pos)) / tau) / den);
    }
    expect /= 4.0;
    CHECK(ad::value_of(loss) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("supcon is non-negative") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> deg(0.0, 360.0);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd f = angles_to_unit({deg(rng), deg(rng), deg(rng), deg(rng)});
      CHECK(ad::value_of(supcon_loss(ad::leaf(f), {0, 1, 0, 1}, 0.5)) >= 0.0);
    }
  }
  SUBCASE("fewer than 2 rows rejected") {
    Eigen::MatrixXd f = angles_to_unit({0});
    CHECK_THROWS_AS(supcon_loss(ad::leaf(f), {0}, 1.0), DegenerateBatchError);
  }
}

TEST_CASE("gradients through the encoder match finite differences") {
  const auto ds = four_graphs(21);
  const auto cfg = tiny_config();
  const auto params = EncoderParams::init(cfg, 5);
  std::vector<const Graph*> orig;
  for (const auto& g : ds.graphs) orig.push_back(&g);
  std::mt19937_64 rng(9);
  std::vector<Graph> aug_graphs;
  for (const auto& g : ds.graphs)
    aug_graphs.push_back(augment(g, {AugmentStrategy::kAttrMask, 0.3}, rng));
  std::vector<const Graph*> augp;
  for (const auto& g : aug_graphs) augp.push_back(&g);
  const auto ob = GraphBatch::from_graphs(orig, cfg.feature_dim);
  const auto ab = GraphBatch::from_graphs(augp, cfg.feature_dim);

  // batch Laplacian from a fixed affinity over arbitrary unit features
  const Eigen::MatrixXd feats = angles_to_unit({0, 30, 200, 250});
  const auto ag = build_affinity(feats, 2, 0.5);
  const Eigen::MatrixXd lap = laplacian_block(ag, {0, 1, 2, 3});

  SUBCASE("instance-level loss") {
    const double err = param_gradcheck(
        [&](const std::vector<ad::Var>& p) {
          const auto o = forward(ob, cfg, p);
          const auto a = forward(ab, cfg, p);
          return igc_loss(o.instance_features, a.instance_features, lap, 0.1);
        },
        params);
    CHECK(err < 1e-4);
  }
  SUBCASE("cluster-level loss plus entropy") {
    const double err = param_gradcheck(
        [&](const std::vector<ad::Var>& p) {
          const auto o = forward(ob, cfg, p);
          const auto a = forward(ab, cfg, p);
          const CgcOut c = cgc_loss(o.assignments, a.assignments, 1.0);
          return ad::sub(c.contrast, c.entropy);
        },
        params);
    CHECK(err < 1e-4);
  }
  SUBCASE("supervised contrastive loss") {
    std::vector<const Graph*> both = orig;
    both.insert(both.end(), augp.begin(), augp.end());
    const auto bb = GraphBatch::from_graphs(both, cfg.feature_dim);
    const double err = param_gradcheck(
        [&](const std::vector<ad::Var>& p) {
          const auto o = forward(bb, cfg, p);
          return supcon_loss(o.instance_features, {0, 0, 1, 1, 0, 0, 1, 1}, 0.1);
        },
        params);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("one small gradient step decreases each loss") {
  const auto ds = four_graphs(33);
  const auto cfg = tiny_config();
  std::vector<const Graph*> orig;
  for (const auto& g : ds.graphs) orig.push_back(&g);
  std::mt19937_64 rng(2);
  std::vector<Graph> aug_graphs;
  for (const auto& g : ds.graphs)
    aug_graphs.push_back(augment(g, {AugmentStrategy::kEdgePerturb, 0.2}, rng));
  std::vector<const Graph*> augp;
  for (const auto& g : aug_graphs) augp.push_back(&g);
  const auto ob = GraphBatch::from_graphs(orig, cfg.feature_dim);
  const auto ab = GraphBatch::from_graphs(augp, cfg.feature_dim);
  const Eigen::MatrixXd feats = angles_to_unit({5, 60, 180, 290});
  const auto ag = build_affinity(feats, 2, 0.5);
  const Eigen::MatrixXd lap = laplacian_block(ag, {0, 1, 2, 3});

  auto losses = [&](const std::vector<ad::Var>& p) {
    const auto o = forward(ob, cfg, p);
    const auto a = forward(ab, cfg, p);
    std::vector<ad::Var> out;
    out.push_back(igc_loss(o.instance_features, a.instance_features, lap, 0.1));
    const CgcOut c = cgc_loss(o.assignments, a.assignments, 1.0);
    out.push_back(ad::sub(c.contrast, c.entropy));
    out.push_back(supcon_loss(o.instance_features, {0, 0, 1, 1}, 0.1));
    return out;
  };

  for (int which = 0; which < 3; ++which) {
    EncoderParams params = EncoderParams::init(cfg, 40 + which);
    auto lifted = lift_params(params);
    ad::Var loss = losses(lifted)[which];
    const double before = ad::value_of(loss);
    const auto grads = gradients(loss, lifted);
    EncoderParams stepped = params;
    for (std::size_t t = 0; t < grads.size(); ++t)
      stepped.tensors[t] -= 1e-4 * grads[t];
    const double after = ad::value_of(losses(lift_params(stepped))[which]);
    CHECK(after < before);
  }
}
