#include "glcc/losses.hpp"

#include <cmath>

#include "glcc/errors.hpp"

namespace glcc {

ad::Var igc_loss(ad::Var h, ad::Var hp, const Eigen::MatrixXd& lap_block,
                 double tau, int* skipped_anchors) {
  if (tau <= 0.0) throw ParameterError("igc_loss: tau must be positive");
  const int b = static_cast<int>(h->value.rows());
  if (hp->value.rows() != b || hp->value.cols() != h->value.cols())
    throw ShapeError("igc_loss: H and H' shapes differ");
  if (lap_block.rows() != b || lap_block.cols() != b)
    throw ShapeError("igc_loss: Laplacian block does not match batch size");

  Eigen::MatrixXd w_pos = Eigen::MatrixXd::Zero(b, b);
  Eigen::MatrixXd m_inter = Eigen::MatrixXd::Zero(b, b);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) {
      if (i == j) {
        // self pair: weight A_ii / d_i = 1 - L_ii
        const double w = 1.0 - lap_block(i, i);
        if (w > 0.0) w_pos(i, j) = w;
      } else if (lap_block(i, j) < 0.0) {
        w_pos(i, j) = -lap_block(i, j);
      } else if (lap_block(i, j) == 0.0) {
        m_inter(i, j) = 1.0;
      }
    }

  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(b, 1);
  int active = 0;
  for (int i = 0; i < b; ++i)
    if (w_pos.row(i).sum() > 0.0) {
      mask(i, 0) = 1.0;
      ++active;
    }
  if (skipped_anchors) *skipped_anchors = b - active;
  if (active == 0)
    throw DegenerateBatchError("igc_loss: every anchor has an empty positive set");

  ad::Var sim = ad::matmul(std::move(h), ad::transpose(std::move(hp)));
  ad::Var e = ad::exp_(ad::scale(sim, 1.0 / tau));
  ad::Var num = ad::rowwise_sum(ad::cmul_const(e, w_pos));
  ad::Var den = ad::add(num, ad::rowwise_sum(ad::cmul_const(e, m_inter)));
  ad::Var lg = ad::sub(ad::log_(num), ad::log_(den));
  return ad::scale(ad::sum_all(ad::cmul_const(lg, mask)), -1.0 / active);
}

CgcOut cgc_loss(ad::Var z, ad::Var zp, double tau) {
  if (tau <= 0.0) throw ParameterError("cgc_loss: tau must be positive");
  const int k = static_cast<int>(z->value.cols());
  const int n = static_cast<int>(z->value.rows());
  if (k < 2) throw ParameterError("cgc_loss: K must be >= 2");
  if (zp->value.rows() != n || zp->value.cols() != k)
    throw ShapeError("cgc_loss: Z and Z' shapes differ");

  ad::Var u = ad::col_l2_normalize(z);
  ad::Var v = ad::col_l2_normalize(std::move(zp));
  ad::Var sim = ad::matmul(ad::transpose(u), v);  // K x K
  ad::Var e = ad::exp_(ad::scale(sim, 1.0 / tau));
  ad::Var num = ad::rowwise_sum(
      ad::cmul_const(e, Eigen::MatrixXd::Identity(k, k)));
  ad::Var den = ad::rowwise_sum(e);
  CgcOut out;
  out.contrast = ad::scale(
      ad::sum_all(ad::sub(ad::log_(num), ad::log_(den))), -1.0 / k);

  // entropy of the cluster marginal, 0*log0 := 0
  ad::Var p = ad::scale(ad::colwise_sum(std::move(z)), 1.0 / n);
  out.entropy = ad::scale(ad::sum_all(ad::cmul(p, ad::log_(p))), -1.0);
  return out;
}

ad::Var combined_loss(ad::Var igc, ad::Var cgc_contrast, ad::Var entropy) {
  return ad::add(std::move(igc),
                 ad::sub(std::move(cgc_contrast), std::move(entropy)));
}

ad::Var supcon_loss(ad::Var features, const std::vector<int>& labels,
                    double tau) {
  if (tau <= 0.0) throw ParameterError("supcon_loss: tau must be positive");
  const int m = static_cast<int>(features->value.rows());
  if (m < 2 || static_cast<int>(labels.size()) != m)
    throw DegenerateBatchError("supcon_loss: need at least 2 labeled rows");

  Eigen::MatrixXd off_diag = Eigen::MatrixXd::Ones(m, m);
  Eigen::MatrixXd q_weights = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(m, 1);
  int active = 0;
  for (int i = 0; i < m; ++i) {
    off_diag(i, i) = 0.0;
    int qi = 0;
    for (int j = 0; j < m; ++j)
      if (j != i && labels[j] == labels[i]) ++qi;
    if (qi == 0) continue;  // anchor without positives is skipped
    mask(i, 0) = 1.0;
    ++active;
    for (int j = 0; j < m; ++j)
      if (j != i && labels[j] == labels[i]) q_weights(i, j) = 1.0 / qi;
  }
  if (active == 0)
    throw DegenerateBatchError("supcon_loss: no anchor has a positive");

  ad::Var sim = ad::scale(
      ad::matmul(features, ad::transpose(features)), 1.0 / tau);
  ad::Var e = ad::cmul_const(ad::exp_(sim), off_diag);
  ad::Var logden = ad::log_(ad::rowwise_sum(e));
  ad::Var pos = ad::rowwise_sum(ad::cmul_const(sim, q_weights));
  ad::Var per_anchor = ad::cmul_const(ad::sub(logden, pos), mask);
  // averaged over anchors so the scale is batch-size independent
  return ad::scale(ad::sum_all(per_anchor), 1.0 / active);
}

}  // namespace glcc
