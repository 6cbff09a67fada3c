#pragma once

#include <Eigen/Dense>
#include <vector>

#include "glcc/autodiff.hpp"

namespace glcc {

struct LossReport {
  double igc = 0.0;
  double cgc = 0.0;      // contrastive part of the cluster loss
  double entropy = 0.0;  // H(Z), in [0, ln K]
  double sup = 0.0;
  double total = 0.0;
  int skipped_anchors = 0;
};

/// Instance-level contrastive loss. `lap_block` is the affinity Laplacian
/// restricted to the batch (pass a zero matrix when no affinity graph is
/// in play; the loss then reduces to plain two-view InfoNCE).
///
/// Positives of anchor i: off-diagonal j with L_ij < 0, weighted -L_ij,
/// plus the self pair (i, i') with weight 1 - L_ii. The denominator is the
/// positive sum plus the L_ij = 0 terms, so each ratio lies in (0, 1].
/// Anchors with an empty positive set are skipped and counted.
ad::Var igc_loss(ad::Var h, ad::Var hp, const Eigen::MatrixXd& lap_block,
                 double tau, int* skipped_anchors = nullptr);

struct CgcOut {
  ad::Var contrast;
  ad::Var entropy;
};

/// Cluster-level loss over column vectors of the two assignment matrices
/// (columns L2-normalized before the inner products), plus the entropy of
/// the cluster marginal of z. The loss contribution is contrast - entropy.
CgcOut cgc_loss(ad::Var z, ad::Var zp, double tau);

/// L_IGC + (L_CGC - H(Z)).
ad::Var combined_loss(ad::Var igc, ad::Var cgc_contrast, ad::Var entropy);

/// Supervised contrastive loss over 2*floor(rN) rows (each selected sample
/// contributes its original and augmented feature, same label). Anchors
/// without positives are skipped.
ad::Var supcon_loss(ad::Var features, const std::vector<int>& labels,
                    double tau);

}  // namespace glcc
