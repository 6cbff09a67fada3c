#include "glcc/pseudo_label.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glcc/errors.hpp"

namespace glcc {

Eigen::VectorXd neighbor_average(int i, const Eigen::MatrixXd& z_full,
                                 const AffinityGraph& ag) {
  Eigen::VectorXd raw = z_full.row(i).transpose();
  for (const auto& [u, w] : normalized_weights(ag, i))
    raw += w * z_full.row(u).transpose();
  return raw / raw.sum();
}

namespace {
double shannon_entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (int k = 0; k < p.size(); ++k)
    if (p(k) > 0.0) h -= p(k) * std::log(p(k));
  return h;
}
}  // namespace

PseudoLabelSet select_confident(const Eigen::MatrixXd& z_full,
                                const AffinityGraph& ag, double r) {
  if (r <= 0.0 || r > 1.0) throw ParameterError("pseudo-label ratio r must be in (0, 1]");
  const int n = static_cast<int>(z_full.rows());
  const int k = static_cast<int>(z_full.cols());
  const int count = static_cast<int>(r * n);

  PseudoLabelSet out;
  out.ratio = r;
  if (count == 0) return out;

  Eigen::MatrixXd averaged(n, k);
  std::vector<double> ent(n);
  for (int i = 0; i < n; ++i) {
    averaged.row(i) = neighbor_average(i, z_full, ag).transpose();
    ent[i] = shannon_entropy(averaged.row(i).transpose());
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ent[a] < ent[b]; });
  order.resize(count);

  out.indices = order;
  out.p_ave.resize(count, k);
  for (int s = 0; s < count; ++s) {
    const int i = order[s];
    out.p_ave.row(s) = averaged.row(i);
    out.entropies.push_back(ent[i]);
    Eigen::Index arg = 0;
    averaged.row(i).maxCoeff(&arg);  // Eigen takes the first (lowest) maximizer
    out.labels.push_back(static_cast<int>(arg));
  }
  return out;
}

}  // namespace glcc
