#include "glcc/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

#include "glcc/errors.hpp"

namespace glcc {

AffinityGraph build_affinity(const Eigen::MatrixXd& features, int k,
                             double tau) {
  const int n = static_cast<int>(features.rows());
  if (k < 1 || k >= n)
    throw ParameterError("neighbor count k must satisfy 1 <= k < N");
  if (tau <= 0.0) throw ParameterError("tau must be positive");
  for (int i = 0; i < n; ++i)
    if (std::abs(features.row(i).norm() - 1.0) > 1e-6)
      throw ParameterError("affinity features must have unit-norm rows (row " +
                           std::to_string(i) + ")");

  Eigen::MatrixXd gram = features * features.transpose();
  // canonical (upper-triangle) similarity so weights are exactly symmetric
  auto sim = [&](int i, int j) {
    return i <= j ? gram(i, j) : gram(j, i);
  };

  AffinityGraph ag;
  ag.k = k;
  ag.tau = tau;
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<std::vector<char>> chosen(n);  // per-row membership, for max-symmetrize
  std::vector<std::vector<int>> rows(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> cand;
    cand.reserve(n - 1);
    for (int j = 0; j < n; ++j)
      if (j != i) cand.push_back(j);
    // k-1 best non-self neighbors; ties broken by lower index
    const int take = k - 1;
    std::partial_sort(cand.begin(), cand.begin() + take, cand.end(),
                      [&](int x, int y) {
                        const double sx = sim(i, x), sy = sim(i, y);
                        return sx != sy ? sx > sy : x < y;
                      });
    cand.resize(take);
    cand.push_back(i);  // self-inclusion
    rows[i] = std::move(cand);
  }
  // union symmetrization: edge present if either endpoint selected it;
  // the weight exp(sim/tau) is already symmetric, so max == union
  std::vector<std::vector<int>> sym(n);
  for (int i = 0; i < n; ++i)
    for (int j : rows[i]) {
      sym[i].push_back(j);
      if (i != j) sym[j].push_back(i);
    }
  for (int i = 0; i < n; ++i) {
    auto& s = sym[i];
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (int j : s) trips.emplace_back(i, j, std::exp(sim(i, j) / tau));
  }
  ag.a.resize(n, n);
  ag.a.setFromTriplets(trips.begin(), trips.end());
  ag.degree = ag.a * Eigen::VectorXd::Ones(n);
  return ag;
}

LaplacianView laplacian(const AffinityGraph& ag) {
  const int n = ag.size();
  for (int i = 0; i < n; ++i)
    if (ag.degree(i) <= 0.0)
      throw NumericalError("zero degree in affinity graph at row " +
                           std::to_string(i));
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i)
    trips.emplace_back(i, i, 1.0 - ag.a.coeff(i, i) / ag.degree(i));
  for (int col = 0; col < ag.a.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(ag.a, col); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      if (i != j)
        trips.emplace_back(i, j,
                           -it.value() / std::sqrt(ag.degree(i) * ag.degree(j)));
    }
  LaplacianView lv;
  lv.l.resize(n, n);
  lv.l.setFromTriplets(trips.begin(), trips.end());
  return lv;
}

Eigen::MatrixXd laplacian_block(const AffinityGraph& ag,
                                const std::vector<int>& idx) {
  const int b = static_cast<int>(idx.size());
  Eigen::MatrixXd out(b, b);
  for (int bi = 0; bi < b; ++bi)
    for (int bj = 0; bj < b; ++bj) {
      const int i = idx[bi], j = idx[bj];
      const double a = ag.a.coeff(i, j);
      if (bi == bj) {
        out(bi, bj) = 1.0 - a / ag.degree(i);
      } else {
        out(bi, bj) =
            a == 0.0 ? 0.0 : -a / std::sqrt(ag.degree(i) * ag.degree(j));
      }
    }
  return out;
}

int sample_neighbor(const AffinityGraph& ag, int i, std::mt19937_64& rng) {
  std::vector<int> nbrs;
  std::vector<double> w;
  for (Eigen::SparseMatrix<double>::InnerIterator it(ag.a, i); it; ++it) {
    if (static_cast<int>(it.row()) == i) continue;
    nbrs.push_back(static_cast<int>(it.row()));
    w.push_back(it.value());
  }
  if (nbrs.empty()) return i;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::uniform_real_distribution<double> u(0.0, total);
  double t = u(rng), run = 0.0;
  for (std::size_t j = 0; j < nbrs.size(); ++j) {
    run += w[j];
    if (run >= t) return nbrs[j];
  }
  return nbrs.back();
}

std::map<int, double> normalized_weights(const AffinityGraph& ag, int i) {
  std::map<int, double> out;
  double total = 0.0;
  for (Eigen::SparseMatrix<double>::InnerIterator it(ag.a, i); it; ++it) {
    if (static_cast<int>(it.row()) == i) continue;
    out[static_cast<int>(it.row())] = it.value();
    total += it.value();
  }
  for (auto& [j, v] : out) v /= total;
  return out;
}

void export_affinity(const AffinityGraph& ag, std::ostream& os) {
  for (int col = 0; col < ag.a.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(ag.a, col); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace glcc
