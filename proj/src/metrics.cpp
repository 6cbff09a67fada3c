#include "glcc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "glcc/errors.hpp"

namespace glcc {
namespace {

int relabel(const std::vector<int>& in, std::vector<int>& out) {
  std::vector<int> uniq(in);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  out.resize(in.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    out[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), in[i]) -
                              uniq.begin());
  return static_cast<int>(uniq.size());
}

Eigen::MatrixXd contingency(const std::vector<int>& a, int ka,
                            const std::vector<int>& b, int kb) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ka, kb);
  for (std::size_t i = 0; i < a.size(); ++i) c(a[i], b[i]) += 1.0;
  return c;
}

void check_lengths(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw ShapeError("label vectors have different lengths");
  if (pred.empty()) throw ShapeError("label vectors must be nonempty");
}

}  // namespace

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  // Jonker-style shortest augmenting path, O(n^3). 1-based potentials.
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double nmi(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_lengths(pred, truth);
  std::vector<int> a, b;
  const int ka = relabel(pred, a);
  const int kb = relabel(truth, b);
  const double n = static_cast<double>(a.size());
  const Eigen::MatrixXd c = contingency(a, ka, b, kb);
  const Eigen::VectorXd ra = c.rowwise().sum(), rb = c.colwise().sum();
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (int i = 0; i < ka; ++i)
    if (ra(i) > 0) ha -= ra(i) / n * std::log(ra(i) / n);
  for (int j = 0; j < kb; ++j)
    if (rb(j) > 0) hb -= rb(j) / n * std::log(rb(j) / n);
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j)
      if (c(i, j) > 0)
        mi += c(i, j) / n * std::log(n * c(i, j) / (ra(i) * rb(j)));
  if (ha <= 0.0 || hb <= 0.0) {
    // a zero-entropy side: identical single-cluster partitions score 1
    return (ka == 1 && kb == 1) ? 1.0 : 0.0;
  }
  return mi / std::sqrt(ha * hb);
}

double acc(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_lengths(pred, truth);
  std::vector<int> a, b;
  const int ka = relabel(pred, a);
  const int kb = relabel(truth, b);
  const int k = std::max(ka, kb);
  // rectangular case handled by zero-padding; unmatched clusters score 0
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(k, k);
  const Eigen::MatrixXd c = contingency(a, ka, b, kb);
  cost.topLeftCorner(ka, kb) = -c;
  const auto match = solve_assignment(cost);
  double matched = 0.0;
  for (int i = 0; i < ka; ++i)
    if (match[i] < kb) matched += c(i, match[i]);
  return matched / static_cast<double>(a.size());
}

double ari(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_lengths(pred, truth);
  if (pred.size() < 2) throw ShapeError("ari requires at least 2 samples");
  std::vector<int> a, b;
  const int ka = relabel(pred, a);
  const int kb = relabel(truth, b);
  const Eigen::MatrixXd c = contingency(a, ka, b, kb);
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) sum_ij += comb2(c(i, j));
  for (int i = 0; i < ka; ++i) sum_a += comb2(c.row(i).sum());
  for (int j = 0; j < kb; ++j) sum_b += comb2(c.col(j).sum());
  const double total = comb2(static_cast<double>(a.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected)  // both partitions trivial
    return (sum_ij == expected) ? 1.0 : 0.0;
  return (sum_ij - expected) / (max_index - expected);
}

MetricsReport evaluate_clustering(const std::vector<int>& pred,
                                  const std::vector<int>& truth) {
  MetricsReport r;
  r.nmi = nmi(pred, truth);
  r.acc = acc(pred, truth);
  r.ari = ari(pred, truth);
  r.n = static_cast<int>(pred.size());
  std::vector<int> tmp;
  r.k_pred = relabel(pred, tmp);
  r.k_true = relabel(truth, tmp);
  return r;
}

std::string MetricsReport::to_json() const {
  std::ostringstream os;
  os << "{\"nmi\": " << nmi << ", \"acc\": " << acc << ", \"ari\": " << ari
     << ", \"n\": " << n << ", \"k_pred\": " << k_pred
     << ", \"k_true\": " << k_true << "}";
  return os.str();
}

std::string MetricsReport::to_csv_row() const {
  std::ostringstream os;
  os << nmi << "," << acc << "," << ari << "," << n << "," << k_pred << ","
     << k_true;
  return os.str();
}

std::vector<int> kmeans(const Eigen::MatrixXd& points, int k,
                        std::uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  if (n < k) throw ParameterError("kmeans: fewer points than clusters");
  if (k < 1) throw ParameterError("kmeans: k must be >= 1");
  std::mt19937_64 rng(seed);

  Eigen::MatrixXd centroids(k, points.cols());
  std::uniform_int_distribution<int> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  Eigen::VectorXd d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    int pick = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double t = u(rng), acc2 = 0.0;
      for (int i = 0; i < n; ++i) {
        acc2 += d2(i);
        if (acc2 >= t) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centroids.row(c) = points.row(pick);
    d2 = d2.cwiseMin(
        (points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> labels(n, 0), prev(n, -1);
  for (int iter = 0; iter < 300 && labels != prev; ++iter) {
    prev = labels;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dd = (points.row(i) - centroids.row(c)).squaredNorm();
        if (dd < best) {
          best = dd;
          labels[i] = c;
        }
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(labels[i]) += points.row(i);
      ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / counts[c];
      } else {
        // re-seed to the point farthest from its assigned centroid
        int far = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
          const double dd =
              (points.row(i) - centroids.row(labels[i])).squaredNorm();
          if (dd > best) {
            best = dd;
            far = i;
          }
        }
        centroids.row(c) = points.row(far);
      }
    }
  }
  return labels;
}

}  // namespace glcc
