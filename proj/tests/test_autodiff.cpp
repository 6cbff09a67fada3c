#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "glcc/autodiff.hpp"

using namespace glcc;

namespace {

/// Central-difference gradient of a scalar function of one matrix input.
Eigen::MatrixXd fd_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& f,
    const Eigen::MatrixXd& x, double step = 1e-6) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      Eigen::MatrixXd xp = x, xm = x;
      xp(i, j) += step;
      xm(i, j) -= step;
      g(i, j) = (f(xp) - f(xm)) / (2.0 * step);
    }
  return g;
}

void check_close(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                 double tol = 1e-7) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  const double scale = std::max(1.0, std::max(a.cwiseAbs().maxCoeff(),
                                              b.cwiseAbs().maxCoeff()));
  CHECK((a - b).cwiseAbs().maxCoeff() / scale < tol);
}

/// Runs tape fn on a leaf, backprops, compares against finite differences.
void gradcheck(const std::function<ad::Var(ad::Var)>& build,
               const Eigen::MatrixXd& x) {
  ad::Var lx = ad::leaf(x);
  ad::Var loss = build(lx);
  ad::backward(loss);
  lx->ensure_grad();
  const Eigen::MatrixXd fd = fd_gradient(
      [&](const Eigen::MatrixXd& xv) {
        return ad::value_of(build(ad::leaf(xv)));
      },
      x);
  check_close(lx->grad, fd);
}

}  // namespace

TEST_CASE("matmul / add / bias chain") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(3, 5);
  Eigen::MatrixXd b = Eigen::MatrixXd::Random(1, 5);
  gradcheck(
      [&](ad::Var v) {
        return ad::sum_all(ad::add_rowvec(ad::matmul(v, ad::constant(w)),
                                          ad::constant(b)));
      },
      x);
}

TEST_CASE("elementwise ops") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 4).array() + 2.0;  // positive
  gradcheck([](ad::Var v) { return ad::sum_all(ad::exp_(ad::scale(v, 0.5))); }, x);
  gradcheck([](ad::Var v) { return ad::sum_all(ad::log_(v)); }, x);
  gradcheck([](ad::Var v) { return ad::sum_all(ad::cmul(v, v)); }, x);
  gradcheck(
      [&](ad::Var v) {
        return ad::sum_all(ad::cdiv(ad::constant(Eigen::MatrixXd::Ones(3, 4)), v));
      },
      x);
}

TEST_CASE("relu away from the kink") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 4);
  x = (x.array().abs() + 0.1).matrix() * 0.7;  // keep preactivations off zero
  x.block(0, 0, 2, 2) *= -1.0;
  gradcheck([](ad::Var v) { return ad::sum_all(ad::relu(v)); }, x);
}

TEST_CASE("reductions and concat") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 4);
  gradcheck(
      [](ad::Var v) {
        return ad::sum_all(ad::cmul(ad::rowwise_sum(v), ad::rowwise_sum(v)));
      },
      x);
  gradcheck(
      [](ad::Var v) {
        return ad::sum_all(ad::cmul(ad::colwise_sum(v), ad::colwise_sum(v)));
      },
      x);
  gradcheck(
      [](ad::Var v) {
        auto c = ad::concat_cols({v, ad::scale(v, 2.0)});
        return ad::sum_all(ad::cmul(c, c));
      },
      x);
  gradcheck(
      [](ad::Var v) {
        auto g = ad::gather_rows(v, {2, 0, 0});
        return ad::sum_all(ad::cmul(g, g));
      },
      x);
}

TEST_CASE("row and column normalizers, softmax") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3).array() + 1.5;
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(4, 3);
  gradcheck(
      [&](ad::Var v) {
        return ad::sum_all(ad::cmul_const(ad::row_l2_normalize(v), w));
      },
      x);
  gradcheck(
      [&](ad::Var v) {
        return ad::sum_all(ad::cmul_const(ad::col_l2_normalize(v), w));
      },
      x);
  gradcheck(
      [&](ad::Var v) {
        return ad::sum_all(ad::cmul_const(ad::row_softmax(v), w));
      },
      x);
}

TEST_CASE("sparse_premul and transpose") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
  Eigen::SparseMatrix<double> s(4, 5);
  std::vector<Eigen::Triplet<double>> t{{0, 1, 2.0}, {1, 0, -1.0}, {2, 4, 0.5},
                                        {3, 3, 1.0}, {0, 0, 0.3}};
  s.setFromTriplets(t.begin(), t.end());
  gradcheck(
      [&](ad::Var v) {
        auto y = ad::sparse_premul(s, v);
        return ad::sum_all(ad::cmul(y, ad::transpose(ad::transpose(y))));
      },
      x);
}

TEST_CASE("shared subexpressions accumulate gradients") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 3);
  gradcheck(
      [](ad::Var v) {
        auto y = ad::matmul(v, ad::transpose(v));  // v used twice
        return ad::sum_all(ad::cmul(y, y));
      },
      x);
}
