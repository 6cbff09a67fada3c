#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace glcc::ad {

/// Minimal reverse-mode tape over dense Eigen matrices. Scalars are 1x1.
/// Build an expression, call backward() on a scalar node, read grads off
/// the leaves.
struct Node {
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;  // scatter this->grad into parents

  explicit Node(Eigen::MatrixXd v) : value(std::move(v)) {}
  void ensure_grad() {
    if (grad.size() == 0) grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  }
};

using Var = std::shared_ptr<Node>;

Var leaf(Eigen::MatrixXd v);
Var constant(Eigen::MatrixXd v);  // same as leaf; grads simply unused
Var scalar(double v);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var cmul(Var a, Var b);               // elementwise
Var cdiv(Var a, Var b);               // elementwise
Var cmul_const(Var a, const Eigen::MatrixXd& c);
Var scale(Var a, double c);
Var add_rowvec(Var a, Var bias);      // bias is 1 x cols, broadcast over rows
Var matmul(Var a, Var b);
Var sparse_premul(const Eigen::SparseMatrix<double>& s, Var a);  // s * a
Var transpose(Var a);
Var relu(Var a);
Var exp_(Var a);
/// log(max(a, floor)); zero gradient where clamped.
Var log_(Var a, double floor = 1e-12);
Var rowwise_sum(Var a);   // n x 1
Var colwise_sum(Var a);   // 1 x m
Var sum_all(Var a);       // 1 x 1
Var concat_cols(const std::vector<Var>& parts);
Var gather_rows(Var a, const std::vector<int>& idx);
Var row_l2_normalize(Var a, double eps = 1e-12);
Var row_softmax(Var a);
/// Normalizes each column to unit L2 norm.
Var col_l2_normalize(Var a, double eps = 1e-12);

double value_of(const Var& v);  // scalar nodes only

/// Reverse pass from a 1x1 node. Accumulates into .grad of every reachable
/// node; call zero_grads first when reusing leaves across tapes.
void backward(const Var& loss);

}  // namespace glcc::ad
