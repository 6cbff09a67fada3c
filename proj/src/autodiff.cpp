#include "glcc/autodiff.hpp"

#include <cassert>
#include <stdexcept>
#include <unordered_set>

namespace glcc::ad {

Var leaf(Eigen::MatrixXd v) { return std::make_shared<Node>(std::move(v)); }
Var constant(Eigen::MatrixXd v) { return leaf(std::move(v)); }
Var scalar(double v) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return leaf(std::move(m));
}

double value_of(const Var& v) {
  assert(v->value.size() == 1);
  return v->value(0, 0);
}

namespace {
Var make(Eigen::MatrixXd v, std::vector<Var> parents,
         std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>(std::move(v));
  n->parents = std::move(parents);
  n->backward_fn = std::move(fn);
  return n;
}
}  // namespace

Var add(Var a, Var b) {
  return make(a->value + b->value, {a, b}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[1]->ensure_grad();
    n.parents[0]->grad += n.grad;
    n.parents[1]->grad += n.grad;
  });
}

Var sub(Var a, Var b) {
  return make(a->value - b->value, {a, b}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[1]->ensure_grad();
    n.parents[0]->grad += n.grad;
    n.parents[1]->grad -= n.grad;
  });
}

Var cmul(Var a, Var b) {
  return make(a->value.cwiseProduct(b->value), {a, b}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[1]->ensure_grad();
    n.parents[0]->grad += n.grad.cwiseProduct(n.parents[1]->value);
    n.parents[1]->grad += n.grad.cwiseProduct(n.parents[0]->value);
  });
}

Var cdiv(Var a, Var b) {
  return make(a->value.cwiseQuotient(b->value), {a, b}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[1]->ensure_grad();
    n.parents[0]->grad += n.grad.cwiseQuotient(n.parents[1]->value);
    n.parents[1]->grad -=
        n.grad.cwiseProduct(n.value).cwiseQuotient(n.parents[1]->value);
  });
}

Var cmul_const(Var a, const Eigen::MatrixXd& c) {
  return make(a->value.cwiseProduct(c), {a}, [c](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[0]->grad += n.grad.cwiseProduct(c);
  });
}

Var scale(Var a, double c) {
  return make(a->value * c, {a}, [c](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[0]->grad += n.grad * c;
  });
}

Var add_rowvec(Var a, Var bias) {
  Eigen::MatrixXd v = a->value;
  v.rowwise() += bias->value.row(0);
  return make(std::move(v), {a, bias}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[1]->ensure_grad();
    n.parents[0]->grad += n.grad;
    n.parents[1]->grad.row(0) += n.grad.colwise().sum();
  });
}

Var matmul(Var a, Var b) {
  return make(a->value * b->value, {a, b}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[1]->ensure_grad();
    n.parents[0]->grad += n.grad * n.parents[1]->value.transpose();
    n.parents[1]->grad += n.parents[0]->value.transpose() * n.grad;
  });
}

Var sparse_premul(const Eigen::SparseMatrix<double>& s, Var a) {
  return make(s * a->value, {a}, [s](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[0]->grad += s.transpose() * n.grad;
  });
}

Var transpose(Var a) {
  return make(a->value.transpose(), {a}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[0]->grad += n.grad.transpose();
  });
}

Var relu(Var a) {
  return make(a->value.cwiseMax(0.0), {a}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[0]->grad +=
        n.grad.cwiseProduct((n.parents[0]->value.array() > 0.0).cast<double>().matrix());
  });
}

Var exp_(Var a) {
  return make(a->value.array().exp().matrix(), {a}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[0]->grad += n.grad.cwiseProduct(n.value);
  });
}

Var log_(Var a, double floor) {
  Eigen::MatrixXd clamped = a->value.cwiseMax(floor);
  return make(clamped.array().log().matrix(), {a}, [floor, clamped](Node& n) {
    n.parents[0]->ensure_grad();
    Eigen::ArrayXXd mask = (n.parents[0]->value.array() > floor).cast<double>();
    n.parents[0]->grad +=
        (n.grad.array() * mask / clamped.array()).matrix();
  });
}

Var rowwise_sum(Var a) {
  return make(a->value.rowwise().sum(), {a}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[0]->grad +=
        n.grad * Eigen::MatrixXd::Ones(1, n.parents[0]->value.cols());
  });
}

Var colwise_sum(Var a) {
  return make(a->value.colwise().sum(), {a}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[0]->grad +=
        Eigen::MatrixXd::Ones(n.parents[0]->value.rows(), 1) * n.grad;
  });
}

Var sum_all(Var a) {
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = a->value.sum();
  return make(std::move(v), {a}, [](Node& n) {
    n.parents[0]->ensure_grad();
    n.parents[0]->grad.array() += n.grad(0, 0);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  assert(!parts.empty());
  const auto rows = parts[0]->value.rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) cols += p->value.cols();
  Eigen::MatrixXd v(rows, cols);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleCols(off, p->value.cols()) = p->value;
    off += p->value.cols();
  }
  return make(std::move(v), parts, [](Node& n) {
    Eigen::Index off2 = 0;
    for (auto& p : n.parents) {
      p->ensure_grad();
      p->grad += n.grad.middleCols(off2, p->value.cols());
      off2 += p->value.cols();
    }
  });
}

Var gather_rows(Var a, const std::vector<int>& idx) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(idx.size()), a->value.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) v.row(i) = a->value.row(idx[i]);
  return make(std::move(v), {a}, [idx](Node& n) {
    n.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      n.parents[0]->grad.row(idx[i]) += n.grad.row(i);
  });
}

Var row_l2_normalize(Var a, double eps) {
  Eigen::VectorXd norms = a->value.rowwise().norm().cwiseMax(eps);
  Eigen::MatrixXd v = norms.cwiseInverse().asDiagonal() * a->value;
  return make(std::move(v), {a}, [norms](Node& n) {
    n.parents[0]->ensure_grad();
    // d/dx (x/|x|) pullback: (g - (g.y) y) / |x| per row
    for (Eigen::Index i = 0; i < n.value.rows(); ++i) {
      const double dot = n.grad.row(i).dot(n.value.row(i));
      n.parents[0]->grad.row(i) +=
          (n.grad.row(i) - dot * n.value.row(i)) / norms(i);
    }
  });
}

Var col_l2_normalize(Var a, double eps) {
  Eigen::RowVectorXd norms = a->value.colwise().norm().cwiseMax(eps);
  Eigen::MatrixXd v = a->value * norms.cwiseInverse().asDiagonal();
  return make(std::move(v), {a}, [norms](Node& n) {
    n.parents[0]->ensure_grad();
    for (Eigen::Index j = 0; j < n.value.cols(); ++j) {
      const double dot = n.grad.col(j).dot(n.value.col(j));
      n.parents[0]->grad.col(j) +=
          (n.grad.col(j) - dot * n.value.col(j)) / norms(j);
    }
  });
}

Var row_softmax(Var a) {
  Eigen::MatrixXd v(a->value.rows(), a->value.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    Eigen::ArrayXd row = a->value.row(i).array();
    row -= row.maxCoeff();
    Eigen::ArrayXd e = row.exp();
    v.row(i) = (e / e.sum()).matrix().transpose();
  }
  return make(std::move(v), {a}, [](Node& n) {
    n.parents[0]->ensure_grad();
    for (Eigen::Index i = 0; i < n.value.rows(); ++i) {
      const double dot = n.grad.row(i).dot(n.value.row(i));
      n.parents[0]->grad.row(i) +=
          (n.grad.row(i).array() - dot).matrix().cwiseProduct(n.value.row(i));
    }
  });
}

void backward(const Var& loss) {
  if (loss->value.size() != 1)
    throw std::invalid_argument("backward expects a scalar node");
  // postorder topological sort
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss->ensure_grad();
  loss->grad(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) {
      n->ensure_grad();
      n->backward_fn(*n);
    }
  }
}

}  // namespace glcc::ad
