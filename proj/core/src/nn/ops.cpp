#include "bangbang/nn/ops.hpp"

#include <cmath>
#include <string>

#include "bangbang/error.hpp"

namespace bangbang::nn {
namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Tensor make(Matrix value, std::vector<NodePtr> parents, std::function<void(Node&)> backward,
            const char* op) {
  if (!value.allFinite()) throw NumericError(std::string("non-finite value produced by ") + op);
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->leaf = false;
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& p : parents) needs = needs || p->requires_grad;
  }
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return Tensor::from_node(std::move(node));
}

Matrix broadcast(const Matrix& m, Index rows, Index cols) {
  if (m.rows() == rows && m.cols() == cols) return m;
  if (m.size() == 1) return Matrix::Constant(rows, cols, m(0, 0));
  if (m.rows() == 1 && m.cols() == cols) return m.replicate(rows, 1);
  if (m.cols() == 1 && m.rows() == rows) return m.replicate(1, cols);
  throw ShapeError("cannot broadcast " + shape_str(m) + " to " + std::to_string(rows) + "x" +
                   std::to_string(cols));
}

// Sum a gradient back down to the operand's (possibly broadcast) shape.
Matrix reduce_to(const Matrix& g, Index rows, Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  if (rows == 1 && cols == 1) return Matrix::Constant(1, 1, g.sum());
  if (rows == 1) return g.colwise().sum();
  return g.rowwise().sum();
}

void result_shape(const Matrix& a, const Matrix& b, Index& rows, Index& cols) {
  rows = std::max(a.rows(), b.rows());
  cols = std::max(a.cols(), b.cols());
  auto ok = [&](const Matrix& m) {
    return (m.rows() == rows || m.rows() == 1) && (m.cols() == cols || m.cols() == 1);
  };
  if (!ok(a) || !ok(b)) {
    throw ShapeError("incompatible shapes " + shape_str(a) + " and " + shape_str(b));
  }
}

template <typename Fwd, typename Back>
Tensor binary(const Tensor& a, const Tensor& b, Fwd fwd, Back back, const char* op) {
  Index rows, cols;
  result_shape(a.value(), b.value(), rows, cols);
  Matrix av = broadcast(a.value(), rows, cols);
  Matrix bv = broadcast(b.value(), rows, cols);
  Matrix out = fwd(av, bv);
  NodePtr an = a.node(), bn = b.node();
  return make(
      std::move(out), {an, bn},
      [an, bn, av, bv, back](Node& self) {
        Matrix ga, gb;
        back(self.grad, av, bv, self.value, ga, gb);
        if (an->requires_grad) detail::accumulate(*an, reduce_to(ga, an->value.rows(), an->value.cols()));
        if (bn->requires_grad) detail::accumulate(*bn, reduce_to(gb, bn->value.rows(), bn->value.cols()));
      },
      op);
}

template <typename Fwd, typename Back>
Tensor unary(const Tensor& a, Fwd fwd, Back back, const char* op) {
  Matrix out = fwd(a.value());
  NodePtr an = a.node();
  return make(
      std::move(out), {an},
      [an, back](Node& self) { detail::accumulate(*an, back(self.grad, an->value, self.value)); },
      op);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x + y; },
      [](const Matrix& g, const Matrix&, const Matrix&, const Matrix&, Matrix& ga, Matrix& gb) {
        ga = g;
        gb = g;
      },
      "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x - y; },
      [](const Matrix& g, const Matrix&, const Matrix&, const Matrix&, Matrix& ga, Matrix& gb) {
        ga = g;
        gb = -g;
      },
      "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x.cwiseProduct(y); },
      [](const Matrix& g, const Matrix& x, const Matrix& y, const Matrix&, Matrix& ga, Matrix& gb) {
        ga = g.cwiseProduct(y);
        gb = g.cwiseProduct(x);
      },
      "mul");
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x.cwiseQuotient(y); },
      [](const Matrix& g, const Matrix&, const Matrix& y, const Matrix& out, Matrix& ga, Matrix& gb) {
        ga = g.cwiseQuotient(y);
        gb = -g.cwiseProduct(out).cwiseQuotient(y);
      },
      "div");
}

Tensor minimum(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x.cwiseMin(y); },
      [](const Matrix& g, const Matrix& x, const Matrix& y, const Matrix&, Matrix& ga, Matrix& gb) {
        Matrix pick_a = (x.array() <= y.array()).cast<double>().matrix();
        ga = g.cwiseProduct(pick_a);
        gb = g - ga;
      },
      "minimum");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul shape mismatch " + shape_str(a.value()) + " * " + shape_str(b.value()));
  }
  NodePtr an = a.node(), bn = b.node();
  return make(
      a.value() * b.value(), {an, bn},
      [an, bn](Node& self) {
        if (an->requires_grad) detail::accumulate(*an, self.grad * bn->value.transpose());
        if (bn->requires_grad) detail::accumulate(*bn, an->value.transpose() * self.grad);
      },
      "matmul");
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) {
    throw ShapeError("linear shape mismatch: x " + shape_str(x.value()) + ", W " +
                     shape_str(w.value()) + ", b " + shape_str(b.value()));
  }
  Matrix out = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  NodePtr xn = x.node(), wn = w.node(), bn = b.node();
  return make(
      std::move(out), {xn, wn, bn},
      [xn, wn, bn](Node& self) {
        if (xn->requires_grad) detail::accumulate(*xn, self.grad * wn->value.transpose());
        if (wn->requires_grad) detail::accumulate(*wn, xn->value.transpose() * self.grad);
        if (bn->requires_grad) detail::accumulate(*bn, self.grad.colwise().sum());
      },
      "linear");
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor scale(const Tensor& a, double s) {
  return unary(
      a, [s](const Matrix& x) -> Matrix { return x * s; },
      [s](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g * s; }, "scale");
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(
      a, [s](const Matrix& x) -> Matrix { return (x.array() + s).matrix(); },
      [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g; }, "add_scalar");
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](const Matrix& x) -> Matrix { return x.array().tanh().matrix(); },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
        return g.cwiseProduct((1.0 - y.array().square()).matrix());
      },
      "tanh");
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](const Matrix& x) -> Matrix { return x.cwiseMax(0.0); },
      [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
        return g.cwiseProduct((x.array() > 0.0).cast<double>().matrix());
      },
      "relu");
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](const Matrix& x) -> Matrix {
        return x.unaryExpr([](double v) {
          if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
          const double e = std::exp(v);
          return e / (1.0 + e);
        });
      },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
        return g.cwiseProduct((y.array() * (1.0 - y.array())).matrix());
      },
      "sigmoid");
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](const Matrix& x) -> Matrix { return x.array().exp().matrix(); },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix { return g.cwiseProduct(y); },
      "exp");
}

Tensor log(const Tensor& a) {
  if ((a.value().array() <= 0.0).any()) throw NumericError("log of a non-positive value");
  return unary(
      a, [](const Matrix& x) -> Matrix { return x.array().log().matrix(); },
      [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix { return g.cwiseQuotient(x); },
      "log");
}

Tensor square(const Tensor& a) {
  return unary(
      a, [](const Matrix& x) -> Matrix { return x.array().square().matrix(); },
      [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
        return 2.0 * g.cwiseProduct(x);
      },
      "square");
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) throw Error("clamp with lo > hi");
  return unary(
      a, [lo, hi](const Matrix& x) -> Matrix { return x.cwiseMax(lo).cwiseMin(hi); },
      [lo, hi](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
        return g.cwiseProduct(((x.array() >= lo) && (x.array() <= hi)).cast<double>().matrix());
      },
      "clamp");
}

Tensor sum(const Tensor& a) {
  NodePtr an = a.node();
  return make(
      Matrix::Constant(1, 1, a.value().sum()), {an},
      [an](Node& self) {
        detail::accumulate(*an, Matrix::Constant(an->value.rows(), an->value.cols(), self.grad(0, 0)));
      },
      "sum");
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor row_sum(const Tensor& a) {
  NodePtr an = a.node();
  return make(
      a.value().rowwise().sum(), {an},
      [an](Node& self) { detail::accumulate(*an, self.grad.replicate(1, an->value.cols())); },
      "row_sum");
}

namespace {
Matrix group_log_softmax(const Matrix& x, Index group) {
  Matrix out(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); c += group) {
    auto block = x.middleCols(c, group);
    Eigen::VectorXd m = block.rowwise().maxCoeff();
    Matrix shifted = block.colwise() - m;
    Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
    out.middleCols(c, group) = shifted.colwise() - lse;
  }
  return out;
}

void check_groups(const Tensor& a, Index group) {
  if (group < 1 || a.cols() % group != 0) {
    throw ShapeError("column count is not a multiple of the softmax group width");
  }
}
}  // namespace

Tensor log_softmax_groups(const Tensor& a, Index group) {
  check_groups(a, group);
  NodePtr an = a.node();
  return make(
      group_log_softmax(a.value(), group), {an},
      [an, group](Node& self) {
        Matrix p = self.value.array().exp().matrix();
        Matrix g(self.grad.rows(), self.grad.cols());
        for (Index c = 0; c < g.cols(); c += group) {
          Eigen::VectorXd s = self.grad.middleCols(c, group).rowwise().sum();
          g.middleCols(c, group) =
              self.grad.middleCols(c, group) - (p.middleCols(c, group).array().colwise() * s.array()).matrix();
        }
        detail::accumulate(*an, g);
      },
      "log_softmax_groups");
}

Tensor softmax_groups(const Tensor& a, Index group) {
  check_groups(a, group);
  NodePtr an = a.node();
  return make(
      group_log_softmax(a.value(), group).array().exp().matrix(), {an},
      [an, group](Node& self) {
        const Matrix& p = self.value;
        Matrix g(p.rows(), p.cols());
        for (Index c = 0; c < p.cols(); c += group) {
          Eigen::VectorXd dot = self.grad.middleCols(c, group).cwiseProduct(p.middleCols(c, group)).rowwise().sum();
          g.middleCols(c, group) =
              (p.middleCols(c, group).array() *
               (self.grad.middleCols(c, group).array().colwise() - dot.array()))
                  .matrix();
        }
        detail::accumulate(*an, g);
      },
      "softmax_groups");
}

Tensor slice_cols(const Tensor& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw ShapeError("slice_cols out of range");
  NodePtr an = a.node();
  return make(
      a.value().middleCols(start, count), {an},
      [an, start, count](Node& self) {
        Matrix g = Matrix::Zero(an->value.rows(), an->value.cols());
        g.middleCols(start, count) = self.grad;
        detail::accumulate(*an, g);
      },
      "slice_cols");
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  Index rows = parts[0].rows();
  Index cols = 0;
  std::vector<NodePtr> nodes;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols row mismatch");
    cols += p.cols();
    nodes.push_back(p.node());
  }
  Matrix out(rows, cols);
  Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return make(
      std::move(out), nodes,
      [nodes](Node& self) {
        Index off = 0;
        for (const auto& n : nodes) {
          if (n->requires_grad) detail::accumulate(*n, self.grad.middleCols(off, n->value.cols()));
          off += n->value.cols();
        }
      },
      "concat_cols");
}

Tensor gather_rows(const Tensor& a, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) throw ShapeError("gather_rows index out of range");
    out.row(static_cast<Index>(i)) = a.value().row(rows[i]);
  }
  NodePtr an = a.node();
  std::vector<Index> idx(rows.begin(), rows.end());
  return make(
      std::move(out), {an},
      [an, idx](Node& self) {
        Matrix g = Matrix::Zero(an->value.rows(), an->value.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += self.grad.row(static_cast<Index>(i));
        detail::accumulate(*an, g);
      },
      "gather_rows");
}

Tensor stop_gradient(const Tensor& a) { return Tensor::constant(a.value()); }

Tensor pass_through(Matrix value, const Tensor& source) {
  if (value.rows() != source.rows() || value.cols() != source.cols()) {
    throw ShapeError("pass_through shape " + shape_str(value) + " vs " + shape_str(source.value()));
  }
  NodePtr sn = source.node();
  return make(
      std::move(value), {sn}, [sn](Node& self) { detail::accumulate(*sn, self.grad); },
      "pass_through");
}

}  // namespace bangbang::nn
