#include "bangbang/nn/tensor.hpp"

#include <unordered_set>

#include "bangbang/error.hpp"

namespace bangbang::nn {
namespace {
thread_local bool g_grad_enabled = true;
}

namespace detail {

void accumulate(Node& node, const Matrix& contribution) {
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = contribution;
  } else {
    node.grad += contribution;
  }
}

}  // namespace detail

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

Tensor Tensor::constant(Matrix value) {
  if (!value.allFinite()) throw NumericError("tensor constant contains non-finite values");
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
  Tensor t = constant(std::move(value));
  t.node_->requires_grad = true;
  return t;
}

Tensor Tensor::scalar(double v) { return constant(Matrix::Constant(1, 1, v)); }

Tensor Tensor::from_node(std::shared_ptr<detail::Node> node) { return Tensor(std::move(node)); }

const Matrix& Tensor::value() const {
  if (!node_) throw Error("use of an undefined tensor");
  return node_->value;
}

Matrix& Tensor::mutable_value() {
  if (!node_) throw Error("use of an undefined tensor");
  if (!node_->leaf) throw Error("only leaf tensors can be modified in place");
  return node_->value;
}

const Matrix& Tensor::grad() const {
  if (!node_) throw Error("use of an undefined tensor");
  if (node_->grad.size() == 0) node_->grad = Matrix::Zero(rows(), cols());
  return node_->grad;
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() != 0; }

void Tensor::zero_grad() {
  if (node_) node_->grad.resize(0, 0);
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on a tensor with more than one element");
  return value()(0, 0);
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return node_ && node_->leaf; }

void Tensor::backward() const {
  if (!node_) throw Error("backward on an undefined tensor");
  if (!node_->requires_grad) throw Error("backward on a tensor without a recorded tape");
  if (size() != 1) throw ShapeError("backward requires a scalar loss");

  // iterative post-order DFS gives a topological order
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node* p = n->parents[next++].get();
      if (p->requires_grad && !seen.contains(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (detail::Node* n : order) {
    if (!n->leaf) n->grad.resize(0, 0);
  }
  detail::accumulate(*node_, Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(*n);
  }
}

}  // namespace bangbang::nn
