#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace bangbang::nn {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows into it
  bool requires_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;
};

void accumulate(Node& node, const Matrix& contribution);

}  // namespace detail

// Dense 2-D f64 tensor with an optional reverse-mode tape. Rows index the
// batch, columns index features. Copies share the underlying node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Matrix value);
  static Tensor parameter(Matrix value);
  static Tensor scalar(double v);
  static Tensor from_node(std::shared_ptr<detail::Node> node);

  bool defined() const { return static_cast<bool>(node_); }
  const Matrix& value() const;
  // Only leaves may be written to (optimizer updates, checkpoint loads).
  Matrix& mutable_value();

  const Matrix& grad() const;
  bool has_grad() const;
  void zero_grad();

  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  std::vector<Index> shape() const { return {rows(), cols()}; }
  Index size() const { return value().size(); }
  double item() const;

  bool requires_grad() const;
  bool is_leaf() const;

  // Reverse sweep from a 1x1 tensor. Leaf gradients accumulate across calls;
  // interior gradients are recomputed each call.
  void backward() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

// While alive, new ops on this thread record no tape.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

}  // namespace bangbang::nn
