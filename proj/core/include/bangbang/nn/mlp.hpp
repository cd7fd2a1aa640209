#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "bangbang/nn/tensor.hpp"
#include "bangbang/random.hpp"

namespace bangbang::nn {

enum class Activation { kTanh, kRelu };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

// Fully connected network; hidden layers use `activation`, the output layer
// is linear. Weights are stored n_in x n_out so a batch maps as X W + b.
class Mlp {
 public:
  Mlp() = default;
  // Fan-in uniform init U(-1/sqrt(n_in), 1/sqrt(n_in)); the last layer's
  // weights are multiplied by `output_scale`. Biases start at zero.
  Mlp(std::vector<int> layer_sizes, Activation activation, Rng& rng, double output_scale = 1.0);

  Tensor forward(const Tensor& input) const;
  Matrix predict(const Matrix& input) const;  // no tape

  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }

  // W0, b0, W1, b1, ...
  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  std::size_t parameter_count() const;

  std::vector<double> flat() const;
  void set_flat(std::span<const double> values);
  void zero_grad();

  // Independent copy of the parameters.
  Mlp clone() const;

 private:
  std::vector<int> sizes_;
  Activation activation_ = Activation::kTanh;
  std::vector<Tensor> params_;
};

}  // namespace bangbang::nn
