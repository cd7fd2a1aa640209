#include "bangbang/nn/mlp.hpp"

#include <cmath>

#include "bangbang/error.hpp"
#include "bangbang/nn/ops.hpp"

namespace bangbang::nn {

std::string_view to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "relu"; }

Activation parse_activation(std::string_view s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + std::string(s) + "' (tanh|relu)");
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation activation, Rng& rng, double output_scale)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
  if (sizes_.size() < 2) throw ConfigError("an MLP needs at least input and output sizes");
  for (int s : sizes_) {
    if (s < 1) throw ConfigError("MLP layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int n_in = sizes_[l], n_out = sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(n_in));
    const double gain = (l + 2 == sizes_.size()) ? output_scale : 1.0;
    Matrix w(n_in, n_out);
    // fill row-major so the draw order does not depend on Eigen's storage
    for (int i = 0; i < n_in; ++i) {
      for (int j = 0; j < n_out; ++j) w(i, j) = gain * uniform(rng, -bound, bound);
    }
    params_.push_back(Tensor::parameter(std::move(w)));
    params_.push_back(Tensor::parameter(Matrix::Zero(1, n_out)));
  }
}

Tensor Mlp::forward(const Tensor& input) const {
  if (input.cols() != sizes_.front()) {
    throw ShapeError("MLP expects " + std::to_string(sizes_.front()) + " input features, got " +
                     std::to_string(input.cols()));
  }
  Tensor h = input;
  const std::size_t layers = params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    h = linear(h, params_[2 * l], params_[2 * l + 1]);
    if (l + 1 < layers) h = activation_ == Activation::kTanh ? tanh(h) : relu(h);
  }
  return h;
}

Matrix Mlp::predict(const Matrix& input) const {
  if (input.cols() != sizes_.front()) throw ShapeError("MLP input width mismatch");
  Matrix h = input;
  const std::size_t layers = params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix next = h * params_[2 * l].value();
    next.rowwise() += params_[2 * l + 1].value().row(0);
    if (l + 1 < layers) {
      if (activation_ == Activation::kTanh) {
        next = next.array().tanh().matrix();
      } else {
        next = next.cwiseMax(0.0);
      }
    }
    h = std::move(next);
  }
  if (!h.allFinite()) throw NumericError("non-finite MLP output");
  return h;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    n += static_cast<std::size_t>(sizes_[l] + 1) * static_cast<std::size_t>(sizes_[l + 1]);
  }
  return n;
}

std::vector<double> Mlp::flat() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& p : params_) {
    const Matrix& m = p.value();
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    }
  }
  return out;
}

void Mlp::set_flat(std::span<const double> values) {
  if (values.size() != parameter_count()) throw ShapeError("flat parameter vector has wrong length");
  std::size_t k = 0;
  for (auto& p : params_) {
    Matrix& m = p.mutable_value();
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        if (!std::isfinite(values[k])) throw NumericError("non-finite parameter");
        m(i, j) = values[k++];
      }
    }
  }
}

void Mlp::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Mlp Mlp::clone() const {
  Mlp out;
  out.sizes_ = sizes_;
  out.activation_ = activation_;
  for (const auto& p : params_) out.params_.push_back(Tensor::parameter(p.value()));
  return out;
}

}  // namespace bangbang::nn
