#pragma once

#include <span>
#include <vector>

#include "bangbang/nn/tensor.hpp"

namespace bangbang::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
  long long step = 0;
};

// One bias-corrected Adam update on flat arrays. Throws NumericError on a
// non-finite gradient before touching anything.
void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& state,
               const AdamConfig& cfg);

// Adam over a fixed list of parameter tensors, using their accumulated grads.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Tensor> params, AdamConfig cfg);

  void step();
  void zero_grad();
  // Scales gradients so their global L2 norm is at most max_norm. Returns the
  // norm before scaling.
  double clip_grad_norm(double max_norm);

  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }
  const AdamMoments& moments() const { return state_; }
  void set_moments(AdamMoments m);
  std::size_t size() const;

 private:
  std::vector<Tensor> params_;
  AdamConfig cfg_;
  AdamMoments state_;
};

}  // namespace bangbang::nn
