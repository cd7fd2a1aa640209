#pragma once

#include <string>
#include <vector>

#include "bangbang/config.hpp"
#include "bangbang/envsim/reward.hpp"
#include "bangbang/heads/heads.hpp"
#include "bangbang/nn/adam.hpp"
#include "bangbang/nn/mlp.hpp"

namespace bangbang::learn {

using nn::Index;
using nn::Matrix;
using nn::Tensor;

struct PolicyConfig {
  heads::HeadKind head = heads::HeadKind::kGaussian;
  heads::Bijector::Kind bijector = heads::Bijector::Kind::kShiftScale;
  std::vector<int> hidden{64, 64};
  nn::Activation activation = nn::Activation::kTanh;
  double init_log_scale = 0.0;  // Gaussian only, pre-bijector units
  double output_scale = 0.01;   // last-layer init gain

  void validate() const;
  // Keys under [policy]: head, bijector, hidden, activation, init_log_scale.
  static PolicyConfig from_config(const Config& cfg);
  void to_config(Config& cfg) const;
  static std::vector<std::string> config_keys();
};

// MLP torso mapping observations to head parameters, plus a state-independent
// per-dimension log scale for the Gaussian.
class Policy {
 public:
  Policy() = default;
  Policy(int obs_dim, envsim::ActionSpec spec, PolicyConfig cfg, Rng& init_rng);

  heads::Head head(const Tensor& obs) const;
  heads::Head head(const Matrix& obs) const;

  // Sampled pre-clip actions (BxD). Gaussian samples may leave the box.
  Matrix sample(const Matrix& obs, Rng& rng) const;
  // Deterministic actions (mean / most likely category).
  Matrix mode(const Matrix& obs) const;
  // Actions clipped into the box, ready for the environment.
  Matrix executable(const Matrix& actions) const;

  Tensor log_prob(const Matrix& obs, const Matrix& actions) const;

  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;
  std::vector<double> flat() const;
  void set_flat(std::span<const double> values);
  void zero_grad();
  Policy clone() const;

  const PolicyConfig& config() const { return cfg_; }
  heads::HeadKind kind() const { return cfg_.head; }
  const heads::Bijector& bijector() const { return bijector_; }
  const envsim::ActionSpec& action_spec() const { return spec_; }
  int obs_dim() const { return net_.input_dim(); }
  const nn::Mlp& net() const { return net_; }
  nn::Mlp& net() { return net_; }
  const Tensor& log_scale() const { return log_scale_; }

  // Rebuild from stored parts (checkpoint loading).
  static Policy assemble(PolicyConfig cfg, envsim::ActionSpec spec, nn::Mlp net,
                         std::vector<double> log_scale);

 private:
  PolicyConfig cfg_;
  envsim::ActionSpec spec_;
  heads::Bijector bijector_;
  nn::Mlp net_;
  Tensor log_scale_;  // 1xD parameter, undefined for discrete heads
};

// Value network obs -> 1 with the same torso shape.
nn::Mlp make_value_net(int obs_dim, const PolicyConfig& cfg, Rng& init_rng);

}  // namespace bangbang::learn
