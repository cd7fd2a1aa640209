#pragma once

#include <memory>

#include "bangbang/envsim/environment.hpp"

namespace bangbang::envsim {

// Holds each decision for `factor` inner steps. Rewards of the inner steps are
// summed and the episode keeps its wall-clock duration, so the number of
// decisions per episode shrinks by `factor`.
class DownsampledEnv final : public Environment {
 public:
  DownsampledEnv(std::unique_ptr<Environment> base, int factor);
  DownsampledEnv(const DownsampledEnv& other);

  EnvId id() const override { return base_->id(); }
  const ActionSpec& action_spec() const override { return base_->action_spec(); }
  int observation_dim() const override { return base_->observation_dim(); }
  std::vector<std::string> observation_names() const override {
    return base_->observation_names();
  }
  int episode_length() const override { return base_->episode_length() / factor_; }
  double decision_interval() const override { return base_->decision_interval() * factor_; }

  std::vector<double> reset() override { return base_->reset(); }
  StepResult step(std::span<const double> action) override;
  const EnvState& state() const override { return base_->state(); }
  std::unique_ptr<Environment> clone() const override;

  int factor() const { return factor_; }
  const Environment& base() const { return *base_; }

 private:
  std::unique_ptr<Environment> base_;
  int factor_;
};

// factor == 1 returns `env` untouched. Throws ConfigError when factor does
// not divide the episode length.
std::unique_ptr<Environment> downsample_control(std::unique_ptr<Environment> env, int factor);

}  // namespace bangbang::envsim
