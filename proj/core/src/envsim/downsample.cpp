#include "bangbang/envsim/downsample.hpp"

#include "bangbang/error.hpp"

namespace bangbang::envsim {

DownsampledEnv::DownsampledEnv(std::unique_ptr<Environment> base, int factor)
    : base_(std::move(base)), factor_(factor) {
  if (!base_) throw ConfigError("downsample: null environment");
  if (factor_ < 1) throw ConfigError("control_downsample must be >= 1");
  if (base_->episode_length() % factor_ != 0) {
    throw ConfigError("control_downsample " + std::to_string(factor_) +
                      " does not divide episode_length " +
                      std::to_string(base_->episode_length()));
  }
}

DownsampledEnv::DownsampledEnv(const DownsampledEnv& other)
    : base_(other.base_->clone()), factor_(other.factor_) {}

StepResult DownsampledEnv::step(std::span<const double> action) {
  StepResult total;
  for (int i = 0; i < factor_; ++i) {
    StepResult inner = base_->step(action);
    total.reward += inner.reward;
    total.info.dense_reward += inner.info.dense_reward;
    total.info.state_reward += inner.info.state_reward;
    total.info.penalty += inner.info.penalty;
    total.next_obs = std::move(inner.next_obs);
    if (inner.done) {
      total.done = true;
      break;
    }
  }
  return total;
}

std::unique_ptr<Environment> DownsampledEnv::clone() const {
  return std::make_unique<DownsampledEnv>(*this);
}

std::unique_ptr<Environment> downsample_control(std::unique_ptr<Environment> env, int factor) {
  if (factor == 1) return env;
  return std::make_unique<DownsampledEnv>(std::move(env), factor);
}

}  // namespace bangbang::envsim
