#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bangbang/envsim/environment.hpp"

namespace bangbang::robust {

enum class DisturbanceKind { kNone, kStuck, kDropped, kDelay, kNoise, kDownsample };

std::string_view to_string(DisturbanceKind k);
DisturbanceKind parse_disturbance_kind(std::string_view s);

inline constexpr int kForever = std::numeric_limits<int>::max();

// Only the fields relevant to `kind` may be set: prob and duration for
// stuck/dropped, delay_steps for delay, noise_std for noise,
// downsample_factor for downsample.
struct DisturbanceConfig {
  DisturbanceKind kind = DisturbanceKind::kNone;
  std::optional<double> prob;
  std::optional<int> duration;  // kForever never releases
  std::optional<int> delay_steps;
  std::optional<double> noise_std;
  std::optional<int> downsample_factor;
  std::uint64_t seed = 0;

  void validate() const;
  // "prob=0.05;duration=5" style, empty for kNone.
  std::string params_string() const;

  static DisturbanceConfig none();
  static DisturbanceConfig stuck(double prob = 0.05, int duration = 5);
  static DisturbanceConfig dropped(double prob = 0.05, int duration = 5);
  static DisturbanceConfig delay(int steps = 6);
  static DisturbanceConfig noise(double std = 0.3);
  static DisturbanceConfig downsample(int factor);
};

// The five medium disturbances with the given control downsample factor.
std::vector<DisturbanceConfig> default_disturbances(int downsample_factor);
// Control downsample factor used for each environment.
int default_downsample_factor(envsim::EnvId id);

// Observation-side disturbance; rewards and physical state are untouched.
// The reset observation passes through stuck/dropped/delay unchanged.
class DisturbedEnv final : public envsim::Environment {
 public:
  DisturbedEnv(std::unique_ptr<envsim::Environment> base, std::vector<DisturbanceConfig> stages);
  DisturbedEnv(const DisturbedEnv& other);

  envsim::EnvId id() const override { return base_->id(); }
  const envsim::ActionSpec& action_spec() const override { return base_->action_spec(); }
  int observation_dim() const override { return base_->observation_dim(); }
  std::vector<std::string> observation_names() const override {
    return base_->observation_names();
  }
  int episode_length() const override { return base_->episode_length(); }
  double decision_interval() const override { return base_->decision_interval(); }
  const envsim::EnvState& state() const override { return base_->state(); }

  std::vector<double> reset() override;
  envsim::StepResult step(std::span<const double> action) override;
  std::unique_ptr<envsim::Environment> clone() const override;

  // Stuck/dropped activations (Bernoulli successes) since construction.
  long long activations() const { return activations_; }

 private:
  struct StageState {
    std::vector<int> remaining;       // stuck/dropped countdown per coordinate
    std::vector<double> held;         // last reading passed through, per coordinate
    std::deque<std::vector<double>> history;  // delay buffer
  };

  std::vector<double> apply(std::vector<double> obs, bool at_reset);

  std::unique_ptr<envsim::Environment> base_;
  std::vector<DisturbanceConfig> stages_;
  std::vector<StageState> state_;
  Rng rng_;
  long long activations_ = 0;
};

// Applies one disturbance. Downsample delegates to envsim::downsample_control.
std::unique_ptr<envsim::Environment> wrap(std::unique_ptr<envsim::Environment> env,
                                          const DisturbanceConfig& cfg);
// Applies several in the fixed order downsample, delay, stuck/dropped, noise.
std::unique_ptr<envsim::Environment> wrap_composed(std::unique_ptr<envsim::Environment> env,
                                                   std::vector<DisturbanceConfig> cfgs);

}  // namespace bangbang::robust
