#include "bangbang/robust/disturbance.hpp"

#include <algorithm>
#include <deque>
#include <random>

#include "bangbang/csv.hpp"
#include "bangbang/envsim/downsample.hpp"
#include "bangbang/error.hpp"

namespace bangbang::robust {
namespace {

int order_of(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::kDownsample: return 0;
    case DisturbanceKind::kDelay: return 1;
    case DisturbanceKind::kStuck:
    case DisturbanceKind::kDropped: return 2;
    case DisturbanceKind::kNoise: return 3;
    case DisturbanceKind::kNone: return 4;
  }
  return 4;
}

}  // namespace

std::string_view to_string(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::kNone: return "none";
    case DisturbanceKind::kStuck: return "stuck";
    case DisturbanceKind::kDropped: return "dropped";
    case DisturbanceKind::kDelay: return "delay";
    case DisturbanceKind::kNoise: return "noise";
    case DisturbanceKind::kDownsample: return "downsample";
  }
  return "?";
}

DisturbanceKind parse_disturbance_kind(std::string_view s) {
  for (auto k : {DisturbanceKind::kNone, DisturbanceKind::kStuck, DisturbanceKind::kDropped,
                 DisturbanceKind::kDelay, DisturbanceKind::kNoise, DisturbanceKind::kDownsample}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown disturbance kind '" + std::string(s) + "'");
}

void DisturbanceConfig::validate() const {
  const bool sd = kind == DisturbanceKind::kStuck || kind == DisturbanceKind::kDropped;
  auto expect = [&](bool set, bool wanted, const char* field) {
    if (set != wanted) {
      throw ConfigError(std::string("disturbance ") + std::string(to_string(kind)) +
                        (wanted ? " requires " : " does not take ") + field);
    }
  };
  expect(prob.has_value(), sd, "prob");
  expect(duration.has_value(), sd, "duration");
  expect(delay_steps.has_value(), kind == DisturbanceKind::kDelay, "delay_steps");
  expect(noise_std.has_value(), kind == DisturbanceKind::kNoise, "noise_std");
  expect(downsample_factor.has_value(), kind == DisturbanceKind::kDownsample, "downsample_factor");
  if (prob && !(*prob >= 0.0 && *prob <= 1.0)) throw ConfigError("disturbance prob outside [0, 1]");
  if (duration && *duration < 1) throw ConfigError("disturbance duration must be >= 1");
  if (delay_steps && *delay_steps < 0) throw ConfigError("delay_steps must be >= 0");
  if (noise_std && !(*noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (downsample_factor && *downsample_factor < 1) throw ConfigError("downsample_factor must be >= 1");
}

std::string DisturbanceConfig::params_string() const {
  std::string out;
  auto add = [&](const std::string& kv) { out += (out.empty() ? "" : ";") + kv; };
  if (prob) add("prob=" + format_double(*prob));
  if (duration) add("duration=" + (*duration == kForever ? std::string("inf") : std::to_string(*duration)));
  if (delay_steps) add("delay_steps=" + std::to_string(*delay_steps));
  if (noise_std) add("noise_std=" + format_double(*noise_std));
  if (downsample_factor) add("downsample_factor=" + std::to_string(*downsample_factor));
  return out;
}

DisturbanceConfig DisturbanceConfig::none() { return {}; }

DisturbanceConfig DisturbanceConfig::stuck(double p, int d) {
  DisturbanceConfig c;
  c.kind = DisturbanceKind::kStuck;
  c.prob = p;
  c.duration = d;
  return c;
}

DisturbanceConfig DisturbanceConfig::dropped(double p, int d) {
  DisturbanceConfig c = stuck(p, d);
  c.kind = DisturbanceKind::kDropped;
  return c;
}

DisturbanceConfig DisturbanceConfig::delay(int steps) {
  DisturbanceConfig c;
  c.kind = DisturbanceKind::kDelay;
  c.delay_steps = steps;
  return c;
}

DisturbanceConfig DisturbanceConfig::noise(double std) {
  DisturbanceConfig c;
  c.kind = DisturbanceKind::kNoise;
  c.noise_std = std;
  return c;
}

DisturbanceConfig DisturbanceConfig::downsample(int factor) {
  DisturbanceConfig c;
  c.kind = DisturbanceKind::kDownsample;
  c.downsample_factor = factor;
  return c;
}

std::vector<DisturbanceConfig> default_disturbances(int downsample_factor) {
  return {DisturbanceConfig::downsample(downsample_factor), DisturbanceConfig::stuck(),
          DisturbanceConfig::dropped(), DisturbanceConfig::delay(), DisturbanceConfig::noise()};
}

int default_downsample_factor(envsim::EnvId id) {
  switch (id) {
    case envsim::EnvId::kPendulum: return 2;
    case envsim::EnvId::kCartpole: return 10;
    case envsim::EnvId::kPointmass: return 4;
  }
  return 1;
}

DisturbedEnv::DisturbedEnv(std::unique_ptr<envsim::Environment> base,
                           std::vector<DisturbanceConfig> stages)
    : base_(std::move(base)), stages_(std::move(stages)) {
  if (!base_) throw Error("null environment");
  std::uint64_t seed = 0;
  for (const auto& s : stages_) {
    s.validate();
    if (s.kind == DisturbanceKind::kDownsample) {
      throw ConfigError("downsample is a decision-rate change; use wrap()");
    }
    seed = splitmix64(seed ^ s.seed);
  }
  rng_ = Rng(seed);
  state_.resize(stages_.size());
}

DisturbedEnv::DisturbedEnv(const DisturbedEnv& other)
    : base_(other.base_->clone()),
      stages_(other.stages_),
      state_(other.state_),
      rng_(other.rng_),
      activations_(other.activations_) {}

std::unique_ptr<envsim::Environment> DisturbedEnv::clone() const {
  return std::make_unique<DisturbedEnv>(*this);
}

std::vector<double> DisturbedEnv::reset() {
  const std::size_t n = static_cast<std::size_t>(base_->observation_dim());
  for (auto& st : state_) {
    st.remaining.assign(n, 0);
    st.held.assign(n, 0.0);
    st.history.clear();
  }
  return apply(base_->reset(), true);
}

envsim::StepResult DisturbedEnv::step(std::span<const double> action) {
  envsim::StepResult res = base_->step(action);
  res.next_obs = apply(std::move(res.next_obs), false);
  return res;
}

std::vector<double> DisturbedEnv::apply(std::vector<double> obs, bool at_reset) {
  for (std::size_t k = 0; k < stages_.size(); ++k) {
    const auto& cfg = stages_[k];
    auto& st = state_[k];
    switch (cfg.kind) {
      case DisturbanceKind::kNone:
      case DisturbanceKind::kDownsample:
        break;
      case DisturbanceKind::kDelay: {
        // Holds at most delay_steps + 1 entries; the front is obs(t - delay),
        // or the reset observation while t < delay.
        st.history.push_back(obs);
        if (st.history.size() > static_cast<std::size_t>(*cfg.delay_steps) + 1) {
          st.history.pop_front();
        }
        obs = st.history.front();
        break;
      }
      case DisturbanceKind::kStuck:
      case DisturbanceKind::kDropped: {
        std::bernoulli_distribution fire(*cfg.prob);
        for (std::size_t i = 0; i < obs.size(); ++i) {
          if (!at_reset && fire(rng_)) {
            ++activations_;
            st.remaining[i] = *cfg.duration;
          }
          if (st.remaining[i] > 0) {
            obs[i] = cfg.kind == DisturbanceKind::kStuck ? st.held[i] : 0.0;
            if (st.remaining[i] != kForever) --st.remaining[i];
          } else {
            st.held[i] = obs[i];
          }
        }
        break;
      }
      case DisturbanceKind::kNoise: {
        if (*cfg.noise_std == 0.0) break;
        for (double& v : obs) v += *cfg.noise_std * standard_normal(rng_);
        break;
      }
    }
  }
  return obs;
}

std::unique_ptr<envsim::Environment> wrap(std::unique_ptr<envsim::Environment> env,
                                          const DisturbanceConfig& cfg) {
  return wrap_composed(std::move(env), {cfg});
}

std::unique_ptr<envsim::Environment> wrap_composed(std::unique_ptr<envsim::Environment> env,
                                                   std::vector<DisturbanceConfig> cfgs) {
  std::stable_sort(cfgs.begin(), cfgs.end(), [](const auto& a, const auto& b) {
    return order_of(a.kind) < order_of(b.kind);
  });
  std::vector<DisturbanceConfig> observation;
  for (const auto& c : cfgs) {
    c.validate();
    if (c.kind == DisturbanceKind::kDownsample) {
      env = envsim::downsample_control(std::move(env), *c.downsample_factor);
    } else if (c.kind != DisturbanceKind::kNone) {
      observation.push_back(c);
    }
  }
  if (observation.empty()) return env;
  return std::make_unique<DisturbedEnv>(std::move(env), std::move(observation));
}

}  // namespace bangbang::robust
