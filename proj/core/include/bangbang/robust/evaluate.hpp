#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bangbang/envsim/factory.hpp"
#include "bangbang/learn/policy.hpp"
#include "bangbang/robust/disturbance.hpp"

namespace bangbang::robust {

struct ScoreRow {
  DisturbanceKind kind = DisturbanceKind::kNone;
  std::string params;
  double mean_return = 0.0;
  double normalized_mean = 0.0;
  double normalized_std = 0.0;
  int episodes = 0;
  bool normalized = true;  // false when the undisturbed mean return is <= 0
  std::vector<double> returns;
};

// Return of one deterministic-action episode on `env`.
double episode_return(const learn::Policy& policy, envsim::Environment& env);

// For each disturbance, `episodes` runs (environment stream ("eval", k) of
// `seed`, disturbance stream ("disturbance", k)), each return divided by the
// undisturbed mean return. Throws Error when that mean is <= 0 and `strict`;
// otherwise rows are marked as not normalized. The first row is always the
// undisturbed reference.
std::vector<ScoreRow> evaluate_disturbed(const learn::Policy& policy,
                                         const envsim::EnvConfig& env,
                                         const std::vector<DisturbanceConfig>& cfgs, int episodes,
                                         std::uint64_t seed, bool strict = true);

// disturbance_kind, params, mean_return, normalized_mean, normalized_std, episodes
void write_scores_csv(std::ostream& out, const std::vector<ScoreRow>& rows);

}  // namespace bangbang::robust
