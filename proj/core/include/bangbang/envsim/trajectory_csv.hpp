#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bangbang/envsim/environment.hpp"

namespace bangbang::envsim {

struct TrajectoryStep {
  int t = 0;
  std::vector<double> obs;     // observation the action was chosen from
  std::vector<double> action;  // executed (post-bijector, clipped) action
  double reward = 0.0;
  bool done = false;
};

// An environment rollout as stored on disk: columns t, <obs names>, a0..,
// reward, done.
struct TrajectoryLog {
  std::vector<std::string> obs_names;
  int action_dim = 0;
  std::vector<TrajectoryStep> steps;
};

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);
TrajectoryLog read_trajectory_csv(std::istream& in);
TrajectoryLog read_trajectory_csv_file(const std::string& path);

// Identify the environment from the observation column names.
EnvId infer_env_id(const TrajectoryLog& log);

}  // namespace bangbang::envsim
