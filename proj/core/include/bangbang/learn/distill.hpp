#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bangbang/config.hpp"
#include "bangbang/learn/train.hpp"

namespace bangbang::learn {

struct DistillConfig {
  long long budget = 100000;  // student environment decisions
  int horizon = 200;
  int num_envs = 8;
  int epochs = 5;
  int minibatch = 256;
  double lr = 1e-3;
  long long eval_interval = 10000;
  int eval_episodes = 10;

  void validate() const;
  // Keys under [distill].
  static DistillConfig from_config(const Config& cfg);
  void to_config(Config& cfg) const;
  static std::vector<std::string> config_keys();
};

// Environment-space targets: the teacher's deterministic action, snapped to
// the student's support for discrete students.
Matrix teacher_targets(const Policy& teacher, const Matrix& obs, heads::HeadKind student);

// -mean log pi_student(target | s)
Tensor bc_loss(const Policy& student, const Matrix& obs, const Matrix& targets);

struct DistillPoint {
  long long env_steps = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double bc_loss = 0.0;  // mean minibatch loss of the last epoch
};

struct DistillResult {
  PolicyCheckpoint checkpoint;
  std::vector<DistillPoint> curve;
};

// The student acts (sampling its own actions) and is regressed onto the
// teacher's targets at the states it visits.
DistillResult distill(const Policy& teacher, const PolicyConfig& student_cfg,
                      const envsim::EnvConfig& env, const DistillConfig& cfg, std::uint64_t seed);

// env_steps, mean_return, std_return, bc_loss
void write_distill_csv(std::ostream& out, const std::vector<DistillPoint>& curve);

}  // namespace bangbang::learn
