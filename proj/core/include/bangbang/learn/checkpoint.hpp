#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "bangbang/envsim/factory.hpp"
#include "bangbang/learn/policy.hpp"
#include "bangbang/nn/adam.hpp"

namespace bangbang::learn {

// A trained policy together with what is needed to rebuild its environment.
struct PolicyCheckpoint {
  Policy policy;
  std::optional<nn::Mlp> value_fn;
  envsim::EnvConfig env;
  nn::AdamMoments policy_optimizer;
  nn::AdamMoments value_optimizer;
};

// {"version", "head", "bijector", "policy_config", "action_spec", "log_scale",
//  "policy", "value", "env_config", "env_config_hash", "policy_optimizer",
//  "value_optimizer"}; networks use the nncore layout.
std::string checkpoint_to_json(const PolicyCheckpoint& ck);
PolicyCheckpoint checkpoint_from_json(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const PolicyCheckpoint& ck);
PolicyCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bangbang::learn
