#include "bangbang/learn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "../nn/json_io.hpp"
#include "bangbang/error.hpp"

namespace bangbang::learn {
namespace {

nlohmann::json moments_json(const nn::AdamMoments& m) {
  return {{"step", m.step}, {"m", m.m}, {"v", m.v}};
}

nn::AdamMoments moments_from(const nlohmann::json& j) {
  nn::AdamMoments m;
  m.step = j.at("step").get<long long>();
  m.m = j.at("m").get<std::vector<double>>();
  m.v = j.at("v").get<std::vector<double>>();
  return m;
}

}  // namespace

std::string checkpoint_to_json(const PolicyCheckpoint& ck) {
  const Policy& p = ck.policy;
  nlohmann::json j;
  j["version"] = nn::kCheckpointVersion;
  j["head"] = std::string(heads::to_string(p.kind()));
  j["bijector"] = {{"kind", std::string(heads::to_string(p.bijector().kind))},
                   {"shift", p.bijector().shift},
                   {"scale", p.bijector().scale}};
  Config pc;
  p.config().to_config(pc);
  j["policy_config"] = pc.entries();
  j["action_spec"] = {{"dim", p.action_spec().dim}, {"a_max", p.action_spec().a_max}};
  std::vector<double> ls;
  if (p.log_scale().defined()) {
    const Matrix& m = p.log_scale().value();
    ls.assign(m.data(), m.data() + m.size());
  }
  j["log_scale"] = ls;
  j["policy"] = nn::network_json(nn::snapshot(p.net()));
  j["value"] = ck.value_fn ? nn::network_json(nn::snapshot(*ck.value_fn)) : nlohmann::json();
  Config ec;
  ck.env.to_config(ec);
  j["env_config"] = ec.entries();
  j["env_config_hash"] = ck.env.hash_hex();
  j["policy_optimizer"] = moments_json(ck.policy_optimizer);
  j["value_optimizer"] = moments_json(ck.value_optimizer);
  return j.dump(1);
}

PolicyCheckpoint checkpoint_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != nn::kCheckpointVersion) {
      throw Error("unsupported checkpoint version");
    }
    Config pc;
    for (const auto& [k, v] : j.at("policy_config").items()) pc.set(k, v.get<std::string>());
    PolicyConfig cfg = PolicyConfig::from_config(pc);
    envsim::ActionSpec spec;
    spec.dim = j.at("action_spec").at("dim").get<int>();
    spec.a_max = j.at("action_spec").at("a_max").get<std::vector<double>>();
    Config ec;
    for (const auto& [k, v] : j.at("env_config").items()) ec.set(k, v.get<std::string>());
    PolicyCheckpoint ck;
    ck.env = envsim::EnvConfig::from_config(ec);
    if (ck.env.hash_hex() != j.at("env_config_hash").get<std::string>()) {
      throw Error("checkpoint env_config_hash does not match its env_config");
    }
    ck.policy = Policy::assemble(cfg, spec, nn::restore(nn::network_from(j.at("policy"))),
                                 j.at("log_scale").get<std::vector<double>>());
    if (!j.at("value").is_null()) ck.value_fn = nn::restore(nn::network_from(j.at("value")));
    ck.policy_optimizer = moments_from(j.at("policy_optimizer"));
    ck.value_optimizer = moments_from(j.at("value_optimizer"));
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const PolicyCheckpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << checkpoint_to_json(ck) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

PolicyCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace bangbang::learn
