#include "bangbang/envsim/reward.hpp"

#include <algorithm>
#include <cmath>

#include "bangbang/error.hpp"

namespace bangbang::envsim {

ActionSpec ActionSpec::uniform(int dim, double bound) {
  ActionSpec spec{dim, std::vector<double>(static_cast<std::size_t>(dim), bound)};
  spec.validate();
  return spec;
}

void ActionSpec::validate() const {
  if (dim < 1) throw ConfigError("action dim must be >= 1");
  if (a_max.size() != static_cast<std::size_t>(dim)) {
    throw ConfigError("a_max size does not match action dim");
  }
  for (double b : a_max) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("a_max must be positive and finite");
  }
}

bool ActionSpec::contains(std::span<const double> action, double tol) const {
  if (action.size() != a_max.size()) return false;
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (!std::isfinite(action[i]) || std::abs(action[i]) > a_max[i] + tol) return false;
  }
  return true;
}

std::vector<double> ActionSpec::clip(std::span<const double> action) const {
  if (action.size() != a_max.size()) throw ShapeError("action has wrong dimension");
  std::vector<double> out(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) {
    out[i] = std::clamp(action[i], -a_max[i], a_max[i]);
  }
  return out;
}

std::vector<double> ActionSpec::normalize(std::span<const double> action) const {
  if (action.size() != a_max.size()) throw ShapeError("action has wrong dimension");
  std::vector<double> out(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) out[i] = action[i] / a_max[i];
  return out;
}

std::string_view to_string(CostStructure c) {
  switch (c) {
    case CostStructure::kMS: return "MS";
    case CostStructure::kMF: return "MF";
    case CostStructure::kME: return "ME";
  }
  return "?";
}

CostStructure parse_cost_structure(std::string_view s) {
  if (s == "MS" || s == "ms") return CostStructure::kMS;
  if (s == "MF" || s == "mf") return CostStructure::kMF;
  if (s == "ME" || s == "me") return CostStructure::kME;
  throw ConfigError("unknown reward structure '" + std::string(s) + "' (MS|MF|ME)");
}

void RewardSpec::validate() const {
  if (!(penalty_weight >= 0.0) || !std::isfinite(penalty_weight)) {
    throw ConfigError("penalty_weight must be a nonnegative finite number");
  }
  if (sparse_threshold) {
    double r = *sparse_threshold;
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("sparse_threshold must lie in (0, 1)");
  }
}

double RewardSpec::action_cost(std::span<const double> normalized_action) const {
  if (structure == CostStructure::kMS || normalized_action.empty()) return 0.0;
  double acc = 0.0;
  for (double a : normalized_action) {
    acc += structure == CostStructure::kMF ? std::abs(a) : a * a;
  }
  return penalty_weight * acc / static_cast<double>(normalized_action.size());
}

double sparsify_reward(double r_dense, double r_th) {
  if (!(r_th > 0.0 && r_th < 1.0)) throw ConfigError("sparse threshold must lie in (0, 1)");
  return std::clamp(r_dense - r_th, 0.0, 1.0 - r_th) / (1.0 - r_th);
}

double compose_reward(double r_state, std::span<const double> normalized_action,
                      const RewardSpec& spec) {
  double r = spec.sparse_threshold ? sparsify_reward(r_state, *spec.sparse_threshold) : r_state;
  return r - spec.action_cost(normalized_action);
}

}  // namespace bangbang::envsim
