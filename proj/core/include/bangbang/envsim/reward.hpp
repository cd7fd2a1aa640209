#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bangbang::envsim {

// Box action space |a_i| <= a_max[i].
struct ActionSpec {
  int dim = 1;
  std::vector<double> a_max{1.0};

  static ActionSpec uniform(int dim, double bound);
  void validate() const;
  bool contains(std::span<const double> action, double tol = 0.0) const;
  // Elementwise clip into the box.
  std::vector<double> clip(std::span<const double> action) const;
  // a_i / a_max_i, so every component lies in [-1, 1].
  std::vector<double> normalize(std::span<const double> action) const;
};

// Objective family: maximum state reward, minimum fuel (|a|), minimum energy (a^2).
enum class CostStructure { kMS, kMF, kME };

std::string_view to_string(CostStructure c);
CostStructure parse_cost_structure(std::string_view s);

struct RewardSpec {
  CostStructure structure = CostStructure::kMS;
  double penalty_weight = 0.0;
  std::optional<double> sparse_threshold;

  void validate() const;
  // c(a) on normalized actions: 0 (MS), w*mean|a_i| (MF), w*mean(a_i^2) (ME).
  double action_cost(std::span<const double> normalized_action) const;
};

// clip(r - r_th, 0, 1 - r_th) / (1 - r_th). Throws ConfigError unless 0 < r_th < 1.
double sparsify_reward(double r_dense, double r_th);

// Sparsified (when configured) state reward minus the action cost.
// `normalized_action` is the executed action divided by a_max.
double compose_reward(double r_state, std::span<const double> normalized_action,
                      const RewardSpec& spec);

}  // namespace bangbang::envsim
