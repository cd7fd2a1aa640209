#include "bangbang/oracle/optimal_action.hpp"

#include <algorithm>
#include <cmath>

#include "bangbang/error.hpp"

namespace bangbang::oracle {
namespace {

void check(double q) {
  if (!std::isfinite(q)) throw NumericError("switching value must be finite");
}

}  // namespace

OptimalAction optimal_action_ms(double q) {
  check(q);
  if (q > 0.0) return {1.0, false};
  if (q < 0.0) return {-1.0, false};
  return {0.0, true};
}

OptimalAction optimal_action_mf(double q) {
  check(q);
  if (q > 1.0) return {1.0, false};
  if (q < -1.0) return {-1.0, false};
  if (std::abs(q) < 1.0) return {0.0, false};
  return {0.0, true};
}

double optimal_action_me(double q, double weight) {
  check(q);
  if (!(weight > 0.0) || !std::isfinite(weight)) throw ConfigError("ME weight must be > 0");
  return std::clamp(q / (2.0 * weight), -1.0, 1.0);
}

}  // namespace bangbang::oracle
