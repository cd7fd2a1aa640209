#pragma once

namespace bangbang::oracle {

// Maximizer of the control-dependent Hamiltonian term over a in [-1, 1],
// given the switching value q = p^T g(s). When the maximizer is not unique
// `singular` is set and `action` carries no information (0).
struct OptimalAction {
  double action = 0.0;
  bool singular = false;
};

// max q a: q > 0 -> +1, q < 0 -> -1, q = 0 singular.
OptimalAction optimal_action_ms(double q);
// max q a - |a|: q > 1 -> +1, q < -1 -> -1, |q| < 1 -> 0, |q| = 1 singular.
OptimalAction optimal_action_mf(double q);
// max q a - weight a^2 = clip(q / (2 weight), -1, 1). Requires weight > 0.
double optimal_action_me(double q, double weight);

}  // namespace bangbang::oracle
