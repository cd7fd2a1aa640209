#include "bangbang/oracle/value_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"

namespace bangbang::oracle {

void GridMdp::validate() const {
  if (num_states < 1 || actions.empty()) throw ConfigError("grid MDP needs states and actions");
  const std::size_t sa = static_cast<std::size_t>(num_states) * actions.size();
  if (reward.size() != sa || next_index.size() != sa || next_weight.size() != sa) {
    throw ShapeError("grid MDP tables do not match num_states x num_actions");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("grid MDP gamma must lie in [0, 1)");
  for (std::size_t k = 0; k < sa; ++k) {
    double total = 0.0;
    for (int c = 0; c < 4; ++c) {
      const auto idx = next_index[k][c];
      if (idx < 0 || idx >= num_states) throw ShapeError("grid MDP successor index out of range");
      total += next_weight[k][c];
    }
    if (std::abs(total - 1.0) > 1e-9) throw ShapeError("grid MDP successor weights must sum to 1");
  }
}

void PendulumGridSpec::validate() const {
  if (n_theta < 2 || n_theta_dot < 2) throw ConfigError("grid needs at least 2 points per axis");
  if (n_actions < 2) throw ConfigError("grid needs at least 2 actions");
  if (!(theta_dot_max > 0.0)) throw ConfigError("theta_dot_max must be > 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  reward.validate();
}

double PendulumGridSpec::theta(int i) const {
  return -std::numbers::pi + 2.0 * std::numbers::pi * i / n_theta;
}

double PendulumGridSpec::theta_dot(int j) const {
  return -theta_dot_max + 2.0 * theta_dot_max * j / (n_theta_dot - 1);
}

GridMdp build_pendulum_mdp(const PendulumGridSpec& spec) {
  spec.validate();
  GridMdp mdp;
  mdp.num_states = spec.n_theta * spec.n_theta_dot;
  mdp.gamma = spec.gamma;
  const double a_max = spec.params.a_max;
  for (int k = 0; k < spec.n_actions; ++k) {
    mdp.actions.push_back(-a_max + 2.0 * a_max * k / (spec.n_actions - 1));
  }
  // Keep the middle action exactly zero for odd counts.
  if (spec.n_actions % 2 == 1) mdp.actions[spec.n_actions / 2] = 0.0;
  const std::size_t sa = static_cast<std::size_t>(mdp.num_states) * mdp.actions.size();
  mdp.reward.resize(sa);
  mdp.next_index.resize(sa);
  mdp.next_weight.resize(sa);
  const double h_theta = 2.0 * std::numbers::pi / spec.n_theta;
  const double h_dot = 2.0 * spec.theta_dot_max / (spec.n_theta_dot - 1);
  for (int j = 0; j < spec.n_theta_dot; ++j) {
    for (int i = 0; i < spec.n_theta; ++i) {
      const int s = spec.index(i, j);
      for (int k = 0; k < mdp.num_actions(); ++k) {
        envsim::EnvState st;
        st.q = {spec.theta(i)};
        st.qdot = {spec.theta_dot(j)};
        const double a[1] = {mdp.actions[k]};
        const auto res = envsim::pendulum_step(st, a, spec.params, spec.reward);
        const std::size_t at = static_cast<std::size_t>(s) * mdp.actions.size() + k;
        mdp.reward[at] = res.reward;
        // Periodic angle axis.
        const double u = (st.q[0] + std::numbers::pi) / h_theta;
        const double fu = std::floor(u);
        const double wu = u - fu;
        const int i0 = ((static_cast<int>(fu) % spec.n_theta) + spec.n_theta) % spec.n_theta;
        const int i1 = (i0 + 1) % spec.n_theta;
        // Clamped velocity axis.
        const double w = std::clamp(st.qdot[0], -spec.theta_dot_max, spec.theta_dot_max);
        double v = (w + spec.theta_dot_max) / h_dot;
        int j0 = std::min(static_cast<int>(std::floor(v)), spec.n_theta_dot - 2);
        double wv = v - j0;
        mdp.next_index[at] = {spec.index(i0, j0), spec.index(i1, j0), spec.index(i0, j0 + 1),
                              spec.index(i1, j0 + 1)};
        mdp.next_weight[at] = {(1 - wu) * (1 - wv), wu * (1 - wv), (1 - wu) * wv, wu * wv};
      }
    }
  }
  return mdp;
}

ViResult value_iteration(const GridMdp& mdp, double tol, int max_iters) {
  mdp.validate();
  if (!(tol > 0.0)) throw ConfigError("value iteration tol must be > 0");
  const int n = mdp.num_states;
  const int na = mdp.num_actions();
  std::vector<double> read(n, 0.0), write(n, 0.0);

  auto q_value = [&](const std::vector<double>& v, int s, int k) {
    const std::size_t at = static_cast<std::size_t>(s) * na + k;
    const auto& idx = mdp.next_index[at];
    const auto& w = mdp.next_weight[at];
    const double next = w[0] * v[idx[0]] + w[1] * v[idx[1]] + w[2] * v[idx[2]] + w[3] * v[idx[3]];
    return mdp.reward[at] + mdp.gamma * next;
  };

  ViResult out;
  double residual = 0.0;
  bool converged = false;
  for (int it = 0; it < max_iters; ++it) {
    residual = 0.0;
    for (int s = 0; s < n; ++s) {
      double best = q_value(read, s, 0);
      for (int k = 1; k < na; ++k) best = std::max(best, q_value(read, s, k));
      write[s] = best;
      residual = std::max(residual, std::abs(best - read[s]));
    }
    read.swap(write);
    out.residuals.push_back(residual);
    out.iterations = it + 1;
    if (residual <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("value iteration did not reach tol " + format_double(tol) + " in " +
                               std::to_string(max_iters) + " sweeps",
                           residual);
  }
  out.value = read;
  out.policy.assign(n, 0);
  out.singular.assign(n, 0);
  for (int s = 0; s < n; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < na; ++k) best = std::max(best, q_value(read, s, k));
    int pick = -1, ties = 0;
    for (int k = 0; k < na; ++k) {
      if (q_value(read, s, k) >= best - kTieSlack) {
        ++ties;
        if (pick < 0 || std::abs(mdp.actions[k]) < std::abs(mdp.actions[pick])) pick = k;
      }
    }
    out.policy[s] = pick;
    out.singular[s] = ties > 1 ? 1 : 0;
  }
  return out;
}

double saturation_fraction(const std::vector<double>& actions, double a_max,
                           const std::vector<std::uint8_t>& singular) {
  if (!singular.empty() && singular.size() != actions.size()) {
    throw ShapeError("singular mask size does not match the policy grid");
  }
  std::size_t counted = 0, saturated = 0;
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (!singular.empty() && singular[s]) continue;
    ++counted;
    if (std::abs(std::abs(actions[s]) - a_max) <= 1e-12 * std::max(1.0, a_max)) ++saturated;
  }
  return counted == 0 ? 0.0 : static_cast<double>(saturated) / static_cast<double>(counted);
}

double saturation_fraction(const GridMdp& mdp, const ViResult& vi, double a_max) {
  std::vector<double> acts(vi.policy.size());
  for (std::size_t s = 0; s < acts.size(); ++s) acts[s] = mdp.actions[vi.policy[s]];
  return saturation_fraction(acts, a_max, vi.singular);
}

void write_grid_csv(std::ostream& out, const PendulumGridSpec& spec, const GridMdp& mdp,
                    const ViResult& vi, const GridMetadata& meta) {
  out << "# n_theta=" << spec.n_theta << "\n# n_theta_dot=" << spec.n_theta_dot
      << "\n# theta_range=-pi:pi\n# theta_dot_max=" << format_double(spec.theta_dot_max)
      << "\n# actions=" << mdp.num_actions() << "\n# cost=" << meta.cost
      << "\n# penalty_weight=" << format_double(meta.penalty_weight)
      << "\n# gamma=" << format_double(meta.gamma) << "\n# tol=" << format_double(meta.tol)
      << "\n# iterations=" << meta.iterations << "\n# residual=" << format_double(meta.residual)
      << "\n# saturation_fraction=" << format_double(meta.saturation) << "\n";
  CsvWriter w(out, {"theta", "theta_dot", "action", "value", "singular"});
  for (int j = 0; j < spec.n_theta_dot; ++j) {
    for (int i = 0; i < spec.n_theta; ++i) {
      const int s = spec.index(i, j);
      w.cell(spec.theta(i)).cell(spec.theta_dot(j)).cell(mdp.actions[vi.policy[s]])
          .cell(vi.value[s]).cell(static_cast<int>(vi.singular[s]));
      w.end_row();
    }
  }
}

}  // namespace bangbang::oracle
