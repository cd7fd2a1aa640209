#include "bangbang/nn/adam.hpp"

#include <cmath>

#include "bangbang/error.hpp"

namespace bangbang::nn {

void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw ShapeError("adam: params and grads differ in size");
  for (double g : grads) {
    if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw ShapeError("adam: moment size mismatch");
  state.step += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {}

std::size_t Adam::size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.size());
  return n;
}

void Adam::step() {
  std::vector<double> flat_p, flat_g;
  flat_p.reserve(size());
  flat_g.reserve(size());
  for (const auto& p : params_) {
    const Matrix& v = p.value();
    const Matrix& g = p.grad();
    for (Index k = 0; k < v.size(); ++k) {
      flat_p.push_back(v.data()[k]);
      flat_g.push_back(g.data()[k]);
    }
  }
  adam_step(flat_p, flat_g, state_, cfg_);
  std::size_t k = 0;
  for (auto& p : params_) {
    Matrix& v = p.mutable_value();
    for (Index i = 0; i < v.size(); ++i) v.data()[i] = flat_p[k++];
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double Adam::clip_grad_norm(double max_norm) {
  double sq = 0.0;
  for (const auto& p : params_) {
    if (p.has_grad()) sq += p.grad().squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& p : params_) {
      if (p.has_grad()) p.node()->grad *= s;
    }
  }
  return norm;
}

void Adam::set_moments(AdamMoments m) {
  if (!m.m.empty() && (m.m.size() != size() || m.v.size() != size())) {
    throw ShapeError("adam: restored moments do not match the parameters");
  }
  state_ = std::move(m);
}

}  // namespace bangbang::nn
