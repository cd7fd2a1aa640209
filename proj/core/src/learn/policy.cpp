#include "bangbang/learn/policy.hpp"

#include <sstream>

#include "bangbang/csv.hpp"
#include "bangbang/error.hpp"
#include "bangbang/nn/ops.hpp"

namespace bangbang::learn {
namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

int net_outputs(const PolicyConfig& cfg, int dim) {
  return heads::outputs_per_dim(cfg.head) * dim;
}

}  // namespace

void PolicyConfig::validate() const {
  if (hidden.empty()) throw ConfigError("policy.hidden needs at least one layer");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("policy.hidden sizes must be positive");
  }
  if (bijector == heads::Bijector::Kind::kTanhShiftScale && head != heads::HeadKind::kGaussian) {
    throw ConfigError("policy.bijector tanh requires the gaussian head");
  }
  if (init_log_scale < heads::kMinLogScale || init_log_scale > heads::kMaxLogScale) {
    throw ConfigError("policy.init_log_scale outside [-5, 2]");
  }
}

PolicyConfig PolicyConfig::from_config(const Config& cfg) {
  PolicyConfig out;
  out.head = heads::parse_head_kind(cfg.get_string("policy.head", "gaussian"));
  out.bijector = heads::parse_bijector_kind(cfg.get_string("policy.bijector", "shift_scale"));
  auto hidden = cfg.get_int_list("policy.hidden", {64, 64});
  out.hidden.assign(hidden.begin(), hidden.end());
  out.activation = nn::parse_activation(cfg.get_string("policy.activation", "tanh"));
  out.init_log_scale = cfg.get_double("policy.init_log_scale", 0.0);
  out.validate();
  return out;
}

void PolicyConfig::to_config(Config& cfg) const {
  cfg.set("policy.head", std::string(heads::to_string(head)));
  cfg.set("policy.bijector", std::string(heads::to_string(bijector)));
  std::ostringstream h;
  for (std::size_t i = 0; i < hidden.size(); ++i) h << (i ? "," : "") << hidden[i];
  cfg.set("policy.hidden", h.str());
  cfg.set("policy.activation", std::string(nn::to_string(activation)));
  cfg.set("policy.init_log_scale", format_double(init_log_scale));
}

std::vector<std::string> PolicyConfig::config_keys() {
  return {"policy.head", "policy.bijector", "policy.hidden", "policy.activation",
          "policy.init_log_scale"};
}

Policy::Policy(int obs_dim, envsim::ActionSpec spec, PolicyConfig cfg, Rng& init_rng)
    : cfg_(std::move(cfg)), spec_(std::move(spec)) {
  cfg_.validate();
  spec_.validate();
  bijector_ = heads::Bijector::for_head(cfg_.head, spec_,
                                        cfg_.bijector == heads::Bijector::Kind::kTanhShiftScale);
  net_ = nn::Mlp(layer_sizes(obs_dim, cfg_.hidden, net_outputs(cfg_, spec_.dim)), cfg_.activation,
                 init_rng, cfg_.output_scale);
  if (cfg_.head == heads::HeadKind::kGaussian) {
    log_scale_ = Tensor::parameter(Matrix::Constant(1, spec_.dim, cfg_.init_log_scale));
  }
}

Policy Policy::assemble(PolicyConfig cfg, envsim::ActionSpec spec, nn::Mlp net,
                        std::vector<double> log_scale) {
  Policy p;
  p.cfg_ = std::move(cfg);
  p.spec_ = std::move(spec);
  p.bijector_ = heads::Bijector::for_head(
      p.cfg_.head, p.spec_, p.cfg_.bijector == heads::Bijector::Kind::kTanhShiftScale);
  if (net.output_dim() != net_outputs(p.cfg_, p.spec_.dim)) {
    throw ShapeError("policy network output does not match the head and action dim");
  }
  p.net_ = std::move(net);
  if (p.cfg_.head == heads::HeadKind::kGaussian) {
    if (static_cast<int>(log_scale.size()) != p.spec_.dim) {
      throw ShapeError("log_scale size does not match the action dim");
    }
    Matrix ls(1, p.spec_.dim);
    for (int i = 0; i < p.spec_.dim; ++i) ls(0, i) = log_scale[i];
    p.log_scale_ = Tensor::parameter(ls);
  }
  return p;
}

heads::Head Policy::head(const Tensor& obs) const {
  if (obs.cols() != obs_dim()) throw ShapeError("observation width does not match the policy");
  Tensor out = net_.forward(obs);
  switch (cfg_.head) {
    case heads::HeadKind::kGaussian: return heads::make_gaussian(out, log_scale_);
    case heads::HeadKind::kBernoulli: return heads::make_bernoulli(out);
    case heads::HeadKind::kCategorical: return heads::make_categorical(out);
  }
  throw Error("unknown head kind");
}

heads::Head Policy::head(const Matrix& obs) const { return head(Tensor::constant(obs)); }

Matrix Policy::sample(const Matrix& obs, Rng& rng) const {
  nn::NoGradGuard guard;
  return heads::sample(head(obs), bijector_, rng);
}

Matrix Policy::mode(const Matrix& obs) const {
  nn::NoGradGuard guard;
  return heads::mode(head(obs), bijector_);
}

Matrix Policy::executable(const Matrix& actions) const {
  Matrix out = actions;
  for (Index r = 0; r < out.rows(); ++r) {
    for (Index c = 0; c < out.cols(); ++c) {
      const double m = spec_.a_max[c];
      out(r, c) = std::clamp(out(r, c), -m, m);
    }
  }
  return out;
}

Tensor Policy::log_prob(const Matrix& obs, const Matrix& actions) const {
  return heads::log_prob(head(obs), bijector_, actions);
}

std::vector<Tensor> Policy::parameters() const {
  std::vector<Tensor> out = net_.parameters();
  if (log_scale_.defined()) out.push_back(log_scale_);
  return out;
}

std::size_t Policy::parameter_count() const {
  return net_.parameter_count() + (log_scale_.defined() ? log_scale_.size() : 0);
}

std::vector<double> Policy::flat() const {
  std::vector<double> out = net_.flat();
  if (log_scale_.defined()) {
    const Matrix& ls = log_scale_.value();
    out.insert(out.end(), ls.data(), ls.data() + ls.size());
  }
  return out;
}

void Policy::set_flat(std::span<const double> values) {
  if (values.size() != parameter_count()) throw ShapeError("flat policy size mismatch");
  const std::size_t n = net_.parameter_count();
  net_.set_flat(values.first(n));
  if (log_scale_.defined()) {
    Matrix& ls = log_scale_.mutable_value();
    for (Index i = 0; i < ls.size(); ++i) ls.data()[i] = values[n + i];
  }
}

void Policy::zero_grad() {
  net_.zero_grad();
  if (log_scale_.defined()) log_scale_.zero_grad();
}

Policy Policy::clone() const {
  Policy p;
  p.cfg_ = cfg_;
  p.spec_ = spec_;
  p.bijector_ = bijector_;
  p.net_ = net_.clone();
  if (log_scale_.defined()) p.log_scale_ = Tensor::parameter(log_scale_.value());
  return p;
}

nn::Mlp make_value_net(int obs_dim, const PolicyConfig& cfg, Rng& init_rng) {
  return nn::Mlp(layer_sizes(obs_dim, cfg.hidden, 1), cfg.activation, init_rng, 1.0);
}

}  // namespace bangbang::learn
