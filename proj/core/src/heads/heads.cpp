#include "bangbang/heads/heads.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "bangbang/error.hpp"
#include "bangbang/nn/ops.hpp"

namespace bangbang::heads {
namespace {

constexpr double kSupportTol = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_probs(const Matrix& p) {
  if ((p.array() <= 0.0).any() || (p.array() >= 1.0).any() || !p.allFinite()) {
    throw NumericError("degenerate probabilities outside the clamp range");
  }
}

Matrix one_hot_mask(const Matrix& actions, const Matrix& scale, HeadKind kind) {
  const int k = categories(kind);
  Matrix mask = Matrix::Zero(actions.rows(), actions.cols() * k);
  for (Index r = 0; r < actions.rows(); ++r) {
    for (Index i = 0; i < actions.cols(); ++i) {
      mask(r, i * k + category_index(actions(r, i), scale(0, i), kind)) = 1.0;
    }
  }
  return mask;
}

Matrix row_vec(const std::vector<double>& v) {
  Matrix m(1, static_cast<Index>(v.size()));
  for (Index i = 0; i < m.cols(); ++i) m(0, i) = v[i];
  return m;
}

Tensor discrete_probs(const Head& h) {
  if (const auto* b = std::get_if<BernoulliHead>(&h)) return category_probs(*b);
  return std::get<CategoricalHead>(h).probs;
}

Matrix draw_one_hot(const Matrix& probs, int k, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Index d = probs.cols() / k;
  Matrix out = Matrix::Zero(probs.rows(), probs.cols());
  for (Index r = 0; r < probs.rows(); ++r) {
    for (Index i = 0; i < d; ++i) {
      const double x = u(rng);
      double acc = 0.0;
      int pick = k - 1;
      for (int j = 0; j < k - 1; ++j) {
        acc += probs(r, i * k + j);
        if (x < acc) {
          pick = j;
          break;
        }
      }
      out(r, i * k + pick) = 1.0;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(HeadKind k) {
  switch (k) {
    case HeadKind::kGaussian: return "gaussian";
    case HeadKind::kBernoulli: return "bangbang";
    case HeadKind::kCategorical: return "bangoffbang";
  }
  return "?";
}

HeadKind parse_head_kind(std::string_view s) {
  if (s == "gaussian") return HeadKind::kGaussian;
  if (s == "bangbang" || s == "bernoulli") return HeadKind::kBernoulli;
  if (s == "bangoffbang" || s == "categorical") return HeadKind::kCategorical;
  throw ConfigError("unknown policy head '" + std::string(s) + "'");
}

int categories(HeadKind k) {
  switch (k) {
    case HeadKind::kGaussian: return 0;
    case HeadKind::kBernoulli: return 2;
    case HeadKind::kCategorical: return 3;
  }
  return 0;
}

int outputs_per_dim(HeadKind k) {
  switch (k) {
    case HeadKind::kGaussian: return 1;  // the scale is a separate parameter
    case HeadKind::kBernoulli: return 1;
    case HeadKind::kCategorical: return 3;
  }
  return 0;
}

GaussianHead make_gaussian(const Tensor& mean, const Tensor& raw_log_scale) {
  Tensor ls = nn::clamp(raw_log_scale, kMinLogScale, kMaxLogScale);
  if (ls.rows() != mean.rows()) {
    ls = nn::add(ls, Tensor::constant(Matrix::Zero(mean.rows(), mean.cols())));
  }
  if (ls.cols() != mean.cols()) throw ShapeError("gaussian mean and log_scale widths differ");
  return {mean, ls};
}

BernoulliHead make_bernoulli(const Tensor& logits) {
  return {nn::add_scalar(nn::scale(nn::sigmoid(logits), 1.0 - 2.0 * kProbEpsilon), kProbEpsilon)};
}

CategoricalHead make_categorical(const Tensor& logits) {
  if (logits.cols() % 3 != 0) throw ShapeError("categorical logits width must be a multiple of 3");
  return {nn::add_scalar(nn::scale(nn::softmax_groups(logits, 3), 1.0 - 3.0 * kProbEpsilon),
                         kProbEpsilon)};
}

HeadKind kind_of(const Head& h) {
  return std::visit(Overloaded{[](const GaussianHead&) { return HeadKind::kGaussian; },
                               [](const BernoulliHead&) { return HeadKind::kBernoulli; },
                               [](const CategoricalHead&) { return HeadKind::kCategorical; }},
                    h);
}

Index batch_size(const Head& h) {
  return std::visit(Overloaded{[](const GaussianHead& g) { return g.mean.rows(); },
                               [](const BernoulliHead& b) { return b.probs.rows(); },
                               [](const CategoricalHead& c) { return c.probs.rows(); }},
                    h);
}

int action_dim(const Head& h) {
  return std::visit(
      Overloaded{[](const GaussianHead& g) { return static_cast<int>(g.mean.cols()); },
                 [](const BernoulliHead& b) { return static_cast<int>(b.probs.cols()); },
                 [](const CategoricalHead& c) { return static_cast<int>(c.probs.cols() / 3); }},
      h);
}

Tensor sample_gaussian_reparam(const GaussianHead& head, const Matrix& noise) {
  if (!noise.allFinite()) throw NumericError("non-finite reparameterization noise");
  if (noise.rows() != head.mean.rows() || noise.cols() != head.mean.cols()) {
    throw ShapeError("noise shape does not match the gaussian mean");
  }
  return nn::add(head.mean, nn::mul(nn::exp(head.log_scale), Tensor::constant(noise)));
}

Tensor category_probs(const BernoulliHead& head) {
  const Index d = head.probs.cols();
  std::vector<Tensor> parts;
  parts.reserve(2 * d);
  for (Index i = 0; i < d; ++i) {
    Tensor p = nn::slice_cols(head.probs, i, 1);
    parts.push_back(nn::add_scalar(nn::neg(p), 1.0));
    parts.push_back(p);
  }
  return nn::concat_cols(parts);
}

Tensor straight_through(const Matrix& one_hot, const Tensor& probs) {
  return nn::pass_through(one_hot, probs);
}

Tensor sample_straight_through(const BernoulliHead& head, Rng& rng) {
  check_probs(head.probs.value());
  Tensor probs = category_probs(head);
  return straight_through(draw_one_hot(probs.value(), 2, rng), probs);
}

Tensor sample_straight_through(const CategoricalHead& head, Rng& rng) {
  check_probs(head.probs.value());
  return straight_through(draw_one_hot(head.probs.value(), 3, rng), head.probs);
}

Tensor log_prob(const Head& head, const Bijector& b, const Matrix& actions) {
  const Matrix shift = row_vec(b.shift), scale = row_vec(b.scale);
  if (actions.cols() != scale.cols() || action_dim(head) != scale.cols()) {
    throw ShapeError("action width does not match the head");
  }
  if (const auto* g = std::get_if<GaussianHead>(&head)) {
    Matrix x = (actions.rowwise() - shift.row(0)).array().rowwise() / scale.row(0).array();
    Matrix log_det = Matrix::Zero(actions.rows(), 1);
    log_det.array() += scale.array().log().sum();
    if (b.kind == Bijector::Kind::kTanhShiftScale) {
      const double lim = 1.0 - 1e-12;
      x = x.array().max(-lim).min(lim).matrix();
      Matrix pre = x.unaryExpr([](double v) { return std::atanh(v); });
      // log(1 - tanh(y)^2) = 2 (log 2 - y - softplus(-2y)), evaluated for |y|.
      Matrix ld = pre.unaryExpr([](double y) {
        const double a = std::abs(y);
        return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
      });
      log_det += ld.rowwise().sum();
      x = pre;
    }
    Tensor z = nn::div(nn::sub(Tensor::constant(x), g->mean), nn::exp(g->log_scale));
    Tensor per = nn::neg(nn::add_scalar(nn::add(nn::scale(nn::square(z), 0.5), g->log_scale),
                                 0.5 * std::log(2.0 * std::numbers::pi)));
    return nn::sub(nn::row_sum(per), Tensor::constant(log_det));
  }
  const HeadKind kind = kind_of(head);
  Matrix centered = actions.rowwise() - shift.row(0);
  Tensor probs = discrete_probs(head);
  Tensor mask = Tensor::constant(one_hot_mask(centered, scale, kind));
  return nn::row_sum(nn::mul(nn::log(probs), mask));
}

Tensor entropy(const Head& head) {
  if (const auto* g = std::get_if<GaussianHead>(&head)) {
    const double c = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
    return nn::add_scalar(nn::row_sum(g->log_scale), c * static_cast<double>(g->mean.cols()));
  }
  Tensor p = discrete_probs(head);
  return nn::neg(nn::row_sum(nn::mul(p, nn::log(p))));
}

Tensor kl(const Head& head_new, const Head& head_old) {
  if (head_new.index() != head_old.index()) throw Error("kl between different head families");
  if (batch_size(head_new) != batch_size(head_old) || action_dim(head_new) != action_dim(head_old)) {
    throw ShapeError("kl between heads of different shapes");
  }
  if (const auto* gn = std::get_if<GaussianHead>(&head_new)) {
    const auto& go = std::get<GaussianHead>(head_old);
    // log(so/sn) + (sn^2 + (mn-mo)^2) / (2 so^2) - 1/2
    Tensor var_o = nn::exp(nn::scale(go.log_scale, 2.0));
    Tensor num = nn::add(nn::exp(nn::scale(gn->log_scale, 2.0)), nn::square(nn::sub(gn->mean, go.mean)));
    Tensor per = nn::add(nn::sub(go.log_scale, gn->log_scale), nn::scale(nn::div(num, var_o), 0.5));
    return nn::add_scalar(nn::row_sum(per), -0.5 * static_cast<double>(gn->mean.cols()));
  }
  Tensor pn = discrete_probs(head_new), po = discrete_probs(head_old);
  return nn::row_sum(nn::mul(pn, nn::sub(nn::log(pn), nn::log(po))));
}

Matrix mode(const Head& head, const Bijector& b) {
  nn::NoGradGuard guard;
  const HeadKind kind = kind_of(head);
  if (const auto* g = std::get_if<GaussianHead>(&head)) {
    return bijector_apply(b, kind, Tensor::constant(g->mean.value())).value();
  }
  const Matrix p = discrete_probs(head).value();
  const int k = categories(kind);
  Matrix code = Matrix::Zero(p.rows(), p.cols());
  for (Index r = 0; r < p.rows(); ++r) {
    for (Index i = 0; i < p.cols() / k; ++i) {
      Index row = 0, best = 0;
      p.block(r, i * k, 1, k).maxCoeff(&row, &best);
      // Bernoulli ties go to +a_max.
      if (kind == HeadKind::kBernoulli && p(r, i * k) == p(r, i * k + 1)) best = 1;
      code(r, i * k + best) = 1.0;
    }
  }
  return bijector_apply(b, kind, Tensor::constant(code)).value();
}

Matrix sample(const Head& head, const Bijector& b, Rng& rng) {
  nn::NoGradGuard guard;
  const HeadKind kind = kind_of(head);
  if (const auto* g = std::get_if<GaussianHead>(&head)) {
    Matrix noise(g->mean.rows(), g->mean.cols());
    for (Index c = 0; c < noise.cols(); ++c) {
      for (Index r = 0; r < noise.rows(); ++r) noise(r, c) = standard_normal(rng);
    }
    return bijector_apply(b, kind, sample_gaussian_reparam(*g, noise)).value();
  }
  Tensor code = std::holds_alternative<BernoulliHead>(head)
                    ? sample_straight_through(std::get<BernoulliHead>(head), rng)
                    : sample_straight_through(std::get<CategoricalHead>(head), rng);
  return bijector_apply(b, kind, code).value();
}

Matrix distribution_params(const Head& head) {
  if (const auto* g = std::get_if<GaussianHead>(&head)) {
    Matrix out(g->mean.rows(), 2 * g->mean.cols());
    out << g->mean.value(), g->log_scale.value();
    return out;
  }
  if (const auto* bh = std::get_if<BernoulliHead>(&head)) return bh->probs.value();
  return std::get<CategoricalHead>(head).probs.value();
}

Head head_from_params(HeadKind kind, const Matrix& params) {
  switch (kind) {
    case HeadKind::kGaussian: {
      if (params.cols() % 2 != 0) throw ShapeError("gaussian params need an even width");
      const Index d = params.cols() / 2;
      return GaussianHead{Tensor::constant(params.leftCols(d)), Tensor::constant(params.rightCols(d))};
    }
    case HeadKind::kBernoulli:
      return BernoulliHead{Tensor::constant(params)};
    case HeadKind::kCategorical:
      if (params.cols() % 3 != 0) throw ShapeError("categorical params need a width multiple of 3");
      return CategoricalHead{Tensor::constant(params)};
  }
  throw Error("unknown head kind");
}

int discretize_teacher_action(double a, double a_max, HeadKind target) {
  if (target == HeadKind::kBernoulli) return a >= 0.0 ? 1 : 0;
  if (target == HeadKind::kCategorical) {
    const double x = a / a_max;
    if (x > 0.5) return 2;
    if (x < -0.5) return 0;
    return 1;
  }
  throw Error("gaussian targets are not discretized");
}

int category_index(double a, double a_max, HeadKind kind) {
  const double tol = kSupportTol * std::max(1.0, a_max);
  if (std::abs(a - a_max) <= tol) return kind == HeadKind::kBernoulli ? 1 : 2;
  if (std::abs(a + a_max) <= tol) return 0;
  if (kind == HeadKind::kCategorical && std::abs(a) <= tol) return 1;
  throw Error("action " + std::to_string(a) + " is not in the " + std::string(to_string(kind)) +
              " support");
}

}  // namespace bangbang::heads
