#include <string>

#include "bangbang/error.hpp"
#include "bangbang/heads/heads.hpp"
#include "bangbang/nn/ops.hpp"

namespace bangbang::heads {

std::string_view to_string(Bijector::Kind k) {
  return k == Bijector::Kind::kShiftScale ? "shift_scale" : "tanh_shift_scale";
}

Bijector::Kind parse_bijector_kind(std::string_view s) {
  if (s == "shift_scale") return Bijector::Kind::kShiftScale;
  if (s == "tanh_shift_scale" || s == "tanh") return Bijector::Kind::kTanhShiftScale;
  throw ConfigError("unknown bijector '" + std::string(s) + "'");
}

Bijector Bijector::for_head(HeadKind head, const envsim::ActionSpec& spec, bool tanh) {
  spec.validate();
  if (tanh && head != HeadKind::kGaussian) {
    throw ConfigError("tanh bijector is only defined for the gaussian head");
  }
  Bijector b;
  b.kind = tanh ? Kind::kTanhShiftScale : Kind::kShiftScale;
  b.shift.assign(spec.dim, 0.0);
  b.scale = spec.a_max;
  return b;
}

namespace {

// Category values before shift/scale.
std::vector<double> support_values(HeadKind kind) {
  if (kind == HeadKind::kBernoulli) return {-1.0, 1.0};
  return {-1.0, 0.0, 1.0};
}

}  // namespace

Tensor bijector_apply(const Bijector& b, HeadKind kind, const Tensor& pre_sample) {
  const auto d = static_cast<Index>(b.scale.size());
  if (static_cast<Index>(b.shift.size()) != d) throw ShapeError("bijector shift/scale size mismatch");
  Matrix shift(1, d), scale(1, d);
  for (Index i = 0; i < d; ++i) {
    shift(0, i) = b.shift[i];
    scale(0, i) = b.scale[i];
  }
  Tensor x = pre_sample;
  if (kind == HeadKind::kGaussian) {
    if (pre_sample.cols() != d) throw ShapeError("gaussian pre-sample width does not match bijector");
    if (b.kind == Bijector::Kind::kTanhShiftScale) x = nn::tanh(x);
  } else {
    const auto values = support_values(kind);
    const auto k = static_cast<Index>(values.size());
    if (pre_sample.cols() != k * d) throw ShapeError("one-hot width does not match bijector");
    Matrix decode = Matrix::Zero(k * d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < k; ++j) decode(i * k + j, i) = values[j];
    }
    x = nn::matmul(x, Tensor::constant(std::move(decode)));
  }
  return nn::add(nn::mul(x, Tensor::constant(scale)), Tensor::constant(shift));
}

}  // namespace bangbang::heads
