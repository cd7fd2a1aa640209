#include <gtest/gtest.h>

#include <cmath>

#include "bangbang/error.hpp"
#include "bangbang/nn/adam.hpp"
#include "bangbang/nn/checkpoint.hpp"
#include "bangbang/nn/mlp.hpp"
#include "bangbang/nn/ops.hpp"
#include "testing.hpp"

namespace bangbang::nn {
namespace {

using testing::max_rel_error;
using testing::numeric_grad;

Matrix random_matrix(Index r, Index c, Rng& rng, double s = 1.0) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = s * standard_normal(rng);
  return m;
}

TEST(Mlp, ParameterCount) {
  Rng rng(0);
  Mlp net({3, 64, 64, 2}, Activation::kTanh, rng);
  EXPECT_EQ(net.parameter_count(), static_cast<std::size_t>((3 + 1) * 64 + (64 + 1) * 64 + (64 + 1) * 2));
}

TEST(Mlp, ZeroWeightsGiveBias) {
  Rng rng(0);
  Mlp net({3, 4, 2}, Activation::kTanh, rng);
  for (auto& p : net.parameters()) p.mutable_value().setZero();
  net.parameters()[3].mutable_value() << 0.5, -2.0;
  Matrix x = random_matrix(5, 3, rng);
  Matrix y = net.predict(x);
  for (Index r = 0; r < 5; ++r) {
    EXPECT_EQ(y(r, 0), 0.5);
    EXPECT_EQ(y(r, 1), -2.0);
  }
}

TEST(Mlp, IdentityLayer) {
  Rng rng(0);
  Mlp net({3, 3}, Activation::kRelu, rng);
  net.parameters()[0].mutable_value() = Matrix::Identity(3, 3);
  Matrix x = random_matrix(4, 3, rng);
  EXPECT_EQ(net.predict(x), x);
}

TEST(Mlp, MatchesStraightLineEvaluation) {
  Rng rng(1);
  Mlp net({4, 7, 3}, Activation::kTanh, rng);
  Matrix x = random_matrix(6, 4, rng);
  const auto& p = net.parameters();
  Matrix h = x * p[0].value();
  for (Index r = 0; r < h.rows(); ++r) {
    for (Index c = 0; c < h.cols(); ++c) h(r, c) = std::tanh(h(r, c) + p[1].value()(0, c));
  }
  Matrix y = h * p[2].value();
  for (Index r = 0; r < y.rows(); ++r) y.row(r) += p[3].value().row(0);
  EXPECT_LE((net.predict(x) - y).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((net.forward(Tensor::constant(x)).value() - y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mlp, ShapeMismatchThrows) {
  Rng rng(1);
  Mlp net({4, 2}, Activation::kTanh, rng);
  EXPECT_THROW(net.predict(Matrix::Zero(2, 3)), ShapeError);
}

TEST(Autodiff, SumOfParamsHasUnitGradient) {
  Rng rng(2);
  Mlp net({3, 5, 2}, Activation::kTanh, rng);
  Tensor loss = Tensor::scalar(0.0);
  for (const auto& p : net.parameters()) loss = loss + sum(p);
  loss.backward();
  for (const auto& p : net.parameters()) EXPECT_TRUE((p.grad().array() == 1.0).all());
}

TEST(Autodiff, ZeroTimesAnythingHasZeroGradient) {
  Rng rng(2);
  Mlp net({3, 5, 2}, Activation::kTanh, rng);
  Tensor loss = 0.0 * sum(square(net.forward(Tensor::constant(random_matrix(4, 3, rng)))));
  loss.backward();
  for (const auto& p : net.parameters()) EXPECT_TRUE((p.grad().array() == 0.0).all());
}

TEST(Autodiff, BackwardWithoutTapeThrows) {
  EXPECT_THROW(Tensor::constant(Matrix::Ones(1, 1)).backward(), Error);
  Tensor p = Tensor::parameter(Matrix::Ones(2, 2));
  EXPECT_THROW(square(p).backward(), ShapeError);
}

TEST(Autodiff, NonFiniteResultsThrow) {
  Tensor p = Tensor::parameter(Matrix::Constant(1, 1, 800.0));
  EXPECT_THROW(exp(p), NumericError);
  EXPECT_THROW(log(Tensor::parameter(Matrix::Zero(1, 1))), NumericError);
}

TEST(Autodiff, SquaredLossMatchesFiniteDifferences) {
  for (auto act : {Activation::kTanh, Activation::kRelu}) {
    Rng rng(3);
    Mlp net({3, 8, 8, 2}, act, rng);
    Matrix x = random_matrix(10, 3, rng), y = random_matrix(10, 2, rng);
    auto loss_value = [&] {
      return mean(square(net.forward(Tensor::constant(x)) - Tensor::constant(y))).item();
    };
    net.zero_grad();
    mean(square(net.forward(Tensor::constant(x)) - Tensor::constant(y))).backward();
    for (auto& p : net.parameters()) {
      Matrix analytic = p.grad();
      EXPECT_LT(max_rel_error(analytic, numeric_grad(p, loss_value, 1e-5)), 1e-4);
    }
  }
}

// Every op on one composite graph, checked elementwise.
TEST(Autodiff, OpsMatchFiniteDifferences) {
  Rng rng(4);
  Tensor a = Tensor::parameter(random_matrix(4, 6, rng));
  Tensor b = Tensor::parameter(random_matrix(4, 6, rng));
  Tensor w = Tensor::parameter(random_matrix(6, 3, rng));
  Tensor row = Tensor::parameter(random_matrix(1, 6, rng));
  Matrix pos = random_matrix(4, 6, rng).cwiseAbs().array() + 0.5;
  auto graph = [&] {
    Tensor s = softmax_groups(a, 3) * log_softmax_groups(b, 2);
    Tensor m = minimum(a, b * 0.5) + clamp(b, -0.5, 0.5) + relu(a - row);
    Tensor q = div(sigmoid(a), exp(scale(b, 0.1))) + tanh(a) * log(Tensor::constant(pos) + square(b));
    Tensor mm = matmul(s + m + q, w);
    Tensor sl = concat_cols(std::vector<Tensor>{slice_cols(mm, 1, 2), slice_cols(a, 0, 1)});
    const std::vector<Index> rows = {3, 0, 0};
    return mean(row_sum(gather_rows(sl, rows))) + sum(neg(add_scalar(mm, 2.0))) * 0.01;
  };
  for (Tensor* p : {&a, &b, &w, &row}) p->zero_grad();
  graph().backward();
  for (Tensor* p : {&a, &b, &w, &row}) {
    Matrix analytic = p->grad();
    EXPECT_LT(max_rel_error(analytic, numeric_grad(*p, [&] { return graph().item(); })), 1e-6);
  }
}

TEST(Autodiff, ReplayIsBitwiseDeterministic) {
  Rng rng(5);
  Mlp net({3, 6, 1}, Activation::kTanh, rng);
  Matrix x = random_matrix(8, 3, rng);
  auto grads = [&] {
    net.zero_grad();
    sum(square(net.forward(Tensor::constant(x)))).backward();
    std::vector<Matrix> g;
    for (const auto& p : net.parameters()) g.push_back(p.grad());
    return g;
  };
  const auto before = net.flat();
  EXPECT_EQ(grads(), grads());
  EXPECT_EQ(net.flat(), before);
}

TEST(Autodiff, StopGradientAndPassThrough) {
  Tensor p = Tensor::parameter(Matrix::Constant(1, 2, 0.3));
  sum(stop_gradient(p) * p).backward();
  EXPECT_TRUE(p.grad().isApprox(Matrix::Constant(1, 2, 0.3)));
  p.zero_grad();
  Tensor t = pass_through(Matrix::Constant(1, 2, 7.0), square(p));
  EXPECT_TRUE((t.value().array() == 7.0).all());
  sum(t).backward();
  EXPECT_TRUE(p.grad().isApprox(Matrix::Constant(1, 2, 0.6)));
}

TEST(Adam, ZeroGradientLeavesParamsAndDecaysMoments) {
  std::vector<double> x = {1.0, -2.0};
  AdamMoments st;
  st.m = {0.5, 0.5};
  st.v = {0.25, 0.25};
  const std::vector<double> g = {0.0, 0.0};
  AdamConfig cfg;
  cfg.lr = 0.0;
  adam_step(x, g, st, cfg);
  EXPECT_EQ(x, (std::vector<double>{1.0, -2.0}));
  EXPECT_DOUBLE_EQ(st.m[0], 0.45);
  EXPECT_DOUBLE_EQ(st.v[0], 0.25 * 0.999);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<double> x = {0.0, 0.0, 0.0};
  AdamMoments st;
  const std::vector<double> g = {3.0, -0.01, 1e3};
  AdamConfig cfg;
  cfg.lr = 0.1;
  adam_step(x, g, st, cfg);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(x[i], -0.1 * (g[i] > 0 ? 1 : -1), 1e-6);
  }
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, ConvergesOnQuadraticBowl) {
  std::vector<double> x = {1.0};
  AdamMoments st;
  AdamConfig cfg;
  cfg.lr = 0.1;
  // Scalar simulation of the same recursion as the oracle.
  double xs = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 100; ++t) {
    const std::vector<double> g = {2.0 * x[0]};
    adam_step(x, g, st, cfg);
    const double gs = 2.0 * xs;
    m = 0.9 * m + 0.1 * gs;
    v = 0.999 * v + 0.001 * gs * gs;
    xs -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_NEAR(x[0], xs, 1e-12);
  EXPECT_LT(std::abs(x[0]), 1e-2);
}

TEST(Adam, NonFiniteGradientThrowsBeforeUpdate) {
  std::vector<double> x = {1.0};
  AdamMoments st;
  const std::vector<double> g = {std::nan("")};
  EXPECT_THROW(adam_step(x, g, st, AdamConfig{}), NumericError);
  EXPECT_EQ(x[0], 1.0);
  EXPECT_EQ(st.step, 0);
}

TEST(Checkpoint, JsonRoundTripIsExact) {
  Rng rng(6);
  Mlp net({3, 5, 2}, Activation::kRelu, rng);
  Adam opt(net.parameters(), AdamConfig{});
  sum(square(net.forward(Tensor::constant(random_matrix(4, 3, rng))))).backward();
  opt.step();
  const std::string text = network_to_json(snapshot(net, &opt));
  auto snap = network_from_json(text);
  Mlp back = restore(snap);
  EXPECT_EQ(back.flat(), net.flat());
  EXPECT_EQ(back.layer_sizes(), net.layer_sizes());
  EXPECT_EQ(back.activation(), Activation::kRelu);
  EXPECT_EQ(snap.optimizer.m, opt.moments().m);
  EXPECT_EQ(snap.optimizer.step, 1);
  EXPECT_EQ(network_to_json(snap), text);
  EXPECT_THROW(network_from_json("{\"version\": 99}"), Error);
}

}  // namespace
}  // namespace bangbang::nn
