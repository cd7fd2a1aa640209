#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "bangbang/error.hpp"
#include "bangbang/heads/heads.hpp"
#include "bangbang/nn/ops.hpp"
#include "testing.hpp"

namespace bangbang::heads {
namespace {

using testing::chi_square;
using testing::chi_square_crit_01;
using testing::max_rel_error;
using testing::numeric_grad;

envsim::ActionSpec spec(int d, double a_max) { return envsim::ActionSpec::uniform(d, a_max); }

Tensor row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) m(0, i++) = x;
  return Tensor::parameter(m);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

TEST(Names, ParseAndPrint) {
  EXPECT_EQ(parse_head_kind("bangbang"), HeadKind::kBernoulli);
  EXPECT_EQ(parse_head_kind("bangoffbang"), HeadKind::kCategorical);
  EXPECT_EQ(to_string(HeadKind::kGaussian), "gaussian");
  EXPECT_THROW(parse_head_kind("beta"), ConfigError);
  EXPECT_EQ(parse_bijector_kind("tanh_shift_scale"), Bijector::Kind::kTanhShiftScale);
}

TEST(Reparam, Examples) {
  auto g = make_gaussian(row({0.0}), row({0.0}));
  EXPECT_EQ(sample_gaussian_reparam(g, Matrix::Constant(1, 1, 0.5)).item(), 0.5);
  auto h = make_gaussian(row({1.5, -0.5}), row({1.2, -3.0}));
  EXPECT_TRUE(sample_gaussian_reparam(h, Matrix::Zero(1, 2)).value().isApprox(h.mean.value()));
  EXPECT_THROW(sample_gaussian_reparam(g, Matrix::Constant(1, 1, std::nan(""))), NumericError);
}

TEST(Reparam, PathwiseGradientsAreExact) {
  Rng rng(1);
  Tensor mean = row({0.3, -1.0, 2.0});
  Tensor raw = row({-0.4, 0.7, 1.1});
  Matrix noise(1, 3);
  noise << 0.5, -1.3, 2.2;
  auto f = [&] { return nn::sum(sample_gaussian_reparam(make_gaussian(mean, raw), noise)); };
  f().backward();
  EXPECT_TRUE((mean.grad().array() == 1.0).all());
  Matrix expected = raw.value().array().exp() * noise.array();
  EXPECT_LT(max_rel_error(raw.grad(), expected), 1e-15);
  EXPECT_LT(max_rel_error(raw.grad(), numeric_grad(raw, [&] { return f().item(); })), 1e-6);
}

TEST(Gaussian, LogScaleIsClamped) {
  auto g = make_gaussian(row({0.0, 0.0}), row({-9.0, 7.0}));
  EXPECT_EQ(g.log_scale.value()(0, 0), kMinLogScale);
  EXPECT_EQ(g.log_scale.value()(0, 1), kMaxLogScale);
}

TEST(StraightThrough, NearDegenerateDraw) {
  Rng rng(2);
  BernoulliHead h{Tensor::constant(Matrix::Constant(1, 1, kProbEpsilon))};
  int zeros = 0;
  for (int i = 0; i < 1000; ++i) zeros += sample_straight_through(h, rng).value()(0, 0) == 1.0;
  EXPECT_EQ(zeros, 1000);
  BernoulliHead bad{Tensor::constant(Matrix::Constant(1, 1, 1.0))};
  EXPECT_THROW(sample_straight_through(bad, rng), NumericError);
}

TEST(StraightThrough, UpstreamGradientLandsOnProbs) {
  Rng rng(3);
  Tensor probs = Tensor::parameter((Matrix(2, 6) << 0.2, 0.3, 0.5, 0.1, 0.1, 0.8, 0.6, 0.2,
                                    0.2, 0.3, 0.3, 0.4).finished());
  Matrix g(2, 6);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = standard_normal(rng);
  Tensor s = sample_straight_through(CategoricalHead{probs}, rng);
  for (Index r = 0; r < 2; ++r) {
    for (Index d = 0; d < 2; ++d) EXPECT_EQ(s.value().row(r).segment(3 * d, 3).sum(), 1.0);
  }
  nn::sum(nn::mul(s, Tensor::constant(g))).backward();
  EXPECT_EQ(probs.grad(), g);

  Tensor p = Tensor::parameter((Matrix(1, 2) << 0.3, 0.9).finished());
  Tensor sb = sample_straight_through(BernoulliHead{p}, rng);
  Matrix gb(1, 4);
  gb << 1.0, -2.0, 0.5, 4.0;
  nn::sum(nn::mul(sb, Tensor::constant(gb))).backward();
  // d/dp of (1-p, p) . (g0, g1) = g1 - g0
  EXPECT_EQ(p.grad()(0, 0), -3.0);
  EXPECT_EQ(p.grad()(0, 1), 3.5);
}

TEST(StraightThrough, BernoulliFrequency) {
  Rng rng(4);
  auto h = make_bernoulli(Tensor::constant(Matrix::Constant(1, 1, logit(0.2))));
  const int n = 100000;
  long long zeros = 0;
  for (int i = 0; i < n; ++i) zeros += sample_straight_through(h, rng).value()(0, 0) == 1.0;
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.8, 0.01);
  EXPECT_LT(chi_square({zeros, n - zeros}, {0.8, 0.2}), chi_square_crit_01(1));
}

TEST(StraightThrough, CategoricalChiSquare) {
  Rng rng(5);
  const std::vector<double> p = {0.2, 0.3, 0.5};
  auto h = make_categorical(Tensor::constant(
      (Matrix(1, 3) << std::log(0.2), std::log(0.3), std::log(0.5)).finished()));
  std::vector<long long> counts(3, 0);
  for (int i = 0; i < 100000; ++i) {
    Matrix s = sample_straight_through(h, rng).value();
    for (int k = 0; k < 3; ++k) counts[k] += s(0, k) == 1.0;
  }
  EXPECT_LT(chi_square(counts, p), chi_square_crit_01(2));
}

TEST(Bijector, DiscreteEndpoints) {
  auto bb = Bijector::for_head(HeadKind::kBernoulli, spec(1, 2.0));
  Matrix one_hot(2, 2);
  one_hot << 0, 1, 1, 0;
  Matrix a = bijector_apply(bb, HeadKind::kBernoulli, Tensor::constant(one_hot)).value();
  EXPECT_EQ(a(0, 0), 2.0);
  EXPECT_EQ(a(1, 0), -2.0);
  auto bob = Bijector::for_head(HeadKind::kCategorical, spec(1, 2.0));
  Matrix c(3, 3);
  c << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  Matrix ac = bijector_apply(bob, HeadKind::kCategorical, Tensor::constant(c)).value();
  EXPECT_EQ(ac(0, 0), -2.0);
  EXPECT_EQ(ac(1, 0), 0.0);
  EXPECT_EQ(ac(2, 0), 2.0);
}

TEST(Bijector, TanhIsOddAndBounded) {
  auto b = Bijector::for_head(HeadKind::kGaussian, spec(1, 3.0), true);
  Matrix x(3, 1);
  x << 0.0, 40.0, -40.0;
  Matrix a = bijector_apply(b, HeadKind::kGaussian, Tensor::constant(x)).value();
  EXPECT_EQ(a(0, 0), 0.0);
  EXPECT_LE(a(1, 0), 3.0);
  EXPECT_GE(a(2, 0), -3.0);
}

TEST(SupportProperty, SampledActionsAreExtremes) {
  Rng rng(6);
  Tensor logits = Tensor::constant(Matrix::Random(50, 9));
  auto cat = make_categorical(logits);
  auto ber = make_bernoulli(nn::slice_cols(logits, 0, 3));
  const auto s = spec(3, 1.5);
  Matrix ab = sample(ber, Bijector::for_head(HeadKind::kBernoulli, s), rng);
  Matrix ac = sample(cat, Bijector::for_head(HeadKind::kCategorical, s), rng);
  EXPECT_TRUE((ab.array().abs() == 1.5).all());
  EXPECT_TRUE((ac.array() == 0.0 || ac.array().abs() == 1.5).all());
}

TEST(LogProb, Examples) {
  auto ber = make_bernoulli(Tensor::constant(Matrix::Zero(1, 2)));
  Matrix a(1, 2);
  a << 1.0, -1.0;
  EXPECT_NEAR(log_prob(ber, Bijector::for_head(HeadKind::kBernoulli, spec(2, 1.0)), a).item(),
              std::log(0.25), 1e-12);

  const double a_max = 2.0;
  auto g = make_gaussian(row({0.0}), row({0.0}));
  EXPECT_NEAR(log_prob(g, Bijector::for_head(HeadKind::kGaussian, spec(1, a_max)),
                       Matrix::Zero(1, 1)).item(),
              -0.5 * std::log(2 * std::numbers::pi) - std::log(1.0 * a_max), 1e-12);

  CategoricalHead c{Tensor::constant((Matrix(1, 3) << 0.2, 0.3, 0.5).finished())};
  EXPECT_NEAR(log_prob(c, Bijector::for_head(HeadKind::kCategorical, spec(1, 1.0)),
                       Matrix::Zero(1, 1)).item(),
              std::log(0.3), 1e-15);
  EXPECT_THROW(log_prob(c, Bijector::for_head(HeadKind::kCategorical, spec(1, 1.0)),
                        Matrix::Constant(1, 1, 0.4)),
               Error);
}

TEST(LogProb, DiscreteMassSumsToOne) {
  Rng rng(7);
  auto cat = make_categorical(Tensor::constant(Matrix::Random(1, 6) * 3));
  auto bc = Bijector::for_head(HeadKind::kCategorical, spec(2, 0.7));
  double total = 0.0;
  for (double x : {-0.7, 0.0, 0.7}) {
    for (double y : {-0.7, 0.0, 0.7}) {
      total += std::exp(log_prob(cat, bc, (Matrix(1, 2) << x, y).finished()).item());
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  auto ber = make_bernoulli(Tensor::constant(Matrix::Random(1, 2) * 3));
  auto bb = Bijector::for_head(HeadKind::kBernoulli, spec(2, 0.7));
  total = 0.0;
  for (double x : {-0.7, 0.7}) {
    for (double y : {-0.7, 0.7}) {
      total += std::exp(log_prob(ber, bb, (Matrix(1, 2) << x, y).finished()).item());
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

// Composite Simpson over [lo, hi].
template <class F>
double simpson(F f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

TEST(LogProb, GaussianDensityIntegratesToOne) {
  auto g = make_gaussian(row({0.4}), row({-0.3}));
  auto b = Bijector::for_head(HeadKind::kGaussian, spec(1, 2.0));
  auto density = [&](double a) {
    return std::exp(log_prob(g, b, Matrix::Constant(1, 1, a)).item());
  };
  EXPECT_NEAR(simpson(density, -20.0, 20.0, 20000), 1.0, 1e-6);

  auto bt = Bijector::for_head(HeadKind::kGaussian, spec(1, 2.0), true);
  auto g2 = make_gaussian(row({0.3}), row({std::log(0.5)}));
  auto squashed = [&](double a) {
    return std::exp(log_prob(g2, bt, Matrix::Constant(1, 1, a)).item());
  };
  EXPECT_NEAR(simpson(squashed, -2.0 + 1e-9, 2.0 - 1e-9, 200000), 1.0, 1e-6);
}

TEST(EntropyKl, Examples) {
  auto ber = make_bernoulli(Tensor::constant(Matrix::Zero(1, 3)));
  EXPECT_NEAR(entropy(ber).item(), 3 * std::log(2.0), 1e-9);
  Rng rng(8);
  auto cat = make_categorical(Tensor::constant(Matrix::Random(4, 6)));
  EXPECT_TRUE((kl(cat, cat).value().array().abs() < 1e-15).all());
  auto g = make_gaussian(row({0.5}), row({0.1}));
  EXPECT_NEAR(kl(g, g).item(), 0.0, 1e-15);
  EXPECT_THROW(kl(g, cat), Error);
}

TEST(EntropyKl, GaussianKlMatchesQuadrature) {
  auto p = make_gaussian(row({0.0}), row({0.0}));
  auto q = make_gaussian(row({0.0}), row({std::log(2.0)}));
  auto normal = [](double x, double m, double s) {
    return std::exp(-0.5 * (x - m) * (x - m) / (s * s)) / (s * std::sqrt(2 * std::numbers::pi));
  };
  const double numeric = simpson(
      [&](double x) {
        const double a = normal(x, 0, 1), b = normal(x, 0, 2);
        return a > 0 ? a * std::log(a / b) : 0.0;
      },
      -30, 30, 60000);
  EXPECT_NEAR(kl(p, q).item(), numeric, 1e-6);
}

TEST(EntropyKl, NonNegativeOnRandomHeads) {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    auto a = make_categorical(Tensor::constant(Matrix::Random(3, 6) * 4));
    auto b = make_categorical(Tensor::constant(Matrix::Random(3, 6) * 4));
    EXPECT_TRUE((kl(a, b).value().array() >= -1e-12).all());
    auto c = make_gaussian(Tensor::constant(Matrix::Random(3, 2)), Tensor::constant(Matrix::Random(1, 2)));
    auto d = make_gaussian(Tensor::constant(Matrix::Random(3, 2)), Tensor::constant(Matrix::Random(1, 2)));
    EXPECT_TRUE((kl(c, d).value().array() >= -1e-12).all());
  }
}

TEST(EntropyKl, DiscreteQuantitiesIgnoreBijectorScale) {
  // Relabeling the support changes actions, not mass.
  auto h = make_categorical(Tensor::constant(Matrix::Random(2, 3)));
  for (double a_max : {0.5, 1.0, 7.0}) {
    auto b = Bijector::for_head(HeadKind::kCategorical, spec(1, a_max));
    Matrix acts(2, 1);
    acts << a_max, -a_max;
    Matrix lp = log_prob(h, b, acts).value();
    Matrix ref = log_prob(h, Bijector::for_head(HeadKind::kCategorical, spec(1, 1.0)),
                          acts / a_max).value();
    EXPECT_EQ(lp, ref);
  }
}

TEST(LogProb, GradientsMatchFiniteDifferences) {
  Rng rng(10);
  for (int draw = 0; draw < 20; ++draw) {
    Tensor mean = Tensor::parameter(Matrix::Random(5, 2));
    Tensor raw = Tensor::parameter(Matrix::Random(1, 2));
    Tensor blog = Tensor::parameter(Matrix::Random(5, 2) * 2);
    Tensor clog = Tensor::parameter(Matrix::Random(5, 6) * 2);
    Matrix ga = Matrix::Random(5, 2) * 1.5;
    Matrix da = (Matrix(5, 2) << 1.5, -1.5, 1.5, 1.5, -1.5, -1.5, 1.5, -1.5, -1.5, 1.5).finished();
    Matrix ca = (Matrix(5, 2) << 0.0, 1.5, -1.5, 0.0, 1.5, 1.5, 0.0, 0.0, -1.5, 1.5).finished();
    const auto s = spec(2, 1.5);
    std::function<Tensor()> gauss = [&] {
      return nn::sum(log_prob(make_gaussian(mean, raw), Bijector::for_head(HeadKind::kGaussian, s), ga));
    };
    std::function<Tensor()> squashed = [&] {
      return nn::sum(log_prob(make_gaussian(mean, raw), Bijector::for_head(HeadKind::kGaussian, s, true),
                              ga * 0.6));
    };
    auto fb = [&] {
      return nn::sum(log_prob(make_bernoulli(blog), Bijector::for_head(HeadKind::kBernoulli, s), da));
    };
    auto fc = [&] {
      return nn::sum(log_prob(make_categorical(clog), Bijector::for_head(HeadKind::kCategorical, s), ca));
    };
    for (const std::function<Tensor()>* f :
         std::initializer_list<const std::function<Tensor()>*>{&gauss, &squashed}) {
      mean.zero_grad();
      raw.zero_grad();
      (*f)().backward();
      Matrix gm = mean.grad(), gr = raw.grad();
      EXPECT_LT(max_rel_error(gm, numeric_grad(mean, [&] { return (*f)().item(); })), 1e-4);
      EXPECT_LT(max_rel_error(gr, numeric_grad(raw, [&] { return (*f)().item(); })), 1e-4);
    }
    fb().backward();
    Matrix gb = blog.grad();
    EXPECT_LT(max_rel_error(gb, numeric_grad(blog, [&] { return fb().item(); })), 1e-4);
    fc().backward();
    Matrix gc = clog.grad();
    EXPECT_LT(max_rel_error(gc, numeric_grad(clog, [&] { return fc().item(); })), 1e-4);
  }
}

TEST(Discretize, TeacherTargets) {
  EXPECT_EQ(discretize_teacher_action(0.7 * 2, 2.0, HeadKind::kBernoulli), 1);
  EXPECT_EQ(discretize_teacher_action(-0.2 * 2, 2.0, HeadKind::kCategorical), 1);
  EXPECT_EQ(discretize_teacher_action(0.0, 2.0, HeadKind::kBernoulli), 1);
  EXPECT_EQ(discretize_teacher_action(-0.01, 2.0, HeadKind::kBernoulli), 0);
  EXPECT_EQ(discretize_teacher_action(0.5 * 2, 2.0, HeadKind::kCategorical), 1);
  EXPECT_EQ(discretize_teacher_action(0.51 * 2, 2.0, HeadKind::kCategorical), 2);
  EXPECT_EQ(discretize_teacher_action(-0.9 * 2, 2.0, HeadKind::kCategorical), 0);
}

TEST(Mode, BernoulliTieGoesPositive) {
  auto ber = make_bernoulli(Tensor::constant(Matrix::Zero(1, 1)));
  EXPECT_EQ(mode(ber, Bijector::for_head(HeadKind::kBernoulli, spec(1, 2.0)))(0, 0), 2.0);
}

TEST(Params, RoundTripThroughFlatRows) {
  auto g = make_gaussian(Tensor::constant(Matrix::Random(3, 2)), Tensor::constant(Matrix::Random(1, 2)));
  auto back = std::get<GaussianHead>(head_from_params(HeadKind::kGaussian, distribution_params(g)));
  EXPECT_TRUE(back.mean.value().isApprox(g.mean.value(), 0.0));
  EXPECT_EQ(back.log_scale.value().row(2), g.log_scale.value().row(0));
  auto c = make_categorical(Tensor::constant(Matrix::Random(3, 3)));
  auto cb = std::get<CategoricalHead>(head_from_params(HeadKind::kCategorical, distribution_params(c)));
  EXPECT_EQ(cb.probs.value(), c.probs.value());
}

}  // namespace
}  // namespace bangbang::heads
