#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "bangbang/envsim/reward.hpp"
#include "bangbang/nn/tensor.hpp"
#include "bangbang/random.hpp"

namespace bangbang::heads {

using nn::Index;
using nn::Matrix;
using nn::Tensor;

inline constexpr double kProbEpsilon = 1e-6;
inline constexpr double kMinLogScale = -5.0;
inline constexpr double kMaxLogScale = 2.0;

enum class HeadKind { kGaussian, kBernoulli, kCategorical };

// Config names: gaussian, bangbang, bangoffbang.
std::string_view to_string(HeadKind k);
HeadKind parse_head_kind(std::string_view s);
// Categories per action dimension (0 for the Gaussian).
int categories(HeadKind k);
// Network outputs per action dimension.
int outputs_per_dim(HeadKind k);

// Diagonal Gaussian in pre-bijector units. log_scale is clamped to
// [kMinLogScale, kMaxLogScale]; it may be 1xD (state independent) or BxD.
struct GaussianHead {
  Tensor mean;
  Tensor log_scale;
};

// probs(b, i) = P(a_i = +a_max), squashed into (eps, 1 - eps).
struct BernoulliHead {
  Tensor probs;
};

// Per dimension a 3-vector over {-a_max, 0, +a_max}; columns 3i..3i+2.
struct CategoricalHead {
  Tensor probs;
};

using Head = std::variant<GaussianHead, BernoulliHead, CategoricalHead>;

GaussianHead make_gaussian(const Tensor& mean, const Tensor& raw_log_scale);
BernoulliHead make_bernoulli(const Tensor& logits);
CategoricalHead make_categorical(const Tensor& logits);  // logits Bx3D

HeadKind kind_of(const Head& h);
Index batch_size(const Head& h);
int action_dim(const Head& h);

// Maps head samples into the box [-a_max, a_max]. Discrete heads use
// shift/scale on the one-hot code; the Gaussian uses shift/scale, optionally
// after a tanh squash.
struct Bijector {
  enum class Kind { kShiftScale, kTanhShiftScale };
  Kind kind = Kind::kShiftScale;
  std::vector<double> shift;
  std::vector<double> scale;

  static Bijector for_head(HeadKind head, const envsim::ActionSpec& spec, bool tanh = false);
};

std::string_view to_string(Bijector::Kind k);
Bijector::Kind parse_bijector_kind(std::string_view s);

// mean + exp(log_scale) * noise; gradients reach mean and log_scale.
Tensor sample_gaussian_reparam(const GaussianHead& head, const Matrix& noise);

// One-hot draw (Bx2D for Bernoulli, Bx3D for Categorical). The forward value
// is the exact one-hot code; the backward pass hands the upstream gradient to
// the category probabilities unchanged, i.e. sample + probs - stop(probs).
Tensor sample_straight_through(const BernoulliHead& head, Rng& rng);
Tensor sample_straight_through(const CategoricalHead& head, Rng& rng);

// Category probabilities in one-hot layout (Bernoulli expands to [1-p, p]).
Tensor category_probs(const BernoulliHead& head);

// Straight-through combination of a constant one-hot code with probabilities.
Tensor straight_through(const Matrix& one_hot, const Tensor& probs);

// Pre-sample (Gaussian BxD or one-hot code) to actions BxD.
Tensor bijector_apply(const Bijector& b, HeadKind kind, const Tensor& pre_sample);

// Log density/mass of environment-space actions (BxD) -> Bx1. The Gaussian
// includes the bijector's log-det-Jacobian. Throws when a discrete action is
// not one of the support points.
Tensor log_prob(const Head& head, const Bijector& b, const Matrix& actions);

Tensor entropy(const Head& head);                       // Bx1, pre-bijector
Tensor kl(const Head& head_new, const Head& head_old);  // Bx1, KL(new || old)

// Deterministic action: Gaussian mean, most likely category otherwise.
Matrix mode(const Head& head, const Bijector& b);
// Draw actions without recording gradients.
Matrix sample(const Head& head, const Bijector& b, Rng& rng);

// Flat per-row distribution parameters and back (for storing the behavior
// policy alongside a batch).
Matrix distribution_params(const Head& head);
Head head_from_params(HeadKind kind, const Matrix& params);

// Category index of a teacher action for a discrete student.
// Bernoulli: a >= 0 -> 1 (+a_max), else 0. Categorical: nearest of
// {-a_max, 0, +a_max} with ties resolved toward 0.
int discretize_teacher_action(double a, double a_max, HeadKind target);
// Category index of a support action (inverse of the bijector).
int category_index(double a, double a_max, HeadKind kind);

}  // namespace bangbang::heads
