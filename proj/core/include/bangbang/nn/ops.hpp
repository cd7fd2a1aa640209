#pragma once

#include <span>

#include "bangbang/nn/tensor.hpp"

namespace bangbang::nn {

// Binary elementwise ops broadcast when one operand is 1x1, 1xC or Rx1.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
// Elementwise min; ties send the gradient to `a`.
Tensor minimum(const Tensor& a, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);
// x * W + b with b a 1xC row broadcast over the batch.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor square(const Tensor& a);
// Gradient passes where lo <= a <= hi.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor sum(const Tensor& a);       // 1x1
Tensor mean(const Tensor& a);      // 1x1
Tensor row_sum(const Tensor& a);   // Rx1

// Softmax / log-softmax over consecutive column groups of width `group`.
Tensor softmax_groups(const Tensor& a, Index group);
Tensor log_softmax_groups(const Tensor& a, Index group);

Tensor slice_cols(const Tensor& a, Index start, Index count);
Tensor concat_cols(std::span<const Tensor> parts);
// Rows selected by index, in order.
Tensor gather_rows(const Tensor& a, std::span<const Index> rows);

// Same value, no gradient path.
Tensor stop_gradient(const Tensor& a);

// Forward value `value`; the upstream gradient is passed to `source`
// unchanged. Shapes must match.
Tensor pass_through(Matrix value, const Tensor& source);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator+(const Tensor& a, double s) { return add_scalar(a, s); }
inline Tensor operator-(const Tensor& a, double s) { return add_scalar(a, -s); }

}  // namespace bangbang::nn
