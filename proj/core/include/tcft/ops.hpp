#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcft/tensor.hpp"

namespace tcft {

class Rng;

// Matrix product of [m x k] and [k x n].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
// x . W + b, where b is broadcast over the rows of x [m x n_in]; W is [n_in x n_out].
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Binary ops accept identical shapes, or a one-element operand on either side.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor elu(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);
// Normalizes over the last axis, then gain * x_hat + bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double epsilon = 1e-5);

// Row gather on a matrix; index -1 produces a zero row.
Tensor gather_rows(const Tensor& x, std::span<const std::ptrdiff_t> index);
// Element gather: out[j] = x[index[j]], reshaped to `shape`.
Tensor take(const Tensor& x, std::span<const std::size_t> index, Shape shape);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice(const Tensor& x, std::size_t row0, std::size_t nrows,
             std::size_t col0, std::size_t ncols);
Tensor reshape(const Tensor& x, Shape shape);

// Inverted dropout. Identity when `training` is false or rate is 0.
Tensor dropout(const Tensor& x, double rate, bool training, Rng* rng);

}  // namespace tcft
