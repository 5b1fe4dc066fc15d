#pragma once

#include "plume/nn/tensor.hpp"

#include <span>

// Layer kernels with hand-written reverse passes. Activations are NHWC;
// convolution weights are [out, k, k, in]; dense weights are [out, in].
// Convolutions are valid (no padding).
namespace plume::nn {

struct ConvGeometry {
  int batch, in_h, in_w, in_c;
  int out_c, kernel, stride;
  int out_h() const { return (in_h - kernel) / stride + 1; }
  int out_w() const { return (in_w - kernel) / stride + 1; }
  int patch() const { return kernel * kernel * in_c; }
  int columns() const { return batch * out_h() * out_w(); }
};

/// Unfolds input patches into a (patch x columns) column-major matrix.
template <typename T>
void im2col(const ConvGeometry& g, std::span<const T> input, std::span<T> cols);

/// Scatter-adds a (patch x columns) gradient back onto an NHWC input gradient.
template <typename T>
void col2im(const ConvGeometry& g, std::span<const T> dcols, std::span<T> dinput);

/// out = W * cols + b, written as NHWC [batch, out_h, out_w, out_c].
template <typename T>
void conv_forward(const ConvGeometry& g, std::span<const T> weight, std::span<const T> bias,
                  std::span<const T> cols, std::span<T> out);

/// Accumulates dW and db; writes dcols when non-empty.
template <typename T>
void conv_backward(const ConvGeometry& g, std::span<const T> weight, std::span<const T> cols,
                   std::span<const T> dout, std::span<T> dweight, std::span<T> dbias, std::span<T> dcols);

/// y[b] = W x[b] + bias; x is [batch, in], y is [batch, out].
template <typename T>
void dense_forward(int batch, int in, int out, std::span<const T> weight, std::span<const T> bias,
                   std::span<const T> x, std::span<T> y);

/// Accumulates dW and db; writes dx when non-empty.
template <typename T>
void dense_backward(int batch, int in, int out, std::span<const T> weight, std::span<const T> x,
                    std::span<const T> dy, std::span<T> dweight, std::span<T> dbias, std::span<T> dx);

template <typename T>
void relu_forward(std::span<T> x);

/// Zeroes gradient entries whose (post-activation) value is not positive.
template <typename T>
void relu_backward(std::span<const T> activated, std::span<T> grad);

}  // namespace plume::nn
