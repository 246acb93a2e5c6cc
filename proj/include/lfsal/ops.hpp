#ifndef LFSAL_OPS_HPP
#define LFSAL_OPS_HPP

#include <vector>

#include "lfsal/rng.hpp"
#include "lfsal/tensor.hpp"

namespace lfsal {

enum class Mode { train, eval };

/// Convolution geometry. A negative `pad` crops symmetrically, which is how
/// the star-shaped angular kernels land on micro-lens centres.
struct ConvParams {
  Index stride = 1;
  Index dilation = 1;
  Index pad = 0;
};

/// floor((n + 2 pad - dilation (k - 1) - 1) / stride) + 1, with validation.
Index conv_extent(Index n, Index kernel, const ConvParams& p);

/// input [Cin,H,W], weights [Cout,Cin,k,k], bias [Cout] -> [Cout,H',W'].
/// Taps that fall outside the input read zero.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                 const ConvParams& params);

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights,
                             const Tensor<T>& grad_output, const ConvParams& params);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

/// Gradient passes only where input > 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_output);

struct PoolParams {
  Index kernel = 3;
  Index stride = 2;
  Index pad = 1;
  bool ceil_mode = true;
};

Index pool_extent(Index n, const PoolParams& p);

template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::vector<Index> argmax;  // flat input index per output element
};

/// Padding never wins the max; ties resolve to the first index in scan order.
template <typename T>
PoolResult<T> max_pool(const Tensor<T>& input, const PoolParams& params);

template <typename T>
Tensor<T> max_pool_backward(const Tensor<T>& grad_output, const std::vector<Index>& argmax,
                            const Shape& input_shape);

template <typename T>
struct DropoutResult {
  Tensor<T> output;
  Tensor<T> mask;  // 0 or 1/(1-p); empty when the op was the identity
};

/// Inverted dropout: eval mode and p == 0 are the identity.
template <typename T>
DropoutResult<T> dropout(const Tensor<T>& input, double p, Mode mode, RngStream& rng);

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_output, const Tensor<T>& mask);

/// Edge-aligned bilinear resize of [C,h,w]: corners map onto corners.
template <typename T>
Tensor<T> bilinear_upsample(const Tensor<T>& input, Index out_h, Index out_w);

template <typename T>
Tensor<T> bilinear_upsample_backward(const Tensor<T>& grad_output, Index in_h, Index in_w);

template <typename T>
struct LossResult {
  T loss;
  Tensor<T> grad;
};

/// Mean two-class softmax cross-entropy over pixels. logits [2,H,W] with
/// channel 0 the non-salient score; labels [H,W] in {0,1}.
template <typename T>
LossResult<T> softmax_loss(const Tensor<T>& logits, const Tensor<T>& labels);

/// Per-pixel probability of the salient class, [H,W].
template <typename T>
Tensor<T> salient_probability(const Tensor<T>& logits);

}  // namespace lfsal

#endif  // LFSAL_OPS_HPP
