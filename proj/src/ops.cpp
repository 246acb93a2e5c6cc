#include "lfsal/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lfsal {
namespace {

struct ConvLayout {
  Index cin, h, w, cout, k, out_h, out_w;
};

template <typename T>
ConvLayout conv_layout(const Tensor<T>& input, const Tensor<T>& weights, const ConvParams& p) {
  require_rank(input, 3, "conv2d input");
  require_rank(weights, 4, "conv2d weights");
  if (p.stride < 1 || p.dilation < 1) throw ConfigError("conv2d: stride and dilation must be >= 1");
  if (weights.dim(1) != input.dim(0)) {
    throw ConfigError("conv2d: weights " + shape_string(weights.shape()) + " expect " +
                      std::to_string(weights.dim(1)) + " input channels, input has " +
                      std::to_string(input.dim(0)));
  }
  if (weights.dim(2) != weights.dim(3)) throw ConfigError("conv2d: kernel must be square");
  ConvLayout l{input.dim(0), input.dim(1), input.dim(2), weights.dim(0), weights.dim(2), 0, 0};
  l.out_h = conv_extent(l.h, l.k, p);
  l.out_w = conv_extent(l.w, l.k, p);
  return l;
}

// Column matrix of shape (cin*k*k) x (out_h*out_w); row (ci*k + dy)*k + dx.
template <typename T>
typename Tensor<T>::RowMajorMatrix im2col(const Tensor<T>& input, const ConvLayout& l,
                                          const ConvParams& p) {
  typename Tensor<T>::RowMajorMatrix cols(l.cin * l.k * l.k, l.out_h * l.out_w);
  for (Index ci = 0; ci < l.cin; ++ci) {
    for (Index dy = 0; dy < l.k; ++dy) {
      for (Index dx = 0; dx < l.k; ++dx) {
        T* row = cols.row((ci * l.k + dy) * l.k + dx).data();
        for (Index oy = 0; oy < l.out_h; ++oy) {
          const Index iy = oy * p.stride - p.pad + dy * p.dilation;
          T* dst = row + oy * l.out_w;
          if (iy < 0 || iy >= l.h) {
            std::fill(dst, dst + l.out_w, T(0));
            continue;
          }
          const T* src = input.data() + (ci * l.h + iy) * l.w;
          for (Index ox = 0; ox < l.out_w; ++ox) {
            const Index ix = ox * p.stride - p.pad + dx * p.dilation;
            dst[ox] = (ix >= 0 && ix < l.w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
void col2im(const typename Tensor<T>::RowMajorMatrix& cols, const ConvLayout& l, const ConvParams& p,
            Tensor<T>& grad_input) {
  for (Index ci = 0; ci < l.cin; ++ci) {
    for (Index dy = 0; dy < l.k; ++dy) {
      for (Index dx = 0; dx < l.k; ++dx) {
        const T* row = cols.row((ci * l.k + dy) * l.k + dx).data();
        for (Index oy = 0; oy < l.out_h; ++oy) {
          const Index iy = oy * p.stride - p.pad + dy * p.dilation;
          if (iy < 0 || iy >= l.h) continue;
          T* dst = grad_input.data() + (ci * l.h + iy) * l.w;
          const T* src = row + oy * l.out_w;
          for (Index ox = 0; ox < l.out_w; ++ox) {
            const Index ix = ox * p.stride - p.pad + dx * p.dilation;
            if (ix >= 0 && ix < l.w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Index conv_extent(Index n, Index kernel, const ConvParams& p) {
  const Index span = p.dilation * (kernel - 1) + 1;
  if (n + 2 * p.pad < span) {
    throw ConfigError("conv2d: extent " + std::to_string(n) + " with pad " + std::to_string(p.pad) +
                      " is smaller than the dilated kernel span " + std::to_string(span));
  }
  return (n + 2 * p.pad - span) / p.stride + 1;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                 const ConvParams& params) {
  const ConvLayout l = conv_layout(input, weights, params);
  if (bias.size() != l.cout) {
    throw ConfigError("conv2d: bias has " + std::to_string(bias.size()) + " entries, expected " +
                      std::to_string(l.cout));
  }
  const auto cols = im2col(input, l, params);
  Tensor<T> out({l.cout, l.out_h, l.out_w});
  auto out_m = out.matrix(l.cout, l.out_h * l.out_w);
  out_m.noalias() = weights.matrix(l.cout, l.cin * l.k * l.k) * cols;
  out_m.colwise() += bias.values();
  require_finite(out, "conv2d");
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights,
                             const Tensor<T>& grad_output, const ConvParams& params) {
  const ConvLayout l = conv_layout(input, weights, params);
  if (grad_output.shape() != Shape{l.cout, l.out_h, l.out_w}) {
    throw ConfigError("conv2d_backward: gradient shape " + shape_string(grad_output.shape()) +
                      " does not match output");
  }
  const Index kk = l.cin * l.k * l.k;
  const auto cols = im2col(input, l, params);
  const auto g = grad_output.matrix(l.cout, l.out_h * l.out_w);

  ConvGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(weights.shape()), Tensor<T>({l.cout})};
  grads.weights.matrix(l.cout, kk).noalias() = g * cols.transpose();
  grads.bias.values() = g.rowwise().sum();
  typename Tensor<T>::RowMajorMatrix dcols = weights.matrix(l.cout, kk).transpose() * g;
  col2im<T>(dcols, l, params, grads.input);
  return grads;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  out.values() = input.values().cwiseMax(T(0));
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_output) {
  Tensor<T> g(input.shape());
  g.values() = (input.values().array() > T(0)).select(grad_output.values(), T(0));
  return g;
}

Index pool_extent(Index n, const PoolParams& p) {
  if (p.kernel < 1 || p.stride < 1) throw ConfigError("max_pool: kernel and stride must be >= 1");
  if (p.pad < 0 || p.pad >= p.kernel) throw ConfigError("max_pool: pad must lie in [0, kernel)");
  const Index span = n + 2 * p.pad - p.kernel;
  if (span < 0) throw ConfigError("max_pool: window larger than padded input");
  Index out = p.ceil_mode ? (span + p.stride - 1) / p.stride + 1 : span / p.stride + 1;
  if ((out - 1) * p.stride - p.pad >= n) {
    throw ConfigError("max_pool: last window lies entirely outside the input (extent " +
                      std::to_string(n) + ")");
  }
  return out;
}

template <typename T>
PoolResult<T> max_pool(const Tensor<T>& input, const PoolParams& params) {
  require_rank(input, 3, "max_pool input");
  const Index c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const Index oh = pool_extent(h, params), ow = pool_extent(w, params);
  PoolResult<T> r{Tensor<T>({c, oh, ow}), std::vector<Index>(static_cast<std::size_t>(c * oh * ow))};
  for (Index ch = 0; ch < c; ++ch) {
    for (Index oy = 0; oy < oh; ++oy) {
      const Index y0 = std::max<Index>(oy * params.stride - params.pad, 0);
      const Index y1 = std::min<Index>(oy * params.stride - params.pad + params.kernel, h);
      for (Index ox = 0; ox < ow; ++ox) {
        const Index x0 = std::max<Index>(ox * params.stride - params.pad, 0);
        const Index x1 = std::min<Index>(ox * params.stride - params.pad + params.kernel, w);
        Index best = (ch * h + y0) * w + x0;
        for (Index y = y0; y < y1; ++y) {
          for (Index x = x0; x < x1; ++x) {
            const Index i = (ch * h + y) * w + x;
            if (input[i] > input[best]) best = i;
          }
        }
        const Index o = (ch * oh + oy) * ow + ox;
        r.output[o] = input[best];
        r.argmax[static_cast<std::size_t>(o)] = best;
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> max_pool_backward(const Tensor<T>& grad_output, const std::vector<Index>& argmax,
                            const Shape& input_shape) {
  if (static_cast<Index>(argmax.size()) != grad_output.size()) {
    throw ConfigError("max_pool_backward: argmax/gradient size mismatch");
  }
  Tensor<T> g(input_shape);
  for (Index o = 0; o < grad_output.size(); ++o) g[argmax[static_cast<std::size_t>(o)]] += grad_output[o];
  return g;
}

template <typename T>
DropoutResult<T> dropout(const Tensor<T>& input, double p, Mode mode, RngStream& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout: p must lie in [0, 1), got " + std::to_string(p));
  if (mode == Mode::eval || p == 0.0) return {input, Tensor<T>()};
  Tensor<T> mask(input.shape());
  const T keep_scale = T(1.0 / (1.0 - p));
  for (Index i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < p ? T(0) : keep_scale;
  Tensor<T> out(input.shape());
  out.values() = input.values().cwiseProduct(mask.values());
  return {std::move(out), std::move(mask)};
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_output, const Tensor<T>& mask) {
  if (mask.empty()) return grad_output;
  Tensor<T> g(grad_output.shape());
  g.values() = grad_output.values().cwiseProduct(mask.values());
  return g;
}

namespace {

struct LerpTap {
  Index lo, hi;
  double frac;
};

std::vector<LerpTap> lerp_taps(Index in, Index out) {
  std::vector<LerpTap> taps(static_cast<std::size_t>(out));
  const double scale = out > 1 ? static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
  for (Index d = 0; d < out; ++d) {
    const double src = static_cast<double>(d) * scale;
    Index lo = std::min<Index>(static_cast<Index>(std::floor(src)), in - 1);
    const Index hi = std::min<Index>(lo + 1, in - 1);
    taps[static_cast<std::size_t>(d)] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

template <typename T>
Tensor<T> bilinear_upsample(const Tensor<T>& input, Index out_h, Index out_w) {
  require_rank(input, 3, "bilinear_upsample input");
  if (out_h < 1 || out_w < 1) throw ConfigError("bilinear_upsample: output dims must be >= 1");
  const Index c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const auto ty = lerp_taps(h, out_h), tx = lerp_taps(w, out_w);
  Tensor<T> out({c, out_h, out_w});
  for (Index ch = 0; ch < c; ++ch) {
    for (Index y = 0; y < out_h; ++y) {
      const LerpTap& a = ty[static_cast<std::size_t>(y)];
      for (Index x = 0; x < out_w; ++x) {
        const LerpTap& b = tx[static_cast<std::size_t>(x)];
        const double top = (1 - b.frac) * input(ch, a.lo, b.lo) + b.frac * input(ch, a.lo, b.hi);
        const double bot = (1 - b.frac) * input(ch, a.hi, b.lo) + b.frac * input(ch, a.hi, b.hi);
        out(ch, y, x) = static_cast<T>((1 - a.frac) * top + a.frac * bot);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> bilinear_upsample_backward(const Tensor<T>& grad_output, Index in_h, Index in_w) {
  require_rank(grad_output, 3, "bilinear_upsample_backward gradient");
  const Index c = grad_output.dim(0), out_h = grad_output.dim(1), out_w = grad_output.dim(2);
  const auto ty = lerp_taps(in_h, out_h), tx = lerp_taps(in_w, out_w);
  Tensor<T> g({c, in_h, in_w});
  for (Index ch = 0; ch < c; ++ch) {
    for (Index y = 0; y < out_h; ++y) {
      const LerpTap& a = ty[static_cast<std::size_t>(y)];
      for (Index x = 0; x < out_w; ++x) {
        const LerpTap& b = tx[static_cast<std::size_t>(x)];
        const double v = grad_output(ch, y, x);
        g(ch, a.lo, b.lo) += static_cast<T>((1 - a.frac) * (1 - b.frac) * v);
        g(ch, a.lo, b.hi) += static_cast<T>((1 - a.frac) * b.frac * v);
        g(ch, a.hi, b.lo) += static_cast<T>(a.frac * (1 - b.frac) * v);
        g(ch, a.hi, b.hi) += static_cast<T>(a.frac * b.frac * v);
      }
    }
  }
  return g;
}

template <typename T>
LossResult<T> softmax_loss(const Tensor<T>& logits, const Tensor<T>& labels) {
  require_rank(logits, 3, "softmax_loss logits");
  if (logits.dim(0) != 2) throw ConfigError("softmax_loss: logits must have 2 channels");
  const Index h = logits.dim(1), w = logits.dim(2);
  if (labels.shape() != Shape{h, w}) {
    throw DataError("softmax_loss: labels " + shape_string(labels.shape()) + " vs logits " +
                    shape_string(logits.shape()));
  }
  const Index n = h * w;
  const double inv_n = 1.0 / static_cast<double>(n);
  LossResult<T> r{T(0), Tensor<T>(logits.shape())};
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const T label = labels[i];
    if (label != T(0) && label != T(1)) {
      throw DataError("softmax_loss: label " + std::to_string(static_cast<double>(label)) +
                      " at pixel " + std::to_string(i) + " is not 0 or 1");
    }
    const double z0 = logits[i], z1 = logits[n + i];
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
    const double log_sum = m + std::log(e0 + e1);
    total += log_sum - (label == T(1) ? z1 : z0);
    const double p1 = e1 / (e0 + e1);
    const double p0 = 1.0 - p1;
    r.grad[i] = static_cast<T>((p0 - (label == T(0) ? 1.0 : 0.0)) * inv_n);
    r.grad[n + i] = static_cast<T>((p1 - (label == T(1) ? 1.0 : 0.0)) * inv_n);
  }
  r.loss = static_cast<T>(total * inv_n);
  if (!std::isfinite(total)) throw NumericalError("softmax_loss: non-finite loss");
  return r;
}

template <typename T>
Tensor<T> salient_probability(const Tensor<T>& logits) {
  require_rank(logits, 3, "salient_probability logits");
  if (logits.dim(0) != 2) throw ConfigError("salient_probability: logits must have 2 channels");
  const Index h = logits.dim(1), w = logits.dim(2), n = h * w;
  Tensor<T> p({h, w});
  for (Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(logits[i]) - static_cast<double>(logits[n + i]);
    p[i] = static_cast<T>(1.0 / (1.0 + std::exp(d)));
  }
  return p;
}

#define LFSAL_INSTANTIATE_OPS(T)                                                                   \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const ConvParams&); \
  template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,        \
                                        const ConvParams&);                                          \
  template Tensor<T> relu(const Tensor<T>&);                                                         \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                              \
  template PoolResult<T> max_pool(const Tensor<T>&, const PoolParams&);                              \
  template Tensor<T> max_pool_backward(const Tensor<T>&, const std::vector<Index>&, const Shape&);   \
  template DropoutResult<T> dropout(const Tensor<T>&, double, Mode, RngStream&);                    \
  template Tensor<T> dropout_backward(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> bilinear_upsample(const Tensor<T>&, Index, Index);                              \
  template Tensor<T> bilinear_upsample_backward(const Tensor<T>&, Index, Index);                     \
  template LossResult<T> softmax_loss(const Tensor<T>&, const Tensor<T>&);                           \
  template Tensor<T> salient_probability(const Tensor<T>&);

LFSAL_INSTANTIATE_OPS(float)
LFSAL_INSTANTIATE_OPS(double)

}  // namespace lfsal
