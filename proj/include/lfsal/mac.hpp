#ifndef LFSAL_MAC_HPP
#define LFSAL_MAC_HPP

#include <string>
#include <vector>

#include "lfsal/ops.hpp"

namespace lfsal {

// MAC blocks map a micro-lens array [C, N_y A, N_x A] to features
// [C', N_y, N_x]: every output pixel depends on exactly one micro-lens image.

enum class MacVariant { mac9x9, mac3x3, star };

const char* to_string(MacVariant v);
MacVariant parse_mac_variant(const std::string& s);

/// Single A x A kernel at stride A; A is read from the weights.
template <typename T>
Tensor<T> mac_forward_9x9(const Tensor<T>& array, const Tensor<T>& weights, const Tensor<T>& bias);

template <typename T>
ConvGrads<T> mac_backward_9x9(const Tensor<T>& array, const Tensor<T>& weights, const Tensor<T>& grad_output);

/// Two s x s convolutions at stride s with a ReLU between, A = s * s.
template <typename T>
struct Mac3x3Trace {
  Tensor<T> input;
  Tensor<T> hidden;  // first conv output, pre-ReLU
};

template <typename T>
struct Mac3x3Grads {
  Tensor<T> input, w1, b1, w2, b2;
};

template <typename T>
Tensor<T> mac_forward_3x3(const Tensor<T>& array, Index angular_res, const Tensor<T>& w1, const Tensor<T>& b1,
                          const Tensor<T>& w2, const Tensor<T>& b2, Mac3x3Trace<T>* trace = nullptr);

template <typename T>
Mac3x3Grads<T> mac_backward_3x3(const Mac3x3Trace<T>& trace, Index angular_res, const Tensor<T>& w1,
                                const Tensor<T>& w2, const Tensor<T>& grad_output);

/// Branch 0 is a 1x1 tap on the micro-lens centre c = (A-1)/2; branch i >= 1
/// is a 3x3 kernel dilated by rates[i-1] around the centre. Their outputs are
/// concatenated and fused by a 1x1 convolution.
struct StarGeometry {
  Index angular_res = 9;
  std::vector<Index> rates{1, 2, 3, 4};

  void validate() const;
  ConvParams branch_params(std::size_t branch) const;
  Index branch_kernel(std::size_t branch) const { return branch == 0 ? 1 : 3; }
  std::size_t branch_count() const { return rates.size() + 1; }
};

/// Non-owning view of the star block parameters.
template <typename T>
struct StarWeights {
  std::vector<const Tensor<T>*> branch_w;
  std::vector<const Tensor<T>*> branch_b;
  const Tensor<T>* fuse_w = nullptr;
  const Tensor<T>* fuse_b = nullptr;
};

template <typename T>
struct StarTrace {
  Tensor<T> input;
  Tensor<T> concat;
  std::vector<Index> branch_channels;
};

template <typename T>
struct StarGrads {
  Tensor<T> input;
  std::vector<Tensor<T>> branch_w, branch_b;
  Tensor<T> fuse_w, fuse_b;
};

template <typename T>
Tensor<T> mac_forward_star(const Tensor<T>& array, const StarWeights<T>& weights, const StarGeometry& geometry,
                           StarTrace<T>* trace = nullptr);

template <typename T>
StarGrads<T> mac_backward_star(const StarTrace<T>& trace, const StarWeights<T>& weights,
                               const StarGeometry& geometry, const Tensor<T>& grad_output);

/// Offsets (du, dv) relative to the micro-lens centre that the star block reads.
std::vector<std::pair<Index, Index>> star_taps(const StarGeometry& geometry);

}  // namespace lfsal

#endif  // LFSAL_MAC_HPP
