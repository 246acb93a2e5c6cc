#include "lfsal/mac.hpp"

#include <algorithm>
#include <set>

namespace lfsal {
namespace {

void require_grid(Index h, Index w, Index a, const char* what) {
  if (a < 1 || h % a != 0 || w % a != 0 || h == 0 || w == 0) {
    throw ConfigError(std::string(what) + ": array " + std::to_string(w) + "x" + std::to_string(h) +
                      " does not tile into " + std::to_string(a) + "x" + std::to_string(a) + " micro-lens images");
  }
}

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
  Index c = 0;
  for (const auto& p : parts) c += p.dim(0);
  Tensor<T> out({c, parts.front().dim(1), parts.front().dim(2)});
  Index offset = 0;
  for (const auto& p : parts) {
    out.values().segment(offset, p.size()) = p.values();
    offset += p.size();
  }
  return out;
}

}  // namespace

const char* to_string(MacVariant v) {
  switch (v) {
    case MacVariant::mac9x9: return "mac9x9";
    case MacVariant::mac3x3: return "mac3x3";
    case MacVariant::star: return "star";
  }
  return "?";
}

MacVariant parse_mac_variant(const std::string& s) {
  if (s == "mac9x9") return MacVariant::mac9x9;
  if (s == "mac3x3") return MacVariant::mac3x3;
  if (s == "star") return MacVariant::star;
  throw ConfigError("unknown MAC variant '" + s + "' (expected mac9x9, mac3x3 or star)");
}

template <typename T>
Tensor<T> mac_forward_9x9(const Tensor<T>& array, const Tensor<T>& weights, const Tensor<T>& bias) {
  require_rank(array, 3, "mac_forward_9x9 array");
  require_rank(weights, 4, "mac_forward_9x9 weights");
  const Index a = weights.dim(2);
  require_grid(array.dim(1), array.dim(2), a, "mac_forward_9x9");
  return conv2d(array, weights, bias, ConvParams{a, 1, 0});
}

template <typename T>
ConvGrads<T> mac_backward_9x9(const Tensor<T>& array, const Tensor<T>& weights, const Tensor<T>& grad_output) {
  const Index a = weights.dim(2);
  return conv2d_backward(array, weights, grad_output, ConvParams{a, 1, 0});
}

namespace {

Index sqrt_stride(Index a) {
  for (Index s = 1; s * s <= a; ++s) {
    if (s * s == a) return s;
  }
  throw ConfigError("mac_forward_3x3: angular resolution " + std::to_string(a) + " is not a perfect square");
}

}  // namespace

template <typename T>
Tensor<T> mac_forward_3x3(const Tensor<T>& array, Index angular_res, const Tensor<T>& w1, const Tensor<T>& b1,
                          const Tensor<T>& w2, const Tensor<T>& b2, Mac3x3Trace<T>* trace) {
  require_rank(array, 3, "mac_forward_3x3 array");
  const Index s = sqrt_stride(angular_res);
  require_grid(array.dim(1), array.dim(2), angular_res, "mac_forward_3x3");
  if (w1.dim(2) != s || w2.dim(2) != s) {
    throw ConfigError("mac_forward_3x3: kernels must be " + std::to_string(s) + "x" + std::to_string(s));
  }
  Tensor<T> hidden = conv2d(array, w1, b1, ConvParams{s, 1, 0});
  Tensor<T> out = conv2d(relu(hidden), w2, b2, ConvParams{s, 1, 0});
  if (trace) *trace = {array, std::move(hidden)};
  return out;
}

template <typename T>
Mac3x3Grads<T> mac_backward_3x3(const Mac3x3Trace<T>& trace, Index angular_res, const Tensor<T>& w1,
                                const Tensor<T>& w2, const Tensor<T>& grad_output) {
  const Index s = sqrt_stride(angular_res);
  ConvGrads<T> g2 = conv2d_backward(relu(trace.hidden), w2, grad_output, ConvParams{s, 1, 0});
  const Tensor<T> g_hidden = relu_backward(trace.hidden, g2.input);
  ConvGrads<T> g1 = conv2d_backward(trace.input, w1, g_hidden, ConvParams{s, 1, 0});
  return {std::move(g1.input), std::move(g1.weights), std::move(g1.bias), std::move(g2.weights),
          std::move(g2.bias)};
}

void StarGeometry::validate() const {
  if (angular_res < 1 || angular_res % 2 == 0) {
    throw ConfigError("star MAC block needs an odd angular resolution, got " + std::to_string(angular_res));
  }
  const Index max_rate = (angular_res - 1) / 2;
  for (Index r : rates) {
    if (r < 1 || r > max_rate) {
      throw ConfigError("star MAC block: rate " + std::to_string(r) + " outside [1, " + std::to_string(max_rate) +
                        "] for A=" + std::to_string(angular_res));
    }
  }
}

ConvParams StarGeometry::branch_params(std::size_t branch) const {
  const Index c = (angular_res - 1) / 2;
  if (branch == 0) return ConvParams{angular_res, 1, -c};
  const Index r = rates.at(branch - 1);
  return ConvParams{angular_res, r, r - c};
}

std::vector<std::pair<Index, Index>> star_taps(const StarGeometry& geometry) {
  geometry.validate();
  std::set<std::pair<Index, Index>> taps{{0, 0}};
  for (Index r : geometry.rates)
    for (Index dv = -1; dv <= 1; ++dv)
      for (Index du = -1; du <= 1; ++du) taps.insert({du * r, dv * r});
  return {taps.begin(), taps.end()};
}

template <typename T>
Tensor<T> mac_forward_star(const Tensor<T>& array, const StarWeights<T>& weights, const StarGeometry& geometry,
                           StarTrace<T>* trace) {
  geometry.validate();
  require_rank(array, 3, "mac_forward_star array");
  require_grid(array.dim(1), array.dim(2), geometry.angular_res, "mac_forward_star");
  if (weights.branch_w.size() != geometry.branch_count() || weights.branch_b.size() != geometry.branch_count()) {
    throw ConfigError("mac_forward_star: expected " + std::to_string(geometry.branch_count()) + " branches");
  }
  std::vector<Tensor<T>> parts;
  std::vector<Index> branch_channels;
  for (std::size_t i = 0; i < geometry.branch_count(); ++i) {
    if (weights.branch_w[i]->dim(2) != geometry.branch_kernel(i)) {
      throw ConfigError("mac_forward_star: branch " + std::to_string(i) + " kernel must be " +
                        std::to_string(geometry.branch_kernel(i)));
    }
    parts.push_back(conv2d(array, *weights.branch_w[i], *weights.branch_b[i], geometry.branch_params(i)));
    branch_channels.push_back(parts.back().dim(0));
  }
  Tensor<T> concat = concat_channels(parts);
  Tensor<T> out = conv2d(concat, *weights.fuse_w, *weights.fuse_b, ConvParams{});
  if (trace) *trace = {array, std::move(concat), std::move(branch_channels)};
  return out;
}

template <typename T>
StarGrads<T> mac_backward_star(const StarTrace<T>& trace, const StarWeights<T>& weights,
                               const StarGeometry& geometry, const Tensor<T>& grad_output) {
  ConvGrads<T> fuse = conv2d_backward(trace.concat, *weights.fuse_w, grad_output, ConvParams{});
  StarGrads<T> g;
  g.input = Tensor<T>(trace.input.shape());
  g.fuse_w = std::move(fuse.weights);
  g.fuse_b = std::move(fuse.bias);
  const Index plane = trace.concat.dim(1) * trace.concat.dim(2);
  Index offset = 0;
  for (std::size_t i = 0; i < geometry.branch_count(); ++i) {
    const Index c = trace.branch_channels[i];
    Tensor<T> g_branch({c, trace.concat.dim(1), trace.concat.dim(2)});
    g_branch.values() = fuse.input.values().segment(offset * plane, c * plane);
    offset += c;
    ConvGrads<T> b = conv2d_backward(trace.input, *weights.branch_w[i], g_branch, geometry.branch_params(i));
    g.input.values() += b.input.values();
    g.branch_w.push_back(std::move(b.weights));
    g.branch_b.push_back(std::move(b.bias));
  }
  return g;
}

#define LFSAL_INSTANTIATE_MAC(T)                                                                           \
  template Tensor<T> mac_forward_9x9(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                \
  template ConvGrads<T> mac_backward_9x9(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> mac_forward_3x3(const Tensor<T>&, Index, const Tensor<T>&, const Tensor<T>&,          \
                                     const Tensor<T>&, const Tensor<T>&, Mac3x3Trace<T>*);                 \
  template Mac3x3Grads<T> mac_backward_3x3(const Mac3x3Trace<T>&, Index, const Tensor<T>&,                 \
                                           const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> mac_forward_star(const Tensor<T>&, const StarWeights<T>&, const StarGeometry&,        \
                                      StarTrace<T>*);                                                      \
  template StarGrads<T> mac_backward_star(const StarTrace<T>&, const StarWeights<T>&, const StarGeometry&, \
                                          const Tensor<T>&);

LFSAL_INSTANTIATE_MAC(float)
LFSAL_INSTANTIATE_MAC(double)

}  // namespace lfsal
