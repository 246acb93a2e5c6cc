#include "lfsal/network.hpp"

#include <algorithm>
#include <numeric>

namespace lfsal {

using detail::Chain;
using detail::ChainTrace;
using detail::ConvLayer;
using detail::DropoutLayer;
using detail::LayerState;
using detail::PoolLayer;
using detail::ReluLayer;

NetConfig NetConfig::paper() {
  NetConfig cfg;
  cfg.mac.angular_res = 9;
  cfg.mac.out_channels = 64;
  return cfg;
}

NetConfig NetConfig::desk(Index angular_res, MacVariant variant) {
  NetConfig cfg;
  cfg.mac.variant = variant;
  cfg.mac.angular_res = angular_res;
  cfg.mac.out_channels = 8;
  cfg.mac.branch_channels = 4;
  cfg.mac.star_rates.clear();
  for (Index r = 1; r <= std::min<Index>(4, (angular_res - 1) / 2); ++r) cfg.mac.star_rates.push_back(r);
  cfg.backbone.channels = {8, 16, 32, 64, 64};
  cfg.aspp.rates = {1, 2, 3, 4};
  cfg.aspp.branch_channels = 64;
  cfg.backbone.dropout.assign(6, 0.0);
  return cfg;
}

NetConfig baseline_2d(NetConfig cfg) {
  cfg.front_end = FrontEnd::central_view;
  return cfg;
}

void NetConfig::validate() const {
  const auto& b = backbone;
  if (b.conv_counts.size() != 5 || b.channels.size() != 5 || b.pool_strides.size() != 5) {
    throw ConfigError("backbone: conv_counts, channels and pool_strides need 5 entries");
  }
  if (b.dropout.size() != 6) throw ConfigError("backbone: dropout needs 6 probabilities (5 blocks + ASPP)");
  for (double p : b.dropout) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("backbone: dropout probabilities must lie in [0, 1)");
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (b.conv_counts[i] < 1 || b.channels[i] < 1 || b.pool_strides[i] < 1) {
      throw ConfigError("backbone: counts, channels and strides must be positive");
    }
  }
  if (output_stride() != 8) {
    throw ConfigError("backbone: pool strides multiply to " + std::to_string(output_stride()) + ", expected 8");
  }
  if (b.block5_dilation < 1) throw ConfigError("backbone: block5 dilation must be >= 1");
  if (aspp.num_classes != 2) throw ConfigError("aspp: num_classes must be 2");
  if (aspp.rates.empty() || aspp.branch_channels < 1) throw ConfigError("aspp: need rates and positive width");
  for (Index r : aspp.rates) {
    if (r < 1) throw ConfigError("aspp: rates must be >= 1");
  }
  if (mac.out_channels != b.channels[0]) {
    throw ConfigError("MAC output channels (" + std::to_string(mac.out_channels) +
                      ") must equal block1 channels (" + std::to_string(b.channels[0]) + ")");
  }
  if (in_channels < 1) throw ConfigError("in_channels must be >= 1");
  if (!input_mean.empty() && static_cast<Index>(input_mean.size()) != in_channels) {
    throw ConfigError("input_mean needs one value per input channel");
  }
  if (mac.angular_res < 1) throw ConfigError("angular resolution must be >= 1");
  if (front_end == FrontEnd::mac) {
    if (mac.variant == MacVariant::mac3x3) {
      Index s = 1;
      while (s * s < mac.angular_res) ++s;
      if (s * s != mac.angular_res) {
        throw ConfigError("mac3x3 needs a square angular resolution (A = s*s), got " +
                          std::to_string(mac.angular_res));
      }
    }
    if (mac.variant == MacVariant::star) {
      StarGeometry{mac.angular_res, mac.star_rates}.validate();
      if (mac.branch_channels < 1) throw ConfigError("star: branch_channels must be >= 1");
    }
  }
}

Index NetConfig::output_stride() const {
  return std::accumulate(backbone.pool_strides.begin(), backbone.pool_strides.end(), Index{1},
                         std::multiplies<>());
}

template <typename T>
Tensor<T> labels_from_mask(const Image<T>& mask) {
  if (mask.channels() != 1) throw DataError("mask must have one channel");
  Tensor<T> labels({mask.height(), mask.width()});
  labels.values() = mask.values();
  return labels;
}

template <typename T>
SaliencyNet<T>::SaliencyNet(NetConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  build(seed);
}

template <typename T>
std::size_t SaliencyNet<T>::add(const std::string& name, const Shape& shape, bool new_layer, bool bias,
                                RngStream& rng) {
  const std::size_t slot = params_.size();
  RngStream init = rng.fork(slot);
  params_.emplace_back(bias ? Tensor<T>(shape) : xavier_init<T>(shape, init),
                       new_layer ? T(10) : T(1));
  names_.push_back(name);
  new_layer_.push_back(new_layer);
  return slot;
}

template <typename T>
void SaliencyNet<T>::build(std::uint64_t seed) {
  RngStream rng(seed, Stream::weights);
  const Index a = cfg_.mac.angular_res, c_in = cfg_.in_channels, c_mac = cfg_.mac.out_channels;
  auto conv = [&](const std::string& name, Index out, Index in, Index k, bool new_layer) {
    front_.push_back(add(name + ".w", {out, in, k, k}, new_layer, false, rng));
    front_.push_back(add(name + ".b", {out}, new_layer, true, rng));
  };
  if (cfg_.front_end == FrontEnd::central_view) {
    conv("front.conv", c_mac, c_in, 3, true);
  } else {
    switch (cfg_.mac.variant) {
      case MacVariant::mac9x9: conv("mac.conv", c_mac, c_in, a, true); break;
      case MacVariant::mac3x3: {
        Index s = 1;
        while (s * s < a) ++s;
        conv("mac.conv1", c_mac, c_in, s, true);
        conv("mac.conv2", c_mac, c_mac, s, true);
        break;
      }
      case MacVariant::star: {
        const Index cb = cfg_.mac.branch_channels;
        conv("mac.branch0", cb, c_in, 1, true);
        for (std::size_t i = 0; i < cfg_.mac.star_rates.size(); ++i) {
          conv("mac.branch" + std::to_string(i + 1), cb, c_in, 3, true);
        }
        conv("mac.fuse", c_mac, cb * static_cast<Index>(cfg_.mac.star_rates.size() + 1), 1, true);
        break;
      }
    }
  }

  const auto& bb = cfg_.backbone;
  Index in = c_mac;
  for (std::size_t b = 0; b < 5; ++b) {
    const Index d = b == 4 ? bb.block5_dilation : 1;
    for (Index j = 0; j < bb.conv_counts[b]; ++j) {
      const std::string name = "block" + std::to_string(b + 1) + ".conv" + std::to_string(j + 1);
      const bool new_layer = b == 0 && j == 0;
      const std::size_t w = add(name + ".w", {bb.channels[b], in, 3, 3}, new_layer, false, rng);
      const std::size_t bias = add(name + ".b", {bb.channels[b]}, new_layer, true, rng);
      backbone_.push_back(ConvLayer{w, bias, ConvParams{1, d, d}});
      backbone_.push_back(ReluLayer{});
      backbone_.push_back(DropoutLayer{bb.dropout[b]});
      in = bb.channels[b];
    }
    // Floor arithmetic: 540 -> 270 -> 135 -> 68 and 32 -> 16 -> 8 -> 4.
    backbone_.push_back(PoolLayer{PoolParams{3, bb.pool_strides[b], 1, false}});
  }

  const Index width = cfg_.aspp.branch_channels;
  const double p = bb.dropout[5];
  for (std::size_t i = 0; i < cfg_.aspp.rates.size(); ++i) {
    const Index r = cfg_.aspp.rates[i];
    const std::string base = "aspp" + std::to_string(i + 1);
    Chain chain;
    const std::size_t w1 = add(base + ".conv1.w", {width, in, 3, 3}, false, false, rng);
    const std::size_t b1 = add(base + ".conv1.b", {width}, false, true, rng);
    const std::size_t w2 = add(base + ".conv2.w", {width, width, 1, 1}, false, false, rng);
    const std::size_t b2 = add(base + ".conv2.b", {width}, false, true, rng);
    const std::size_t w3 = add(base + ".score.w", {cfg_.aspp.num_classes, width, 1, 1}, true, false, rng);
    const std::size_t b3 = add(base + ".score.b", {cfg_.aspp.num_classes}, true, true, rng);
    chain.push_back(ConvLayer{w1, b1, ConvParams{1, r, r}});
    chain.push_back(ReluLayer{});
    chain.push_back(DropoutLayer{p});
    chain.push_back(ConvLayer{w2, b2, ConvParams{}});
    chain.push_back(ReluLayer{});
    chain.push_back(DropoutLayer{p});
    chain.push_back(ConvLayer{w3, b3, ConvParams{}});
    aspp_.push_back(std::move(chain));
  }
}

template <typename T>
Tensor<T> SaliencyNet<T>::prepare_input(const MicroLensArray<T>& array) const {
  if (array.angular_res != cfg_.mac.angular_res) {
    throw ConfigError("input angular resolution " + std::to_string(array.angular_res) + " does not match net A=" +
                      std::to_string(cfg_.mac.angular_res));
  }
  if (array.channels() != cfg_.in_channels) {
    throw DataError("input has " + std::to_string(array.channels()) + " channels, net expects " +
                    std::to_string(cfg_.in_channels));
  }
  require_divisible(array.height(), array.width(), array.angular_res);
  Tensor<T> x = cfg_.front_end == FrontEnd::central_view ? central_view(array).to_chw() : array.pixels.to_chw();
  if (!cfg_.input_mean.empty()) {
    const Index plane = x.dim(1) * x.dim(2);
    for (Index c = 0; c < x.dim(0); ++c) {
      x.values().segment(c * plane, plane).array() -= static_cast<T>(cfg_.input_mean[static_cast<std::size_t>(c)]);
    }
  }
  return x;
}

template <typename T>
StarWeights<T> SaliencyNet<T>::star_weights() const {
  StarWeights<T> w;
  const std::size_t branches = cfg_.mac.star_rates.size() + 1;
  for (std::size_t i = 0; i < branches; ++i) {
    w.branch_w.push_back(&params_[front_[2 * i]].value);
    w.branch_b.push_back(&params_[front_[2 * i + 1]].value);
  }
  w.fuse_w = &params_[front_[2 * branches]].value;
  w.fuse_b = &params_[front_[2 * branches + 1]].value;
  return w;
}

template <typename T>
Tensor<T> SaliencyNet<T>::run_chain(const Chain& chain, Tensor<T> x, Mode mode, RngStream* rng,
                                    ChainTrace<T>* trace) const {
  if (trace) trace->clear();
  for (const auto& layer : chain) {
    LayerState<T> state;
    state.input_shape = x.shape();
    if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      Tensor<T> y = conv2d(x, params_[c->weight].value, params_[c->bias].value, c->params);
      if (trace) state.input = std::move(x);
      x = std::move(y);
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      Tensor<T> y = relu(x);
      if (trace) state.input = std::move(x);
      x = std::move(y);
    } else if (const auto* d = std::get_if<DropoutLayer>(&layer)) {
      if (mode == Mode::train && d->p > 0.0 && rng == nullptr) {
        throw ConfigError("train-mode forward needs a dropout stream");
      }
      RngStream none(0, Stream::dropout);
      DropoutResult<T> r = dropout(x, d->p, mode, rng ? *rng : none);
      state.mask = std::move(r.mask);
      x = std::move(r.output);
    } else if (const auto* p = std::get_if<PoolLayer>(&layer)) {
      PoolResult<T> r = max_pool(x, p->params);
      state.argmax = std::move(r.argmax);
      x = std::move(r.output);
    }
    if (trace) trace->push_back(std::move(state));
  }
  return x;
}

template <typename T>
Tensor<T> SaliencyNet<T>::back_chain(const Chain& chain, const ChainTrace<T>& trace, Tensor<T> g) {
  for (std::size_t i = chain.size(); i-- > 0;) {
    const auto& layer = chain[i];
    const LayerState<T>& s = trace[i];
    if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      ConvGrads<T> cg = conv2d_backward(s.input, params_[c->weight].value, g, c->params);
      params_[c->weight].grad.values() += cg.weights.values();
      params_[c->bias].grad.values() += cg.bias.values();
      g = std::move(cg.input);
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      g = relu_backward(s.input, g);
    } else if (std::holds_alternative<DropoutLayer>(layer)) {
      g = dropout_backward(g, s.mask);
    } else if (std::holds_alternative<PoolLayer>(layer)) {
      g = max_pool_backward(g, s.argmax, s.input_shape);
    }
  }
  return g;
}

template <typename T>
Tensor<T> SaliencyNet<T>::forward(const Tensor<T>& input, Mode mode, RngStream* dropout_rng,
                                  NetTrace<T>* trace) const {
  require_rank(input, 3, "SaliencyNet::forward input");
  Tensor<T> feat;
  if (cfg_.front_end == FrontEnd::central_view) {
    feat = conv2d(input, params_[front_[0]].value, params_[front_[1]].value, ConvParams{1, 1, 1});
  } else {
    const Index a = cfg_.mac.angular_res;
    if (input.dim(1) % a != 0 || input.dim(2) % a != 0) {
      throw DataError("input " + shape_string(input.shape()) + " is not divisible by A=" + std::to_string(a));
    }
    switch (cfg_.mac.variant) {
      case MacVariant::mac9x9:
        feat = mac_forward_9x9(input, params_[front_[0]].value, params_[front_[1]].value);
        break;
      case MacVariant::mac3x3:
        feat = mac_forward_3x3(input, a, params_[front_[0]].value, params_[front_[1]].value,
                               params_[front_[2]].value, params_[front_[3]].value,
                               trace ? &trace->mac3x3 : nullptr);
        break;
      case MacVariant::star:
        feat = mac_forward_star(input, star_weights(), StarGeometry{a, cfg_.mac.star_rates},
                                trace ? &trace->star : nullptr);
        break;
    }
  }
  const Index out_h = feat.dim(1), out_w = feat.dim(2);
  if (trace) {
    trace->input = input;
    trace->features = feat;
  }
  Tensor<T> top = run_chain(backbone_, std::move(feat), mode, dropout_rng, trace ? &trace->backbone : nullptr);
  if (trace) trace->aspp.assign(aspp_.size(), {});
  Tensor<T> score;
  for (std::size_t i = 0; i < aspp_.size(); ++i) {
    Tensor<T> s = run_chain(aspp_[i], top, mode, dropout_rng, trace ? &trace->aspp[i] : nullptr);
    if (i == 0) {
      score = std::move(s);
    } else {
      score.values() += s.values();
    }
  }
  if (trace) trace->score_shape = score.shape();
  return bilinear_upsample(score, out_h, out_w);
}

template <typename T>
Tensor<T> SaliencyNet<T>::backward(const NetTrace<T>& trace, const Tensor<T>& grad_logits) {
  const Tensor<T> g_score = bilinear_upsample_backward(grad_logits, trace.score_shape[1], trace.score_shape[2]);
  Tensor<T> g_top;
  for (std::size_t i = 0; i < aspp_.size(); ++i) {
    Tensor<T> g = back_chain(aspp_[i], trace.aspp[i], g_score);
    if (i == 0) {
      g_top = std::move(g);
    } else {
      g_top.values() += g.values();
    }
  }
  const Tensor<T> g_feat = back_chain(backbone_, trace.backbone, std::move(g_top));

  auto accumulate = [this](std::size_t slot, const Tensor<T>& g) { params_[front_[slot]].grad.values() += g.values(); };
  if (cfg_.front_end == FrontEnd::central_view) {
    ConvGrads<T> cg = conv2d_backward(trace.input, params_[front_[0]].value, g_feat, ConvParams{1, 1, 1});
    accumulate(0, cg.weights);
    accumulate(1, cg.bias);
    return std::move(cg.input);
  }
  const Index a = cfg_.mac.angular_res;
  switch (cfg_.mac.variant) {
    case MacVariant::mac9x9: {
      ConvGrads<T> cg = mac_backward_9x9(trace.input, params_[front_[0]].value, g_feat);
      accumulate(0, cg.weights);
      accumulate(1, cg.bias);
      return std::move(cg.input);
    }
    case MacVariant::mac3x3: {
      Mac3x3Grads<T> mg = mac_backward_3x3(trace.mac3x3, a, params_[front_[0]].value, params_[front_[2]].value, g_feat);
      accumulate(0, mg.w1);
      accumulate(1, mg.b1);
      accumulate(2, mg.w2);
      accumulate(3, mg.b2);
      return std::move(mg.input);
    }
    case MacVariant::star: {
      StarGrads<T> sg = mac_backward_star(trace.star, star_weights(), StarGeometry{a, cfg_.mac.star_rates}, g_feat);
      const std::size_t branches = sg.branch_w.size();
      for (std::size_t i = 0; i < branches; ++i) {
        accumulate(2 * i, sg.branch_w[i]);
        accumulate(2 * i + 1, sg.branch_b[i]);
      }
      accumulate(2 * branches, sg.fuse_w);
      accumulate(2 * branches + 1, sg.fuse_b);
      return std::move(sg.input);
    }
  }
  return {};
}

template <typename T>
Tensor<T> SaliencyNet<T>::predict(const MicroLensArray<T>& array) const {
  return salient_probability(forward(prepare_input(array), Mode::eval));
}

template <typename T>
T SaliencyNet<T>::train_step(const MicroLensArray<T>& array, const Image<T>& mask, const TrainSchedule& schedule,
                             long long iter, std::uint64_t seed) {
  const Tensor<T> input = prepare_input(array);
  const Tensor<T> labels = labels_from_mask(mask);
  if (labels.dim(0) != array.ny() || labels.dim(1) != array.nx()) {
    throw DataError("mask " + std::to_string(labels.dim(1)) + "x" + std::to_string(labels.dim(0)) +
                    " does not match array spatial size " + std::to_string(array.nx()) + "x" +
                    std::to_string(array.ny()));
  }
  RngStream rng(seed, Stream::dropout, static_cast<std::uint64_t>(iter));
  NetTrace<T> trace;
  const Tensor<T> logits = forward(input, Mode::train, &rng, &trace);
  const LossResult<T> loss = softmax_loss(logits, labels);
  backward(trace, loss.grad);
  set_new_layer_multiplier(schedule.new_layer_lr_multiplier);
  const double lr = poly_lr(schedule.base_lr, iter, schedule.max_iter, schedule.power);
  sgd_step<T>(params_, SgdConfig{lr, schedule.momentum, schedule.weight_decay});
  return loss.loss;
}

template <typename T>
Parameter<T>& SaliencyNet<T>::parameter(const std::string& name) {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ConfigError("no parameter named '" + name + "'");
  return params_[static_cast<std::size_t>(it - names_.begin())];
}

template <typename T>
const Parameter<T>& SaliencyNet<T>::parameter(const std::string& name) const {
  return const_cast<SaliencyNet*>(this)->parameter(name);
}

template <typename T>
Index SaliencyNet<T>::parameter_count() const {
  Index n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
void SaliencyNet<T>::zero_grad() {
  for (auto& p : params_) p.grad.set_zero();
}

template <typename T>
void SaliencyNet<T>::set_new_layer_multiplier(double multiplier) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    params_[i].lr_multiplier = new_layer_[i] ? static_cast<T>(multiplier) : T(1);
  }
}

template <typename T>
std::vector<std::int64_t> activation_pattern(const NetTrace<T>& trace) {
  std::vector<std::int64_t> pattern;
  auto signs = [&pattern](const Tensor<T>& t) {
    for (Index i = 0; i < t.size(); ++i) pattern.push_back(t[i] > T(0) ? 1 : 0);
  };
  signs(trace.mac3x3.hidden);
  auto chain = [&](const detail::ChainTrace<T>& c) {
    for (const auto& s : c) {
      if (!s.argmax.empty()) pattern.insert(pattern.end(), s.argmax.begin(), s.argmax.end());
      if (s.input.size() > 0 && s.mask.empty()) signs(s.input);
    }
  };
  chain(trace.backbone);
  for (const auto& a : trace.aspp) chain(a);
  return pattern;
}

template class SaliencyNet<float>;
template class SaliencyNet<double>;
template Tensor<float> labels_from_mask(const Image<float>&);
template Tensor<double> labels_from_mask(const Image<double>&);
template std::vector<std::int64_t> activation_pattern(const NetTrace<float>&);
template std::vector<std::int64_t> activation_pattern(const NetTrace<double>&);

}  // namespace lfsal
