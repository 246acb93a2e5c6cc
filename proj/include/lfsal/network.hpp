#ifndef LFSAL_NETWORK_HPP
#define LFSAL_NETWORK_HPP

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lfsal/lightfield.hpp"
#include "lfsal/mac.hpp"
#include "lfsal/optim.hpp"

namespace lfsal {

struct MacBlockConfig {
  MacVariant variant = MacVariant::mac9x9;
  Index angular_res = 9;
  Index out_channels = 64;     // C'; must equal backbone block1 channels
  Index branch_channels = 16;  // star only, per branch
  std::vector<Index> star_rates{1, 2, 3, 4};
};

struct BackboneConfig {
  std::vector<Index> conv_counts{2, 2, 3, 3, 3};
  std::vector<Index> channels{64, 128, 256, 512, 512};
  std::vector<Index> pool_strides{2, 2, 2, 1, 1};
  Index block5_dilation = 2;
  std::vector<double> dropout{0.1, 0.1, 0.2, 0.2, 0.3, 0.5};  // blocks 1-5, then ASPP
};

struct AsppConfig {
  std::vector<Index> rates{6, 12, 18, 24};
  Index branch_channels = 1024;
  Index num_classes = 2;
};

/// Which stage feeds block1: a MAC block on the micro-lens array, or the 2D
/// baseline's 3x3 convolution on the central view.
enum class FrontEnd { mac, central_view };

struct NetConfig {
  FrontEnd front_end = FrontEnd::mac;
  MacBlockConfig mac;
  BackboneConfig backbone;
  AsppConfig aspp;
  Index in_channels = 3;
  std::vector<double> input_mean{0.0, 0.0, 0.0};

  /// Full-size configuration: VGG-16 widths, ASPP rates {6,12,18,24}.
  static NetConfig paper();
  /// Widths scaled by 1/8, ASPP rates {1,2,3,4}, ASPP width 64, no dropout.
  static NetConfig desk(Index angular_res = 9, MacVariant variant = MacVariant::mac9x9);

  void validate() const;
  Index output_stride() const;
};

/// Same network with the MAC block replaced by a 3x3 convolution on the
/// central sub-aperture image.
NetConfig baseline_2d(NetConfig cfg);

namespace detail {

struct ConvLayer {
  std::size_t weight;
  std::size_t bias;
  ConvParams params;
};
struct ReluLayer {};
struct DropoutLayer {
  double p;
};
struct PoolLayer {
  PoolParams params;
};
using Layer = std::variant<ConvLayer, ReluLayer, DropoutLayer, PoolLayer>;
using Chain = std::vector<Layer>;

template <typename T>
struct LayerState {
  Shape input_shape;
  Tensor<T> input;  // kept for conv and ReLU only
  std::vector<Index> argmax;
  Tensor<T> mask;
};

template <typename T>
using ChainTrace = std::vector<LayerState<T>>;

}  // namespace detail

/// Everything the backward pass needs from one forward pass.
template <typename T>
struct NetTrace {
  Tensor<T> input;
  Mac3x3Trace<T> mac3x3;
  StarTrace<T> star;
  Tensor<T> features;  // front-end output
  detail::ChainTrace<T> backbone;
  std::vector<detail::ChainTrace<T>> aspp;
  Shape score_shape;
};

/// Signs of every ReLU input and every pooling argmax of a trace. Two forward
/// passes with equal patterns lie on the same linear piece of the network.
template <typename T>
std::vector<std::int64_t> activation_pattern(const NetTrace<T>& trace);

struct TrainSchedule {
  double base_lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  long long max_iter = 160000;
  double power = 0.9;
  /// Rate multiplier for the new layers (MAC convs, block1's first conv and
  /// the ASPP score convs).
  double new_layer_lr_multiplier = 10.0;
};

template <typename T>
class SaliencyNet {
 public:
  SaliencyNet(NetConfig cfg, std::uint64_t seed);

  const NetConfig& config() const { return cfg_; }
  NetConfig& mutable_config() { return cfg_; }

  /// Array as a mean-subtracted [C,H,W] tensor, or its central view for the
  /// 2D baseline.
  Tensor<T> prepare_input(const MicroLensArray<T>& array) const;

  /// Logits [2, N_y, N_x] after bilinear upsampling of the summed ASPP scores.
  Tensor<T> forward(const Tensor<T>& input, Mode mode, RngStream* dropout_rng = nullptr,
                    NetTrace<T>* trace = nullptr) const;

  /// Accumulates parameter gradients from d(loss)/d(logits); returns
  /// d(loss)/d(input).
  Tensor<T> backward(const NetTrace<T>& trace, const Tensor<T>& grad_logits);

  /// Salient-class probability per pixel, eval mode.
  Tensor<T> predict(const MicroLensArray<T>& array) const;

  /// One SGD iteration on one sample; returns the loss before the update.
  T train_step(const MicroLensArray<T>& array, const Image<T>& mask, const TrainSchedule& schedule,
               long long iter, std::uint64_t seed);

  std::span<Parameter<T>> parameters() { return params_; }
  std::span<const Parameter<T>> parameters() const { return params_; }
  const std::vector<std::string>& parameter_names() const { return names_; }
  Parameter<T>& parameter(const std::string& name);
  const Parameter<T>& parameter(const std::string& name) const;
  Index parameter_count() const;
  void zero_grad();
  /// Re-applies lr multipliers from the schedule.
  void set_new_layer_multiplier(double multiplier);

 private:
  std::size_t add(const std::string& name, const Shape& shape, bool new_layer, bool bias, RngStream& rng);
  void build(std::uint64_t seed);

  Tensor<T> run_chain(const detail::Chain& chain, Tensor<T> x, Mode mode, RngStream* rng,
                      detail::ChainTrace<T>* trace) const;
  Tensor<T> back_chain(const detail::Chain& chain, const detail::ChainTrace<T>& trace, Tensor<T> g);
  StarWeights<T> star_weights() const;

  NetConfig cfg_;
  std::vector<Parameter<T>> params_;
  std::vector<std::string> names_;
  std::vector<bool> new_layer_;
  std::vector<std::size_t> front_;  // front-end parameter slots, variant-specific order
  detail::Chain backbone_;
  std::vector<detail::Chain> aspp_;
};

/// [H,W,1] mask image as a [H,W] label tensor.
template <typename T>
Tensor<T> labels_from_mask(const Image<T>& mask);

}  // namespace lfsal

#endif  // LFSAL_NETWORK_HPP
