#include "lfsal/optim.hpp"

#include <cmath>
#include <string>

namespace lfsal {

template <typename T>
void sgd_step(std::span<Parameter<T>> params, const SgdConfig& cfg) {
  if (cfg.lr < 0.0) throw ConfigError("sgd_step: negative learning rate " + std::to_string(cfg.lr));
  for (Parameter<T>& p : params) {
    if (p.learnable) {
      const T eta = static_cast<T>(cfg.lr) * p.lr_multiplier;
      p.velocity.values() = static_cast<T>(cfg.momentum) * p.velocity.values() -
                            eta * (p.grad.values() + static_cast<T>(cfg.weight_decay) * p.value.values());
      p.value.values() += p.velocity.values();
      require_finite(p.value, "sgd_step");
    }
    p.grad.set_zero();
  }
}

double poly_lr(double base_lr, long long iter, long long max_iter, double power) {
  if (max_iter <= 0) throw ConfigError("poly_lr: max_iter must be positive");
  if (iter < 0 || iter > max_iter) {
    throw ConfigError("poly_lr: iteration " + std::to_string(iter) + " outside [0, " +
                      std::to_string(max_iter) + "]");
  }
  return base_lr * std::pow(1.0 - static_cast<double>(iter) / static_cast<double>(max_iter), power);
}

template <typename T>
Tensor<T> xavier_init(const Shape& shape, RngStream& rng) {
  if (shape.empty()) throw ConfigError("xavier_init: empty shape");
  Tensor<T> t(shape);
  const Index fan_in = shape.size() > 1 ? t.size() / shape[0] : 1;
  const double a = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(-a, a));
  return t;
}

template void sgd_step(std::span<Parameter<float>>, const SgdConfig&);
template void sgd_step(std::span<Parameter<double>>, const SgdConfig&);
template Tensor<float> xavier_init(const Shape&, RngStream&);
template Tensor<double> xavier_init(const Shape&, RngStream&);

}  // namespace lfsal
