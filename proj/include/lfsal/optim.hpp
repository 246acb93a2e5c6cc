#ifndef LFSAL_OPTIM_HPP
#define LFSAL_OPTIM_HPP

#include <span>

#include "lfsal/rng.hpp"
#include "lfsal/tensor.hpp"

namespace lfsal {

/// Learnable tensor plus its SGD state. value, grad and velocity always share
/// one shape; velocity starts at zero.
template <typename T>
struct Parameter {
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> velocity;
  bool learnable = true;
  T lr_multiplier = T(1);

  Parameter() = default;
  explicit Parameter(Tensor<T> v, T lr_mult = T(1))
      : value(std::move(v)), grad(value.shape()), velocity(value.shape()), lr_multiplier(lr_mult) {}
};

struct SgdConfig {
  double lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.0005;
};

/// v <- momentum v - lr_eff (grad + weight_decay theta); theta <- theta + v;
/// grads are zeroed afterwards. Non-learnable parameters only get their grads
/// cleared.
template <typename T>
void sgd_step(std::span<Parameter<T>> params, const SgdConfig& cfg);

/// base_lr (1 - iter / max_iter)^power.
double poly_lr(double base_lr, long long iter, long long max_iter, double power);

/// Uniform in [-a, a] with a = sqrt(3 / fan_in), fan_in = product of all
/// dims but the first, so the variance is 1 / fan_in.
template <typename T>
Tensor<T> xavier_init(const Shape& shape, RngStream& rng);

}  // namespace lfsal

#endif  // LFSAL_OPTIM_HPP
