#pragma once

#include <cstdint>

#include "advprobe/nn/mlp.hpp"

namespace advprobe::nn {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clip; <= 0 disables clipping.
  double clip_norm = 10.0;
};

class AdamState {
 public:
  AdamState() = default;
  AdamState(const Mlp& net, AdamConfig config);

  const AdamConfig& config() const noexcept { return config_; }
  std::int64_t step() const noexcept { return step_; }
  const ParamGrads& first_moment() const noexcept { return m_; }
  const ParamGrads& second_moment() const noexcept { return v_; }

  /// Clips grads to the configured global norm, then applies one Adam update
  /// to net. Returns the pre-clip gradient norm.
  double apply(Mlp& net, ParamGrads grads);

 private:
  AdamConfig config_;
  ParamGrads m_;
  ParamGrads v_;
  std::int64_t step_ = 0;
};

/// Scales grads so that their global norm is at most max_norm. Returns the
/// norm before scaling.
double clip_grad_norm(ParamGrads& grads, double max_norm);

}  // namespace advprobe::nn
