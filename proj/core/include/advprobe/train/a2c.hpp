#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "advprobe/env/scenario.hpp"
#include "advprobe/nn/loss.hpp"
#include "advprobe/train/curriculum.hpp"
#include "advprobe/train/training.hpp"

namespace advprobe::train {

struct A2cHyper {
  double gamma = 0.99;
  double actor_learning_rate = 1.5e-4;
  double critic_learning_rate = 3e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double clip_norm = 10.0;
  /// Transitions per update; returns bootstrap from the critic at the end.
  std::size_t segment_length = 16;
  std::size_t budget_per_level = 300'000;
  std::size_t win_window = kWinWindow;
  double win_gate = kWinGate;
  double reward_scale = 0.01;
  std::size_t hidden = 256;

  void validate() const;
};

/// Actor-loss gradient with respect to the logits of one sample:
/// d/dz [ -advantage * sum_k log pi_k(a_k) - entropy_coef * sum_k H_k ].
/// Returns the summed per-segment entropy.
double actor_logit_grad(const Eigen::Ref<const Eigen::VectorXd>& logits,
                        const nn::Segments& segments, const env::MultiDiscreteAction& action,
                        double advantage, double entropy_coef, Eigen::Ref<Eigen::VectorXd> grad);

/// Entropy of the categorical distribution softmax(logits).
double categorical_entropy(const Eigen::Ref<const Eigen::VectorXd>& logits);

/// Advantage actor-critic: ReLU actor over per-segment categoricals, Tanh
/// critic with its own optimizer, n-step returns over fixed segments.
TrainingResult train_a2c(const env::ScenarioConfig& config, const A2cHyper& hyper,
                         const Lesson& lesson, std::uint64_t seed,
                         const ProgressFn& progress = {});

}  // namespace advprobe::train
