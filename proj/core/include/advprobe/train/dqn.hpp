#pragma once

#include <cstddef>
#include <cstdint>

#include "advprobe/env/scenario.hpp"
#include "advprobe/train/curriculum.hpp"
#include "advprobe/train/training.hpp"

namespace advprobe::train {

struct DqnHyper {
  double gamma = 0.99;
  /// Learner updates per environment-step batch.
  std::size_t replay_ratio = 4;
  /// Environment steps per batch handed to the learner.
  std::size_t env_steps_per_batch = 16;
  double tau = 0.05;
  /// Soft target update period, in environment steps.
  std::size_t target_interval = 250;
  double learning_rate = 3e-4;
  double clip_norm = 10.0;
  double epsilon_start = 1.0;
  /// Multiplicative decay applied once per episode.
  double epsilon_decay = 0.99;
  double epsilon_min = 0.01;
  std::size_t replay_capacity = 50'000;
  std::size_t batch_size = 64;
  /// Training budget per curriculum level, in environment steps.
  std::size_t budget_per_level = 300'000;
  std::size_t win_window = kWinWindow;
  double win_gate = kWinGate;
  /// Rewards are multiplied by this before entering the TD target.
  double reward_scale = 0.01;
  std::size_t hidden = 256;

  /// Throws std::invalid_argument unless every field is positive and
  /// epsilon_min <= epsilon_start.
  void validate() const;
};

inline double decay_epsilon(double epsilon, const DqnHyper& h) {
  const double next = epsilon * h.epsilon_decay;
  return next < h.epsilon_min ? h.epsilon_min : next;
}

/// Deep Q-learning with a factored multi-discrete head: one output per
/// (sub-action, choice); Q(s, a) is the mean of the chosen entries and each
/// chosen entry regresses to r + gamma * mean_k max Q_target_k(s').
TrainingResult train_dqn(const env::ScenarioConfig& config, const DqnHyper& hyper,
                         const Lesson& lesson, std::uint64_t seed,
                         const ProgressFn& progress = {});

}  // namespace advprobe::train
