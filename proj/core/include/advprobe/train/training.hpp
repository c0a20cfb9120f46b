#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "advprobe/train/policy.hpp"

namespace advprobe::train {

struct EpisodeLogEntry {
  std::size_t episode = 0;
  int level = 0;
  double episode_return = 0.0;
  bool win = false;
  /// Exploration rate in effect during the episode (DQN only).
  std::optional<double> epsilon;
  std::size_t env_steps = 0;
};

struct TrainingResult {
  FrozenPolicy policy;
  std::vector<EpisodeLogEntry> log;
  /// The final level's gate was passed within budget.
  bool success = false;
  std::size_t env_steps = 0;
  std::size_t learner_updates = 0;
  /// Environment-step batches handed to the learner (DQN).
  std::size_t env_batches = 0;
};

/// Called after every episode; return false to stop training early.
using ProgressFn = std::function<bool(const EpisodeLogEntry&)>;

inline constexpr const char* kTrainingLogFormat = "advprobe.training_log";
inline constexpr int kTrainingLogVersion = 1;

void write_training_log(std::ostream& out, const std::vector<EpisodeLogEntry>& log);

}  // namespace advprobe::train
