#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advprobe/train/a2c.hpp"
#include "advprobe/train/dqn.hpp"

namespace advprobe::train {

struct SuiteMember {
  std::string tag;
  Algorithm algorithm;
  Lesson lesson;
};

/// The five analysis policies:
///   A2C-A  stdev ladder on all variables
///   A2C-B  all variables at stdev 1 from the start
///   A2C-C  variable-adding curriculum
///   DQN-A  variable-adding curriculum
///   DQN-B  fully deterministic
std::vector<SuiteMember> policy_suite_plan(const env::ScenarioConfig& config);

TrainingResult train_member(const env::ScenarioConfig& config, const SuiteMember& member,
                            const DqnHyper& dqn, const A2cHyper& a2c, std::uint64_t seed,
                            const ProgressFn& progress = {});

/// Trains every member of the plan. Member i uses seed derive_seed({seed, i}).
std::vector<TrainingResult> build_policy_suite(const env::ScenarioConfig& config,
                                               std::uint64_t seed, const DqnHyper& dqn = {},
                                               const A2cHyper& a2c = {});

}  // namespace advprobe::train
