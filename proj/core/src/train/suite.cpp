#include "advprobe/train/suite.hpp"

#include "advprobe/common/rng.hpp"

namespace advprobe::train {

std::vector<SuiteMember> policy_suite_plan(const env::ScenarioConfig& config) {
  return {
      {"A2C-A", Algorithm::A2C, stdev_ladder_lesson(config)},
      {"A2C-B", Algorithm::A2C, adr_lesson(config)},
      {"A2C-C", Algorithm::A2C, variable_adding_lesson(config)},
      {"DQN-A", Algorithm::DQN, variable_adding_lesson(config)},
      {"DQN-B", Algorithm::DQN, deterministic_lesson(config)},
  };
}

TrainingResult train_member(const env::ScenarioConfig& config, const SuiteMember& member,
                            const DqnHyper& dqn, const A2cHyper& a2c, std::uint64_t seed,
                            const ProgressFn& progress) {
  TrainingResult r = member.algorithm == Algorithm::DQN
                         ? train_dqn(config, dqn, member.lesson, seed, progress)
                         : train_a2c(config, a2c, member.lesson, seed, progress);
  r.policy.tag = member.tag;
  return r;
}

std::vector<TrainingResult> build_policy_suite(const env::ScenarioConfig& config,
                                               std::uint64_t seed, const DqnHyper& dqn,
                                               const A2cHyper& a2c) {
  std::vector<TrainingResult> out;
  const auto plan = policy_suite_plan(config);
  for (std::size_t i = 0; i < plan.size(); ++i)
    out.push_back(train_member(config, plan[i], dqn, a2c, derive_seed({seed, i})));
  return out;
}

}  // namespace advprobe::train
