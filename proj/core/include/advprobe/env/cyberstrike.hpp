#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "advprobe/common/rng.hpp"
#include "advprobe/env/scenario.hpp"

namespace advprobe::env {

/// Terminal reward magnitudes added on win (+) and loss (-).
inline constexpr double kWinBonus = 100.0;
inline constexpr double kLossPenalty = 100.0;

/// Blue's knowledge of whether red node k defends red node j.
enum class DefenseKnowledge : std::int8_t {
  Unknown = -1,
  KnownNotDefends = 0,
  KnownDefends = 1,
};

enum class Outcome : std::int8_t { Undecided = 0, Win = 1, Loss = 2 };

/// End-of-episode measurables tracked at every step.
struct PropertyLog {
  Outcome win = Outcome::Undecided;
  int red_count = 0;
  int blue_count = 0;
  int trajectory_length = 0;

  friend bool operator==(const PropertyLog&, const PropertyLog&) = default;
};

using ObsVector = std::vector<double>;
/// One sub-action per blue asset: 0 = No-op, j + 1 = act on red node j.
using MultiDiscreteAction = std::vector<int>;

/// Full mutable episode state, including hidden information.
struct EnvState {
  std::vector<std::uint8_t> red_alive;
  std::vector<std::uint8_t> red_compromised;
  std::vector<std::uint8_t> blue_alive;
  /// Row-major num_red x num_red; entry (k, j) is knowledge of "k defends j".
  std::vector<DefenseKnowledge> observed_defense;
  int step_count = 0;
  double cumulative_reward = 0.0;
  PropertyLog property_log;
  /// Row-major effect_side x effect_side, sampled once per episode.
  std::vector<double> resolved_effects;
  CounterRng rng;
  bool done = false;

  DefenseKnowledge knowledge(std::size_t defender, std::size_t node) const {
    const std::size_t nr = red_alive.size();
    return observed_defense[defender * nr + node];
  }

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepResult {
  ObsVector obs;
  double reward = 0.0;
  bool done = false;
  PropertyLog properties;
};

class EpisodeFinishedError : public std::logic_error {
 public:
  EpisodeFinishedError() : std::logic_error("step() called on a finished episode") {}
};

/// Length of the flat observation: 3 (num_blue + num_red) + num_red^2.
std::size_t observation_size(const ScenarioConfig& config);

/// One entry per blue asset, each num_red + 1.
std::vector<int> action_cardinalities(const ScenarioConfig& config);

/// Draws from normal(mean, stdev) by rejection until the value lies in
/// [minimum, maximum]. A zero stdev returns the mean.
double sample_adr(const AdrVariable& var, double stdev, CounterRng& rng);
inline double sample_adr(const AdrVariable& var, CounterRng& rng) {
  return sample_adr(var, var.stdev, rng);
}

struct ResetResult {
  EnvState state;
  ObsVector obs;
};

/// Starts an episode with a fully unknown defense network. Equal
/// (config, seed, level) triples give bit-identical states.
ResetResult reset(const ScenarioConfig& config, std::uint64_t seed,
                  const CurriculumLevel& level);

/// Advances the episode by one simultaneous blue move. All counter and
/// defense checks use the state at the start of the step.
StepResult step(const ScenarioConfig& config, EnvState& state,
                const MultiDiscreteAction& action);

/// Layout: [blue: alive, type, 0]* ++ [red: alive, type, is_target]* ++
/// observed defense matrix (row-major, Unknown -1, not-defends 0, defends 1).
ObsVector encode_observation(const ScenarioConfig& config, const EnvState& state);

/// Observation index of the defense-matrix entry "defender defends node".
std::size_t defense_obs_index(const ScenarioConfig& config, std::size_t defender,
                              std::size_t node);

/// Throws std::invalid_argument when the action has the wrong arity or a
/// sub-action is out of range.
void check_action(const ScenarioConfig& config, const MultiDiscreteAction& action);

/// Scripted reference strategy: the eavesdropper reveals defender columns
/// breadth-first from the target, hackers strike nodes whose known defenders
/// are all down, target first. Uses only information visible to blue.
MultiDiscreteAction scripted_optimal_action(const ScenarioConfig& config,
                                            const EnvState& state);

}  // namespace advprobe::env
