#include "advprobe/env/cyberstrike.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <string>

namespace advprobe::env {

std::size_t observation_size(const ScenarioConfig& config) {
  const std::size_t nb = config.num_blue();
  const std::size_t nr = config.num_red();
  return 3 * (nb + nr) + nr * nr;
}

std::vector<int> action_cardinalities(const ScenarioConfig& config) {
  return std::vector<int>(config.num_blue(), static_cast<int>(config.num_red()) + 1);
}

double sample_adr(const AdrVariable& var, double stdev, CounterRng& rng) {
  if (stdev <= 0.0) return var.mean;
  constexpr int kMaxTries = 1'000'000;
  for (int i = 0; i < kMaxTries; ++i) {
    std::normal_distribution<double> normal(var.mean, stdev);
    const double x = normal(rng);
    if (x >= var.minimum && x <= var.maximum) return x;
  }
  return std::clamp(var.mean, var.minimum, var.maximum);
}

ResetResult reset(const ScenarioConfig& config, std::uint64_t seed,
                  const CurriculumLevel& level) {
  const std::size_t nr = config.num_red();
  const std::size_t nb = config.num_blue();
  EnvState s;
  s.rng = CounterRng(seed);
  s.red_alive.resize(nr);
  s.red_compromised.assign(nr, 0);
  for (std::size_t i = 0; i < nr; ++i) s.red_alive[i] = config.red_assets[i].is_alive;
  s.blue_alive.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) s.blue_alive[i] = config.blue_assets[i].is_alive;
  s.observed_defense.assign(nr * nr, DefenseKnowledge::Unknown);

  // ADR variables are sampled once per episode, in declaration order, and
  // shared by every matrix cell that references them.
  std::vector<double> adr_values;
  adr_values.reserve(config.adr_variables.size());
  for (const auto& var : config.adr_variables)
    adr_values.push_back(sample_adr(var, level.stdev_for(var), s.rng));
  const std::size_t side = config.effect_side();
  s.resolved_effects.resize(side * side);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      const EffectEntry& e = config.effect_probability[r][c];
      s.resolved_effects[r * side + c] = e.adr ? adr_values[*e.adr] : e.literal;
    }

  s.property_log.red_count =
      static_cast<int>(std::count(s.red_alive.begin(), s.red_alive.end(), 1));
  s.property_log.blue_count =
      static_cast<int>(std::count(s.blue_alive.begin(), s.blue_alive.end(), 1));
  ObsVector obs = encode_observation(config, s);
  return {std::move(s), std::move(obs)};
}

void check_action(const ScenarioConfig& config, const MultiDiscreteAction& action) {
  if (action.size() != config.num_blue())
    throw std::invalid_argument("action has " + std::to_string(action.size()) +
                                " sub-actions, expected " + std::to_string(config.num_blue()));
  const int card = static_cast<int>(config.num_red()) + 1;
  for (int a : action)
    if (a < 0 || a >= card)
      throw std::invalid_argument("sub-action " + std::to_string(a) + " out of range");
}

StepResult step(const ScenarioConfig& config, EnvState& s,
                const MultiDiscreteAction& action) {
  if (s.done) throw EpisodeFinishedError();
  check_action(config, action);

  const std::size_t nr = config.num_red();
  const std::size_t side = config.effect_side();
  const std::vector<std::uint8_t> alive_before = s.red_alive;
  const std::vector<std::uint8_t> compromised_before = s.red_compromised;

  auto defended = [&](std::size_t j) {
    for (std::size_t k : config.defense_network[j])
      if (alive_before[k] && !compromised_before[k]) return true;
    return false;
  };

  double reward = 0.0;
  std::vector<std::size_t> newly_compromised;
  for (std::size_t b = 0; b < config.num_blue(); ++b) {
    if (!s.blue_alive[b] || action[b] == 0) continue;
    const BlueAsset& asset = config.blue_assets[b];
    const auto j = static_cast<std::size_t>(action[b] - 1);
    reward -= asset.use_cost;

    if (asset.type == kEavesdropperType) {
      for (std::size_t k = 0; k < nr; ++k)
        s.observed_defense[k * nr + j] = config.defends(k, j)
                                             ? DefenseKnowledge::KnownDefends
                                             : DefenseKnowledge::KnownNotDefends;
      continue;
    }
    if (!alive_before[j] || compromised_before[j]) continue;
    if (defended(j)) {
      s.blue_alive[b] = 0;
      reward -= asset.loss_cost;
      continue;
    }
    const auto red_type = static_cast<std::size_t>(config.red_assets[j].type);
    const double p = s.resolved_effects[static_cast<std::size_t>(asset.type) * side + red_type];
    if (s.rng.uniform() < p) newly_compromised.push_back(j);
  }
  for (std::size_t j : newly_compromised) {
    s.red_compromised[j] = 1;
    s.red_alive[j] = 0;
  }

  ++s.step_count;
  bool hackers_left = false;
  for (std::size_t b = 0; b < config.num_blue(); ++b)
    if (s.blue_alive[b] && config.is_hacker(b)) hackers_left = true;

  Outcome outcome = Outcome::Undecided;
  if (s.red_compromised[config.target_index()]) {
    outcome = Outcome::Win;
    reward += kWinBonus;
  } else if (!hackers_left || s.step_count >= config.episode_cap) {
    outcome = Outcome::Loss;
    reward -= kLossPenalty;
  }

  s.done = outcome != Outcome::Undecided;
  s.cumulative_reward += reward;
  s.property_log.win = outcome;
  s.property_log.red_count =
      static_cast<int>(std::count(s.red_alive.begin(), s.red_alive.end(), 1));
  s.property_log.blue_count =
      static_cast<int>(std::count(s.blue_alive.begin(), s.blue_alive.end(), 1));
  s.property_log.trajectory_length = s.step_count;

  return {encode_observation(config, s), reward, s.done, s.property_log};
}

ObsVector encode_observation(const ScenarioConfig& config, const EnvState& s) {
  ObsVector obs;
  obs.reserve(observation_size(config));
  for (std::size_t b = 0; b < config.num_blue(); ++b) {
    obs.push_back(s.blue_alive[b]);
    obs.push_back(config.blue_assets[b].type);
    obs.push_back(0.0);
  }
  for (std::size_t r = 0; r < config.num_red(); ++r) {
    obs.push_back(s.red_alive[r]);
    obs.push_back(config.red_assets[r].type);
    obs.push_back(config.red_assets[r].is_target ? 1.0 : 0.0);
  }
  for (DefenseKnowledge k : s.observed_defense) obs.push_back(static_cast<double>(k));
  return obs;
}

std::size_t defense_obs_index(const ScenarioConfig& config, std::size_t defender,
                              std::size_t node) {
  return 3 * (config.num_blue() + config.num_red()) + defender * config.num_red() + node;
}

MultiDiscreteAction scripted_optimal_action(const ScenarioConfig& config,
                                            const EnvState& s) {
  const std::size_t nr = config.num_red();
  auto down = [&](std::size_t j) { return !s.red_alive[j] || s.red_compromised[j]; };
  auto column_known = [&](std::size_t j) {
    for (std::size_t k = 0; k < nr; ++k)
      if (s.knowledge(k, j) == DefenseKnowledge::Unknown) return false;
    return true;
  };

  // Nodes reachable from the target through revealed defender edges.
  std::vector<std::size_t> relevant;
  std::vector<bool> seen(nr, false);
  std::deque<std::size_t> queue{config.target_index()};
  seen[config.target_index()] = true;
  while (!queue.empty()) {
    const std::size_t j = queue.front();
    queue.pop_front();
    relevant.push_back(j);
    for (std::size_t k = 0; k < nr; ++k)
      if (!seen[k] && s.knowledge(k, j) == DefenseKnowledge::KnownDefends) {
        seen[k] = true;
        queue.push_back(k);
      }
  }

  std::vector<std::size_t> to_reveal;
  std::vector<std::size_t> frontier;
  for (std::size_t j : relevant) {
    if (down(j)) continue;
    if (!column_known(j)) {
      to_reveal.push_back(j);
      continue;
    }
    bool open = true;
    for (std::size_t k = 0; k < nr; ++k)
      if (s.knowledge(k, j) == DefenseKnowledge::KnownDefends && !down(k)) open = false;
    if (open) frontier.push_back(j);
  }
  std::sort(to_reveal.begin(), to_reveal.end());
  const std::size_t target = config.target_index();
  std::sort(frontier.begin(), frontier.end(), [&](std::size_t a, std::size_t b) {
    if ((a == target) != (b == target)) return a == target;
    return a < b;
  });

  MultiDiscreteAction action(config.num_blue(), 0);
  std::size_t next_reveal = 0;
  std::size_t next_hack = 0;
  for (std::size_t b = 0; b < config.num_blue(); ++b) {
    if (!s.blue_alive[b]) continue;
    if (!config.is_hacker(b)) {
      if (next_reveal < to_reveal.size())
        action[b] = static_cast<int>(to_reveal[next_reveal++]) + 1;
    } else if (next_hack < frontier.size()) {
      action[b] = static_cast<int>(frontier[next_hack++]) + 1;
    }
  }
  return action;
}

}  // namespace advprobe::env
