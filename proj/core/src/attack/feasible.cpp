#include "advprobe/attack/feasible.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace advprobe::attack {

SlotInfo describe_slot(const env::ScenarioConfig& config, std::size_t index) {
  const std::size_t nb = config.num_blue();
  const std::size_t nr = config.num_red();
  if (index >= env::observation_size(config))
    throw std::out_of_range("observation index " + std::to_string(index) + " out of range");
  if (index < 3 * nb) {
    static constexpr SlotKind kinds[] = {SlotKind::BlueAlive, SlotKind::BlueType,
                                         SlotKind::BluePadding};
    return {kinds[index % 3], index / 3, 0};
  }
  index -= 3 * nb;
  if (index < 3 * nr) {
    static constexpr SlotKind kinds[] = {SlotKind::RedAlive, SlotKind::RedType,
                                         SlotKind::RedIsTarget};
    return {kinds[index % 3], index / 3, 0};
  }
  index -= 3 * nr;
  return {SlotKind::Defense, index / nr, index % nr};
}

std::string slot_name(const env::ScenarioConfig& config, std::size_t index) {
  const SlotInfo s = describe_slot(config, index);
  const std::string a = std::to_string(s.asset);
  switch (s.kind) {
    case SlotKind::BlueAlive: return "blue" + a + ".alive";
    case SlotKind::BlueType: return "blue" + a + ".type";
    case SlotKind::BluePadding: return "blue" + a + ".pad";
    case SlotKind::RedAlive: return "red" + a + ".alive";
    case SlotKind::RedType: return "red" + a + ".type";
    case SlotKind::RedIsTarget: return "red" + a + ".is_target";
    case SlotKind::Defense: return "def[" + a + "," + std::to_string(s.node) + "]";
  }
  return {};
}

std::vector<double> enumerate_feasible_values(const env::ScenarioConfig& config,
                                              std::size_t index) {
  const SlotInfo s = describe_slot(config, index);
  switch (s.kind) {
    case SlotKind::BlueAlive:
    case SlotKind::RedAlive:
    case SlotKind::RedIsTarget:
      return {0.0, 1.0};
    case SlotKind::BluePadding:
      return {0.0};
    case SlotKind::Defense:
      return {-1.0, 0.0, 1.0};
    case SlotKind::BlueType: {
      std::set<int> types;
      for (const auto& b : config.blue_assets) types.insert(b.type);
      return {types.begin(), types.end()};
    }
    case SlotKind::RedType: {
      std::set<int> types;
      for (const auto& r : config.red_assets) types.insert(r.type);
      return {types.begin(), types.end()};
    }
  }
  return {};
}

std::vector<std::vector<double>> feasible_table(const env::ScenarioConfig& config) {
  const std::size_t n = env::observation_size(config);
  std::vector<std::vector<double>> table(n);
  for (std::size_t i = 0; i < n; ++i) table[i] = enumerate_feasible_values(config, i);
  return table;
}

bool is_benign_pair(const env::EnvState& state, std::size_t a, std::size_t b) {
  const std::size_t nr = state.red_compromised.size();
  if (a >= nr || b >= nr) throw std::out_of_range("red asset index out of range");
  if (a == b) throw std::invalid_argument("benign pair needs two distinct red assets");
  return state.red_compromised[a] != 0 || state.red_compromised[b] != 0;
}

bool is_benign_slot(const env::ScenarioConfig& config, const env::EnvState& state,
                    std::size_t index) {
  const SlotInfo s = describe_slot(config, index);
  if (s.kind != SlotKind::Defense || s.asset == s.node) return false;
  return is_benign_pair(state, s.asset, s.node);
}

}  // namespace advprobe::attack
