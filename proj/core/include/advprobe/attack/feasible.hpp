#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "advprobe/env/cyberstrike.hpp"

namespace advprobe::attack {

enum class SlotKind { BlueAlive, BlueType, BluePadding, RedAlive, RedType, RedIsTarget, Defense };

/// What an observation index encodes. For defense slots `asset` is the
/// defender and `node` the defended red node.
struct SlotInfo {
  SlotKind kind = SlotKind::BluePadding;
  std::size_t asset = 0;
  std::size_t node = 0;
};

/// Throws std::out_of_range when index >= observation_size(config).
SlotInfo describe_slot(const env::ScenarioConfig& config, std::size_t index);

/// Short stable label such as "red3.alive" or "def[2,5]".
std::string slot_name(const env::ScenarioConfig& config, std::size_t index);

/// Ascending values the slot may take in a reachable observation.
std::vector<double> enumerate_feasible_values(const env::ScenarioConfig& config,
                                              std::size_t index);

/// enumerate_feasible_values for every index, precomputed.
std::vector<std::vector<double>> feasible_table(const env::ScenarioConfig& config);

/// True iff at least one of the two distinct red assets is compromised.
/// Throws std::out_of_range on a bad index and std::invalid_argument when
/// a == b.
bool is_benign_pair(const env::EnvState& state, std::size_t a, std::size_t b);

/// Benign classification of a defense slot in the given state. Other slot
/// kinds and diagonal entries are never benign.
bool is_benign_slot(const env::ScenarioConfig& config, const env::EnvState& state,
                    std::size_t index);

}  // namespace advprobe::attack
