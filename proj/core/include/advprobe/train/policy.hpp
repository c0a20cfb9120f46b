#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "advprobe/env/cyberstrike.hpp"
#include "advprobe/nn/mlp.hpp"

namespace advprobe::train {

enum class Algorithm { DQN, A2C };

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

/// Summary of one curriculum level of a training run.
struct LevelRecord {
  int level = 0;
  std::size_t episodes = 0;
  std::size_t env_steps = 0;
  double final_win_rate = 0.0;
  bool passed = false;

  friend bool operator==(const LevelRecord&, const LevelRecord&) = default;
};

/// A trained network frozen for analysis. Acts deterministically by
/// per-segment argmax over its output.
struct FrozenPolicy {
  nn::Mlp net;
  Algorithm algorithm = Algorithm::DQN;
  std::string tag;
  std::string curriculum;
  std::vector<int> cardinalities;
  std::uint64_t seed = 0;
  std::vector<LevelRecord> history;

  /// Throws std::invalid_argument if the output size disagrees with the
  /// action cardinalities.
  void check() const;

  friend bool operator==(const FrozenPolicy&, const FrozenPolicy&) = default;
};

/// Per-segment argmax; ties break to the lowest index.
env::MultiDiscreteAction greedy_segments(const Eigen::Ref<const Eigen::VectorXd>& output,
                                         std::span<const int> cardinalities);

env::MultiDiscreteAction select_action(const FrozenPolicy& policy,
                                       std::span<const double> obs);

inline constexpr const char* kPolicyFormat = "advprobe.policy";
inline constexpr int kPolicyVersion = 1;

/// Structured-text checkpoint (JSON). Doubles round-trip exactly.
std::string policy_to_text(const FrozenPolicy& policy);
FrozenPolicy policy_from_text(const std::string& text);
void save_policy(const FrozenPolicy& policy, const std::filesystem::path& path);
FrozenPolicy load_policy(const std::filesystem::path& path);

}  // namespace advprobe::train
