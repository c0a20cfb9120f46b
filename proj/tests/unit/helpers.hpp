#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "advprobe/env/cyberstrike.hpp"
#include "advprobe/train/policy.hpp"

namespace advprobe::fixtures {

inline const env::ScenarioConfig& appendix() {
  static const env::ScenarioConfig config = env::load_scenario_file(ADVPROBE_SCENARIO);
  return config;
}

/// Appendix scenario with every effect probability pinned to 1.
inline env::ScenarioConfig certain_scenario() {
  env::ScenarioConfig config = appendix();
  for (auto& row : config.effect_probability)
    for (auto& e : row) e = env::EffectEntry{1.0, std::nullopt};
  return config;
}

inline env::CurriculumLevel det(const env::ScenarioConfig& config) {
  return env::CurriculumLevel::deterministic(config);
}

inline train::FrozenPolicy random_policy(std::uint64_t seed,
                                         const env::ScenarioConfig& config = appendix(),
                                         std::size_t hidden = 64) {
  train::FrozenPolicy p;
  p.cardinalities = env::action_cardinalities(config);
  std::size_t out = 0;
  for (int c : p.cardinalities) out += static_cast<std::size_t>(c);
  p.net = nn::Mlp({env::observation_size(config), hidden, hidden, out}, nn::Activation::ReLU, seed);
  p.tag = "random-" + std::to_string(seed);
  p.seed = seed;
  return p;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("advprobe-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace advprobe::fixtures
