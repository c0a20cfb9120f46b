#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advprobe/common/error.hpp"

namespace advprobe::env {

/// Blue asset type that eavesdrops instead of hacking.
inline constexpr int kEavesdropperType = 3;

/// Default episode horizon; reaching it counts as a loss.
inline constexpr int kDefaultEpisodeCap = 50;

struct AdrVariable {
  std::string id;
  double mean = 1.0;
  double stdev = 0.0;
  double minimum = 0.0;
  double maximum = 1.0;
};

struct RedAsset {
  bool is_target = false;
  int type = 0;
  bool is_alive = true;
};

struct BlueAsset {
  int type = 1;
  double loss_cost = 0.0;
  double use_cost = 0.0;
  bool is_alive = true;
};

/// One cell of the effect-probability matrix: a literal probability or a
/// reference into ScenarioConfig::adr_variables.
struct EffectEntry {
  double literal = 0.0;
  std::optional<std::size_t> adr;

  friend bool operator==(const EffectEntry&, const EffectEntry&) = default;
};

struct ScenarioConfig {
  std::vector<AdrVariable> adr_variables;
  std::vector<RedAsset> red_assets;
  /// defense_network[j] lists the red nodes that defend red node j.
  std::vector<std::vector<std::size_t>> defense_network;
  std::vector<BlueAsset> blue_assets;
  /// Square matrix indexed [attacker type][defender type].
  std::vector<std::vector<EffectEntry>> effect_probability;
  int episode_cap = kDefaultEpisodeCap;

  std::size_t num_red() const { return red_assets.size(); }
  std::size_t num_blue() const { return blue_assets.size(); }
  std::size_t target_index() const;
  std::size_t effect_side() const { return effect_probability.size(); }
  bool defends(std::size_t defender, std::size_t node) const;
  bool is_hacker(std::size_t blue) const {
    return blue_assets[blue].type != kEavesdropperType;
  }
};

/// Distinguishes the three failure classes of scenario loading.
class ScenarioError : public ConfigError {
 public:
  enum class Kind { Parse, DanglingAdrReference, Invariant };
  ScenarioError(Kind kind, const std::string& what)
      : ConfigError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Parses and validates a YAML scenario document.
ScenarioConfig load_scenario(std::string_view yaml_text);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

/// Throws ScenarioError(Kind::Invariant) on the first violated invariant.
void validate(const ScenarioConfig& config);

/// Stdev overrides applied to ADR variables for one training level. Variables
/// without an override use the stdev declared in the scenario.
struct CurriculumLevel {
  int index = 0;
  std::map<std::string, double> stdev_overrides;

  double stdev_for(const AdrVariable& var) const;

  /// Every ADR variable pinned at stdev 0.
  static CurriculumLevel deterministic(const ScenarioConfig& config,
                                       int index = 0);
  /// Every ADR variable at the given stdev.
  static CurriculumLevel uniform(const ScenarioConfig& config, double stdev,
                                 int index = 0);

  friend bool operator==(const CurriculumLevel&, const CurriculumLevel&) = default;
};

}  // namespace advprobe::env
