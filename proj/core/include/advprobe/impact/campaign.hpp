#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advprobe/attack/fgsm.hpp"
#include "advprobe/data/dataset.hpp"
#include "advprobe/impact/metrics.hpp"

namespace advprobe::impact {

struct AttackPoint {
  std::size_t record = 0;
  std::size_t index = 0;
  env::MultiDiscreteAction target;

  friend bool operator==(const AttackPoint&, const AttackPoint&) = default;
  friend auto operator<=>(const AttackPoint&, const AttackPoint&) = default;
};

/// Records (non-terminal, allowed step) x allowed indices, record-major.
std::vector<AttackPoint> enumerate_attack_points(const data::Dataset& dataset,
                                                 const attack::AttackSpec& spec);

using StratumKey = std::function<std::int64_t(const AttackPoint&)>;

/// Draws min(per_stratum, |stratum|) points per stratum without replacement.
/// Output is grouped by ascending key and keeps input order within a stratum.
std::vector<AttackPoint> stratified_sample(std::span<const AttackPoint> points,
                                           const StratumKey& strata, std::size_t per_stratum,
                                           std::uint64_t seed);

/// Key (observation index, step decile of the episode cap).
StratumKey index_step_decile_strata(const data::Dataset& dataset, int episode_cap);

struct RolloutResult {
  env::PropertyLog terminal;
  int steps = 0;
};

/// Restores the snapshot, applies first_action, then follows the policy's
/// greedy actions to termination. A reseed replaces the environment RNG
/// stream before the first step.
RolloutResult simulate_rollout(const env::ScenarioConfig& config, const env::EnvSnapshot& snap,
                               const train::FrozenPolicy& policy,
                               const env::MultiDiscreteAction& first_action,
                               std::optional<std::uint64_t> reseed = std::nullopt);

struct ImpactSample {
  AttackPoint point;
  std::size_t episode_id = 0;
  int step = 0;
  double original_value = 0.0;
  double perturbed_value = 0.0;
  env::MultiDiscreteAction base_action;
  env::MultiDiscreteAction induced_action;
  std::vector<env::PropertyLog> attacked;
  std::vector<env::PropertyLog> unattacked;
  std::vector<int> attacked_steps;
  std::vector<int> unattacked_steps;

  /// Paired estimate over the attacked and unattacked outcome lists.
  double impact(Property p, const Metric& metric) const;
  double impact(Property p) const { return impact(p, default_metric(p)); }

  friend bool operator==(const ImpactSample& a, const ImpactSample& b) {
    return a.point == b.point && a.episode_id == b.episode_id && a.step == b.step &&
           a.original_value == b.original_value && a.perturbed_value == b.perturbed_value &&
           a.base_action == b.base_action && a.induced_action == b.induced_action &&
           a.attacked == b.attacked && a.unattacked == b.unattacked &&
           a.attacked_steps == b.attacked_steps && a.unattacked_steps == b.unattacked_steps;
  }
};

struct SamplingPlan {
  bool enabled = false;
  std::size_t per_stratum = 30;
};

struct CampaignOptions {
  attack::AttackSpec spec;
  SamplingPlan sampling;
  std::size_t trials_per_point = 1;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct CostReport {
  std::size_t points = 0;
  std::size_t perturbed = 0;
  std::size_t sufficient = 0;
  std::size_t rollouts = 0;
  std::size_t simulated_steps = 0;

  friend bool operator==(const CostReport&, const CostReport&) = default;
};

struct CampaignResult {
  std::vector<attack::AttackRecord> attacks;
  std::vector<ImpactSample> samples;
  CostReport cost;
};

/// Trial 0 continues the snapshot's RNG stream; trial k > 0 reseeds both the
/// attacked and the unattacked rollout with
/// derive_seed({seed, episode, step, index, k}).
CampaignResult run_impact_campaign(const data::Dataset& dataset,
                                   const train::FrozenPolicy& policy,
                                   const env::ScenarioConfig& config,
                                   const CampaignOptions& options);

inline constexpr const char* kImpactFormat = "advprobe.impact_samples";
inline constexpr int kImpactVersion = 1;

struct ImpactTableInfo {
  std::string policy_tag;
  std::string dataset_hash;
  std::uint64_t seed = 0;
  std::size_t trials_per_point = 1;
};

void write_impact_samples(std::ostream& out, const ImpactTableInfo& info,
                          const env::ScenarioConfig& config,
                          const std::vector<ImpactSample>& samples);
std::vector<ImpactSample> read_impact_samples(std::istream& in, ImpactTableInfo* info = nullptr);

}  // namespace advprobe::impact
