#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "advprobe/env/cyberstrike.hpp"
#include "advprobe/env/snapshot.hpp"
#include "advprobe/train/policy.hpp"

namespace advprobe::data {

/// One visited state with the policy's decision and analysis metadata.
struct CollectedRecord {
  std::size_t episode_id = 0;
  int step = 0;
  env::ObsVector obs;
  env::MultiDiscreteAction action;
  bool was_forced_random = false;
  /// Final hidden layer of the policy network at obs.
  std::vector<double> activations;
  /// |d greedy output / d obs_i|.
  std::vector<double> saliency;
  /// Properties of the state at this step, before the action is applied.
  env::PropertyLog properties;
  /// State from which `action` was taken.
  env::EnvSnapshot snapshot;

  friend bool operator==(const CollectedRecord&, const CollectedRecord&) = default;
};

struct EpisodeInfo {
  std::size_t episode_id = 0;
  std::size_t first_record = 0;
  std::size_t record_count = 0;
  /// Properties after the last recorded step.
  env::PropertyLog final_properties;
  /// False when the record budget ran out mid-episode.
  bool complete = false;

  friend bool operator==(const EpisodeInfo&, const EpisodeInfo&) = default;
};

struct Dataset {
  std::string policy_tag;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::size_t requested = 0;
  double random_frac = 0.0;
  std::vector<CollectedRecord> records;
  std::vector<EpisodeInfo> episodes;

  /// Throws std::out_of_range for an unknown episode id.
  const EpisodeInfo& episode(std::size_t episode_id) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct CollectOptions {
  std::size_t n = 10000;
  double random_frac = 0.05;
  std::uint64_t seed = 0;
  /// ADR stdev applied to every variable during collection.
  double stdev = 0.0;
  std::size_t workers = 1;
};

/// Rolls the frozen policy until exactly `n` records exist. Episode e uses
/// seed derive_seed({seed, e}) for both the environment and the forcing
/// stream, so the result does not depend on `workers`.
Dataset collect_dataset(const train::FrozenPolicy& policy, const env::ScenarioConfig& config,
                        const CollectOptions& options, std::string scenario_hash = {});

std::vector<double> compute_saliency(const train::FrozenPolicy& policy,
                                     std::span<const double> obs);

inline constexpr const char* kDatasetFormat = "advprobe.dataset";
inline constexpr int kDatasetVersion = 1;

/// Writes `<path>` (header + one JSON record per line) and `<path>.bin`
/// holding snapshots, activations and saliency.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
/// Throws InputError on missing, corrupt or version-mismatched files.
Dataset load_dataset(const std::filesystem::path& path);

inline std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".bin");
}

}  // namespace advprobe::data
