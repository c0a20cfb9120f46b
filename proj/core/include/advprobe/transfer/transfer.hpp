#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "advprobe/data/dataset.hpp"
#include "advprobe/train/policy.hpp"

namespace advprobe::transfer {

/// Full action tuple maximizing (uses in lost episodes) - (uses in won
/// episodes); ties go to the lexicographically smallest tuple. Throws
/// InputError when the dataset has no decided episode.
env::MultiDiscreteAction max_loss_win_action(const data::Dataset& dataset);

/// Share of positions where the tuples agree. Throws std::invalid_argument
/// on an arity mismatch.
double subaction_match_fraction(const env::MultiDiscreteAction& induced,
                                const env::MultiDiscreteAction& target);

enum class TargetKind { NoOp, MaxLossWin };
const char* target_kind_name(TargetKind k);

/// Per-source action targets.
struct ActionTargets {
  env::MultiDiscreteAction noop;
  env::MultiDiscreteAction max_loss_win;

  const env::MultiDiscreteAction& get(TargetKind k) const {
    return k == TargetKind::NoOp ? noop : max_loss_win;
  }
};

/// All-zero No-op and the max(loss - win) action of the source's own dataset.
ActionTargets action_targets_for(const data::Dataset& source_dataset);

struct TransferCell {
  std::string source_tag;
  std::string target_tag;
  TargetKind kind = TargetKind::NoOp;
  env::MultiDiscreteAction action_target;
  std::size_t attacks = 0;
  /// Perturbation flipped the source policy's own action.
  std::size_t source_sufficient = 0;
  /// Target policy's induced action differs from its unattacked action.
  std::size_t transferable = 0;
  /// Transferable and the induced action equals the action target.
  std::size_t target_transferable = 0;
  /// Attacks on observations where the action target differs from the
  /// target policy's unattacked action.
  std::size_t target_differs = 0;
  double subaction_sum = 0.0;

  double transfer_rate() const { return attacks ? double(transferable) / double(attacks) : 0.0; }
  double target_rate() const {
    return attacks ? double(target_transferable) / double(attacks) : 0.0;
  }
  double target_per_million() const { return target_rate() * 1e6; }
  double subaction_match() const { return attacks ? subaction_sum / double(attacks) : 0.0; }
};

struct TransferOptions {
  double epsilon = 1.0;
  /// Empty means every perturbable index.
  std::vector<std::size_t> indices;
  std::size_t workers = 1;
};

/// Cells are ordered source-major, then target, then No-op before
/// max(loss - win). datasets[j] belongs to policies[j]; targets[i] to the
/// source policies[i]. Throws InputError on a missing or mismatched dataset.
std::vector<TransferCell> run_transfer_matrix(std::span<const train::FrozenPolicy> policies,
                                              std::span<const data::Dataset> datasets,
                                              std::span<const ActionTargets> targets,
                                              const env::ScenarioConfig& config,
                                              const TransferOptions& options);

inline constexpr const char* kTransferFormat = "advprobe.transfer";
inline constexpr int kTransferVersion = 1;

void write_transfer_table(std::ostream& out, double epsilon,
                          const std::vector<TransferCell>& cells);

}  // namespace advprobe::transfer
