#pragma once

#include <Eigen/Dense>

#include <climits>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advprobe/env/cyberstrike.hpp"
#include "advprobe/train/policy.hpp"

namespace advprobe::attack {

/// Step predicate: min_step <= s <= max_step, and s in `only` when given.
struct StepFilter {
  int min_step = 0;
  int max_step = INT_MAX;
  std::vector<int> only;

  bool allows(int step) const;
};

struct AttackSpec {
  std::string algorithm = "fgsm";
  env::MultiDiscreteAction target;
  std::vector<std::size_t> allowed_indices;
  StepFilter allowed_steps;
  double epsilon = 1.0;

  /// Throws ConfigError on an unknown algorithm, a bad target or an index
  /// outside the observation.
  void validate(const env::ScenarioConfig& config) const;
};

/// Every observation index whose feasible set has more than one value.
std::vector<std::size_t> perturbable_indices(const env::ScenarioConfig& config);

struct AdvObservation {
  env::ObsVector base;
  env::ObsVector perturbed;
  std::size_t index = 0;
  /// False when no feasible value exists in the gradient-sign direction.
  bool changed = false;
  double original_value = 0.0;
  double perturbed_value = 0.0;
  env::MultiDiscreteAction base_action;
  env::MultiDiscreteAction induced_action;
  bool sufficient = false;
};

/// True iff any sub-action differs. Throws std::invalid_argument on an
/// arity mismatch.
bool is_sufficiently_adversarial(const env::MultiDiscreteAction& a,
                                 const env::MultiDiscreteAction& a_prime);

/// d/d obs of the summed per-segment cross-entropy toward `target`.
Eigen::VectorXd targeted_gradient(const train::FrozenPolicy& policy,
                                  std::span<const double> obs,
                                  const env::MultiDiscreteAction& target);

/// Moves `current` against the gradient sign to the feasible value nearest
/// current - epsilon * sign(gradient), considering only values strictly on
/// that side of `current` (ties go to the value closer to `current`).
/// Returns nullopt for a zero sign, a zero epsilon, or at the boundary.
std::optional<double> project_step(std::span<const double> feasible, double current,
                                   double gradient, double epsilon);

/// Targeted single-index FGSM against `policy`.
AdvObservation fgsm_targeted(const train::FrozenPolicy& policy,
                             const env::ScenarioConfig& config,
                             std::span<const double> obs,
                             const env::MultiDiscreteAction& target, std::size_t index,
                             double epsilon);

/// Applies a precomputed gradient at each index and evaluates `evaluator` on
/// all perturbed observations in one batch. The gradient may come from a
/// different policy (transfer attacks). `feasible` is feasible_table(config).
std::vector<AdvObservation> perturb_indices(
    const train::FrozenPolicy& evaluator, const std::vector<std::vector<double>>& feasible,
    std::span<const double> obs, const Eigen::VectorXd& gradient,
    std::span<const std::size_t> indices, double epsilon,
    const env::MultiDiscreteAction& base_action);

/// One row of the attack-result export.
struct AttackRecord {
  std::size_t record = 0;
  std::size_t episode_id = 0;
  int step = 0;
  std::size_t index = 0;
  env::MultiDiscreteAction target;
  double original_value = 0.0;
  /// Empty when no feasible perturbation existed.
  std::optional<double> perturbed_value;
  env::MultiDiscreteAction base_action;
  env::MultiDiscreteAction induced_action;
  bool sufficient = false;
  bool benign = false;

  friend bool operator==(const AttackRecord&, const AttackRecord&) = default;
};

inline constexpr const char* kAttackFormat = "advprobe.attacks";
inline constexpr int kAttackVersion = 1;

/// Header names the dataset by content hash; one line per attack follows.
void write_attack_table(std::ostream& out, const std::string& dataset_hash,
                        const env::ScenarioConfig& config,
                        const std::vector<AttackRecord>& records);
std::vector<AttackRecord> read_attack_table(std::istream& in);

}  // namespace advprobe::attack
