#include "advprobe/attack/fgsm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "advprobe/attack/feasible.hpp"
#include "advprobe/nn/loss.hpp"
#include "common/json_io.hpp"

namespace advprobe::attack {

using detail::json;

bool StepFilter::allows(int step) const {
  if (step < min_step || step > max_step) return false;
  return only.empty() || std::find(only.begin(), only.end(), step) != only.end();
}

void AttackSpec::validate(const env::ScenarioConfig& config) const {
  if (algorithm != "fgsm") throw ConfigError("unknown attack algorithm '" + algorithm + "'");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be >= 0");
  try {
    env::check_action(config, target);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("attack target: ") + e.what());
  }
  const std::size_t n = env::observation_size(config);
  for (std::size_t i : allowed_indices)
    if (i >= n) throw ConfigError("allowed index " + std::to_string(i) + " out of range");
}

std::vector<std::size_t> perturbable_indices(const env::ScenarioConfig& config) {
  std::vector<std::size_t> out;
  const std::size_t n = env::observation_size(config);
  for (std::size_t i = 0; i < n; ++i)
    if (enumerate_feasible_values(config, i).size() > 1) out.push_back(i);
  return out;
}

bool is_sufficiently_adversarial(const env::MultiDiscreteAction& a,
                                 const env::MultiDiscreteAction& a_prime) {
  if (a.size() != a_prime.size())
    throw std::invalid_argument("sufficiency test on actions of different arity");
  return a != a_prime;
}

Eigen::VectorXd targeted_gradient(const train::FrozenPolicy& policy,
                                  std::span<const double> obs,
                                  const env::MultiDiscreteAction& target) {
  return nn::input_gradient(policy.net, obs,
                            nn::CrossEntropyToTarget{nn::Segments{policy.cardinalities}, target});
}

std::optional<double> project_step(std::span<const double> feasible, double current,
                                   double gradient, double epsilon) {
  if (gradient == 0.0 || epsilon == 0.0) return std::nullopt;
  const double dir = gradient > 0.0 ? -1.0 : 1.0;
  const double proposal = current + dir * epsilon;
  std::optional<double> best;
  for (double v : feasible) {
    if ((v - current) * dir <= 0.0) continue;
    if (!best) {
      best = v;
      continue;
    }
    const double d = std::abs(v - proposal);
    const double bd = std::abs(*best - proposal);
    if (d < bd || (d == bd && std::abs(v - current) < std::abs(*best - current))) best = v;
  }
  return best;
}

std::vector<AdvObservation> perturb_indices(
    const train::FrozenPolicy& evaluator, const std::vector<std::vector<double>>& feasible,
    std::span<const double> obs, const Eigen::VectorXd& gradient,
    std::span<const std::size_t> indices, double epsilon,
    const env::MultiDiscreteAction& base_action) {
  const auto dim = static_cast<Eigen::Index>(obs.size());
  if (gradient.size() != dim || feasible.size() != obs.size())
    throw std::invalid_argument("gradient or feasible table does not match the observation");
  std::vector<AdvObservation> out(indices.size());
  std::vector<std::size_t> to_eval;
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const std::size_t idx = indices[c];
    if (idx >= obs.size()) throw std::out_of_range("attack index out of range");
    auto& adv = out[c];
    adv.index = idx;
    adv.original_value = obs[idx];
    adv.perturbed_value = obs[idx];
    adv.base_action = base_action;
    adv.induced_action = base_action;
    if (auto v = project_step(feasible[idx], obs[idx], gradient(static_cast<Eigen::Index>(idx)),
                              epsilon)) {
      adv.changed = true;
      adv.perturbed_value = *v;
      to_eval.push_back(c);
    }
  }
  if (!to_eval.empty()) {
    const Eigen::Map<const Eigen::VectorXd> base(obs.data(), dim);
    Eigen::MatrixXd x = base.replicate(1, static_cast<Eigen::Index>(to_eval.size()));
    for (std::size_t k = 0; k < to_eval.size(); ++k) {
      const auto& adv = out[to_eval[k]];
      x(static_cast<Eigen::Index>(adv.index), static_cast<Eigen::Index>(k)) = adv.perturbed_value;
    }
    const Eigen::MatrixXd y = evaluator.net.output_batch(x);
    for (std::size_t k = 0; k < to_eval.size(); ++k) {
      auto& adv = out[to_eval[k]];
      adv.induced_action =
          train::greedy_segments(y.col(static_cast<Eigen::Index>(k)), evaluator.cardinalities);
    }
  }
  for (auto& adv : out) {
    adv.base.assign(obs.begin(), obs.end());
    adv.perturbed = adv.base;
    adv.perturbed[adv.index] = adv.perturbed_value;
    adv.sufficient = is_sufficiently_adversarial(adv.base_action, adv.induced_action);
  }
  return out;
}

AdvObservation fgsm_targeted(const train::FrozenPolicy& policy,
                             const env::ScenarioConfig& config,
                             std::span<const double> obs,
                             const env::MultiDiscreteAction& target, std::size_t index,
                             double epsilon) {
  if (index >= obs.size()) throw std::out_of_range("attack index out of range");
  const Eigen::VectorXd g = targeted_gradient(policy, obs, target);
  std::vector<std::vector<double>> feasible(obs.size());
  feasible[index] = enumerate_feasible_values(config, index);
  const std::size_t idx[] = {index};
  return perturb_indices(policy, feasible, obs, g, idx, epsilon,
                         train::select_action(policy, obs))
      .front();
}

// ---- export ----

void write_attack_table(std::ostream& out, const std::string& dataset_hash,
                        const env::ScenarioConfig& config,
                        const std::vector<AttackRecord>& records) {
  detail::write_line(out, json{{"format", kAttackFormat},
                               {"version", kAttackVersion},
                               {"dataset", dataset_hash},
                               {"count", records.size()}});
  for (const auto& r : records) {
    json j{{"record", r.record},
           {"episode_id", r.episode_id},
           {"step", r.step},
           {"index", r.index},
           {"slot", slot_name(config, r.index)},
           {"target", r.target},
           {"original_value", r.original_value},
           {"perturbed_value", nullptr},
           {"base_action", r.base_action},
           {"induced_action", r.induced_action},
           {"sufficient", r.sufficient},
           {"benign", r.benign}};
    if (r.perturbed_value) j["perturbed_value"] = *r.perturbed_value;
    detail::write_line(out, j);
  }
}

std::vector<AttackRecord> read_attack_table(std::istream& in) {
  json header;
  if (!detail::read_line(in, header)) throw InputError("empty attack table");
  detail::expect_header(header, kAttackFormat, kAttackVersion);
  std::vector<AttackRecord> out;
  json j;
  try {
    while (detail::read_line(in, j)) {
      AttackRecord r;
      r.record = j.at("record").get<std::size_t>();
      r.episode_id = j.at("episode_id").get<std::size_t>();
      r.step = j.at("step").get<int>();
      r.index = j.at("index").get<std::size_t>();
      r.target = j.at("target").get<std::vector<int>>();
      r.original_value = j.at("original_value").get<double>();
      if (!j.at("perturbed_value").is_null())
        r.perturbed_value = j.at("perturbed_value").get<double>();
      r.base_action = j.at("base_action").get<std::vector<int>>();
      r.induced_action = j.at("induced_action").get<std::vector<int>>();
      r.sufficient = j.at("sufficient").get<bool>();
      r.benign = j.at("benign").get<bool>();
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed attack table: ") + e.what());
  }
  if (out.size() != header.value("count", out.size()))
    throw InputError("attack table count mismatch");
  return out;
}

}  // namespace advprobe::attack
