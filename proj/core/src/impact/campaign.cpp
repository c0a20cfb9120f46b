#include "advprobe/impact/campaign.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "advprobe/attack/feasible.hpp"
#include "advprobe/common/parallel.hpp"
#include "advprobe/common/rng.hpp"
#include "common/json_io.hpp"

namespace advprobe::impact {

using detail::json;

std::vector<AttackPoint> enumerate_attack_points(const data::Dataset& dataset,
                                                 const attack::AttackSpec& spec) {
  std::vector<AttackPoint> points;
  for (std::size_t r = 0; r < dataset.records.size(); ++r) {
    const auto& rec = dataset.records[r];
    if (rec.snapshot.state().done || !spec.allowed_steps.allows(rec.step)) continue;
    for (std::size_t idx : spec.allowed_indices) {
      if (idx >= rec.obs.size()) throw std::out_of_range("attack index beyond observation");
      points.push_back({r, idx, spec.target});
    }
  }
  return points;
}

std::vector<AttackPoint> stratified_sample(std::span<const AttackPoint> points,
                                           const StratumKey& strata, std::size_t per_stratum,
                                           std::uint64_t seed) {
  if (per_stratum == 0) throw std::invalid_argument("per_stratum must be >= 1");
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < points.size(); ++i) groups[strata(points[i])].push_back(i);
  std::vector<AttackPoint> out;
  for (auto& [key, members] : groups) {
    // Partial Fisher-Yates on a stream keyed by the stratum.
    CounterRng rng(derive_seed({seed, static_cast<std::uint64_t>(key)}));
    const std::size_t take = std::min(per_stratum, members.size());
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform() *
                                                  static_cast<double>(members.size() - i));
      std::swap(members[i], members[j]);
    }
    members.resize(take);
    std::sort(members.begin(), members.end());
    for (std::size_t i : members) out.push_back(points[i]);
  }
  return out;
}

StratumKey index_step_decile_strata(const data::Dataset& dataset, int episode_cap) {
  const int cap = std::max(episode_cap, 1);
  return [&dataset, cap](const AttackPoint& p) {
    const int step = dataset.records.at(p.record).step;
    const int decile = std::min(9, step * 10 / cap);
    return static_cast<std::int64_t>(p.index) * 16 + decile;
  };
}

RolloutResult simulate_rollout(const env::ScenarioConfig& config, const env::EnvSnapshot& snap,
                               const train::FrozenPolicy& policy,
                               const env::MultiDiscreteAction& first_action,
                               std::optional<std::uint64_t> reseed) {
  env::EnvState state = env::restore(snap);
  if (state.done) throw std::invalid_argument("rollout from a terminal snapshot");
  if (reseed) state.rng = CounterRng(*reseed);
  RolloutResult r;
  auto res = env::step(config, state, first_action);
  ++r.steps;
  while (!res.done) {
    res = env::step(config, state, train::select_action(policy, res.obs));
    ++r.steps;
  }
  r.terminal = state.property_log;
  return r;
}

double ImpactSample::impact(Property p, const Metric& metric) const {
  std::vector<double> a, u;
  for (const auto& l : attacked) a.push_back(property_value(l, p));
  for (const auto& l : unattacked) u.push_back(property_value(l, p));
  return estimate_expected_impact(a, u, metric);
}

namespace {

struct GroupOutput {
  std::vector<attack::AttackRecord> attacks;
  std::vector<ImpactSample> samples;
  CostReport cost;
};

}  // namespace

CampaignResult run_impact_campaign(const data::Dataset& dataset,
                                   const train::FrozenPolicy& policy,
                                   const env::ScenarioConfig& config,
                                   const CampaignOptions& opt) {
  opt.spec.validate(config);
  if (opt.trials_per_point == 0) throw std::invalid_argument("trials_per_point must be >= 1");
  policy.check();

  std::vector<AttackPoint> points = enumerate_attack_points(dataset, opt.spec);
  if (opt.sampling.enabled)
    points = stratified_sample(points, index_step_decile_strata(dataset, config.episode_cap),
                               opt.sampling.per_stratum, derive_seed({opt.seed, 0x5a}));
  std::sort(points.begin(), points.end());

  // Points sharing a record and target share one gradient.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (groups.empty() || points[i].record != points[groups.back().first].record ||
        points[i].target != points[groups.back().first].target)
      groups.emplace_back(i, i);
    groups.back().second = i + 1;
  }

  const auto feasible = attack::feasible_table(config);
  std::vector<GroupOutput> outputs(groups.size());
  parallel_for(groups.size(), opt.workers, [&](std::size_t g) {
    const auto [begin, end] = groups[g];
    const auto& rec = dataset.records[points[begin].record];
    const auto& state = rec.snapshot.state();
    const auto base_action = train::select_action(policy, rec.obs);
    const Eigen::VectorXd grad =
        attack::targeted_gradient(policy, rec.obs, points[begin].target);
    std::vector<std::size_t> indices;
    for (std::size_t i = begin; i < end; ++i) indices.push_back(points[i].index);
    const auto advs = attack::perturb_indices(policy, feasible, rec.obs, grad, indices,
                                              opt.spec.epsilon, base_action);
    auto& out = outputs[g];
    for (std::size_t k = 0; k < advs.size(); ++k) {
      const auto& adv = advs[k];
      const auto& point = points[begin + k];
      ++out.cost.points;
      attack::AttackRecord ar;
      ar.record = point.record;
      ar.episode_id = rec.episode_id;
      ar.step = rec.step;
      ar.index = point.index;
      ar.target = point.target;
      ar.original_value = adv.original_value;
      if (adv.changed) {
        ar.perturbed_value = adv.perturbed_value;
        ++out.cost.perturbed;
      }
      ar.base_action = adv.base_action;
      ar.induced_action = adv.induced_action;
      ar.sufficient = adv.sufficient;
      ar.benign = attack::is_benign_slot(config, state, point.index);
      out.attacks.push_back(ar);
      if (!adv.sufficient) continue;

      ++out.cost.sufficient;
      ImpactSample s;
      s.point = point;
      s.episode_id = rec.episode_id;
      s.step = rec.step;
      s.original_value = adv.original_value;
      s.perturbed_value = adv.perturbed_value;
      s.base_action = adv.base_action;
      s.induced_action = adv.induced_action;
      for (std::size_t t = 0; t < opt.trials_per_point; ++t) {
        std::optional<std::uint64_t> reseed;
        if (t > 0)
          reseed = derive_seed({opt.seed, rec.episode_id, static_cast<std::uint64_t>(rec.step),
                                point.index, t});
        const auto a = simulate_rollout(config, rec.snapshot, policy, adv.induced_action, reseed);
        const auto u = simulate_rollout(config, rec.snapshot, policy, adv.base_action, reseed);
        s.attacked.push_back(a.terminal);
        s.attacked_steps.push_back(a.steps);
        s.unattacked.push_back(u.terminal);
        s.unattacked_steps.push_back(u.steps);
        out.cost.rollouts += 2;
        out.cost.simulated_steps += static_cast<std::size_t>(a.steps + u.steps);
      }
      out.samples.push_back(std::move(s));
    }
  });

  CampaignResult result;
  for (auto& o : outputs) {
    result.attacks.insert(result.attacks.end(), o.attacks.begin(), o.attacks.end());
    for (auto& s : o.samples) result.samples.push_back(std::move(s));
    result.cost.points += o.cost.points;
    result.cost.perturbed += o.cost.perturbed;
    result.cost.sufficient += o.cost.sufficient;
    result.cost.rollouts += o.cost.rollouts;
    result.cost.simulated_steps += o.cost.simulated_steps;
  }
  return result;
}

// ---- export ----

namespace {

json logs_json(const std::vector<env::PropertyLog>& logs) {
  json a = json::array();
  for (const auto& l : logs) a.push_back(detail::to_json(l));
  return a;
}

std::vector<env::PropertyLog> logs_from_json(const json& a) {
  std::vector<env::PropertyLog> out;
  for (const auto& l : a) out.push_back(detail::property_log_from_json(l));
  return out;
}

}  // namespace

void write_impact_samples(std::ostream& out, const ImpactTableInfo& info,
                          const env::ScenarioConfig& config,
                          const std::vector<ImpactSample>& samples) {
  detail::write_line(out, json{{"format", kImpactFormat},
                               {"version", kImpactVersion},
                               {"policy_tag", info.policy_tag},
                               {"dataset", info.dataset_hash},
                               {"seed", info.seed},
                               {"trials_per_point", info.trials_per_point},
                               {"count", samples.size()}});
  for (const auto& s : samples) {
    json impacts = json::object();
    for (Property p : kAllProperties) impacts[property_name(p)] = s.impact(p);
    detail::write_line(out, json{{"record", s.point.record},
                                 {"episode_id", s.episode_id},
                                 {"step", s.step},
                                 {"index", s.point.index},
                                 {"slot", attack::slot_name(config, s.point.index)},
                                 {"target", s.point.target},
                                 {"original_value", s.original_value},
                                 {"perturbed_value", s.perturbed_value},
                                 {"base_action", s.base_action},
                                 {"induced_action", s.induced_action},
                                 {"attacked", logs_json(s.attacked)},
                                 {"unattacked", logs_json(s.unattacked)},
                                 {"attacked_steps", s.attacked_steps},
                                 {"unattacked_steps", s.unattacked_steps},
                                 {"impact", impacts}});
  }
}

std::vector<ImpactSample> read_impact_samples(std::istream& in, ImpactTableInfo* info) {
  json header;
  if (!detail::read_line(in, header)) throw InputError("empty impact table");
  detail::expect_header(header, kImpactFormat, kImpactVersion);
  std::vector<ImpactSample> out;
  try {
    if (info) {
      info->policy_tag = header.at("policy_tag").get<std::string>();
      info->dataset_hash = header.at("dataset").get<std::string>();
      info->seed = header.at("seed").get<std::uint64_t>();
      info->trials_per_point = header.at("trials_per_point").get<std::size_t>();
    }
    json j;
    while (detail::read_line(in, j)) {
      ImpactSample s;
      s.point.record = j.at("record").get<std::size_t>();
      s.point.index = j.at("index").get<std::size_t>();
      s.point.target = j.at("target").get<std::vector<int>>();
      s.episode_id = j.at("episode_id").get<std::size_t>();
      s.step = j.at("step").get<int>();
      s.original_value = j.at("original_value").get<double>();
      s.perturbed_value = j.at("perturbed_value").get<double>();
      s.base_action = j.at("base_action").get<std::vector<int>>();
      s.induced_action = j.at("induced_action").get<std::vector<int>>();
      s.attacked = logs_from_json(j.at("attacked"));
      s.unattacked = logs_from_json(j.at("unattacked"));
      s.attacked_steps = j.at("attacked_steps").get<std::vector<int>>();
      s.unattacked_steps = j.at("unattacked_steps").get<std::vector<int>>();
      if (s.attacked.empty() || s.unattacked.empty())
        throw InputError("impact sample without rollouts");
      out.push_back(std::move(s));
    }
    if (out.size() != header.at("count").get<std::size_t>())
      throw InputError("impact table count mismatch");
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed impact table: ") + e.what());
  }
  return out;
}

}  // namespace advprobe::impact
