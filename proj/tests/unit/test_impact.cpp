#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "advprobe/attack/feasible.hpp"
#include "advprobe/impact/aggregate.hpp"
#include "advprobe/impact/campaign.hpp"
#include "helpers.hpp"

using namespace advprobe;
using namespace advprobe::impact;
using advprobe::fixtures::appendix;
using advprobe::fixtures::det;
using advprobe::fixtures::random_policy;

namespace {

/// Runs scripted episodes and records every pre-step state.
data::Dataset scripted_dataset(const std::vector<std::uint64_t>& seeds,
                               const std::function<env::MultiDiscreteAction(int)>& script) {
  const auto& c = appendix();
  data::Dataset ds;
  ds.policy_tag = "scripted";
  for (std::size_t e = 0; e < seeds.size(); ++e) {
    auto [s, obs] = env::reset(c, seeds[e], det(c));
    data::EpisodeInfo info;
    info.episode_id = e;
    info.first_record = ds.records.size();
    while (!s.done) {
      data::CollectedRecord r;
      r.episode_id = e;
      r.step = s.step_count;
      r.obs = obs;
      r.properties = s.property_log;
      r.snapshot = env::snapshot(s);
      r.action = script(s.step_count);
      obs = env::step(c, s, r.action).obs;
      ds.records.push_back(std::move(r));
    }
    info.record_count = ds.records.size() - info.first_record;
    info.final_properties = s.property_log;
    info.complete = true;
    ds.episodes.push_back(info);
  }
  ds.requested = ds.records.size();
  return ds;
}

data::Dataset policy_dataset(const train::FrozenPolicy& p, std::size_t n, std::uint64_t seed) {
  data::CollectOptions opt;
  opt.n = n;
  opt.seed = seed;
  opt.random_frac = 0.0;
  return data::collect_dataset(p, appendix(), opt);
}

ImpactSample sample_with(std::size_t index, int step, std::vector<int> attacked_red,
                         std::vector<int> unattacked_red) {
  ImpactSample s;
  s.point.index = index;
  s.step = step;
  for (int r : attacked_red) s.attacked.push_back({env::Outcome::Loss, r, 4, 50});
  for (int r : unattacked_red) s.unattacked.push_back({env::Outcome::Loss, r, 4, 50});
  return s;
}

}  // namespace

TEST(Points, EnumerationCounts) {
  const auto ds = scripted_dataset({1}, [](int) { return env::MultiDiscreteAction{0, 0, 0, 0}; });
  data::Dataset ten = ds;
  ten.records.resize(10);
  attack::AttackSpec spec;
  spec.target = {0, 0, 0, 0};
  spec.allowed_indices = {0, 14, 40};
  EXPECT_EQ(enumerate_attack_points(ten, spec).size(), 30u);
  spec.allowed_steps.min_step = 2;
  const auto pts = enumerate_attack_points(ten, spec);
  EXPECT_EQ(pts.size(), 24u);
  for (const auto& p : pts) EXPECT_GE(ten.records[p.record].step, 2);
  spec.allowed_indices = {};
  spec.allowed_steps = {};
  EXPECT_EQ(enumerate_attack_points(ten, spec).size(), 0u);
}

TEST(Sampling, StrataCountsAndSubset) {
  std::vector<AttackPoint> pts;
  for (std::size_t i = 0; i < 100; ++i) pts.push_back({i, i % 4, {0}});
  const StratumKey key = [](const AttackPoint& p) { return static_cast<std::int64_t>(p.index); };
  const auto s = stratified_sample(pts, key, 5, 11);
  ASSERT_EQ(s.size(), 20u);
  std::map<std::size_t, int> per;
  for (const auto& p : s) ++per[p.index];
  for (const auto& [k, n] : per) EXPECT_EQ(n, 5) << k;
  std::multiset<AttackPoint> all(pts.begin(), pts.end());
  for (const auto& p : s) {
    auto it = all.find(p);
    ASSERT_NE(it, all.end());
    all.erase(it);
  }
  EXPECT_EQ(stratified_sample(pts, key, 25, 11).size(), 100u);
  EXPECT_EQ(stratified_sample(pts, key, 5, 11), s);
  EXPECT_NE(stratified_sample(pts, key, 5, 12), s);
}

TEST(Rollout, ReplayIdentityAndHorizon) {
  const auto& c = appendix();
  const auto p = random_policy(2);
  const auto ds = policy_dataset(p, 400, 3);
  for (std::size_t i = 0; i < ds.records.size(); i += 13) {
    const auto& r = ds.records[i];
    const auto& e = ds.episode(r.episode_id);
    if (!e.complete) continue;
    const auto out = simulate_rollout(c, r.snapshot, p, r.action);
    EXPECT_EQ(out.terminal, e.final_properties);
    EXPECT_LE(out.steps, c.episode_cap - r.step);
    EXPECT_EQ(out.steps, static_cast<int>(e.first_record + e.record_count - i));
  }
}

TEST(Rollout, HackingDefendedNodeCostsAnAsset) {
  const auto& c = appendix();
  auto s = env::reset(c, 4, det(c)).state;
  auto hack = s, idle = s;
  const auto a = env::step(c, hack, {3, 0, 0, 0});
  const auto b = env::step(c, idle, {0, 0, 0, 0});
  EXPECT_LT(a.properties.blue_count, b.properties.blue_count);
}

TEST(Metrics, Examples) {
  EXPECT_EQ(impact_difference(5, 3), 2);
  EXPECT_EQ(impact_difference(4, 4), 0);
  EXPECT_EQ(impact_difference(6, 4), 2);
  EXPECT_EQ(impact_indicator(1, 1), 0);
  EXPECT_EQ(impact_indicator(1, 0), 1);
  EXPECT_EQ(impact_threshold(1.0, 1.4, absolute_distance, 0.5), 0);
  EXPECT_EQ(impact_threshold(1.0, 1.4, absolute_distance, 0.3), 1);
  EXPECT_THROW(impact_threshold(1, 2, absolute_distance, -1), std::invalid_argument);
  for (double a = -2; a <= 2; a += 0.5)
    for (double b = -2; b <= 2; b += 0.5)
      EXPECT_EQ(impact_indicator(a, b), impact_threshold(a, b, discrete_distance, 0.0));
  EXPECT_EQ(property_value({env::Outcome::Win, 3, 2, 9}, Property::Win), 1.0);
  EXPECT_EQ(property_value({env::Outcome::Loss, 3, 2, 9}, Property::Win), 0.0);
  EXPECT_EQ(property_value({env::Outcome::Loss, 3, 2, 9}, Property::TrajectoryLength), 9.0);
  EXPECT_EQ(parse_property("red_count"), Property::RedCount);
  EXPECT_THROW(parse_property("purple"), ConfigError);
}

TEST(Estimator, HandExamples) {
  const Metric diff{};
  const double a[] = {1, 2}, u[] = {0};
  EXPECT_DOUBLE_EQ(estimate_expected_impact(a, u, diff), 1.5);
  const double x[] = {3, 1, 4, 1};
  EXPECT_DOUBLE_EQ(estimate_expected_impact(x, x, diff), 0.0);
  EXPECT_THROW(estimate_expected_impact(a, std::span<const double>{}, diff), std::invalid_argument);
  EXPECT_DOUBLE_EQ(expected_value(x), 2.25);
}

TEST(Estimator, MatchesNestedLoopOracle) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> len(1, 5);
  std::uniform_real_distribution<double> val(-10, 10);
  const Metric metrics[] = {Metric{}, Metric{MetricKind::Indicator, 0, discrete_distance},
                            Metric{MetricKind::Threshold, 2.5, absolute_distance}};
  for (int t = 0; t < 300; ++t) {
    std::vector<double> a(len(gen)), u(len(gen));
    for (auto& v : a) v = t % 2 ? std::round(val(gen)) : val(gen);
    for (auto& v : u) v = t % 2 ? std::round(val(gen)) : val(gen);
    for (const auto& m : metrics) {
      double sum = 0;
      for (double x : a)
        for (double y : u) sum += m(x, y);
      const double oracle = sum / (double(a.size()) * double(u.size()));
      EXPECT_NEAR(estimate_expected_impact(a, u, m), oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
    }
  }
}

TEST(Campaign, AccountingGateAndPairing) {
  const auto& c = appendix();
  const auto p = random_policy(5);
  const auto ds = policy_dataset(p, 300, 8);
  CampaignOptions opt;
  opt.spec.target = {0, 0, 0, 0};
  opt.spec.allowed_indices = attack::perturbable_indices(c);
  opt.seed = 1;
  const auto res = run_impact_campaign(ds, p, c, opt);
  EXPECT_EQ(res.cost.points, enumerate_attack_points(ds, opt.spec).size());
  EXPECT_EQ(res.attacks.size(), res.cost.points);
  std::size_t sufficient = 0, perturbed = 0;
  for (const auto& a : res.attacks) {
    sufficient += a.sufficient;
    perturbed += a.perturbed_value.has_value();
  }
  EXPECT_EQ(res.cost.sufficient, sufficient);
  EXPECT_EQ(res.cost.perturbed, perturbed);
  EXPECT_EQ(res.samples.size(), sufficient);
  EXPECT_EQ(res.cost.rollouts, 2 * res.samples.size());
  std::size_t steps = 0;
  for (const auto& s : res.samples) {
    EXPECT_NE(s.induced_action, s.base_action);
    for (int x : s.attacked_steps) steps += static_cast<std::size_t>(x);
    for (int x : s.unattacked_steps) steps += static_cast<std::size_t>(x);
    const auto& rec = ds.records[s.point.record];
    const auto& ep = ds.episode(rec.episode_id);
    // Collected greedily, so the unattacked rollout replays the recorded episode.
    if (ep.complete) {
      ASSERT_EQ(s.unattacked.size(), 1u);
      EXPECT_EQ(s.unattacked[0], ep.final_properties);
      EXPECT_EQ(s.unattacked_steps[0],
                static_cast<int>(ep.first_record + ep.record_count - s.point.record));
    }
    // Both rollouts branch from the same snapshot.
    EXPECT_EQ(s.attacked[0],
              simulate_rollout(c, rec.snapshot, p, s.induced_action).terminal);
  }
  EXPECT_EQ(res.cost.simulated_steps, steps);
  EXPECT_GT(res.samples.size(), 0u);

  opt.workers = 3;
  const auto again = run_impact_campaign(ds, p, c, opt);
  EXPECT_EQ(again.samples, res.samples);
  EXPECT_EQ(again.cost, res.cost);
}

TEST(Campaign, TrialsReseedPairs) {
  const auto& c = appendix();
  const auto p = random_policy(5);
  data::CollectOptions copt;
  copt.n = 200;
  copt.seed = 2;
  copt.random_frac = 0.0;
  copt.stdev = 1.0;
  const auto ds = data::collect_dataset(p, c, copt);
  CampaignOptions opt;
  opt.spec.target = {0, 0, 0, 0};
  opt.spec.allowed_indices = attack::perturbable_indices(c);
  opt.trials_per_point = 3;
  const auto res = run_impact_campaign(ds, p, c, opt);
  ASSERT_GT(res.samples.size(), 0u);
  EXPECT_EQ(res.cost.rollouts, 6 * res.samples.size());
  for (const auto& s : res.samples) {
    ASSERT_EQ(s.attacked.size(), 3u);
    ASSERT_EQ(s.unattacked.size(), 3u);
  }
}

TEST(Campaign, ImpactTableRoundTrip) {
  const auto& c = appendix();
  const auto p = random_policy(6);
  const auto ds = policy_dataset(p, 150, 1);
  CampaignOptions opt;
  opt.spec.target = {0, 0, 0, 0};
  opt.spec.allowed_indices = attack::perturbable_indices(c);
  const auto res = run_impact_campaign(ds, p, c, opt);
  ASSERT_GT(res.samples.size(), 0u);
  std::stringstream ss;
  write_impact_samples(ss, {"x", "h", 1, 1}, c, res.samples);
  ImpactTableInfo info;
  EXPECT_EQ(read_impact_samples(ss, &info), res.samples);
  EXPECT_EQ(info.policy_tag, "x");
}

TEST(Aggregate, RankingAndConservation) {
  std::vector<ImpactSample> samples{sample_with(7, 1, {5}, {4}), sample_with(7, 2, {5}, {5}),
                                    sample_with(7, 3, {4}, {3}), sample_with(7, 4, {5}, {4}),
                                    sample_with(9, 1, {3}, {4}), sample_with(9, 2, {4}, {4}),
                                    sample_with(9, 3, {4}, {4}), sample_with(9, 4, {4}, {4}),
                                    sample_with(9, 5, {4}, {4})};
  const auto rows = aggregate_impact(samples, GroupBy::Index, Property::RedCount,
                                     default_metric(Property::RedCount));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].key.index, 7u);
  EXPECT_DOUBLE_EQ(rows[0].mean, 0.75);
  EXPECT_EQ(rows[1].key.index, 9u);
  EXPECT_DOUBLE_EQ(rows[1].mean, -0.2);
  EXPECT_EQ(rows[0].count + rows[1].count, samples.size());

  const auto both = aggregate_impact(samples, GroupBy::IndexStep, Property::RedCount,
                                     default_metric(Property::RedCount), false);
  std::size_t total = 0;
  for (std::size_t i = 0; i < both.size(); ++i) {
    total += both[i].count;
    if (i) EXPECT_LT(both[i - 1].key, both[i].key);
  }
  EXPECT_EQ(total, samples.size());

  const auto one = aggregate_impact(std::span(samples).first(1), GroupBy::Step,
                                    Property::RedCount, default_metric(Property::RedCount));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].mean, samples[0].impact(Property::RedCount));
}

TEST(Aggregate, PlantedStepTenPeak) {
  const auto& c = appendix();
  const std::size_t u = env::defense_obs_index(c, 5, 1);
  const std::size_t v = env::defense_obs_index(c, 6, 7);
  const std::size_t r = 12 + 3 * 3 + 2;  // red3.is_target, always 0

  // Linear policy. Blue 0 hacks the undefended node 4 only when column 1 is
  // known and column 7 is not, which first happens at step 10. The
  // eavesdropper then reveals column 7, otherwise column 0.
  train::FrozenPolicy p;
  p.cardinalities = env::action_cardinalities(c);
  p.tag = "planted";
  p.net = nn::Mlp::zeros({100, 36}, nn::Activation::Identity);
  auto& W = p.net.layers()[0].weight;
  auto& b = p.net.layers()[0].bias;
  W(5, u) = 1.0;
  W(5, v) = -1.0;
  b(5) = -1.5;
  W(27 + 1, r) = -2.0;
  b(27 + 1) = 1.0;
  W(27 + 8, r) = -2.0;
  W(27 + 8, u) = 1.0;
  W(27 + 8, v) = -1.0;
  b(27 + 8) = 0.5;

  const auto ds = scripted_dataset({1, 2, 3}, [](int t) {
    if (t == 9) return env::MultiDiscreteAction{0, 0, 0, 2};
    if (t == 10) return env::MultiDiscreteAction{0, 0, 0, 8};
    return env::MultiDiscreteAction{0, 0, 0, 1};
  });
  CampaignOptions opt;
  opt.spec.target = {0, 0, 0, 0};
  opt.spec.allowed_indices = attack::perturbable_indices(c);
  const auto res = run_impact_campaign(ds, p, c, opt);
  const auto rows = aggregate_impact(res.samples, GroupBy::Step, Property::RedCount,
                                     default_metric(Property::RedCount));
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0].key.step, 10);
  EXPECT_GT(rows[0].mean, 0.0);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].mean, rows[0].mean);
  EXPECT_GT(rows.size(), 10u);
}
