#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "advprobe/attack/feasible.hpp"
#include "advprobe/attack/fgsm.hpp"
#include "helpers.hpp"

using namespace advprobe;
using namespace advprobe::attack;
using advprobe::fixtures::appendix;
using advprobe::fixtures::random_policy;

namespace {

std::vector<double> values(std::initializer_list<double> v) { return v; }

std::vector<env::ObsVector> reachable_observations(std::size_t n, std::uint64_t seed) {
  const auto& c = appendix();
  std::vector<env::ObsVector> out;
  std::mt19937_64 gen(seed);
  for (std::uint64_t e = 0; out.size() < n; ++e) {
    auto [s, obs] = env::reset(c, seed + e, env::CurriculumLevel::uniform(c, 1.0));
    out.push_back(obs);
    while (!s.done && out.size() < n) {
      env::MultiDiscreteAction a(4);
      for (auto& x : a) x = static_cast<int>(gen() % 9);
      out.push_back(env::step(c, s, a).obs);
    }
  }
  return out;
}

}  // namespace

TEST(Feasible, SlotValueSets) {
  const auto& c = appendix();
  EXPECT_EQ(enumerate_feasible_values(c, 0), values({0, 1}));
  EXPECT_EQ(enumerate_feasible_values(c, 1), values({1, 2, 3}));
  EXPECT_EQ(enumerate_feasible_values(c, 2), values({0}));
  EXPECT_EQ(enumerate_feasible_values(c, 12), values({0, 1}));
  EXPECT_EQ(enumerate_feasible_values(c, 13), values({0}));
  EXPECT_EQ(enumerate_feasible_values(c, 14), values({0, 1}));
  EXPECT_EQ(enumerate_feasible_values(c, 36), values({-1, 0, 1}));
  EXPECT_THROW(enumerate_feasible_values(c, 100), std::out_of_range);
  EXPECT_EQ(perturbable_indices(c).size(), 88u);
  EXPECT_EQ(slot_name(c, 0), "blue0.alive");
  EXPECT_EQ(slot_name(c, 12 + 3 * 3 + 1), "red3.type");
  EXPECT_EQ(slot_name(c, env::defense_obs_index(c, 2, 5)), "def[2,5]");
  const auto info = describe_slot(c, env::defense_obs_index(c, 2, 5));
  EXPECT_EQ(info.kind, SlotKind::Defense);
  EXPECT_EQ(info.asset, 2u);
  EXPECT_EQ(info.node, 5u);
}

TEST(Feasible, ReachableObservationsStayInsideSets) {
  const auto table = feasible_table(appendix());
  for (const auto& obs : reachable_observations(3000, 1))
    for (std::size_t i = 0; i < obs.size(); ++i)
      ASSERT_TRUE(std::find(table[i].begin(), table[i].end(), obs[i]) != table[i].end())
          << "index " << i << " value " << obs[i];
}

TEST(Project, TriStateCases) {
  const auto f = values({-1, 0, 1});
  EXPECT_EQ(project_step(f, 1.0, +1.0, 1.0), 0.0);
  EXPECT_EQ(project_step(f, 1.0, +1.0, 2.0), -1.0);
  EXPECT_EQ(project_step(f, 1.0, +1.0, 0.4), 0.0);
  EXPECT_EQ(project_step(f, 1.0, +1.0, 1.5), 0.0);
  EXPECT_EQ(project_step(f, -1.0, -3.0, 1.0), 0.0);
  EXPECT_EQ(project_step(f, -1.0, +1.0, 1.0), std::nullopt);
  EXPECT_EQ(project_step(f, 0.0, 0.0, 1.0), std::nullopt);
  EXPECT_EQ(project_step(f, 0.0, 1.0, 0.0), std::nullopt);
  EXPECT_EQ(project_step(values({0}), 0.0, 1.0, 1.0), std::nullopt);
}

TEST(Sufficiency, TupleInequality) {
  EXPECT_FALSE(is_sufficiently_adversarial({0, 0, 0, 0}, {0, 0, 0, 0}));
  EXPECT_TRUE(is_sufficiently_adversarial({0, 0, 0, 0}, {0, 0, 0, 1}));
  EXPECT_THROW(is_sufficiently_adversarial({0, 0}, {0, 0, 0}), std::invalid_argument);
  int pairs = 0;
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < 9; ++b) {
      const env::MultiDiscreteAction x{a / 3, a % 3}, y{b / 3, b % 3};
      EXPECT_EQ(is_sufficiently_adversarial(x, y), a != b);
      ++pairs;
    }
  EXPECT_EQ(pairs, 81);
}

TEST(Fgsm, SingleIndexAndFeasibilityLaws) {
  const auto& c = appendix();
  const auto policy = random_policy(3);
  const auto table = feasible_table(c);
  const auto indices = perturbable_indices(c);
  std::mt19937_64 gen(4);
  for (const auto& obs : reachable_observations(60, 2)) {
    const env::MultiDiscreteAction target{int(gen() % 9), int(gen() % 9), int(gen() % 9),
                                          int(gen() % 9)};
    const auto g = targeted_gradient(policy, obs, target);
    const auto base = train::select_action(policy, obs);
    const auto advs = perturb_indices(policy, table, obs, g, indices, 1.0, base);
    ASSERT_EQ(advs.size(), indices.size());
    for (const auto& a : advs) {
      int diff = 0;
      for (std::size_t i = 0; i < obs.size(); ++i) diff += a.perturbed[i] != obs[i];
      ASSERT_EQ(diff, a.changed ? 1 : 0);
      const auto& f = table[a.index];
      ASSERT_TRUE(std::find(f.begin(), f.end(), a.perturbed[a.index]) != f.end());
      ASSERT_EQ(a.induced_action, train::select_action(policy, a.perturbed));
      ASSERT_EQ(a.sufficient, a.induced_action != base);
      const auto single = fgsm_targeted(policy, c, obs, target, a.index, 1.0);
      ASSERT_EQ(single.perturbed, a.perturbed);
      ASSERT_EQ(single.sufficient, a.sufficient);
      if (a.changed) {
        const double gi = g(static_cast<Eigen::Index>(a.index));
        ASSERT_LT((a.perturbed_value - a.original_value) * gi, 0.0);
      }
    }
  }
}

TEST(Fgsm, ZeroGradientMeansNoPerturbation) {
  const auto& c = appendix();
  auto policy = random_policy(1);
  policy.net = nn::Mlp::zeros(policy.net.dims(), nn::Activation::ReLU);
  const auto obs = env::reset(c, 1, advprobe::fixtures::det(c)).obs;
  const auto adv = fgsm_targeted(policy, c, obs, {1, 2, 3, 4}, 40, 1.0);
  EXPECT_FALSE(adv.changed);
  EXPECT_FALSE(adv.sufficient);
  EXPECT_EQ(adv.perturbed, obs);
}

TEST(Fgsm, DefenseSlotMovesDown) {
  const auto& c = appendix();
  auto policy = random_policy(1);
  auto s = env::reset(c, 1, advprobe::fixtures::det(c)).state;
  const auto obs = env::step(c, s, {0, 0, 0, 2}).obs;
  const std::size_t idx = env::defense_obs_index(c, 5, 1);
  ASSERT_EQ(obs[idx], 1.0);
  const auto table = feasible_table(c);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(100);
  g(static_cast<Eigen::Index>(idx)) = 0.7;
  const std::size_t one[] = {idx};
  const auto adv = perturb_indices(policy, table, obs, g, one, 1.0,
                                   train::select_action(policy, obs))[0];
  EXPECT_TRUE(adv.changed);
  EXPECT_TRUE(adv.perturbed_value == 0.0 || adv.perturbed_value == -1.0);
}

TEST(Fgsm, TargetAlreadyChosenIsNotSufficient) {
  const auto& c = appendix();
  const auto policy = random_policy(8);
  for (const auto& obs : reachable_observations(20, 3)) {
    const auto base = train::select_action(policy, obs);
    for (std::size_t i : {0ul, 20ul, 50ul}) {
      const auto adv = fgsm_targeted(policy, c, obs, base, i, 1.0);
      if (adv.induced_action == base) EXPECT_FALSE(adv.sufficient);
    }
  }
}

TEST(Fgsm, SpecValidation) {
  const auto& c = appendix();
  AttackSpec spec;
  spec.target = {0, 0, 0, 0};
  spec.allowed_indices = {1, 99};
  EXPECT_NO_THROW(spec.validate(c));
  spec.allowed_indices = {100};
  EXPECT_THROW(spec.validate(c), ConfigError);
  spec.allowed_indices = {};
  spec.target = {0, 0, 0, 9};
  EXPECT_THROW(spec.validate(c), ConfigError);
  spec.target = {0, 0, 0, 0};
  spec.algorithm = "pgd";
  EXPECT_THROW(spec.validate(c), ConfigError);
  StepFilter f{2, 8, {3, 9}};
  EXPECT_TRUE(f.allows(3));
  EXPECT_FALSE(f.allows(4));
  EXPECT_FALSE(f.allows(9));
}

TEST(Benign, PairRules) {
  const auto& c = appendix();
  auto s = env::reset(c, 1, advprobe::fixtures::det(c)).state;
  EXPECT_FALSE(is_benign_pair(s, 3, 2));
  s.red_compromised[2] = 1;
  EXPECT_TRUE(is_benign_pair(s, 3, 2));
  s.red_compromised[2] = 0;
  s.red_compromised[3] = 1;
  EXPECT_TRUE(is_benign_pair(s, 3, 2));
  EXPECT_THROW(is_benign_pair(s, 2, 2), std::invalid_argument);
  EXPECT_THROW(is_benign_pair(s, 8, 2), std::out_of_range);
  EXPECT_TRUE(is_benign_slot(c, s, env::defense_obs_index(c, 3, 2)));
  EXPECT_FALSE(is_benign_slot(c, s, env::defense_obs_index(c, 3, 3)));
  EXPECT_FALSE(is_benign_slot(c, s, 12 + 3 * 3));
  EXPECT_FALSE(is_benign_slot(c, s, env::defense_obs_index(c, 5, 1)));
}

TEST(AttackTable, RoundTrip) {
  std::vector<AttackRecord> rows{
      {0, 0, 0, 15, {0, 0, 0, 0}, 1.0, 0.0, {1, 2, 3, 4}, {1, 2, 3, 0}, true, false},
      {7, 1, 3, 40, {0, 0, 0, 0}, -1.0, std::nullopt, {0, 0, 0, 0}, {0, 0, 0, 0}, false, true}};
  std::stringstream ss;
  write_attack_table(ss, "deadbeef", appendix(), rows);
  EXPECT_EQ(read_attack_table(ss), rows);
  std::stringstream bad("{\"format\":\"advprobe.attacks\",\"version\":2}\n");
  EXPECT_THROW(read_attack_table(bad), InputError);
}
