#include <benchmark/benchmark.h>

#include "advprobe/attack/feasible.hpp"
#include "advprobe/attack/fgsm.hpp"
#include "advprobe/embed/tsne.hpp"
#include "advprobe/env/cyberstrike.hpp"
#include "advprobe/nn/loss.hpp"
#include "advprobe/train/policy.hpp"

using namespace advprobe;

namespace {

const env::ScenarioConfig& scenario() {
  static const auto config = env::load_scenario_file(ADVPROBE_SCENARIO);
  return config;
}

train::FrozenPolicy random_policy() {
  const auto& config = scenario();
  train::FrozenPolicy p;
  p.cardinalities = env::action_cardinalities(config);
  p.net = nn::Mlp::standard(env::observation_size(config), 36, nn::Activation::ReLU, 7);
  p.tag = "bench";
  return p;
}

void BM_EnvEpisode(benchmark::State& state) {
  const auto& config = scenario();
  const auto level = env::CurriculumLevel::deterministic(config);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto [s, obs] = env::reset(config, seed++, level);
    while (!s.done) env::step(config, s, env::scripted_optimal_action(config, s));
    benchmark::DoNotOptimize(s.property_log);
  }
}
BENCHMARK(BM_EnvEpisode);

void BM_ForwardBackward(benchmark::State& state) {
  const auto policy = random_policy();
  const auto& config = scenario();
  const auto obs = env::reset(config, 1, env::CurriculumLevel::deterministic(config)).obs;
  const nn::CrossEntropyToTarget loss{nn::Segments{policy.cardinalities}, {0, 0, 0, 0}};
  for (auto _ : state) benchmark::DoNotOptimize(nn::input_gradient(policy.net, obs, loss));
}
BENCHMARK(BM_ForwardBackward);

void BM_ForwardBatch(benchmark::State& state) {
  const auto policy = random_policy();
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(100, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(policy.net.output_batch(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBatch)->Arg(1)->Arg(64)->Arg(88);

void BM_FgsmAllIndices(benchmark::State& state) {
  const auto policy = random_policy();
  const auto& config = scenario();
  const auto feasible = attack::feasible_table(config);
  const auto indices = attack::perturbable_indices(config);
  const auto obs = env::reset(config, 1, env::CurriculumLevel::deterministic(config)).obs;
  const env::MultiDiscreteAction target{0, 0, 0, 0};
  for (auto _ : state) {
    const auto g = attack::targeted_gradient(policy, obs, target);
    benchmark::DoNotOptimize(attack::perturb_indices(policy, feasible, obs, g, indices, 1.0,
                                                     train::select_action(policy, obs)));
  }
}
BENCHMARK(BM_FgsmAllIndices);

void BM_TsneIterations(benchmark::State& state) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(state.range(0), 16);
  embed::TsneOptions opt;
  opt.perplexity = 30;
  opt.iterations = 10;
  for (auto _ : state) benchmark::DoNotOptimize(embed::tsne_embed(x, opt));
}
BENCHMARK(BM_TsneIterations)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
