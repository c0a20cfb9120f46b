#include <CLI11.hpp>

#include <iostream>

#include "advprobe/common/error.hpp"
#include "commands.hpp"

namespace cli = advprobe::cli;

int main(int argc, char** argv) {
  CLI::App app{"Adversarial probing of reinforcement-learning policies on CyberStrike"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ADVPROBE_VERSION);

  std::optional<cli::fs::path> out;
  std::function<void()> run;

  // ---- train ----
  cli::TrainParams train;
  auto* t = app.add_subcommand("train", "Train one policy, or the five-policy suite");
  t->add_option("--scenario", train.scenario, "Scenario YAML")->required()->check(CLI::ExistingFile);
  t->add_option("--algo", train.algo, "dqn or a2c")->check(CLI::IsMember({"dqn", "a2c", "DQN", "A2C"}));
  t->add_option("--curriculum", train.curriculum, "deterministic, adr, ladder or adding");
  t->add_flag("--suite", train.suite, "Train A2C-A, A2C-B, A2C-C, DQN-A and DQN-B");
  t->add_option("--seed", train.seed, "Random seed")->required();
  t->add_option("--budget", train.budget, "Environment steps per curriculum level");
  t->add_option("--tag", train.tag, "Policy tag");
  t->add_flag("--quiet", train.quiet, "No progress output");
  t->add_option("--out", out, "Output directory");
  t->callback([&] {
    train.out = cli::resolve_out_dir(out, "train");
    run = [&] { std::cout << cli::cmd_train(train).string() << "\n"; };
  });

  // ---- collect ----
  cli::CollectParams collect;
  auto* c = app.add_subcommand("collect", "Roll a frozen policy to build the analysis dataset");
  c->add_option("--policy", collect.policy, "Policy checkpoint")->required();
  c->add_option("--scenario", collect.scenario, "Scenario YAML")->required();
  c->add_option("--n", collect.n, "Record count");
  c->add_option("--random-frac", collect.random_frac, "Share of forced random actions");
  c->add_option("--stdev", collect.stdev, "ADR stdev during collection");
  c->add_option("--seed", collect.seed, "Random seed")->required();
  c->add_option("--workers", collect.workers, "Worker threads");
  c->add_option("--out", out, "Output directory");
  c->callback([&] {
    collect.out = cli::resolve_out_dir(out, "collect");
    run = [&] { std::cout << cli::cmd_collect(collect).string() << "\n"; };
  });

  // ---- attack ----
  cli::AttackParams attack;
  auto* a = app.add_subcommand("attack", "Run an FGSM impact campaign");
  a->add_option("--config", attack.config, "Campaign config (JSON)")->required();
  a->add_option("--dataset", attack.dataset, "Dataset (overrides the config)");
  a->add_option("--policy", attack.policy, "Policy checkpoint (overrides the config)");
  a->add_option("--scenario", attack.scenario, "Scenario YAML")->required();
  a->add_option("--seed", attack.seed, "Random seed")->required();
  a->add_option("--workers", attack.workers, "Worker threads");
  a->add_option("--out", out, "Output directory");
  a->callback([&] {
    attack.out = cli::resolve_out_dir(out, "attack");
    run = [&] { std::cout << cli::cmd_attack(attack).string() << "\n"; };
  });

  // ---- analyze ----
  cli::AnalyzeParams analyze;
  auto* z = app.add_subcommand("analyze", "Aggregate impact samples into ranked tables");
  z->add_option("--impact", analyze.impact, "impact_samples.jsonl")->required();
  z->add_option("--scenario", analyze.scenario, "Scenario YAML")->required();
  z->add_option("--group-by", analyze.group_by, "index, step or index_step");
  z->add_option("--property", analyze.property, "win, red_count, blue_count or trajectory_length");
  z->add_option("--metric", analyze.metric, "difference, indicator or threshold");
  z->add_option("--d-star", analyze.d_star, "Threshold for the threshold metric");
  z->add_option("--index", analyze.index, "Keep only samples attacking this index");
  z->add_flag("--top-index", analyze.top_index, "Keep only the top-ranked index");
  z->add_flag("--key-order", analyze.key_order, "Sort rows by key instead of rank");
  z->add_option("--out", out, "Output directory");
  z->callback([&] {
    analyze.out = cli::resolve_out_dir(out, "analyze");
    run = [&] { std::cout << cli::cmd_analyze(analyze).string() << "\n"; };
  });

  // ---- transfer ----
  cli::TransferParams transfer;
  auto* x = app.add_subcommand("transfer", "Cross-policy transferability table");
  x->add_option("--policies", transfer.policies, "Policy checkpoints")->required();
  x->add_option("--datasets", transfer.datasets, "One dataset per policy, same order")->required();
  x->add_option("--scenario", transfer.scenario, "Scenario YAML")->required();
  x->add_option("--epsilon", transfer.epsilon, "Perturbation scale");
  x->add_option("--workers", transfer.workers, "Worker threads");
  x->add_option("--out", out, "Output directory");
  x->callback([&] {
    transfer.out = cli::resolve_out_dir(out, "transfer");
    run = [&] { std::cout << cli::cmd_transfer(transfer).string() << "\n"; };
  });

  // ---- embed ----
  cli::EmbedParams embed;
  auto* e = app.add_subcommand("embed", "t-SNE embedding, clusters and transitions");
  e->add_option("--dataset", embed.dataset, "Dataset")->required();
  e->add_option("--impact", embed.impact, "impact_samples.jsonl for point colors");
  e->add_option("--perplexity", embed.perplexity, "t-SNE perplexity");
  e->add_option("--critical-distance", embed.critical_distance, "Chinese Whispers edge distance");
  e->add_option("--iterations", embed.iterations, "t-SNE iterations");
  e->add_option("--max-points", embed.max_points, "Cap on embedded distinct rows");
  e->add_option("--property", embed.property, "Property used for colors");
  e->add_option("--metric", embed.metric, "Metric used for colors");
  e->add_option("--seed", embed.seed, "Random seed")->required();
  e->add_option("--workers", embed.workers, "Worker threads");
  e->add_option("--out", out, "Output directory");
  e->callback([&] {
    embed.out = cli::resolve_out_dir(out, "embed");
    run = [&] { std::cout << cli::cmd_embed(embed).string() << "\n"; };
  });

  // ---- play ----
  cli::PlayParams play;
  auto* y = app.add_subcommand("play", "Export trajectories of a policy or the scripted strategy");
  y->add_option("--scenario", play.scenario, "Scenario YAML")->required();
  y->add_option("--policy", play.policy, "Policy checkpoint (default: scripted strategy)");
  y->add_option("--episodes", play.episodes, "Episode count");
  y->add_option("--stdev", play.stdev, "ADR stdev");
  y->add_option("--seed", play.seed, "Random seed")->required();
  y->add_option("--out", out, "Output directory");
  y->callback([&] {
    play.out = cli::resolve_out_dir(out, "play");
    run = [&] { std::cout << cli::cmd_play(play).string() << "\n"; };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? cli::kOk : cli::kConfigError;
  }

  try {
    run();
  } catch (const advprobe::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return cli::kConfigError;
  } catch (const advprobe::InputError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return cli::kInputError;
  } catch (const std::exception& err) {
    std::cerr << "stage failed: " << err.what() << "\n";
    return cli::kStageFailure;
  }
  return cli::kOk;
}
