#include "commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "advprobe/attack/feasible.hpp"
#include "advprobe/attack/fgsm.hpp"
#include "advprobe/common/error.hpp"
#include "advprobe/common/hash.hpp"
#include "advprobe/common/rng.hpp"
#include "advprobe/data/dataset.hpp"
#include "advprobe/embed/chinese_whispers.hpp"
#include "advprobe/embed/samdp.hpp"
#include "advprobe/embed/tsne.hpp"
#include "advprobe/env/trajectory.hpp"
#include "advprobe/impact/aggregate.hpp"
#include "advprobe/impact/campaign.hpp"
#include "advprobe/train/suite.hpp"
#include "advprobe/transfer/transfer.hpp"

#ifndef ADVPROBE_VERSION
#define ADVPROBE_VERSION "0.0.0"
#endif

namespace advprobe::cli {

using nlohmann::json;

fs::path resolve_out_dir(const std::optional<fs::path>& out, const std::string& stage) {
  if (out) return *out;
  if (const char* root = std::getenv(kOutRootEnv); root && *root) return fs::path(root) / stage;
  return fs::path("advprobe-out") / stage;
}

namespace {

/// Collects inputs and outputs and writes manifest.json last.
class Manifest {
 public:
  Manifest(std::string stage, fs::path dir) : stage_(std::move(stage)), dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory " + dir_.string());
    doc_["tool"] = "advprobe";
    doc_["version"] = ADVPROBE_VERSION;
    doc_["stage"] = stage_;
    doc_["parameters"] = json::object();
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::object();
  }

  void seed(std::uint64_t s) { doc_["seed"] = s; }
  json& params() { return doc_["parameters"]; }

  void input(const std::string& name, const fs::path& path) {
    if (!fs::exists(path)) throw InputError("missing input " + path.string());
    doc_["inputs"][name] = json{{"path", path.generic_string()}, {"sha256", sha256_file(path)}};
  }

  fs::path path(const std::string& file) const { return dir_ / file; }

  /// Registers an artifact already written into the output directory.
  void output(const std::string& file) {
    doc_["outputs"][file] = sha256_file(dir_ / file);
  }

  void write_text(const std::string& file, const std::string& text) {
    std::ofstream out(dir_ / file, std::ios::binary);
    out << text;
    if (!out) throw InputError("failed writing " + (dir_ / file).string());
    out.close();
    output(file);
  }

  void finish() { write_text_raw("manifest.json", doc_.dump(2) + "\n"); }

 private:
  void write_text_raw(const std::string& file, const std::string& text) {
    std::ofstream out(dir_ / file, std::ios::binary);
    out << text;
    if (!out) throw InputError("failed writing " + (dir_ / file).string());
  }

  std::string stage_;
  fs::path dir_;
  json doc_;
};

env::ScenarioConfig load_scenario_input(Manifest& m, const fs::path& path) {
  m.input("scenario", path);
  return env::load_scenario_file(path);
}

train::FrozenPolicy load_policy_input(Manifest& m, const std::string& name, const fs::path& path,
                                      const env::ScenarioConfig& config) {
  m.input(name, path);
  auto policy = train::load_policy(path);
  if (policy.net.input_dim() != env::observation_size(config) ||
      policy.cardinalities != env::action_cardinalities(config))
    throw InputError("policy " + path.string() + " does not fit the scenario");
  return policy;
}

data::Dataset load_dataset_input(Manifest& m, const std::string& name, const fs::path& path) {
  m.input(name, path);
  m.input(name + "_sidecar", data::sidecar_path(path));
  return data::load_dataset(path);
}

void require_workers(std::size_t workers) {
  if (workers == 0) throw ConfigError("--workers must be >= 1");
}

impact::Metric metric_for(impact::Property property, const std::optional<std::string>& name,
                          double d_star) {
  impact::Metric m = impact::default_metric(property);
  if (name) m.kind = impact::parse_metric(*name);
  if (d_star < 0.0) throw ConfigError("--d-star must be >= 0");
  m.d_star = d_star;
  return m;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

}  // namespace

// ---- train ----

fs::path cmd_train(const TrainParams& p) {
  Manifest m("train", p.out);
  const auto config = load_scenario_input(m, p.scenario);
  m.seed(p.seed);
  train::DqnHyper dqn;
  train::A2cHyper a2c;
  if (p.budget) {
    if (*p.budget == 0) throw ConfigError("--budget must be positive");
    dqn.budget_per_level = *p.budget;
    a2c.budget_per_level = *p.budget;
  }
  m.params() = json{{"suite", p.suite},
                    {"budget_per_level", dqn.budget_per_level}};

  std::vector<std::pair<train::SuiteMember, std::uint64_t>> jobs;
  if (p.suite) {
    const auto plan = train::policy_suite_plan(config);
    for (std::size_t i = 0; i < plan.size(); ++i)
      jobs.emplace_back(plan[i], derive_seed({p.seed, i}));
  } else {
    train::Algorithm algo;
    try {
      algo = train::parse_algorithm(p.algo);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    train::Lesson lesson;
    try {
      lesson = train::lesson_by_name(p.curriculum, config);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const std::string tag =
        p.tag.empty() ? std::string(train::algorithm_name(algo)) + "-" + p.curriculum : p.tag;
    jobs.emplace_back(train::SuiteMember{tag, algo, lesson}, p.seed);
    m.params()["algo"] = train::algorithm_name(algo);
    m.params()["curriculum"] = p.curriculum;
    m.params()["tag"] = tag;
  }

  fs::path primary;
  json results = json::array();
  for (const auto& [member, seed] : jobs) {
    auto progress = [&, name = member.tag](const train::EpisodeLogEntry& e) {
      if (!p.quiet && e.episode % 500 == 0)
        std::cerr << name << " episode " << e.episode << " level " << e.level << " steps "
                  << e.env_steps << "\n";
      return true;
    };
    const auto result = train::train_member(config, member, dqn, a2c, seed, progress);
    const std::string prefix = p.suite ? member.tag + "/" : "";
    if (p.suite) fs::create_directories(m.path(member.tag));
    train::save_policy(result.policy, m.path(prefix + "policy.json"));
    m.output(prefix + "policy.json");
    m.write_text(prefix + "training_log.jsonl",
                 render([&](std::ostream& o) { train::write_training_log(o, result.log); }));
    results.push_back(json{{"tag", member.tag},
                           {"seed", seed},
                           {"success", result.success},
                           {"env_steps", result.env_steps},
                           {"learner_updates", result.learner_updates}});
    if (!result.success)
      std::cerr << "warning: " << member.tag << " did not pass its final level within budget\n";
    if (primary.empty()) primary = m.path(prefix + "policy.json");
  }
  m.params()["results"] = results;
  m.finish();
  return p.suite ? p.out : primary;
}

// ---- collect ----

fs::path cmd_collect(const CollectParams& p) {
  require_workers(p.workers);
  if (p.n == 0) throw ConfigError("--n must be positive");
  if (!(p.random_frac >= 0.0 && p.random_frac < 1.0))
    throw ConfigError("--random-frac must lie in [0, 1)");
  if (!(p.stdev >= 0.0)) throw ConfigError("--stdev must be >= 0");
  Manifest m("collect", p.out);
  const auto config = load_scenario_input(m, p.scenario);
  const auto policy = load_policy_input(m, "policy", p.policy, config);
  m.seed(p.seed);
  m.params() = json{{"n", p.n}, {"random_frac", p.random_frac}, {"stdev", p.stdev}};

  data::CollectOptions opt;
  opt.n = p.n;
  opt.random_frac = p.random_frac;
  opt.seed = p.seed;
  opt.stdev = p.stdev;
  opt.workers = p.workers;
  const auto ds = data::collect_dataset(policy, config, opt, sha256_file(p.scenario));
  data::save_dataset(ds, m.path("dataset.jsonl"));
  m.output("dataset.jsonl");
  m.output("dataset.jsonl.bin");
  m.finish();
  return m.path("dataset.jsonl");
}

// ---- attack ----

namespace {

struct CampaignConfig {
  impact::CampaignOptions options;
  std::optional<fs::path> dataset;
  std::optional<fs::path> policy;
};

CampaignConfig parse_campaign(const fs::path& path, const env::ScenarioConfig& config) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("campaign config: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ConfigError("campaign config must be a JSON object");
  static const std::vector<std::string> known = {"dataset", "policy",   "target",
                                                 "indices", "steps",    "epsilon",
                                                 "sampling", "trials_per_point"};
  for (const auto& [key, _] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("campaign config: unknown key '" + key + "'");

  CampaignConfig c;
  auto& spec = c.options.spec;
  const fs::path base = path.parent_path();
  try {
    if (doc.contains("dataset")) c.dataset = base / doc["dataset"].get<std::string>();
    if (doc.contains("policy")) c.policy = base / doc["policy"].get<std::string>();
    const json target = doc.value("target", json("noop"));
    if (target.is_string() && target.get<std::string>() == "noop")
      spec.target.assign(config.num_blue(), 0);
    else
      spec.target = target.get<std::vector<int>>();
    const json indices = doc.value("indices", json("all"));
    if (indices.is_string() && indices.get<std::string>() == "all")
      spec.allowed_indices = attack::perturbable_indices(config);
    else
      spec.allowed_indices = indices.get<std::vector<std::size_t>>();
    if (doc.contains("steps")) {
      const auto& s = doc["steps"];
      spec.allowed_steps.min_step = s.value("min", 0);
      spec.allowed_steps.max_step = s.value("max", INT_MAX);
      spec.allowed_steps.only = s.value("only", std::vector<int>{});
    }
    spec.epsilon = doc.value("epsilon", 1.0);
    if (doc.contains("sampling") && !doc["sampling"].is_null()) {
      c.options.sampling.enabled = true;
      c.options.sampling.per_stratum = doc["sampling"].at("per_stratum").get<std::size_t>();
      if (c.options.sampling.per_stratum == 0)
        throw ConfigError("campaign config: per_stratum must be >= 1");
    }
    c.options.trials_per_point = doc.value("trials_per_point", std::size_t{1});
    if (c.options.trials_per_point == 0)
      throw ConfigError("campaign config: trials_per_point must be >= 1");
  } catch (const json::exception& e) {
    throw ConfigError("campaign config: " + std::string(e.what()));
  }
  spec.validate(config);
  return c;
}

}  // namespace

fs::path cmd_attack(const AttackParams& p) {
  require_workers(p.workers);
  Manifest m("attack", p.out);
  const auto config = load_scenario_input(m, p.scenario);
  m.input("campaign", p.config);
  auto campaign = parse_campaign(p.config, config);
  const auto dataset_path = p.dataset ? p.dataset : campaign.dataset;
  const auto policy_path = p.policy ? p.policy : campaign.policy;
  if (!dataset_path || !policy_path)
    throw ConfigError("attack needs a dataset and a policy (flags or campaign config)");
  const auto policy = load_policy_input(m, "policy", *policy_path, config);
  const auto dataset = load_dataset_input(m, "dataset", *dataset_path);
  if (dataset.policy_tag != policy.tag)
    throw InputError("dataset was collected by '" + dataset.policy_tag + "', not '" +
                     policy.tag + "'");
  m.seed(p.seed);
  auto& opt = campaign.options;
  opt.seed = p.seed;
  opt.workers = p.workers;
  m.params() = json{{"target", opt.spec.target},
                    {"indices", opt.spec.allowed_indices},
                    {"steps",
                     {{"min", opt.spec.allowed_steps.min_step},
                      {"max", opt.spec.allowed_steps.max_step},
                      {"only", opt.spec.allowed_steps.only}}},
                    {"epsilon", opt.spec.epsilon},
                    {"sampling", opt.sampling.enabled ? json{{"per_stratum", opt.sampling.per_stratum}}
                                                      : json(nullptr)},
                    {"trials_per_point", opt.trials_per_point}};

  const auto result = impact::run_impact_campaign(dataset, policy, config, opt);
  const std::string ds_hash = sha256_file(*dataset_path);
  m.write_text("attacks.jsonl", render([&](std::ostream& o) {
                 attack::write_attack_table(o, ds_hash, config, result.attacks);
               }));
  impact::ImpactTableInfo info{policy.tag, ds_hash, p.seed, opt.trials_per_point};
  m.write_text("impact_samples.jsonl", render([&](std::ostream& o) {
                 impact::write_impact_samples(o, info, config, result.samples);
               }));
  const auto& c = result.cost;
  m.write_text("cost.json", json{{"points", c.points},
                                 {"perturbed", c.perturbed},
                                 {"sufficient", c.sufficient},
                                 {"rollouts", c.rollouts},
                                 {"simulated_steps", c.simulated_steps}}
                                    .dump(2) +
                                "\n");
  m.finish();
  return m.path("impact_samples.jsonl");
}

// ---- analyze ----

fs::path cmd_analyze(const AnalyzeParams& p) {
  Manifest m("analyze", p.out);
  const auto config = load_scenario_input(m, p.scenario);
  m.input("impact", p.impact);
  const auto group_by = impact::parse_group_by(p.group_by);
  const auto property = impact::parse_property(p.property);
  const auto metric = metric_for(property, p.metric, p.d_star);
  if (p.index && p.top_index) throw ConfigError("--index and --top-index are exclusive");

  std::ifstream in(p.impact);
  auto samples = impact::read_impact_samples(in);
  std::optional<std::size_t> index = p.index;
  if (p.top_index) {
    const auto ranked = impact::aggregate_impact(samples, impact::GroupBy::Index, property, metric);
    if (ranked.empty()) throw InputError("impact table is empty");
    index = ranked.front().key.index;
  }
  if (index)
    std::erase_if(samples, [&](const auto& s) { return s.point.index != *index; });

  const auto rows = impact::aggregate_impact(samples, group_by, property, metric, !p.key_order);
  m.params() = json{{"group_by", impact::group_by_name(group_by)},
                    {"property", impact::property_name(property)},
                    {"metric", impact::metric_name(metric.kind)},
                    {"d_star", metric.d_star},
                    {"index", index ? json(*index) : json(nullptr)},
                    {"order", p.key_order ? "key" : "ranked"}};
  impact::AggregateTableInfo info{group_by, property, metric.kind, !p.key_order};
  m.write_text("aggregate.jsonl", render([&](std::ostream& o) {
                 impact::write_aggregate_table(o, info, config, rows);
               }));
  m.finish();
  return m.path("aggregate.jsonl");
}

// ---- transfer ----

fs::path cmd_transfer(const TransferParams& p) {
  require_workers(p.workers);
  if (p.policies.empty() || p.policies.size() != p.datasets.size())
    throw ConfigError("transfer needs one dataset per policy");
  if (!(p.epsilon >= 0.0)) throw ConfigError("--epsilon must be >= 0");
  Manifest m("transfer", p.out);
  const auto config = load_scenario_input(m, p.scenario);
  std::vector<train::FrozenPolicy> policies;
  std::vector<data::Dataset> datasets;
  for (std::size_t i = 0; i < p.policies.size(); ++i) {
    policies.push_back(
        load_policy_input(m, "policy" + std::to_string(i), p.policies[i], config));
    datasets.push_back(load_dataset_input(m, "dataset" + std::to_string(i), p.datasets[i]));
  }
  std::vector<transfer::ActionTargets> targets;
  for (const auto& d : datasets) targets.push_back(transfer::action_targets_for(d));
  m.params() = json{{"epsilon", p.epsilon}};

  transfer::TransferOptions opt;
  opt.epsilon = p.epsilon;
  opt.workers = p.workers;
  const auto cells = transfer::run_transfer_matrix(policies, datasets, targets, config, opt);
  m.write_text("transfer.jsonl", render([&](std::ostream& o) {
                 transfer::write_transfer_table(o, p.epsilon, cells);
               }));
  m.finish();
  return m.path("transfer.jsonl");
}

// ---- embed ----

fs::path cmd_embed(const EmbedParams& p) {
  require_workers(p.workers);
  if (!(p.perplexity >= 1.0)) throw ConfigError("--perplexity must be >= 1");
  if (!(p.critical_distance > 0.0)) throw ConfigError("--critical-distance must be positive");
  if (p.iterations < 1) throw ConfigError("--iterations must be positive");
  Manifest m("embed", p.out);
  const auto dataset = load_dataset_input(m, "dataset", p.dataset);
  const auto property = impact::parse_property(p.property);
  const auto metric = metric_for(property, p.metric, 0.0);
  std::vector<impact::ImpactSample> samples;
  if (p.impact) {
    m.input("impact", *p.impact);
    std::ifstream in(*p.impact);
    impact::ImpactTableInfo info;
    samples = impact::read_impact_samples(in, &info);
    if (info.dataset_hash != sha256_file(p.dataset))
      throw InputError("impact table was computed on a different dataset");
  }
  m.seed(p.seed);

  // Identical activation rows (repeated opening states) share one point.
  std::map<std::vector<double>, std::size_t> unique_of;
  std::vector<std::size_t> row_of(dataset.records.size());
  std::vector<std::size_t> first_record;
  for (std::size_t r = 0; r < dataset.records.size(); ++r) {
    auto [it, inserted] = unique_of.try_emplace(dataset.records[r].activations, first_record.size());
    if (inserted) first_record.push_back(r);
    row_of[r] = it->second;
  }
  const std::size_t unique = first_record.size();
  if (unique == 0) throw InputError("dataset has no records");
  const std::size_t dim = dataset.records.front().activations.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(unique), static_cast<Eigen::Index>(dim));
  for (std::size_t u = 0; u < unique; ++u) {
    const auto& a = dataset.records[first_record[u]].activations;
    if (a.size() != dim) throw InputError("activation rows have different lengths");
    for (std::size_t k = 0; k < dim; ++k)
      x(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(k)) = a[k];
  }

  // Seeded uniform subsample of the distinct rows for the O(n^2) embedding.
  std::vector<std::size_t> chosen(unique);
  for (std::size_t u = 0; u < unique; ++u) chosen[u] = u;
  if (unique > p.max_points) {
    CounterRng rng(derive_seed({p.seed, 0x5355}));
    for (std::size_t i = 0; i < p.max_points; ++i)
      std::swap(chosen[i], chosen[i + static_cast<std::size_t>(
                                          rng.uniform() * static_cast<double>(unique - i))]);
    chosen.resize(p.max_points);
    std::sort(chosen.begin(), chosen.end());
  }
  if (!(static_cast<double>(chosen.size()) > 3.0 * p.perplexity))
    throw InputError("only " + std::to_string(chosen.size()) +
                     " distinct activation rows; t-SNE needs more than 3 * perplexity");
  Eigen::MatrixXd xs(static_cast<Eigen::Index>(chosen.size()), x.cols());
  for (std::size_t i = 0; i < chosen.size(); ++i)
    xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(chosen[i]));

  embed::TsneOptions topt;
  topt.perplexity = p.perplexity;
  topt.iterations = p.iterations;
  topt.seed = p.seed;
  topt.workers = p.workers;
  const auto tsne = embed::tsne_embed(xs, topt);

  embed::ChineseWhispersOptions copt;
  copt.critical_distance = p.critical_distance;
  copt.seed = p.seed;
  const auto unique_labels = embed::chinese_whispers(x, copt);
  std::vector<int> labels(dataset.records.size());
  for (std::size_t r = 0; r < labels.size(); ++r) labels[r] = unique_labels[row_of[r]];

  std::vector<std::optional<std::size_t>> embedded(unique);
  for (std::size_t i = 0; i < chosen.size(); ++i) embedded[chosen[i]] = i;
  std::vector<embed::EmbeddingPoint> points;
  for (std::size_t r = 0; r < dataset.records.size(); ++r) {
    const auto e = embedded[row_of[r]];
    if (!e) continue;
    const auto row = static_cast<Eigen::Index>(*e);
    points.push_back({r, tsne.coords(row, 0), tsne.coords(row, 1), labels[r], std::nullopt});
  }
  points = embed::color_by_impact(std::move(points), samples, property, metric);
  const auto arrows = embed::cluster_transitions(labels, dataset);

  m.params() = json{{"perplexity", p.perplexity},
                    {"critical_distance", p.critical_distance},
                    {"iterations", p.iterations},
                    {"max_points", p.max_points},
                    {"property", impact::property_name(property)},
                    {"metric", impact::metric_name(metric.kind)},
                    {"unique_rows", unique},
                    {"embedded_rows", chosen.size()}};
  embed::EmbeddingInfo info{dataset.policy_tag,
                            sha256_file(p.dataset),
                            p.perplexity,
                            p.critical_distance,
                            p.seed,
                            impact::property_name(property),
                            impact::metric_name(metric.kind),
                            unique};
  m.write_text("embedding.jsonl",
               render([&](std::ostream& o) { embed::write_embedding(o, info, points); }));
  m.write_text("transitions.jsonl",
               render([&](std::ostream& o) { embed::write_transitions(o, arrows); }));
  m.write_text("kl.jsonl", render([&](std::ostream& o) {
                 const auto [lo, hi] =
                     std::minmax_element(tsne.row_perplexity.begin(), tsne.row_perplexity.end());
                 o << json{{"format", "advprobe.tsne_trace"},
                           {"version", 1},
                           {"perplexity_min", *lo},
                           {"perplexity_max", *hi},
                           {"count", tsne.kl.size()}}
                          .dump()
                   << '\n';
                 for (std::size_t i = 0; i < tsne.kl.size(); ++i)
                   o << json{{"iteration", i}, {"kl", tsne.kl[i]}}.dump() << '\n';
               }));
  m.finish();
  return m.path("embedding.jsonl");
}

// ---- play ----

fs::path cmd_play(const PlayParams& p) {
  if (p.episodes == 0) throw ConfigError("--episodes must be positive");
  if (!(p.stdev >= 0.0)) throw ConfigError("--stdev must be >= 0");
  Manifest m("play", p.out);
  const auto config = load_scenario_input(m, p.scenario);
  std::optional<train::FrozenPolicy> policy;
  if (p.policy) policy = load_policy_input(m, "policy", *p.policy, config);
  m.seed(p.seed);
  m.params() = json{{"episodes", p.episodes},
                    {"stdev", p.stdev},
                    {"actor", policy ? policy->tag : std::string("scripted")}};
  const auto level = env::CurriculumLevel::uniform(config, p.stdev);
  std::ostringstream out;
  env::TrajectoryWriter writer(out);
  for (std::size_t e = 0; e < p.episodes; ++e) {
    auto [state, obs] = env::reset(config, derive_seed({p.seed, e}), level);
    while (!state.done) {
      env::TrajectoryRecord rec;
      rec.episode_id = e;
      rec.step = state.step_count;
      rec.obs = obs;
      rec.action = policy ? train::select_action(*policy, obs)
                          : env::scripted_optimal_action(config, state);
      const auto res = env::step(config, state, rec.action);
      rec.reward = res.reward;
      rec.done = res.done;
      rec.properties = res.properties;
      writer.write(rec);
      obs = res.obs;
    }
  }
  m.write_text("trajectory.jsonl", out.str());
  m.finish();
  return m.path("trajectory.jsonl");
}

}  // namespace advprobe::cli
