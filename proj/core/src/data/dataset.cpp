#include "advprobe/data/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "advprobe/common/parallel.hpp"
#include "advprobe/common/rng.hpp"
#include "advprobe/nn/loss.hpp"
#include "common/binary_io.hpp"
#include "common/json_io.hpp"

namespace advprobe::data {

using detail::json;

const EpisodeInfo& Dataset::episode(std::size_t episode_id) const {
  if (episode_id < episodes.size() && episodes[episode_id].episode_id == episode_id)
    return episodes[episode_id];
  for (const auto& e : episodes)
    if (e.episode_id == episode_id) return e;
  throw std::out_of_range("unknown episode " + std::to_string(episode_id));
}

namespace {

struct EpisodeRun {
  std::vector<CollectedRecord> records;
  env::PropertyLog final_properties;
};

nn::GreedyOutput greedy_loss(const train::FrozenPolicy& policy) {
  return nn::GreedyOutput{nn::Segments{policy.cardinalities}};
}

void annotate(const train::FrozenPolicy& policy, CollectedRecord& rec) {
  const auto trace = policy.net.forward(rec.obs);
  Eigen::VectorXd out = trace.output().col(0);
  Eigen::VectorXd d_out;
  nn::loss_and_output_grad(greedy_loss(policy), out, d_out);
  const auto back = policy.net.backward(trace, d_out);
  rec.saliency.resize(rec.obs.size());
  for (std::size_t i = 0; i < rec.obs.size(); ++i)
    rec.saliency[i] = std::abs(back.input(static_cast<Eigen::Index>(i), 0));
  const auto& h = trace.final_hidden();
  rec.activations.assign(h.data(), h.data() + h.rows());
  rec.action = train::greedy_segments(out, policy.cardinalities);
}

EpisodeRun run_episode(const train::FrozenPolicy& policy, const env::ScenarioConfig& config,
                       const env::CurriculumLevel& level, const CollectOptions& opt,
                       std::size_t episode_id, std::size_t max_records) {
  EpisodeRun run;
  auto [state, obs] = env::reset(config, derive_seed({opt.seed, episode_id}), level);
  CounterRng forcing(derive_seed({opt.seed, episode_id, 1}));
  while (!state.done && run.records.size() < max_records) {
    CollectedRecord rec;
    rec.episode_id = episode_id;
    rec.step = state.step_count;
    rec.obs = obs;
    rec.properties = state.property_log;
    rec.snapshot = env::snapshot(state);
    annotate(policy, rec);
    if (opt.random_frac > 0.0 && forcing.uniform() < opt.random_frac) {
      rec.was_forced_random = true;
      for (std::size_t k = 0; k < rec.action.size(); ++k)
        rec.action[k] = static_cast<int>(forcing.uniform() * policy.cardinalities[k]);
    }
    auto result = env::step(config, state, rec.action);
    obs = std::move(result.obs);
    run.records.push_back(std::move(rec));
  }
  run.final_properties = state.property_log;
  return run;
}

}  // namespace

std::vector<double> compute_saliency(const train::FrozenPolicy& policy,
                                     std::span<const double> obs) {
  const Eigen::VectorXd g = nn::input_gradient(policy.net, obs, greedy_loss(policy));
  std::vector<double> s(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) s[static_cast<std::size_t>(i)] = std::abs(g(i));
  return s;
}

Dataset collect_dataset(const train::FrozenPolicy& policy, const env::ScenarioConfig& config,
                        const CollectOptions& opt, std::string scenario_hash) {
  if (!(opt.random_frac >= 0.0 && opt.random_frac < 1.0))
    throw std::invalid_argument("random_frac must lie in [0, 1)");
  policy.check();
  if (policy.net.input_dim() != env::observation_size(config))
    throw std::invalid_argument("policy input size does not match the scenario");

  Dataset ds;
  ds.policy_tag = policy.tag;
  ds.scenario_hash = std::move(scenario_hash);
  ds.seed = opt.seed;
  ds.requested = opt.n;
  ds.random_frac = opt.random_frac;
  ds.records.reserve(opt.n);
  const auto level = env::CurriculumLevel::uniform(config, opt.stdev);

  // Episodes are generated in fixed-size batches. Each one is run without
  // knowing how many records are still needed, then trimmed on assembly.
  const std::size_t batch = std::max<std::size_t>(8, opt.workers * 4);
  const std::size_t cap = static_cast<std::size_t>(std::max(config.episode_cap, 1));
  std::size_t next_episode = 0;
  while (ds.records.size() < opt.n) {
    std::vector<EpisodeRun> runs(batch);
    parallel_for(batch, opt.workers, [&](std::size_t i) {
      runs[i] = run_episode(policy, config, level, opt, next_episode + i, cap);
    });
    for (std::size_t i = 0; i < batch && ds.records.size() < opt.n; ++i) {
      auto& run = runs[i];
      const std::size_t room = opt.n - ds.records.size();
      EpisodeInfo info;
      info.episode_id = next_episode + i;
      info.first_record = ds.records.size();
      info.complete = run.records.size() <= room;
      if (info.complete) {
        info.final_properties = run.final_properties;
      } else {
        run.records.resize(room);
        // Truncated: report the state right after the last kept step.
        auto replay = env::restore(run.records.back().snapshot);
        info.final_properties = env::step(config, replay, run.records.back().action).properties;
      }
      info.record_count = run.records.size();
      for (auto& r : run.records) ds.records.push_back(std::move(r));
      ds.episodes.push_back(info);
    }
    next_episode += batch;
  }
  return ds;
}

// ---- persistence ----

namespace {

constexpr std::uint32_t kSidecarMagic = 0x44535331;  // "DSS1"

json episode_json(const EpisodeInfo& e) {
  return json{{"episode_id", e.episode_id},
              {"first_record", e.first_record},
              {"record_count", e.record_count},
              {"final", detail::to_json(e.final_properties)},
              {"complete", e.complete}};
}

void put_doubles(detail::ByteWriter& w, const std::vector<double>& v) {
  w.put(static_cast<std::uint32_t>(v.size()));
  w.put_bytes(v.data(), v.size() * sizeof(double));
}

std::vector<double> get_doubles(detail::ByteReader& r) {
  const auto n = r.get<std::uint32_t>();
  if (n > (1u << 24)) throw InputError("implausible vector length in dataset sidecar");
  std::vector<double> v(n);
  r.get_bytes(v.data(), n * sizeof(double));
  return v;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  json header{{"format", kDatasetFormat},
              {"version", kDatasetVersion},
              {"policy_tag", ds.policy_tag},
              {"scenario_hash", ds.scenario_hash},
              {"seed", ds.seed},
              {"n", ds.requested},
              {"random_frac", ds.random_frac},
              {"records", ds.records.size()},
              {"sidecar", sidecar_path(path).filename().string()}};
  json eps = json::array();
  for (const auto& e : ds.episodes) eps.push_back(episode_json(e));
  header["episodes"] = std::move(eps);
  detail::write_line(out, header);

  detail::ByteWriter w;
  w.put(kSidecarMagic);
  w.put(static_cast<std::uint64_t>(ds.records.size()));
  for (const auto& r : ds.records) {
    detail::write_line(out, json{{"episode_id", r.episode_id},
                                 {"step", r.step},
                                 {"obs", r.obs},
                                 {"action", r.action},
                                 {"forced", r.was_forced_random},
                                 {"properties", detail::to_json(r.properties)}});
    const std::string snap = env::serialize_snapshot(r.snapshot);
    w.put(static_cast<std::uint32_t>(snap.size()));
    w.put_bytes(snap.data(), snap.size());
    put_doubles(w, r.activations);
    put_doubles(w, r.saliency);
  }
  if (!out) throw InputError("failed writing " + path.string());
  std::ofstream bin(sidecar_path(path), std::ios::binary);
  const std::string bytes = w.take();
  bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!bin) throw InputError("failed writing " + sidecar_path(path).string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset " + path.string());
  json header;
  if (!detail::read_line(in, header)) throw InputError("empty dataset file " + path.string());
  detail::expect_header(header, kDatasetFormat, kDatasetVersion);

  Dataset ds;
  try {
    ds.policy_tag = header.at("policy_tag").get<std::string>();
    ds.scenario_hash = header.at("scenario_hash").get<std::string>();
    ds.seed = header.at("seed").get<std::uint64_t>();
    ds.requested = header.at("n").get<std::size_t>();
    ds.random_frac = header.at("random_frac").get<double>();
    for (const auto& e : header.at("episodes")) {
      EpisodeInfo info;
      info.episode_id = e.at("episode_id").get<std::size_t>();
      info.first_record = e.at("first_record").get<std::size_t>();
      info.record_count = e.at("record_count").get<std::size_t>();
      info.final_properties = detail::property_log_from_json(e.at("final"));
      info.complete = e.at("complete").get<bool>();
      ds.episodes.push_back(info);
    }
    const auto count = header.at("records").get<std::size_t>();
    ds.records.reserve(count);
    json line;
    while (detail::read_line(in, line)) {
      CollectedRecord r;
      r.episode_id = line.at("episode_id").get<std::size_t>();
      r.step = line.at("step").get<int>();
      r.obs = line.at("obs").get<std::vector<double>>();
      r.action = line.at("action").get<std::vector<int>>();
      r.was_forced_random = line.at("forced").get<bool>();
      r.properties = detail::property_log_from_json(line.at("properties"));
      ds.records.push_back(std::move(r));
    }
    if (ds.records.size() != count) throw InputError("dataset record count mismatch");
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed dataset: ") + e.what());
  }

  std::ifstream bin(sidecar_path(path), std::ios::binary);
  if (!bin) throw InputError("missing dataset sidecar " + sidecar_path(path).string());
  std::ostringstream buf;
  buf << bin.rdbuf();
  const std::string bytes = buf.str();
  detail::ByteReader r(bytes);
  if (r.get<std::uint32_t>() != kSidecarMagic) throw InputError("bad dataset sidecar magic");
  if (r.get<std::uint64_t>() != ds.records.size())
    throw InputError("dataset sidecar does not match its record file");
  for (auto& rec : ds.records) {
    const auto len = r.get<std::uint32_t>();
    std::string snap(len, '\0');
    r.get_bytes(snap.data(), len);
    rec.snapshot = env::deserialize_snapshot(snap);
    rec.activations = get_doubles(r);
    rec.saliency = get_doubles(r);
  }
  if (!r.at_end()) throw InputError("trailing bytes in dataset sidecar");
  return ds;
}

}  // namespace advprobe::data
