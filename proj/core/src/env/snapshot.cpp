#include "advprobe/env/snapshot.hpp"

#include "common/binary_io.hpp"

namespace advprobe::env {

namespace {
constexpr std::uint32_t kSnapshotMagic = 0x534E5031;  // "SNP1"
}

std::string serialize_snapshot(const EnvSnapshot& snap) {
  const EnvState& s = snap.state();
  detail::ByteWriter w;
  w.put(kSnapshotMagic);
  w.put(static_cast<std::uint32_t>(s.red_alive.size()));
  w.put(static_cast<std::uint32_t>(s.blue_alive.size()));
  w.put(static_cast<std::uint32_t>(s.resolved_effects.size()));
  w.put_bytes(s.red_alive.data(), s.red_alive.size());
  w.put_bytes(s.red_compromised.data(), s.red_compromised.size());
  w.put_bytes(s.blue_alive.data(), s.blue_alive.size());
  w.put_bytes(s.observed_defense.data(), s.observed_defense.size());
  w.put(static_cast<std::int32_t>(s.step_count));
  w.put(s.cumulative_reward);
  w.put(static_cast<std::int8_t>(s.property_log.win));
  w.put(static_cast<std::int32_t>(s.property_log.red_count));
  w.put(static_cast<std::int32_t>(s.property_log.blue_count));
  w.put(static_cast<std::int32_t>(s.property_log.trajectory_length));
  for (double e : s.resolved_effects) w.put(e);
  w.put(s.rng.seed());
  w.put(s.rng.counter());
  w.put(static_cast<std::uint8_t>(s.done));
  return w.take();
}

EnvSnapshot deserialize_snapshot(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (r.get<std::uint32_t>() != kSnapshotMagic) throw InputError("bad snapshot magic");
  const auto nr = r.get<std::uint32_t>();
  const auto nb = r.get<std::uint32_t>();
  const auto ne = r.get<std::uint32_t>();
  if (nr > 4096 || nb > 4096 || ne > (1u << 20)) throw InputError("implausible snapshot sizes");
  EnvState s;
  s.red_alive.resize(nr);
  s.red_compromised.resize(nr);
  s.blue_alive.resize(nb);
  s.observed_defense.resize(static_cast<std::size_t>(nr) * nr);
  r.get_bytes(s.red_alive.data(), nr);
  r.get_bytes(s.red_compromised.data(), nr);
  r.get_bytes(s.blue_alive.data(), nb);
  r.get_bytes(s.observed_defense.data(), s.observed_defense.size());
  s.step_count = r.get<std::int32_t>();
  s.cumulative_reward = r.get<double>();
  s.property_log.win = static_cast<Outcome>(r.get<std::int8_t>());
  s.property_log.red_count = r.get<std::int32_t>();
  s.property_log.blue_count = r.get<std::int32_t>();
  s.property_log.trajectory_length = r.get<std::int32_t>();
  s.resolved_effects.resize(ne);
  for (auto& e : s.resolved_effects) e = r.get<double>();
  const auto seed = r.get<std::uint64_t>();
  const auto counter = r.get<std::uint64_t>();
  s.rng = CounterRng(seed, counter);
  s.done = r.get<std::uint8_t>() != 0;
  if (!r.at_end()) throw InputError("trailing bytes in snapshot");
  return EnvSnapshot(std::move(s));
}

}  // namespace advprobe::env
