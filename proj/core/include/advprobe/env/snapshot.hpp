#pragma once

#include <string>
#include <string_view>

#include "advprobe/env/cyberstrike.hpp"

namespace advprobe::env {

/// Immutable copy of an episode state, safe to share across threads.
/// Restoring reproduces the state bit for bit, including the RNG position.
class EnvSnapshot {
 public:
  EnvSnapshot() = default;
  explicit EnvSnapshot(EnvState state) : state_(std::move(state)) {}

  const EnvState& state() const noexcept { return state_; }

  friend bool operator==(const EnvSnapshot&, const EnvSnapshot&) = default;

 private:
  EnvState state_;
};

inline EnvSnapshot snapshot(const EnvState& state) { return EnvSnapshot(state); }
inline EnvState restore(const EnvSnapshot& snap) { return snap.state(); }

/// Compact little-endian binary encoding (versioned).
std::string serialize_snapshot(const EnvSnapshot& snap);
/// Throws InputError on malformed input.
EnvSnapshot deserialize_snapshot(std::string_view bytes);

}  // namespace advprobe::env
