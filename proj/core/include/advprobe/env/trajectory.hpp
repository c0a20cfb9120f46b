#pragma once

#include <cstddef>
#include <iosfwd>

#include "advprobe/env/cyberstrike.hpp"

namespace advprobe::env {

inline constexpr const char* kTrajectoryFormat = "advprobe.trajectory";
inline constexpr int kTrajectoryVersion = 1;

struct TrajectoryRecord {
  std::size_t episode_id = 0;
  int step = 0;
  ObsVector obs;
  MultiDiscreteAction action;
  double reward = 0.0;
  bool done = false;
  PropertyLog properties;
};

/// Line-delimited trajectory export: a header line, then one record per step.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out);
  void write(const TrajectoryRecord& record);

 private:
  std::ostream& out_;
};

}  // namespace advprobe::env
