#include "advprobe/env/trajectory.hpp"

#include "common/json_io.hpp"

namespace advprobe::env {

TrajectoryWriter::TrajectoryWriter(std::ostream& out) : out_(out) {
  detail::write_line(out_, {{"format", kTrajectoryFormat}, {"version", kTrajectoryVersion}});
}

void TrajectoryWriter::write(const TrajectoryRecord& r) {
  detail::write_line(out_, {{"episode_id", r.episode_id},
                            {"step", r.step},
                            {"obs", r.obs},
                            {"action", r.action},
                            {"reward", r.reward},
                            {"done", r.done},
                            {"properties", detail::to_json(r.properties)}});
}

}  // namespace advprobe::env
