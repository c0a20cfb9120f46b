#include <ostream>

#include "advprobe/train/training.hpp"
#include "common/json_io.hpp"

namespace advprobe::train {

void write_training_log(std::ostream& out, const std::vector<EpisodeLogEntry>& log) {
  detail::write_line(out, {{"format", kTrainingLogFormat}, {"version", kTrainingLogVersion}});
  for (const auto& e : log) {
    detail::json j = {{"episode", e.episode},
                      {"level", e.level},
                      {"return", e.episode_return},
                      {"win", e.win},
                      {"env_steps", e.env_steps}};
    j["epsilon"] = e.epsilon ? detail::json(*e.epsilon) : detail::json(nullptr);
    detail::write_line(out, j);
  }
}

}  // namespace advprobe::train
