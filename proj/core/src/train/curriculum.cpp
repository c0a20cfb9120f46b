#include "advprobe/train/curriculum.hpp"

#include <stdexcept>

namespace advprobe::train {

using env::CurriculumLevel;

Lesson deterministic_lesson(const env::ScenarioConfig& config) {
  return {"deterministic", {CurriculumLevel::deterministic(config, 0)}};
}

Lesson adr_lesson(const env::ScenarioConfig& config) {
  return {"adr", {CurriculumLevel::uniform(config, 1.0, 0)}};
}

Lesson stdev_ladder_lesson(const env::ScenarioConfig& config) {
  Lesson lesson{"ladder", {}};
  const double ladder[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  int index = 0;
  for (double s : ladder) lesson.levels.push_back(CurriculumLevel::uniform(config, s, index++));
  return lesson;
}

Lesson variable_adding_lesson(const env::ScenarioConfig& config) {
  Lesson lesson{"adding", {}};
  const std::size_t n = config.adr_variables.size();
  for (std::size_t randomized = 0; randomized <= n; ++randomized) {
    CurriculumLevel level = CurriculumLevel::deterministic(config, static_cast<int>(randomized));
    for (std::size_t v = 0; v < randomized; ++v)
      level.stdev_overrides[config.adr_variables[v].id] = 1.0;
    lesson.levels.push_back(std::move(level));
  }
  return lesson;
}

Lesson lesson_by_name(const std::string& name, const env::ScenarioConfig& config) {
  if (name == "deterministic") return deterministic_lesson(config);
  if (name == "adr") return adr_lesson(config);
  if (name == "ladder") return stdev_ladder_lesson(config);
  if (name == "adding") return variable_adding_lesson(config);
  throw std::invalid_argument("unknown curriculum '" + name + "'");
}

void WinWindow::push(bool win) {
  outcomes_.push_back(win);
  wins_ += win ? 1 : 0;
  if (outcomes_.size() > capacity_) {
    wins_ -= outcomes_.front() ? 1 : 0;
    outcomes_.pop_front();
  }
}

double WinWindow::rate() const {
  return outcomes_.empty() ? 0.0
                           : static_cast<double>(wins_) / static_cast<double>(outcomes_.size());
}

CurriculumDecision advance_curriculum(const WinWindow& window, std::size_t num_levels,
                                      int current_level, double gate) {
  CurriculumDecision d{current_level, false, false};
  if (!window.full() || window.rate() < gate) return d;
  if (static_cast<std::size_t>(current_level) + 1 >= num_levels) {
    d.complete = true;
    return d;
  }
  d.level = current_level + 1;
  d.advanced = true;
  return d;
}

}  // namespace advprobe::train
