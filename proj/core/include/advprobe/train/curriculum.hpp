#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "advprobe/env/scenario.hpp"

namespace advprobe::train {

/// Ordered training levels. Training moves to the next level when the
/// trailing win rate reaches the gate.
struct Lesson {
  std::string name;
  std::vector<env::CurriculumLevel> levels;
};

/// Single fully deterministic level.
Lesson deterministic_lesson(const env::ScenarioConfig& config);
/// Single level with every ADR variable at stdev 1.
Lesson adr_lesson(const env::ScenarioConfig& config);
/// All variables together: stdev 0 -> 0.25 -> 0.5 -> 0.75 -> 1.0.
Lesson stdev_ladder_lesson(const env::ScenarioConfig& config);
/// Deterministic start, then one more variable randomized (stdev 1) per
/// level, in declaration order, until all are randomized.
Lesson variable_adding_lesson(const env::ScenarioConfig& config);

/// Names: "deterministic", "adr", "ladder", "adding".
Lesson lesson_by_name(const std::string& name, const env::ScenarioConfig& config);

inline constexpr std::size_t kWinWindow = 100;
inline constexpr double kWinGate = 0.90;

/// Trailing window of episode outcomes.
class WinWindow {
 public:
  explicit WinWindow(std::size_t capacity = kWinWindow) : capacity_(capacity) {}

  void push(bool win);
  void clear() { outcomes_.clear(); wins_ = 0; }
  std::size_t size() const { return outcomes_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return outcomes_.size() >= capacity_; }
  double rate() const;

 private:
  std::size_t capacity_;
  std::deque<bool> outcomes_;
  std::size_t wins_ = 0;
};

struct CurriculumDecision {
  int level = 0;
  bool advanced = false;
  /// The final level's gate was passed.
  bool complete = false;
};

/// Advances exactly one level when the window is full and its win rate is at
/// least the gate; never regresses.
CurriculumDecision advance_curriculum(const WinWindow& window, std::size_t num_levels,
                                      int current_level, double gate = kWinGate);

}  // namespace advprobe::train
