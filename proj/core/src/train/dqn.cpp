#include "advprobe/train/dqn.hpp"

#include <numeric>
#include <random>
#include <stdexcept>

#include "advprobe/common/rng.hpp"
#include "advprobe/env/cyberstrike.hpp"
#include "advprobe/nn/adam.hpp"
#include "train/replay.hpp"

namespace advprobe::train {

void DqnHyper::validate() const {
  const bool ok = gamma > 0 && replay_ratio > 0 && env_steps_per_batch > 0 && tau > 0 &&
                  target_interval > 0 && learning_rate > 0 && clip_norm > 0 &&
                  epsilon_start > 0 && epsilon_decay > 0 && epsilon_min > 0 &&
                  replay_capacity > 0 && batch_size > 0 && budget_per_level > 0 &&
                  win_window > 0 && win_gate > 0 && reward_scale > 0 && hidden > 0;
  if (!ok) throw std::invalid_argument("DQN hyperparameters must all be positive");
  if (epsilon_min > epsilon_start)
    throw std::invalid_argument("epsilon_min must not exceed epsilon_start");
}

namespace {

class DqnLearner {
 public:
  DqnLearner(const DqnHyper& h, std::vector<int> cards, nn::Mlp net)
      : h_(h), cards_(std::move(cards)), online_(std::move(net)), target_(online_),
        adam_(online_, {.learning_rate = h.learning_rate, .clip_norm = h.clip_norm}) {
    offsets_.resize(cards_.size());
    std::exclusive_scan(cards_.begin(), cards_.end(), offsets_.begin(), 0);
  }

  nn::Mlp& online() { return online_; }
  const nn::Mlp& target() const { return target_; }
  void soft_update() { online_.soft_update_into(target_, h_.tau); }

  void learn(const ReplayBuffer& buffer, std::mt19937_64& gen) {
    const auto batch = buffer.sample(h_.batch_size, gen);
    const Eigen::Index n = static_cast<Eigen::Index>(h_.batch_size);
    const nn::ForwardTrace trace = online_.forward_batch(batch.obs);
    const Eigen::MatrixXd next_q = target_.output_batch(batch.next_obs);
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(trace.output().rows(), n);
    const double k_count = static_cast<double>(cards_.size());
    const double norm = 1.0 / (static_cast<double>(n) * k_count);
    for (Eigen::Index b = 0; b < n; ++b) {
      double bootstrap = 0.0;
      if (!batch.done[static_cast<std::size_t>(b)]) {
        for (std::size_t k = 0; k < cards_.size(); ++k)
          bootstrap += next_q.col(b).segment(offsets_[k], cards_[k]).maxCoeff();
        bootstrap /= k_count;
      }
      const double y = batch.reward[static_cast<std::size_t>(b)] * h_.reward_scale +
                       h_.gamma * bootstrap;
      for (std::size_t k = 0; k < cards_.size(); ++k) {
        const Eigen::Index idx = offsets_[k] + batch.action(static_cast<Eigen::Index>(k), b);
        const double diff = trace.output()(idx, b) - y;
        // Huber loss with delta 1.
        d_out(idx, b) = std::clamp(diff, -1.0, 1.0) * norm;
      }
    }
    adam_.apply(online_, online_.backward(trace, d_out).params);
  }

 private:
  const DqnHyper& h_;
  std::vector<int> cards_;
  std::vector<Eigen::Index> offsets_;
  nn::Mlp online_;
  nn::Mlp target_;
  nn::AdamState adam_;
};

}  // namespace

TrainingResult train_dqn(const env::ScenarioConfig& config, const DqnHyper& h,
                         const Lesson& lesson, std::uint64_t seed, const ProgressFn& progress) {
  h.validate();
  if (lesson.levels.empty()) throw std::invalid_argument("lesson has no levels");
  const std::vector<int> cards = env::action_cardinalities(config);
  const int out_dim = std::accumulate(cards.begin(), cards.end(), 0);
  const std::size_t obs_dim = env::observation_size(config);

  std::mt19937_64 gen(derive_seed({seed, 0xD0}));
  DqnLearner learner(h, cards,
                     nn::Mlp({obs_dim, h.hidden, h.hidden, static_cast<std::size_t>(out_dim)},
                             nn::Activation::ReLU, derive_seed({seed, 0xD1})));
  ReplayBuffer buffer(h.replay_capacity, obs_dim, cards.size());

  TrainingResult result;
  result.policy.algorithm = Algorithm::DQN;
  result.policy.curriculum = lesson.name;
  result.policy.cardinalities = cards;
  result.policy.seed = seed;

  WinWindow window(h.win_window);
  double epsilon = h.epsilon_start;
  int level = 0;
  std::size_t level_steps = 0;
  std::size_t level_episodes = 0;
  std::size_t pending = 0;
  std::size_t episode = 0;
  double best_rate = -1.0;
  nn::Mlp best = learner.online();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto close_level = [&](bool passed) {
    result.policy.history.push_back(
        {level, level_episodes, level_steps, window.rate(), passed});
  };

  for (;; ++episode) {
    const auto& lvl = lesson.levels[static_cast<std::size_t>(level)];
    auto [state, obs] = env::reset(config, derive_seed({seed, 0xD2, episode}), lvl);
    double ret = 0.0;
    bool out_of_budget = false;
    while (!state.done) {
      env::MultiDiscreteAction action;
      if (unit(gen) < epsilon) {
        action.resize(cards.size());
        for (std::size_t k = 0; k < cards.size(); ++k)
          action[k] = std::uniform_int_distribution<int>(0, cards[k] - 1)(gen);
      } else {
        action = greedy_segments(learner.online().output(obs), cards);
      }
      env::StepResult sr = env::step(config, state, action);
      buffer.push(obs, action, sr.reward, sr.obs, sr.done);
      ret += sr.reward;
      obs = std::move(sr.obs);
      ++result.env_steps;
      ++level_steps;

      if (++pending == h.env_steps_per_batch) {
        pending = 0;
        ++result.env_batches;
        for (std::size_t r = 0; r < h.replay_ratio; ++r) {
          learner.learn(buffer, gen);
          ++result.learner_updates;
        }
      }
      if (result.env_steps % h.target_interval == 0) learner.soft_update();
      if (level_steps >= h.budget_per_level) {
        out_of_budget = true;
        break;
      }
    }
    if (out_of_budget && !state.done) {
      close_level(false);
      break;
    }

    const bool win = state.property_log.win == env::Outcome::Win;
    ++level_episodes;
    EpisodeLogEntry entry{episode, level, ret, win, epsilon, result.env_steps};
    result.log.push_back(entry);
    window.push(win);
    epsilon = decay_epsilon(epsilon, h);
    if (window.full() && window.rate() > best_rate) {
      best_rate = window.rate();
      best = learner.online();
    }
    const bool keep_going = !progress || progress(entry);

    const CurriculumDecision d =
        advance_curriculum(window, lesson.levels.size(), level, h.win_gate);
    if (d.complete) {
      close_level(true);
      result.success = true;
      break;
    }
    if (d.advanced) {
      close_level(true);
      level = d.level;
      level_steps = 0;
      level_episodes = 0;
      window.clear();
      best_rate = -1.0;
    }
    if (out_of_budget && !d.advanced) {
      close_level(false);
      break;
    }
    if (!keep_going) {
      close_level(false);
      break;
    }
  }

  result.policy.net = result.success ? learner.online() : best;
  return result;
}

}  // namespace advprobe::train
