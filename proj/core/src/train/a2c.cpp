#include "advprobe/train/a2c.hpp"

#include <numeric>
#include <random>
#include <stdexcept>

#include "advprobe/common/rng.hpp"
#include "advprobe/env/cyberstrike.hpp"
#include "advprobe/nn/adam.hpp"

namespace advprobe::train {

void A2cHyper::validate() const {
  const bool ok = gamma > 0 && actor_learning_rate > 0 && critic_learning_rate > 0 &&
                  value_coef > 0 && entropy_coef > 0 && clip_norm > 0 && segment_length > 0 &&
                  budget_per_level > 0 && win_window > 0 && win_gate > 0 && reward_scale > 0 &&
                  hidden > 0;
  if (!ok) throw std::invalid_argument("A2C hyperparameters must all be positive");
}

double categorical_entropy(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const Eigen::VectorXd lp = nn::log_softmax(logits);
  return -(lp.array().exp() * lp.array()).sum();
}

double actor_logit_grad(const Eigen::Ref<const Eigen::VectorXd>& logits,
                        const nn::Segments& segments, const env::MultiDiscreteAction& action,
                        double advantage, double entropy_coef, Eigen::Ref<Eigen::VectorXd> grad) {
  double entropy = 0.0;
  for (std::size_t k = 0; k < segments.cardinalities.size(); ++k) {
    const auto off = static_cast<Eigen::Index>(segments.offset(k));
    const auto n = static_cast<Eigen::Index>(segments.cardinalities[k]);
    const Eigen::VectorXd lp = nn::log_softmax(logits.segment(off, n));
    const Eigen::ArrayXd p = lp.array().exp();
    const double h = -(p * lp.array()).sum();
    entropy += h;
    // -A * d log pi(a) / dz = A * (p - onehot(a))
    Eigen::VectorXd g = advantage * p.matrix();
    g(action[k]) -= advantage;
    // -beta * dH/dz = beta * p * (log p + H)
    g.array() += entropy_coef * p * (lp.array() + h);
    grad.segment(off, n) = g;
  }
  return entropy;
}

namespace {

struct Transition {
  env::ObsVector obs;
  env::MultiDiscreteAction action;
  double reward;
  bool done;
};

}  // namespace

TrainingResult train_a2c(const env::ScenarioConfig& config, const A2cHyper& h,
                         const Lesson& lesson, std::uint64_t seed, const ProgressFn& progress) {
  h.validate();
  if (lesson.levels.empty()) throw std::invalid_argument("lesson has no levels");
  const std::vector<int> cards = env::action_cardinalities(config);
  const nn::Segments segments{cards};
  const auto out_dim = segments.total();
  const std::size_t obs_dim = env::observation_size(config);

  std::mt19937_64 gen(derive_seed({seed, 0xA0}));
  nn::Mlp actor({obs_dim, h.hidden, h.hidden, out_dim}, nn::Activation::ReLU,
                derive_seed({seed, 0xA1}));
  nn::Mlp critic({obs_dim, h.hidden, h.hidden, 1}, nn::Activation::Tanh,
                 derive_seed({seed, 0xA2}));
  nn::AdamState actor_opt(actor, {.learning_rate = h.actor_learning_rate, .clip_norm = h.clip_norm});
  nn::AdamState critic_opt(critic,
                           {.learning_rate = h.critic_learning_rate, .clip_norm = h.clip_norm});

  TrainingResult result;
  result.policy.algorithm = Algorithm::A2C;
  result.policy.curriculum = lesson.name;
  result.policy.cardinalities = cards;
  result.policy.seed = seed;

  std::vector<Transition> segment;
  segment.reserve(h.segment_length);

  auto update = [&](const env::ObsVector& last_obs, bool last_done) {
    const auto n = static_cast<Eigen::Index>(segment.size());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(obs_dim), n);
    for (Eigen::Index t = 0; t < n; ++t)
      x.col(t) = Eigen::Map<const Eigen::VectorXd>(segment[static_cast<std::size_t>(t)].obs.data(),
                                                   static_cast<Eigen::Index>(obs_dim));
    const nn::ForwardTrace critic_trace = critic.forward_batch(x);
    const nn::ForwardTrace actor_trace = actor.forward_batch(x);

    double ret = last_done ? 0.0 : critic.output(last_obs)(0);
    Eigen::VectorXd returns(n);
    for (Eigen::Index t = n - 1; t >= 0; --t) {
      const Transition& tr = segment[static_cast<std::size_t>(t)];
      if (tr.done) ret = 0.0;
      ret = tr.reward * h.reward_scale + h.gamma * ret;
      returns(t) = ret;
    }
    const Eigen::VectorXd values = critic_trace.output().row(0).transpose();
    const Eigen::VectorXd adv = returns - values;

    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd d_actor(static_cast<Eigen::Index>(out_dim), n);
    for (Eigen::Index t = 0; t < n; ++t) {
      actor_logit_grad(actor_trace.output().col(t), segments,
                       segment[static_cast<std::size_t>(t)].action, adv(t), h.entropy_coef,
                       d_actor.col(t));
    }
    d_actor *= inv_n;
    // value_coef * mean (R - V)^2
    const Eigen::MatrixXd d_critic = (2.0 * h.value_coef * inv_n) * (values - returns).transpose();
    actor_opt.apply(actor, actor.backward(actor_trace, d_actor).params);
    critic_opt.apply(critic, critic.backward(critic_trace, d_critic).params);
    ++result.learner_updates;
    segment.clear();
  };

  WinWindow window(h.win_window);
  int level = 0;
  std::size_t level_steps = 0;
  std::size_t level_episodes = 0;
  double best_rate = -1.0;
  nn::Mlp best = actor;

  auto close_level = [&](bool passed) {
    result.policy.history.push_back({level, level_episodes, level_steps, window.rate(), passed});
  };

  for (std::size_t episode = 0;; ++episode) {
    const auto& lvl = lesson.levels[static_cast<std::size_t>(level)];
    auto [state, obs] = env::reset(config, derive_seed({seed, 0xA3, episode}), lvl);
    double ret = 0.0;
    bool out_of_budget = false;
    while (!state.done) {
      const Eigen::VectorXd logits = actor.output(obs);
      env::MultiDiscreteAction action(cards.size());
      for (std::size_t k = 0; k < cards.size(); ++k) {
        const Eigen::VectorXd p =
            nn::log_softmax(logits.segment(static_cast<Eigen::Index>(segments.offset(k)), cards[k]))
                .array()
                .exp();
        std::discrete_distribution<int> dist(p.data(), p.data() + p.size());
        action[k] = dist(gen);
      }
      env::StepResult sr = env::step(config, state, action);
      segment.push_back({std::move(obs), action, sr.reward, sr.done});
      ret += sr.reward;
      obs = std::move(sr.obs);
      ++result.env_steps;
      ++level_steps;
      if (segment.size() == h.segment_length) update(obs, sr.done);
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
    EpisodeLogEntry entry{episode, level, ret, win, std::nullopt, result.env_steps};
    result.log.push_back(entry);
    window.push(win);
    if (window.full() && window.rate() > best_rate) {
      best_rate = window.rate();
      best = actor;
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
      // Segments never straddle a level change.
      if (!segment.empty()) update(obs, true);
    }
    if ((out_of_budget && !d.advanced) || !keep_going) {
      close_level(false);
      break;
    }
  }

  result.policy.net = result.success ? actor : best;
  return result;
}

}  // namespace advprobe::train
