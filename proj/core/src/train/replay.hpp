#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace advprobe::train {

/// Fixed-capacity ring buffer of transitions. Observations are stored as
/// float, which is exact for the small-integer observation encoding.
class ReplayBuffer {
 public:
  struct Batch {
    Eigen::MatrixXd obs;
    Eigen::MatrixXd next_obs;
    Eigen::MatrixXi action;
    std::vector<double> reward;
    std::vector<bool> done;
  };

  ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t action_dim)
      : capacity_(capacity), obs_dim_(obs_dim), action_dim_(action_dim),
        obs_(capacity * obs_dim), next_obs_(capacity * obs_dim),
        action_(capacity * action_dim), reward_(capacity), done_(capacity) {}

  std::size_t size() const { return size_; }

  void push(std::span<const double> obs, std::span<const int> action, double reward,
            std::span<const double> next_obs, bool done) {
    const std::size_t slot = head_;
    for (std::size_t i = 0; i < obs_dim_; ++i) {
      obs_[slot * obs_dim_ + i] = static_cast<float>(obs[i]);
      next_obs_[slot * obs_dim_ + i] = static_cast<float>(next_obs[i]);
    }
    for (std::size_t k = 0; k < action_dim_; ++k) action_[slot * action_dim_ + k] = action[k];
    reward_[slot] = reward;
    done_[slot] = done;
    head_ = (head_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
  }

  /// Uniform sampling with replacement.
  Batch sample(std::size_t n, std::mt19937_64& gen) const {
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    Batch b;
    const auto cols = static_cast<Eigen::Index>(n);
    b.obs.resize(static_cast<Eigen::Index>(obs_dim_), cols);
    b.next_obs.resize(static_cast<Eigen::Index>(obs_dim_), cols);
    b.action.resize(static_cast<Eigen::Index>(action_dim_), cols);
    b.reward.resize(n);
    b.done.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t s = pick(gen);
      for (std::size_t i = 0; i < obs_dim_; ++i) {
        b.obs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = obs_[s * obs_dim_ + i];
        b.next_obs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            next_obs_[s * obs_dim_ + i];
      }
      for (std::size_t k = 0; k < action_dim_; ++k)
        b.action(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
            action_[s * action_dim_ + k];
      b.reward[c] = reward_[s];
      b.done[c] = done_[s];
    }
    return b;
  }

 private:
  std::size_t capacity_, obs_dim_, action_dim_;
  std::vector<float> obs_, next_obs_;
  std::vector<int> action_;
  std::vector<double> reward_;
  std::vector<bool> done_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

}  // namespace advprobe::train
