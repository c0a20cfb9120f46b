#pragma once

#include <Eigen/Dense>

#include <span>
#include <variant>
#include <vector>

#include "advprobe/nn/mlp.hpp"

namespace advprobe::nn {

/// Splits a flat output vector into one segment per sub-action.
struct Segments {
  std::vector<int> cardinalities;

  std::size_t total() const;
  std::size_t offset(std::size_t k) const;
};

/// Sum over segments of cross-entropy(softmax(segment), target[k]).
struct CrossEntropyToTarget {
  Segments segments;
  std::vector<int> target;
};

/// -sum_k out[segment k][target[k]] (negative Q of the target action).
struct NegativeTargetOutput {
  Segments segments;
  std::vector<int> target;
};

/// sum_k max(out[segment k]): the output value of the greedy action.
struct GreedyOutput {
  Segments segments;
};

/// ||out - y||^2.
struct SquaredError {
  Eigen::VectorXd y;
};

using LossSpec =
    std::variant<CrossEntropyToTarget, NegativeTargetOutput, GreedyOutput, SquaredError>;

/// Loss value and d loss / d output for one output vector. Throws
/// std::invalid_argument on shape mismatch and std::out_of_range when a
/// target index does not exist in its segment.
double loss_and_output_grad(const LossSpec& loss, const Eigen::VectorXd& output,
                            Eigen::VectorXd& d_output);

double evaluate_loss(const Mlp& net, std::span<const double> x, const LossSpec& loss);

/// Exact gradient of the scalar loss with respect to the network input.
Eigen::VectorXd input_gradient(const Mlp& net, std::span<const double> x,
                               const LossSpec& loss);

/// Numerically stable log-softmax of one segment.
Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits);

}  // namespace advprobe::nn
