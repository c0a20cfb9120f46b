#include "advprobe/nn/loss.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace advprobe::nn {

std::size_t Segments::total() const {
  return static_cast<std::size_t>(std::accumulate(cardinalities.begin(), cardinalities.end(), 0));
}

std::size_t Segments::offset(std::size_t k) const {
  return static_cast<std::size_t>(
      std::accumulate(cardinalities.begin(), cardinalities.begin() + static_cast<long>(k), 0));
}

Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

namespace {

void check_segments(const Segments& seg, const Eigen::VectorXd& out) {
  if (seg.total() != static_cast<std::size_t>(out.size()))
    throw std::invalid_argument("segment cardinalities sum to " + std::to_string(seg.total()) +
                                " but output has " + std::to_string(out.size()) + " entries");
}

void check_target(const Segments& seg, const std::vector<int>& target) {
  if (target.size() != seg.cardinalities.size())
    throw std::invalid_argument("target arity does not match the number of segments");
  for (std::size_t k = 0; k < target.size(); ++k)
    if (target[k] < 0 || target[k] >= seg.cardinalities[k])
      throw std::out_of_range("target sub-action " + std::to_string(target[k]) +
                              " undefined for segment " + std::to_string(k));
}

struct LossVisitor {
  const Eigen::VectorXd& out;
  Eigen::VectorXd& grad;

  double operator()(const CrossEntropyToTarget& l) const {
    check_segments(l.segments, out);
    check_target(l.segments, l.target);
    double loss = 0.0;
    grad = Eigen::VectorXd::Zero(out.size());
    for (std::size_t k = 0; k < l.target.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(l.segments.offset(k));
      const auto n = static_cast<Eigen::Index>(l.segments.cardinalities[k]);
      const Eigen::VectorXd lp = log_softmax(out.segment(off, n));
      loss -= lp(l.target[k]);
      Eigen::VectorXd g = lp.array().exp();
      g(l.target[k]) -= 1.0;
      grad.segment(off, n) = g;
    }
    return loss;
  }

  double operator()(const NegativeTargetOutput& l) const {
    check_segments(l.segments, out);
    check_target(l.segments, l.target);
    double loss = 0.0;
    grad = Eigen::VectorXd::Zero(out.size());
    for (std::size_t k = 0; k < l.target.size(); ++k) {
      const auto idx = static_cast<Eigen::Index>(l.segments.offset(k)) + l.target[k];
      loss -= out(idx);
      grad(idx) = -1.0;
    }
    return loss;
  }

  double operator()(const GreedyOutput& l) const {
    check_segments(l.segments, out);
    double loss = 0.0;
    grad = Eigen::VectorXd::Zero(out.size());
    for (std::size_t k = 0; k < l.segments.cardinalities.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(l.segments.offset(k));
      const auto n = static_cast<Eigen::Index>(l.segments.cardinalities[k]);
      // Lowest index wins ties, matching greedy action selection.
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < n; ++i)
        if (out(off + i) > out(off + best)) best = i;
      loss += out(off + best);
      grad(off + best) = 1.0;
    }
    return loss;
  }

  double operator()(const SquaredError& l) const {
    if (l.y.size() != out.size()) throw std::invalid_argument("target vector size mismatch");
    const Eigen::VectorXd diff = out - l.y;
    grad = 2.0 * diff;
    return diff.squaredNorm();
  }
};

}  // namespace

double loss_and_output_grad(const LossSpec& loss, const Eigen::VectorXd& output,
                            Eigen::VectorXd& d_output) {
  return std::visit(LossVisitor{output, d_output}, loss);
}

double evaluate_loss(const Mlp& net, std::span<const double> x, const LossSpec& loss) {
  Eigen::VectorXd g;
  return loss_and_output_grad(loss, net.output(x), g);
}

Eigen::VectorXd input_gradient(const Mlp& net, std::span<const double> x,
                               const LossSpec& loss) {
  const ForwardTrace trace = net.forward(x);
  Eigen::VectorXd d_out;
  loss_and_output_grad(loss, trace.output().col(0), d_out);
  return net.backward(trace, d_out).input.col(0);
}

}  // namespace advprobe::nn
