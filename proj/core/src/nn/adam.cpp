#include "advprobe/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace advprobe::nn {

double clip_grad_norm(ParamGrads& grads, double max_norm) {
  const double norm = grads.norm();
  if (max_norm > 0.0 && norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

AdamState::AdamState(const Mlp& net, AdamConfig config)
    : config_(config), m_(zeros_like(net)), v_(zeros_like(net)) {}

double AdamState::apply(Mlp& net, ParamGrads grads) {
  if (grads.layers.size() != net.layers().size() || m_.layers.size() != grads.layers.size())
    throw std::invalid_argument("gradient layout does not match the network");
  const double norm = clip_grad_norm(grads, config_.clip_norm);
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    auto& layer = net.layers()[l];
    update(layer.weight, grads.layers[l].weight, m_.layers[l].weight, v_.layers[l].weight);
    update(layer.bias, grads.layers[l].bias, m_.layers[l].bias, v_.layers[l].bias);
  }
  return norm;
}

}  // namespace advprobe::nn
