#include "advprobe/nn/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace advprobe::nn {

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& m) {
  switch (act) {
    case Activation::ReLU: m = m.cwiseMax(0.0); break;
    case Activation::Tanh: m = m.array().tanh().matrix(); break;
    case Activation::Identity: break;
  }
}

// Multiplies grad in place by the activation derivative at pre / post.
void apply_derivative(Activation act, const Eigen::MatrixXd& pre,
                      const Eigen::MatrixXd& post, Eigen::MatrixXd& grad) {
  switch (act) {
    case Activation::ReLU:
      // Subgradient at exactly 0 is 0.
      grad = (pre.array() > 0.0).select(grad, 0.0);
      break;
    case Activation::Tanh:
      grad.array() *= (1.0 - post.array().square());
      break;
    case Activation::Identity: break;
  }
}

}  // namespace

double ParamGrads::norm() const {
  double sq = 0.0;
  for (const auto& l : layers) sq += l.weight.squaredNorm() + l.bias.squaredNorm();
  return std::sqrt(sq);
}

void ParamGrads::scale(double factor) {
  for (auto& l : layers) {
    l.weight *= factor;
    l.bias *= factor;
  }
}

void ParamGrads::add(const ParamGrads& other) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
}

Mlp::Mlp(std::vector<std::size_t> dims, Activation hidden, std::uint64_t seed)
    : dims_(std::move(dims)), activation_(hidden) {
  check_dims();
  std::mt19937_64 gen(seed);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const double k = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
    std::uniform_real_distribution<double> dist(-k, k);
    DenseLayer layer{Eigen::MatrixXd(dims_[l + 1], dims_[l]), Eigen::VectorXd(dims_[l + 1])};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(gen);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = dist(gen);
    layers_.push_back(std::move(layer));
  }
}

Mlp Mlp::zeros(std::vector<std::size_t> dims, Activation hidden) {
  Mlp net;
  net.dims_ = std::move(dims);
  net.activation_ = hidden;
  net.check_dims();
  for (std::size_t l = 0; l + 1 < net.dims_.size(); ++l)
    net.layers_.push_back({Eigen::MatrixXd::Zero(net.dims_[l + 1], net.dims_[l]),
                           Eigen::VectorXd::Zero(net.dims_[l + 1])});
  return net;
}

void Mlp::check_dims() const {
  if (dims_.size() < 2) throw std::invalid_argument("an MLP needs at least two layer sizes");
  for (std::size_t d : dims_)
    if (d == 0) throw std::invalid_argument("layer sizes must be positive");
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

ForwardTrace Mlp::forward(std::span<const double> x) const {
  if (x.size() != input_dim())
    throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                " entries, network expects " + std::to_string(input_dim()));
  return forward_batch(Eigen::Map<const Eigen::VectorXd>(x.data(),
                                                         static_cast<Eigen::Index>(x.size())));
}

ForwardTrace Mlp::forward_batch(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim())
    throw std::invalid_argument("input batch has " + std::to_string(x.rows()) +
                                " rows, network expects " + std::to_string(input_dim()));
  ForwardTrace t;
  t.input = x;
  t.pre.reserve(layers_.size());
  t.post.reserve(layers_.size());
  const Eigen::MatrixXd* h = &t.input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * *h;
    z.colwise() += layers_[l].bias;
    Eigen::MatrixXd a = z;
    if (l + 1 < layers_.size()) apply_activation(activation_, a);
    t.pre.push_back(std::move(z));
    t.post.push_back(std::move(a));
    h = &t.post.back();
  }
  return t;
}

Eigen::VectorXd Mlp::output(std::span<const double> x) const {
  if (x.size() != input_dim())
    throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                " entries, network expects " + std::to_string(input_dim()));
  Eigen::VectorXd h =
      Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = layers_[l].weight * h + layers_[l].bias;
    if (l + 1 < layers_.size()) {
      Eigen::MatrixXd zm = z;
      apply_activation(activation_, zm);
      z = zm;
    }
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd Mlp::output_batch(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim())
    throw std::invalid_argument("input batch has wrong row count");
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * h;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) apply_activation(activation_, z);
    h = std::move(z);
  }
  return h;
}

BackwardResult Mlp::backward(const ForwardTrace& trace,
                             const Eigen::MatrixXd& d_output) const {
  if (d_output.rows() != trace.output().rows() || d_output.cols() != trace.output().cols())
    throw std::invalid_argument("output gradient shape does not match the trace");
  BackwardResult result;
  result.params.layers.resize(layers_.size());
  Eigen::MatrixXd grad = d_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (i + 1 < layers_.size()) apply_derivative(activation_, trace.pre[i], trace.post[i], grad);
    const Eigen::MatrixXd& below = i == 0 ? trace.input : trace.post[i - 1];
    result.params.layers[i].weight = grad * below.transpose();
    result.params.layers[i].bias = grad.rowwise().sum();
    grad = layers_[i].weight.transpose() * grad;
  }
  result.input = std::move(grad);
  return result;
}

void Mlp::soft_update_into(Mlp& target, double tau) const {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    target.layers_[l].weight = tau * layers_[l].weight + (1.0 - tau) * target.layers_[l].weight;
    target.layers_[l].bias = tau * layers_[l].bias + (1.0 - tau) * target.layers_[l].bias;
  }
}

double Mlp::parameter_distance(const Mlp& other) const {
  double sq = 0.0;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    sq += (layers_[l].weight - other.layers_[l].weight).squaredNorm() +
          (layers_[l].bias - other.layers_[l].bias).squaredNorm();
  return std::sqrt(sq);
}

ParamGrads zeros_like(const Mlp& net) {
  ParamGrads g;
  for (const auto& l : net.layers())
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  return g;
}

}  // namespace advprobe::nn
