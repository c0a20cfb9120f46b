#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace advprobe::nn {

enum class Activation { ReLU, Tanh, Identity };

inline constexpr std::size_t kDefaultHidden = 256;

/// Fully connected layer; weight is (out x in).
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weight == b.weight && a.bias == b.bias;
  }
};

/// Per-layer parameter gradients, laid out like Mlp::layers().
struct ParamGrads {
  std::vector<DenseLayer> layers;

  double norm() const;
  void scale(double factor);
  void add(const ParamGrads& other);
};

/// Activations recorded by a forward pass. Each matrix holds one column per
/// sample. pre[l] / post[l] are layer l's affine output and its activation
/// (the output layer has no activation, so post.back() == pre.back()).
struct ForwardTrace {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> post;

  const Eigen::MatrixXd& output() const { return post.back(); }
  /// Post-activation of the last hidden layer (the embedding source).
  const Eigen::MatrixXd& final_hidden() const { return post[post.size() - 2]; }
};

struct BackwardResult {
  ParamGrads params;
  /// d loss / d input, one column per sample.
  Eigen::MatrixXd input;
};

/// Dense network with a shared hidden activation and a linear output layer.
class Mlp {
 public:
  Mlp() = default;
  /// Weights and biases drawn from uniform(-k, k), k = 1 / sqrt(fan_in).
  Mlp(std::vector<std::size_t> dims, Activation hidden, std::uint64_t seed);

  /// All parameters zero.
  static Mlp zeros(std::vector<std::size_t> dims, Activation hidden);

  /// in -> 256 -> 256 -> out.
  static Mlp standard(std::size_t in, std::size_t out, Activation hidden,
                      std::uint64_t seed) {
    return Mlp({in, kDefaultHidden, kDefaultHidden, out}, hidden, seed);
  }

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  Activation activation() const noexcept { return activation_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::size_t parameter_count() const;

  /// Throws std::invalid_argument on an input-size mismatch.
  ForwardTrace forward(std::span<const double> x) const;
  ForwardTrace forward_batch(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd output(std::span<const double> x) const;
  Eigen::MatrixXd output_batch(const Eigen::MatrixXd& x) const;

  /// Backpropagates d loss / d output through a recorded trace. Parameter
  /// gradients are summed over the batch columns.
  BackwardResult backward(const ForwardTrace& trace,
                          const Eigen::MatrixXd& d_output) const;

  /// target <- tau * this + (1 - tau) * target.
  void soft_update_into(Mlp& target, double tau) const;
  /// Euclidean distance between the flattened parameter vectors.
  double parameter_distance(const Mlp& other) const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  void check_dims() const;

  std::vector<std::size_t> dims_;
  Activation activation_ = Activation::ReLU;
  std::vector<DenseLayer> layers_;
};

ParamGrads zeros_like(const Mlp& net);

}  // namespace advprobe::nn
