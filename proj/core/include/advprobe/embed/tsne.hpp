#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace advprobe::embed {

struct TsneOptions {
  double perplexity = 132.0;
  int iterations = 1000;
  int exaggeration_iterations = 250;
  double exaggeration = 12.0;
  double learning_rate = 200.0;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  int momentum_switch = 250;
  /// Bandwidth search stops once |perplexity - target| is below this.
  double perplexity_tolerance = 1e-5;
  int max_bisection_steps = 200;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct RowCalibration {
  /// Precision of the Gaussian kernel, 1 / (2 sigma^2).
  double beta = 1.0;
  double perplexity = 0.0;
  /// Conditional distribution over the other points.
  std::vector<double> p;
  int steps = 0;
};

/// Bisects beta so that exp(H(p)) matches `perplexity`, given squared
/// distances to every other point.
RowCalibration calibrate_row(std::span<const double> sq_distances, double perplexity,
                             double tolerance = 1e-5, int max_steps = 200);

/// Symmetrized joint affinities P = (P_cond + P_cond^T) / 2n of the rows of x.
/// Per-row perplexities are reported through `row_perplexity` when given.
Eigen::MatrixXd joint_affinities(const Eigen::MatrixXd& x, const TsneOptions& options,
                                 std::vector<double>* row_perplexity = nullptr);

struct TsneResult {
  /// n x 2.
  Eigen::MatrixXd coords;
  /// KL(P || Q) after each iteration, measured against the unexaggerated P.
  std::vector<double> kl;
  std::vector<double> row_perplexity;
};

/// Exact t-SNE of the rows of x. Throws std::invalid_argument unless
/// n > 3 * perplexity.
TsneResult tsne_embed(const Eigen::MatrixXd& x, const TsneOptions& options);

}  // namespace advprobe::embed
