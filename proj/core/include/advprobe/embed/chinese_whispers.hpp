#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace advprobe::embed {

struct ChineseWhispersOptions {
  double critical_distance = 15.0;
  int max_iterations = 100;
  /// Stop once fewer than this share of nodes changed label in a sweep.
  double convergence_fraction = 0.01;
  std::uint64_t seed = 0;
};

/// Label propagation on the graph linking rows of `vectors` whose Euclidean
/// distance is at most critical_distance. Labels are renumbered 0..k-1 in
/// order of first appearance. Throws std::invalid_argument for a
/// non-positive critical distance.
std::vector<int> chinese_whispers(const Eigen::MatrixXd& vectors,
                                  const ChineseWhispersOptions& options);

}  // namespace advprobe::embed
