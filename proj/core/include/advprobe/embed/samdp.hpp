#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advprobe/data/dataset.hpp"
#include "advprobe/impact/campaign.hpp"

namespace advprobe::embed {

struct EmbeddingPoint {
  std::size_t record = 0;
  double x = 0.0;
  double y = 0.0;
  int cluster = 0;
  /// Empty for records no sample attacked.
  std::optional<double> color;

  friend bool operator==(const EmbeddingPoint&, const EmbeddingPoint&) = default;
};

struct TransitionArrow {
  int from = 0;
  int to = 0;
  std::size_t count = 0;
  /// count / (cross-cluster transitions leaving `from` + episodes ending there).
  double probability = 0.0;

  friend bool operator==(const TransitionArrow&, const TransitionArrow&) = default;
};

/// Arrows between distinct clusters of consecutive records of an episode,
/// sorted by (from, to). labels[r] belongs to dataset.records[r]; throws
/// std::invalid_argument otherwise.
std::vector<TransitionArrow> cluster_transitions(std::span<const int> labels,
                                                 const data::Dataset& dataset);

/// Sets each point's color to the mean impact of the samples attacking its
/// record, or leaves it empty.
std::vector<EmbeddingPoint> color_by_impact(std::vector<EmbeddingPoint> points,
                                            std::span<const impact::ImpactSample> samples,
                                            impact::Property property,
                                            const impact::Metric& metric);

inline constexpr const char* kEmbeddingFormat = "advprobe.embedding";
inline constexpr const char* kTransitionFormat = "advprobe.transitions";
inline constexpr int kEmbeddingVersion = 1;

struct EmbeddingInfo {
  std::string policy_tag;
  std::string dataset_hash;
  double perplexity = 0.0;
  double critical_distance = 0.0;
  std::uint64_t seed = 0;
  std::string property;
  std::string metric;
  std::size_t unique_rows = 0;
};

void write_embedding(std::ostream& out, const EmbeddingInfo& info,
                     const std::vector<EmbeddingPoint>& points);
void write_transitions(std::ostream& out, const std::vector<TransitionArrow>& arrows);

}  // namespace advprobe::embed
