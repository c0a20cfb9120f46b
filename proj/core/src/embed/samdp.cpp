#include "advprobe/embed/samdp.hpp"

#include <map>
#include <ostream>
#include <stdexcept>

#include "common/json_io.hpp"

namespace advprobe::embed {

using detail::json;

std::vector<TransitionArrow> cluster_transitions(std::span<const int> labels,
                                                 const data::Dataset& dataset) {
  if (labels.size() != dataset.records.size())
    throw std::invalid_argument("cluster labels are not aligned with the dataset records");
  std::map<std::pair<int, int>, std::size_t> counts;
  std::map<int, std::size_t> leaving;
  for (const auto& ep : dataset.episodes) {
    if (ep.record_count == 0) continue;
    const std::size_t last = ep.first_record + ep.record_count - 1;
    for (std::size_t r = ep.first_record; r < last; ++r) {
      const int c = labels[r];
      const int c2 = labels[r + 1];
      if (c == c2) continue;
      ++counts[{c, c2}];
      ++leaving[c];
    }
    if (ep.complete) ++leaving[labels[last]];
  }
  std::vector<TransitionArrow> arrows;
  for (const auto& [key, n] : counts)
    arrows.push_back({key.first, key.second, n,
                      static_cast<double>(n) / static_cast<double>(leaving[key.first])});
  return arrows;
}

std::vector<EmbeddingPoint> color_by_impact(std::vector<EmbeddingPoint> points,
                                            std::span<const impact::ImpactSample> samples,
                                            impact::Property property,
                                            const impact::Metric& metric) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const auto& s : samples) {
    auto& [sum, n] = acc[s.point.record];
    sum += s.impact(property, metric);
    ++n;
  }
  for (auto& p : points) {
    const auto it = acc.find(p.record);
    if (it == acc.end())
      p.color.reset();
    else
      p.color = it->second.first / static_cast<double>(it->second.second);
  }
  return points;
}

void write_embedding(std::ostream& out, const EmbeddingInfo& info,
                     const std::vector<EmbeddingPoint>& points) {
  detail::write_line(out, json{{"format", kEmbeddingFormat},
                               {"version", kEmbeddingVersion},
                               {"policy_tag", info.policy_tag},
                               {"dataset", info.dataset_hash},
                               {"perplexity", info.perplexity},
                               {"critical_distance", info.critical_distance},
                               {"seed", info.seed},
                               {"property", info.property},
                               {"metric", info.metric},
                               {"unique_rows", info.unique_rows},
                               {"count", points.size()}});
  for (const auto& p : points) {
    json j{{"record", p.record}, {"x", p.x}, {"y", p.y}, {"cluster", p.cluster},
           {"color", nullptr}};
    if (p.color) j["color"] = *p.color;
    detail::write_line(out, j);
  }
}

void write_transitions(std::ostream& out, const std::vector<TransitionArrow>& arrows) {
  detail::write_line(out, json{{"format", kTransitionFormat},
                               {"version", kEmbeddingVersion},
                               {"count", arrows.size()}});
  for (const auto& a : arrows)
    detail::write_line(out, json{{"from", a.from},
                                 {"to", a.to},
                                 {"count", a.count},
                                 {"probability", a.probability}});
}

}  // namespace advprobe::embed
