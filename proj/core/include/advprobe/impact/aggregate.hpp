#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advprobe/impact/campaign.hpp"

namespace advprobe::impact {

enum class GroupBy { Index, Step, IndexStep };

const char* group_by_name(GroupBy g);
GroupBy parse_group_by(const std::string& name);

struct GroupKey {
  std::optional<std::size_t> index;
  std::optional<int> step;

  friend bool operator==(const GroupKey&, const GroupKey&) = default;
  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct ImpactAggregate {
  GroupKey key;
  double mean = 0.0;
  std::size_t count = 0;
};

/// Mean per-sample impact per group, sorted by descending mean with ties in
/// ascending key order. With `ranked` false the result is in key order.
std::vector<ImpactAggregate> aggregate_impact(std::span<const ImpactSample> samples,
                                              GroupBy group_by, Property property,
                                              const Metric& metric, bool ranked = true);

inline constexpr const char* kAggregateFormat = "advprobe.impact_aggregate";
inline constexpr int kAggregateVersion = 1;

struct AggregateTableInfo {
  GroupBy group_by = GroupBy::Index;
  Property property = Property::RedCount;
  MetricKind metric = MetricKind::Difference;
  bool ranked = true;
};

void write_aggregate_table(std::ostream& out, const AggregateTableInfo& info,
                           const env::ScenarioConfig& config,
                           const std::vector<ImpactAggregate>& rows);

}  // namespace advprobe::impact
