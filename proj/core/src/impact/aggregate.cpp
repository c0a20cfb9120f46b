#include "advprobe/impact/aggregate.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "advprobe/attack/feasible.hpp"
#include "common/json_io.hpp"

namespace advprobe::impact {

using detail::json;

const char* group_by_name(GroupBy g) {
  switch (g) {
    case GroupBy::Index: return "index";
    case GroupBy::Step: return "step";
    case GroupBy::IndexStep: return "index_step";
  }
  return "";
}

GroupBy parse_group_by(const std::string& name) {
  for (GroupBy g : {GroupBy::Index, GroupBy::Step, GroupBy::IndexStep})
    if (name == group_by_name(g)) return g;
  throw ConfigError("unknown grouping '" + name + "'");
}

std::vector<ImpactAggregate> aggregate_impact(std::span<const ImpactSample> samples,
                                              GroupBy group_by, Property property,
                                              const Metric& metric, bool ranked) {
  std::map<GroupKey, std::pair<double, std::size_t>> acc;
  for (const auto& s : samples) {
    GroupKey key;
    if (group_by != GroupBy::Step) key.index = s.point.index;
    if (group_by != GroupBy::Index) key.step = s.step;
    auto& [sum, n] = acc[key];
    sum += s.impact(property, metric);
    ++n;
  }
  std::vector<ImpactAggregate> rows;
  for (const auto& [key, v] : acc)
    rows.push_back({key, v.first / static_cast<double>(v.second), v.second});
  if (ranked)
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.mean > b.mean; });
  return rows;
}

void write_aggregate_table(std::ostream& out, const AggregateTableInfo& info,
                           const env::ScenarioConfig& config,
                           const std::vector<ImpactAggregate>& rows) {
  detail::write_line(out, json{{"format", kAggregateFormat},
                               {"version", kAggregateVersion},
                               {"group_by", group_by_name(info.group_by)},
                               {"property", property_name(info.property)},
                               {"metric", metric_name(info.metric)},
                               {"order", info.ranked ? "ranked" : "key"},
                               {"count", rows.size()}});
  std::size_t rank = 0;
  for (const auto& r : rows) {
    json j{{"rank", rank++}, {"mean", r.mean}, {"count", r.count}};
    if (r.key.index) {
      j["index"] = *r.key.index;
      j["slot"] = attack::slot_name(config, *r.key.index);
    }
    if (r.key.step) j["step"] = *r.key.step;
    detail::write_line(out, j);
  }
}

}  // namespace advprobe::impact
